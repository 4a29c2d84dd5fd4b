//! The `qpp` command line: build corpora, train and apply predictors, and
//! run cross-validated evaluations.
//!
//! Exit status is 0 on success, 1 for usage errors and 2 when the data or a
//! fit is at fault.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qpp_core::eval::DEFAULT_SEED;
use qpp_core::plan::FeatureMode;
use qpp_core::regress::{Family, KernelFamily, Level, PredictorConfig, SvrParams, DEFAULT_K, DEFAULT_MIN_SAMPLES};

mod commands;
pub mod plot;

pub use plot::{emit_plot_data, write_plot_data, PlotMode, PlotSource};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "qpp",
    version,
    about = "Query-performance prediction from optimizer plan cost"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read plan documents into a corpus file.
    Ingest(IngestArgs),
    /// Generate a synthetic corpus.
    Synth(SynthArgs),
    /// Fit a predictor on a corpus and save it.
    Train(TrainArgs),
    /// Predict execution time for plan documents with a saved model.
    Predict(PredictArgs),
    /// Cross-validate a predictor on a corpus.
    Evaluate(EvaluateArgs),
    /// Per-template coefficient of variation of execution times.
    Cov(CovArgs),
    /// Summarize a saved evaluation report and list outliers.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Plan document files, read in order.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "ingested")]
    pub label: String,
    /// Timestamp recorded in the corpus header.
    #[arg(long)]
    pub created_at: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Log-spaced template clusters with alternating linear and power laws.
    Clustered,
    /// One template, time = a · cost.
    Linear,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Full generator spec as JSON; replaces the preset flags.
    #[arg(long, conflicts_with_all = ["preset", "templates", "instances", "noise", "slope", "bimodal"])]
    pub spec: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "clustered")]
    pub preset: Preset,
    #[arg(long, default_value_t = 22)]
    pub templates: usize,
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    /// Multiplicative noise half-width.
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    /// Time per unit cost for the linear preset.
    #[arg(long, default_value_t = 2.0)]
    pub slope: f64,
    /// Add a constant-cost template whose times split between 1.5 s and 150 s.
    #[arg(long)]
    pub bimodal: bool,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long)]
    pub created_at: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Ols,
    PowerLaw,
    Knn,
    Svr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Plan,
    Operator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeaturesArg {
    Cost,
    Flattened,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Linear,
    Polynomial,
    Rbf,
}

/// Predictor selection shared by `train` and `evaluate`.
#[derive(Debug, Clone, Args)]
pub struct MethodArgs {
    #[arg(long, value_enum, default_value = "knn")]
    pub method: Method,
    #[arg(long, value_enum, default_value = "plan")]
    pub level: LevelArg,
    #[arg(long, value_enum, default_value = "cost")]
    pub features: FeaturesArg,
    /// Neighbours for kNN.
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "rbf")]
    pub kernel: KernelArg,
    /// SVR box constraint.
    #[arg(long = "C", default_value_t = SvrParams::default().c)]
    pub c: f64,
    #[arg(long, default_value_t = SvrParams::default().epsilon)]
    pub epsilon: f64,
    /// Kernel width; defaults to 1 / number of features.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = SvrParams::default().degree)]
    pub degree: u32,
    #[arg(long, default_value_t = SvrParams::default().coef0)]
    pub coef0: f64,
    /// Fewest records an operator kind needs for its own model.
    #[arg(long, default_value_t = DEFAULT_MIN_SAMPLES)]
    pub min_samples: usize,
}

impl MethodArgs {
    pub fn predictor_config(&self) -> PredictorConfig {
        let family = match self.method {
            Method::Ols => Family::Ols,
            Method::PowerLaw => Family::PowerLaw,
            Method::Knn => Family::Knn,
            Method::Svr => Family::Svr,
        };
        let kernel = match self.kernel {
            KernelArg::Linear => KernelFamily::Linear,
            KernelArg::Polynomial => KernelFamily::Polynomial,
            KernelArg::Rbf => KernelFamily::Rbf,
        };
        let mut config = PredictorConfig::new(family)
            .with_level(match self.level {
                LevelArg::Plan => Level::Plan,
                LevelArg::Operator => Level::Operator,
            })
            .with_features(match self.features {
                FeaturesArg::Cost => FeatureMode::CostOnly,
                FeaturesArg::Flattened => FeatureMode::Flattened,
            })
            .with_k(self.k)
            .with_svr(SvrParams {
                kernel,
                c: self.c,
                epsilon: self.epsilon,
                gamma: self.gamma,
                degree: self.degree,
                coef0: self.coef0,
                ..SvrParams::default()
            });
        config.min_samples = self.min_samples;
        config
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub method: MethodArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// File with one or more plan documents; one prediction is printed per
    /// document.
    #[arg(long)]
    pub plan: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub method: MethodArgs,
    #[arg(long, default_value_t = qpp_core::eval::DEFAULT_K_FOLDS)]
    pub k_folds: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Relative-error threshold for the fraction-below metric.
    #[arg(long, default_value_t = qpp_core::eval::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Predictions are raised to this floor before computing errors.
    #[arg(long, default_value_t = qpp_core::eval::DEFAULT_CLAMP_FLOOR_MS)]
    pub clamp_floor_ms: f64,
    /// Leave out plans that have a node with more than two children.
    #[arg(long)]
    pub exclude_non_tree: bool,
    /// Report JSON destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-query CSV destination.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// (cost, actual, predicted) CSV destination.
    #[arg(long)]
    pub scatter: Option<PathBuf>,
    #[arg(long, value_enum, requires = "plot_out")]
    pub plot: Option<PlotMode>,
    #[arg(long, requires = "plot")]
    pub plot_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CovArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Write `template_id,cov` rows here instead of printing a table.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, value_enum, requires = "plot_out")]
    pub plot: Option<PlotMode>,
    #[arg(long, requires = "plot")]
    pub plot_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Report JSON written by `evaluate --out`.
    #[arg(long)]
    pub report: PathBuf,
    /// Flag queries whose relative error exceeds this.
    #[arg(long, default_value_t = qpp_core::eval::DEFAULT_OUTLIER_CUTOFF)]
    pub cutoff: f64,
    /// Flag predictions more than ten times too high or too low instead.
    #[arg(long, conflicts_with = "cutoff")]
    pub order_of_magnitude: bool,
    /// Outlier report JSON destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, requires = "plot_out")]
    pub plot: Option<PlotMode>,
    #[arg(long, requires = "plot")]
    pub plot_out: Option<PathBuf>,
}

/// Parses `argv` (program name first) and runs the command, writing normal
/// output to `out` and diagnostics to `err`. Returns the exit status.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match commands::dispatch(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DATA
        }
    }
}
