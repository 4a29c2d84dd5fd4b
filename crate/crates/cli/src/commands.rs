use std::fs;
use std::io::Write;
use std::path::Path;

use qpp_core::corpus::{
    generate_synthetic, ingest, load_corpus, parse_documents, presets, save_corpus, CorpusStore, SyntheticSpec,
};
use qpp_core::eval::{
    cross_validate, outlier_report, template_cov, write_per_query_csv, write_scatter_csv, EvalConfig, EvalReport,
    MetricsSummary, OutlierCriterion,
};

use qpp_core::regress::{fit_predictor, load_model, save_model};

use crate::plot::{emit_plot_data, PlotSource};
use crate::*;

type Outcome = Result<(), String>;

pub(crate) fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match command {
        Command::Ingest(a) => ingest_cmd(a, out),
        Command::Synth(a) => synth_cmd(a, out),
        Command::Train(a) => train_cmd(a, out, err),
        Command::Predict(a) => predict_cmd(a, out, err),
        Command::Evaluate(a) => evaluate_cmd(a, out, err),
        Command::Cov(a) => cov_cmd(a, out, err),
        Command::Report(a) => report_cmd(a, out),
    }
}

fn at(path: &Path) -> impl Fn(qpp_core::Error) -> String + '_ {
    move |e| match e {
        qpp_core::Error::Io(io) => format!("{}: {io}", path.display()),
        other => other.to_string(),
    }
}

fn io_at(path: &Path) -> impl Fn(std::io::Error) -> String + '_ {
    move |e| format!("{}: {e}", path.display())
}

fn say(out: &mut dyn Write, text: std::fmt::Arguments<'_>) -> Outcome {
    out.write_fmt(text)
        .and_then(|_| out.write_all(b"\n"))
        .map_err(|e| e.to_string())
}

fn load(path: &Path, err: &mut dyn Write) -> Result<CorpusStore, String> {
    let loaded = load_corpus(path).map_err(at(path))?;
    for w in &loaded.warnings {
        say(err, format_args!("warning: {w}"))?;
    }
    Ok(loaded.store)
}

fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    fs::write(path, text + "\n").map_err(io_at(path))
}

fn ingest_cmd(a: IngestArgs, out: &mut dyn Write) -> Outcome {
    let mut store = ingest(&a.inputs, &a.label).map_err(|e| e.to_string())?;
    if let Some(ts) = a.created_at {
        store.metadata = store.metadata.with_created_at(ts);
    }
    save_corpus(&store, &a.out).map_err(at(&a.out))?;
    say(
        out,
        format_args!("wrote {} samples to {}", store.len(), a.out.display()),
    )
}

fn synth_cmd(a: SynthArgs, out: &mut dyn Write) -> Outcome {
    let mut spec = match &a.spec {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(io_at(path))?;
            serde_json::from_str::<SyntheticSpec>(&text)
                .map_err(|e| format!("{}: invalid spec: {e}", path.display()))?
        }
        None => {
            let mut spec = match a.preset {
                Preset::Clustered => presets::clustered_mixed(a.templates, a.instances, a.noise, a.seed),
                Preset::Linear => presets::linear(a.slope, a.instances, a.noise, a.seed),
            };
            if a.bimodal {
                spec.templates
                    .push(presets::bimodal_template("bimodal", 3e6, 1500.0, 150_000.0, 0.2));
            }
            spec
        }
    };
    if let Some(label) = a.label {
        spec.label = label;
    }
    let mut store = generate_synthetic(&spec).map_err(|e| e.to_string())?;
    if let Some(ts) = a.created_at {
        store.metadata = store.metadata.with_created_at(ts);
    }
    save_corpus(&store, &a.out).map_err(at(&a.out))?;
    say(
        out,
        format_args!("wrote {} samples to {}", store.len(), a.out.display()),
    )
}

fn train_cmd(a: TrainArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let store = load(&a.corpus, err)?;
    let config = a.method.predictor_config();
    let samples: Vec<_> = store.samples().iter().collect();
    let model = fit_predictor(&samples, &config, None).map_err(|e| e.to_string())?;
    save_model(&model, &a.out).map_err(at(&a.out))?;
    say(
        out,
        format_args!(
            "trained {} ({:?} level) on {} samples",
            model.family(),
            model.level(),
            samples.len()
        ),
    )
}

fn predict_cmd(a: PredictArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let model = load_model(&a.model).map_err(at(&a.model))?;
    let text = fs::read_to_string(&a.plan).map_err(io_at(&a.plan))?;
    let samples = parse_documents(&text, &a.plan.display().to_string()).map_err(|e| e.to_string())?;
    if samples.is_empty() {
        return Err(format!("{}: no plan documents", a.plan.display()));
    }
    for s in &samples {
        let p = model.predict(s).map_err(|e| format!("{}: {e}", s.query_id))?;
        if !p.fallback_kinds.is_empty() {
            let kinds: Vec<&str> = p.fallback_kinds.iter().map(|k| k.as_str()).collect();
            say(
                err,
                format_args!(
                    "warning: {}: no trained model for {}; routed to the pooled fallback",
                    s.query_id,
                    kinds.join(", ")
                ),
            )?;
        }
        say(out, format_args!("{}", p.ms))?;
    }
    Ok(())
}

fn summary_row(out: &mut dyn Write, label: &str, m: &MetricsSummary) -> Outcome {
    say(
        out,
        format_args!(
            "{label:<16} {:>6} {:>9.2}% {:>9.2}% {:>9.1}% {:>10.2}%",
            m.n,
            100.0 * m.mean_rel_err,
            100.0 * m.median_rel_err,
            100.0 * m.frac_below_threshold,
            100.0 * m.max_rel_err
        ),
    )
}

fn print_summary(out: &mut dyn Write, report: &EvalReport, per_template: bool) -> Outcome {
    let p = &report.config.predictor;
    let level = match p.level {
        Level::Plan => "plan",
        Level::Operator => "operator",
    };
    let features = match p.features {
        FeatureMode::CostOnly => "cost-only",
        FeatureMode::Flattened => "flattened",
    };
    say(
        out,
        format_args!(
            "{}, {level} level, {features} features, {}-fold, seed {}",
            p.family, report.config.k_folds, report.config.seed
        ),
    )?;
    let below = format!("<{:.0}%", 100.0 * report.config.error_threshold);
    say(
        out,
        format_args!(
            "{:<16} {:>6} {:>10} {:>10} {:>10} {:>11}",
            "", "n", "mean", "median", below, "max"
        ),
    )?;
    summary_row(out, "overall", &report.overall)?;
    if per_template {
        for (t, m) in &report.per_template {
            summary_row(out, t, m)?;
        }
    }
    if !report.excluded.is_empty() {
        say(out, format_args!("excluded {} non-tree plans", report.excluded.len()))?;
    }
    Ok(())
}

fn evaluate_cmd(a: EvaluateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let store = load(&a.corpus, err)?;
    let config = EvalConfig {
        k_folds: a.k_folds,
        seed: a.seed,
        error_threshold: a.threshold,
        clamp_floor_ms: a.clamp_floor_ms,
        predictor: a.method.predictor_config(),
        exclude_non_tree: a.exclude_non_tree,
    };
    let report = cross_validate(store.samples(), &config).map_err(|e| e.to_string())?;
    print_summary(out, &report, false)?;
    if let Some(path) = &a.out {
        write_json(&report, path)?;
    }
    if let Some(path) = &a.csv {
        let f = fs::File::create(path).map_err(io_at(path))?;
        write_per_query_csv(&report, f).map_err(at(path))?;
    }
    if let Some(path) = &a.scatter {
        let f = fs::File::create(path).map_err(io_at(path))?;
        write_scatter_csv(&report, f).map_err(at(path))?;
    }
    if let (Some(mode), Some(path)) = (a.plot, &a.plot_out) {
        emit_plot_data(PlotSource::Report(&report), mode, path).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn cov_cmd(a: CovArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let store = load(&a.corpus, err)?;
    let cov = template_cov(store.samples());
    if cov.is_empty() {
        return Err("corpus has no timed, templated samples".into());
    }
    match &a.csv {
        Some(path) => {
            let mut w = csv::Writer::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let write = |w: &mut csv::Writer<fs::File>| -> Result<(), csv::Error> {
                w.write_record(["template_id", "cov"])?;
                for (t, c) in &cov {
                    w.write_record([t.clone(), c.to_string()])?;
                }
                w.flush()?;
                Ok(())
            };
            write(&mut w).map_err(|e| format!("{}: {e}", path.display()))?;
        }
        None => {
            say(out, format_args!("{:<16} {:>8}", "template", "cov"))?;
            for (t, c) in &cov {
                say(out, format_args!("{t:<16} {c:>8.4}"))?;
            }
        }
    }
    if let (Some(mode), Some(path)) = (a.plot, &a.plot_out) {
        emit_plot_data(PlotSource::Corpus(store.samples()), mode, path).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn report_cmd(a: ReportArgs, out: &mut dyn Write) -> Outcome {
    let text = fs::read_to_string(&a.report).map_err(io_at(&a.report))?;
    let report: EvalReport =
        serde_json::from_str(&text).map_err(|e| format!("{}: not an evaluation report: {e}", a.report.display()))?;
    print_summary(out, &report, true)?;
    let criterion = if a.order_of_magnitude {
        OutlierCriterion::OrderOfMagnitude
    } else {
        OutlierCriterion::RelErrAbove { cutoff: a.cutoff }
    };
    let outliers = outlier_report(&report, criterion);
    say(out, format_args!("{} outliers", outliers.entries.len()))?;
    for e in &outliers.entries {
        say(
            out,
            format_args!(
                "  {:<16} {:<10} actual {:>12.3} ms  predicted {:>12.3} ms  rel_err {:.3}",
                e.query_id,
                e.template_id.as_deref().unwrap_or("-"),
                e.actual_ms,
                e.predicted_ms,
                e.rel_err
            ),
        )?;
    }
    if let Some(path) = &a.out {
        write_json(&outliers, path)?;
    }
    if let (Some(mode), Some(path)) = (a.plot, &a.plot_out) {
        emit_plot_data(PlotSource::Report(&report), mode, path).map_err(|e| e.to_string())?;
    }
    Ok(())
}
