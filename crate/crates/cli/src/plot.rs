use std::fs::File;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use qpp_core::eval::EvalReport;
use qpp_core::plan::PlanSample;
use qpp_core::{Error, Result};

/// Data series for the three figure types.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum PlotMode {
    /// Optimizer cost against measured time.
    CostTime,
    /// Measured against predicted time, one row per evaluated query.
    PredActual,
    /// Raw relative errors, unbinned.
    ErrorHist,
}

/// Where plot rows come from: an evaluation, or a bare corpus (cost_time
/// only).
#[derive(Clone, Copy, Debug)]
pub enum PlotSource<'a> {
    Report(&'a EvalReport),
    Corpus(&'a [PlanSample]),
}

/// Writes the CSV for `mode` to `path`.
pub fn emit_plot_data(source: PlotSource<'_>, mode: PlotMode, path: &Path) -> Result<()> {
    let file =
        File::create(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    write_plot_data(source, mode, file)
}

pub fn write_plot_data<W: Write>(source: PlotSource<'_>, mode: PlotMode, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    match (source, mode) {
        (PlotSource::Report(r), _) if r.per_query.is_empty() => {
            return Err(Error::Domain("report has no evaluated queries".into()))
        }
        (PlotSource::Corpus(c), PlotMode::CostTime) => {
            if c.is_empty() {
                return Err(Error::Domain("corpus is empty".into()));
            }
            w.write_record(["query_id", "cost", "actual_ms"])?;
            for s in c {
                let t = s
                    .execution_time_ms
                    .ok_or_else(|| Error::Domain(format!("sample `{}` has no execution time", s.query_id)))?;
                w.write_record([s.query_id.clone(), s.plan_cost().to_string(), t.to_string()])?;
            }
        }
        (PlotSource::Corpus(_), m) => {
            return Err(Error::Domain(format!(
                "{} plots need an evaluation report",
                m.to_possible_value().expect("no skipped variants").get_name()
            )))
        }
        (PlotSource::Report(r), PlotMode::CostTime) => {
            w.write_record(["query_id", "cost", "actual_ms"])?;
            for q in &r.per_query {
                w.write_record([q.query_id.clone(), q.cost.to_string(), q.actual_ms.to_string()])?;
            }
        }
        (PlotSource::Report(r), PlotMode::PredActual) => {
            w.write_record(["query_id", "actual_ms", "predicted_ms"])?;
            for q in &r.per_query {
                w.write_record([
                    q.query_id.clone(),
                    q.actual_ms.to_string(),
                    q.predicted_ms_clamped.to_string(),
                ])?;
            }
        }
        (PlotSource::Report(r), PlotMode::ErrorHist) => {
            w.write_record(["rel_err"])?;
            for q in &r.per_query {
                w.write_record([q.rel_err.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
