use std::io::Write;

use super::cv::EvalReport;
use crate::error::Result;

/// Per-query rows as CSV.
pub fn write_per_query_csv<W: Write>(report: &EvalReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "query_id",
        "template_id",
        "fold",
        "actual_ms",
        "predicted_ms_raw",
        "predicted_ms_clamped",
        "rel_err",
    ])?;
    for q in &report.per_query {
        w.write_record([
            q.query_id.clone(),
            q.template_id.clone().unwrap_or_default(),
            q.fold.to_string(),
            q.actual_ms.to_string(),
            q.predicted_ms_raw.to_string(),
            q.predicted_ms_clamped.to_string(),
            q.rel_err.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `(cost, actual_ms, predicted_ms)` scatter rows, using clamped predictions.
pub fn write_scatter_csv<W: Write>(report: &EvalReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["cost", "actual_ms", "predicted_ms"])?;
    for q in &report.per_query {
        w.write_record([
            q.cost.to_string(),
            q.actual_ms.to_string(),
            q.predicted_ms_clamped.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
