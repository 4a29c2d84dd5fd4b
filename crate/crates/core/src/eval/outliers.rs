use serde::{Deserialize, Serialize};

use super::cv::EvalReport;

pub const DEFAULT_OUTLIER_CUTOFF: f64 = 9.0;

/// When a query counts as an outlier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum OutlierCriterion {
    /// Relative error strictly above the cutoff.
    RelErrAbove { cutoff: f64 },
    /// Prediction more than ten times too high or too low.
    OrderOfMagnitude,
}

impl Default for OutlierCriterion {
    fn default() -> Self {
        OutlierCriterion::RelErrAbove {
            cutoff: DEFAULT_OUTLIER_CUTOFF,
        }
    }
}

impl OutlierCriterion {
    pub fn flags(&self, actual_ms: f64, predicted_ms: f64, rel_err: f64) -> bool {
        match *self {
            OutlierCriterion::RelErrAbove { cutoff } => rel_err > cutoff,
            OutlierCriterion::OrderOfMagnitude => {
                let diff = (actual_ms - predicted_ms).abs();
                f64::max(diff / actual_ms, diff / predicted_ms) > 9.0
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutlierEntry {
    pub query_id: String,
    pub template_id: Option<String>,
    pub actual_ms: f64,
    pub predicted_ms: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutlierReport {
    pub criterion: OutlierCriterion,
    /// Sorted by descending relative error; ties keep corpus order.
    pub entries: Vec<OutlierEntry>,
}

/// Queries whose clamped prediction meets `criterion`.
pub fn outlier_report(report: &EvalReport, criterion: OutlierCriterion) -> OutlierReport {
    let mut entries: Vec<OutlierEntry> = report
        .per_query
        .iter()
        .filter(|q| criterion.flags(q.actual_ms, q.predicted_ms_clamped, q.rel_err))
        .map(|q| OutlierEntry {
            query_id: q.query_id.clone(),
            template_id: q.template_id.clone(),
            actual_ms: q.actual_ms,
            predicted_ms: q.predicted_ms_clamped,
            rel_err: q.rel_err,
        })
        .collect();
    entries.sort_by(|a, b| b.rel_err.total_cmp(&a.rel_err));
    OutlierReport { criterion, entries }
}
