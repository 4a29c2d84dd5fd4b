use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.2;

/// `|actual − predicted| / actual`.
pub fn relative_error(actual: f64, predicted: f64) -> Result<f64> {
    if !(actual > 0.0) {
        return Err(Error::Domain(format!(
            "relative error needs a positive actual time, got {actual}"
        )));
    }
    Ok((actual - predicted).abs() / actual)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub n: usize,
    pub mean_rel_err: f64,
    pub median_rel_err: f64,
    /// Share of errors strictly below `threshold`.
    pub frac_below_threshold: f64,
    pub threshold: f64,
    pub min_rel_err: f64,
    pub max_rel_err: f64,
}

pub fn aggregate_metrics(errors: &[f64], threshold: f64) -> Result<MetricsSummary> {
    if errors.is_empty() {
        return Err(Error::Domain("cannot summarize an empty list of errors".into()));
    }
    if let Some(e) = errors.iter().find(|e| !e.is_finite()) {
        return Err(Error::Domain(format!("relative error {e} is not finite")));
    }
    let n = errors.len();
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let below = errors.iter().filter(|&&e| e < threshold).count();
    Ok(MetricsSummary {
        n,
        mean_rel_err: errors.iter().sum::<f64>() / n as f64,
        median_rel_err: median,
        frac_below_threshold: below as f64 / n as f64,
        threshold,
        min_rel_err: sorted[0],
        max_rel_err: sorted[n - 1],
    })
}
