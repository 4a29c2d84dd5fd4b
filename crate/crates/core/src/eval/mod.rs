//! Cross-validated evaluation: relative-error metrics, fold construction,
//! per-template spread and outlier diagnosis.

mod cov;
mod cv;
mod export;
mod folds;
mod metrics;
mod outliers;

pub use cov::template_cov;
pub use cv::{
    cross_validate, summarize, EvalConfig, EvalReport, QueryResult, DEFAULT_CLAMP_FLOOR_MS, DEFAULT_K_FOLDS,
    DEFAULT_SEED,
};
pub use export::{write_per_query_csv, write_scatter_csv};
pub use folds::{kfold_split, FoldAssignment};
pub use metrics::{aggregate_metrics, relative_error, MetricsSummary, DEFAULT_THRESHOLD};
pub use outliers::{outlier_report, OutlierCriterion, OutlierEntry, OutlierReport, DEFAULT_OUTLIER_CUTOFF};
