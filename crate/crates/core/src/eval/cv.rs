use std::collections::BTreeMap;
use std::sync::Arc;
use std::thread;

use serde::{Deserialize, Serialize};

use super::folds::kfold_split;
use super::metrics::{aggregate_metrics, relative_error, MetricsSummary, DEFAULT_THRESHOLD};
use crate::error::{Error, Result};
use crate::plan::{FeatureMode, FeatureSchema, PlanSample};
use crate::regress::{fit_predictor, PredictorConfig};

pub const DEFAULT_K_FOLDS: usize = 5;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_CLAMP_FLOOR_MS: f64 = 0.001;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub k_folds: usize,
    pub seed: u64,
    pub error_threshold: f64,
    /// Predictions below this are raised to it before computing errors.
    pub clamp_floor_ms: f64,
    pub predictor: PredictorConfig,
    /// Drop plans with a node of more than two children before splitting.
    #[serde(default)]
    pub exclude_non_tree: bool,
}

impl EvalConfig {
    pub fn new(predictor: PredictorConfig) -> Self {
        EvalConfig {
            k_folds: DEFAULT_K_FOLDS,
            seed: DEFAULT_SEED,
            error_threshold: DEFAULT_THRESHOLD,
            clamp_floor_ms: DEFAULT_CLAMP_FLOOR_MS,
            predictor,
            exclude_non_tree: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_folds < 2 {
            return Err(Error::Config(format!(
                "k_folds must be at least 2, got {}",
                self.k_folds
            )));
        }
        if !(self.error_threshold > 0.0 && self.error_threshold < 1.0) {
            return Err(Error::Config(format!(
                "error threshold must lie in (0, 1), got {}",
                self.error_threshold
            )));
        }
        if !(self.clamp_floor_ms > 0.0 && self.clamp_floor_ms.is_finite()) {
            return Err(Error::Config(format!(
                "clamp floor must be positive, got {}",
                self.clamp_floor_ms
            )));
        }
        self.predictor.validate()
    }
}

/// Outcome for one query while it sat in a test fold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub query_id: String,
    pub template_id: Option<String>,
    pub fold: usize,
    pub cost: f64,
    pub actual_ms: f64,
    pub predicted_ms_raw: f64,
    pub predicted_ms_clamped: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub overall: MetricsSummary,
    pub per_template: BTreeMap<String, MetricsSummary>,
    /// One row per evaluated query, in corpus order.
    pub per_query: Vec<QueryResult>,
    /// Query ids left out because their plan is not a tree.
    #[serde(default)]
    pub excluded: Vec<String>,
}

/// k-fold cross-validation of the configured predictor.
///
/// Flattened-feature layouts are fixed once from the operator kinds of the
/// whole corpus (plans only, no times), so every fold sees the same schema.
/// Folds run on separate threads and are merged by fold index.
pub fn cross_validate(corpus: &[PlanSample], config: &EvalConfig) -> Result<EvalReport> {
    config.validate()?;
    let mut excluded = Vec::new();
    let mut samples: Vec<&PlanSample> = Vec::with_capacity(corpus.len());
    for s in corpus {
        if config.exclude_non_tree && s.is_non_tree() {
            excluded.push(s.query_id.clone());
        } else {
            samples.push(s);
        }
    }
    let mut actuals = Vec::with_capacity(samples.len());
    for s in &samples {
        match s.execution_time_ms {
            Some(t) => actuals.push(t),
            None => {
                return Err(Error::Domain(format!(
                    "sample `{}` has no measured execution time",
                    s.query_id
                )))
            }
        }
    }
    let assignment = kfold_split(samples.len(), config.k_folds, config.seed)?;
    let schema = match config.predictor.features {
        FeatureMode::Flattened => Some(Arc::new(FeatureSchema::flattened_from(samples.iter().copied()))),
        FeatureMode::CostOnly => None,
    };

    let fold_of = assignment.fold_of();
    let fold_results: Vec<Result<Vec<(usize, f64)>>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..assignment.k())
            .map(|fold| {
                let samples = &samples;
                let fold_of = &fold_of;
                let test = &assignment.folds[fold];
                let schema = schema.as_ref();
                scope.spawn(move || -> Result<Vec<(usize, f64)>> {
                    let train: Vec<&PlanSample> = (0..samples.len())
                        .filter(|&i| fold_of[i] != fold)
                        .map(|i| samples[i])
                        .collect();
                    let model = fit_predictor(&train, &config.predictor, schema)?;
                    test.iter().map(|&i| Ok((i, model.predict(samples[i])?.ms))).collect()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|p| std::panic::resume_unwind(p)))
            .collect()
    });

    let mut raw = vec![f64::NAN; samples.len()];
    for (fold, result) in fold_results.into_iter().enumerate() {
        let preds = result.map_err(|e| Error::Eval {
            fold,
            source: Box::new(e),
        })?;
        for (i, p) in preds {
            raw[i] = p;
        }
    }

    let mut per_query = Vec::with_capacity(samples.len());
    for (i, s) in samples.iter().enumerate() {
        let clamped = raw[i].max(config.clamp_floor_ms);
        per_query.push(QueryResult {
            query_id: s.query_id.clone(),
            template_id: s.template_id.clone(),
            fold: fold_of[i],
            cost: s.plan_cost(),
            actual_ms: actuals[i],
            predicted_ms_raw: raw[i],
            predicted_ms_clamped: clamped,
            rel_err: relative_error(actuals[i], clamped)?,
        });
    }
    summarize(config.clone(), per_query, excluded)
}

/// Aggregates per-query rows overall and per template.
pub fn summarize(config: EvalConfig, per_query: Vec<QueryResult>, excluded: Vec<String>) -> Result<EvalReport> {
    let errors: Vec<f64> = per_query.iter().map(|q| q.rel_err).collect();
    let overall = aggregate_metrics(&errors, config.error_threshold)?;
    let mut grouped: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for q in &per_query {
        if let Some(t) = &q.template_id {
            grouped.entry(t.clone()).or_default().push(q.rel_err);
        }
    }
    let per_template = grouped
        .into_iter()
        .map(|(t, e)| Ok((t, aggregate_metrics(&e, config.error_threshold)?)))
        .collect::<Result<_>>()?;
    Ok(EvalReport {
        config,
        overall,
        per_template,
        per_query,
        excluded,
    })
}
