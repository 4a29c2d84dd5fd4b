use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    fit_knn, fit_ols, fit_power_law, fit_svr, Family, KnnModel, KnnParams, LinearModel, PowerLawModel, SvrModel,
    SvrParams,
};
use crate::error::{Error, Result};
use crate::plan::{decompose_operators, FeatureSchema, FeatureVector, OperatorKind, OperatorRecord, PlanSample};

pub const DEFAULT_MIN_SAMPLES: usize = 5;

/// A fitted single-feature regressor used inside an operator-level model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BaseModel {
    Ols(LinearModel),
    PowerLaw(PowerLawModel),
    Knn(KnnModel),
    Svr(SvrModel),
}

impl BaseModel {
    pub fn family(&self) -> Family {
        match self {
            BaseModel::Ols(_) => Family::Ols,
            BaseModel::PowerLaw(_) => Family::PowerLaw,
            BaseModel::Knn(_) => Family::Knn,
            BaseModel::Svr(_) => Family::Svr,
        }
    }

    /// Raw prediction from a single cost value.
    ///
    /// A power law has no value at non-positive cost; such operators
    /// contribute nothing.
    pub fn predict_cost(&self, cost: f64) -> f64 {
        match self {
            BaseModel::Ols(m) => m.predict_values(&[cost]),
            BaseModel::PowerLaw(m) => m.predict(cost).unwrap_or(0.0),
            BaseModel::Knn(m) => m.predict_values(&[cost]),
            BaseModel::Svr(m) => m.predict_values(&[cost]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseConfig {
    pub family: Family,
    pub knn: KnnParams,
    pub svr: SvrParams,
}

impl BaseConfig {
    /// `family` with default kNN and SVR parameters.
    pub fn new(family: Family) -> Self {
        BaseConfig {
            family,
            knn: KnnParams::default(),
            svr: SvrParams::default(),
        }
    }
}

/// Fits `family` on `(cost, time)` pairs under a one-feature schema.
pub(crate) fn fit_base(
    costs: &[f64],
    times: &[f64],
    schema: &Arc<FeatureSchema>,
    config: &BaseConfig,
) -> Result<BaseModel> {
    let vectors =
        || -> Result<Vec<FeatureVector>> { costs.iter().map(|&c| FeatureVector::scalar(schema, c)).collect() };
    Ok(match config.family {
        Family::Ols => BaseModel::Ols(fit_ols(&vectors()?, times)?),
        Family::PowerLaw => BaseModel::PowerLaw(fit_power_law(costs, times)?),
        Family::Knn => {
            let pool: Vec<(FeatureVector, f64)> = vectors()?.into_iter().zip(times.iter().copied()).collect();
            BaseModel::Knn(fit_knn(&pool, config.knn.k)?.with_weighting(config.knn.weighting))
        }
        Family::Svr => BaseModel::Svr(fit_svr(&vectors()?, times, &config.svr)?),
    })
}

/// One regressor per operator kind, mapping exclusive cost to exclusive
/// time; a plan's prediction is the sum over its operators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorLevelModel {
    pub base_family: Family,
    pub min_samples: usize,
    pub per_kind: BTreeMap<OperatorKind, BaseModel>,
    /// Fitted on all records pooled; serves kinds without their own model.
    pub fallback: BaseModel,
}

/// Result of an operator-level prediction.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorPrediction {
    pub total_ms: f64,
    /// Per-node contributions in pre-order, after clamping at zero.
    pub per_node_ms: Vec<f64>,
    /// Kinds in the plan that were routed to the pooled fallback model.
    pub fallback_kinds: Vec<OperatorKind>,
}

impl OperatorLevelModel {
    /// Model used for `kind`, and whether it is the fallback.
    pub fn model_for(&self, kind: &OperatorKind) -> (&BaseModel, bool) {
        match self.per_kind.get(kind) {
            Some(m) => (m, false),
            None => (&self.fallback, true),
        }
    }

    pub fn predict(&self, sample: &PlanSample) -> f64 {
        self.predict_detailed(sample).total_ms
    }

    pub fn predict_detailed(&self, sample: &PlanSample) -> OperatorPrediction {
        let mut per_node_ms = Vec::new();
        let mut fallback_kinds: Vec<OperatorKind> = Vec::new();
        for rec in decompose_operators(sample) {
            let (model, fallback) = self.model_for(&rec.kind);
            if fallback && !fallback_kinds.contains(&rec.kind) {
                fallback_kinds.push(rec.kind.clone());
            }
            per_node_ms.push(model.predict_cost(rec.exclusive_cost).max(0.0));
        }
        OperatorPrediction {
            total_ms: per_node_ms.iter().sum(),
            per_node_ms,
            fallback_kinds,
        }
    }
}

/// Groups operator records by kind and fits one model per kind that has
/// enough records, plus a pooled fallback.
///
/// For kNN the threshold is raised to `k` when that is larger. A kind whose
/// own fit is degenerate (for instance, every record has the same exclusive
/// cost under OLS) is left to the fallback.
pub fn fit_operator_level(
    samples: &[&PlanSample],
    config: &BaseConfig,
    min_samples: usize,
) -> Result<OperatorLevelModel> {
    if samples.is_empty() {
        return Err(Error::DegenerateFit("empty corpus".into()));
    }
    let mut grouped: BTreeMap<OperatorKind, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    let mut all_costs = Vec::new();
    let mut all_times = Vec::new();
    for sample in samples {
        for rec in decompose_operators(sample) {
            let time = training_time(&rec, sample)?;
            let entry = grouped.entry(rec.kind.clone()).or_default();
            entry.0.push(rec.exclusive_cost);
            entry.1.push(time);
            all_costs.push(rec.exclusive_cost);
            all_times.push(time);
        }
    }

    let schema = Arc::new(FeatureSchema::exclusive_cost());
    let threshold = match config.family {
        Family::Knn => min_samples.max(config.knn.k),
        _ => min_samples,
    };
    let fallback = fit_base(&all_costs, &all_times, &schema, config)?;
    let mut per_kind = BTreeMap::new();
    for (kind, (costs, times)) in grouped {
        if costs.len() < threshold {
            continue;
        }
        match fit_base(&costs, &times, &schema, config) {
            Ok(model) => {
                per_kind.insert(kind, model);
            }
            Err(Error::DegenerateFit(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(OperatorLevelModel {
        base_family: config.family,
        min_samples: threshold,
        per_kind,
        fallback,
    })
}

fn training_time(rec: &OperatorRecord, sample: &PlanSample) -> Result<f64> {
    rec.exclusive_time_ms.ok_or_else(|| {
        Error::DegenerateFit(format!(
            "sample `{}` has a `{}` node without measured timing",
            sample.query_id, rec.kind
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::PlanNode;

    fn config(family: Family) -> BaseConfig {
        BaseConfig {
            family,
            knn: KnnParams::default(),
            svr: SvrParams::default(),
        }
    }

    // sort(excl cost s) over seq_scan(cost c); times 3s and 2c.
    fn plan(id: usize, scan_cost: f64, sort_cost: f64) -> PlanSample {
        let scan = PlanNode::new("Seq Scan".parse().unwrap(), 0.0, scan_cost, 10.0).with_timing(2.0 * scan_cost, 1);
        let root = PlanNode::new("Sort".parse().unwrap(), 0.0, scan_cost + sort_cost, 10.0)
            .with_timing(2.0 * scan_cost + 3.0 * sort_cost, 1)
            .with_children(vec![scan]);
        PlanSample::new(format!("q{id}"), root).with_execution_time(2.0 * scan_cost + 3.0 * sort_cost)
    }

    fn corpus() -> Vec<PlanSample> {
        (0..12)
            .map(|i| plan(i, 10.0 + 7.0 * i as f64, 1.0 + (i * i) as f64))
            .collect()
    }

    #[test]
    fn recovers_per_kind_lines() {
        let c = corpus();
        let refs: Vec<&PlanSample> = c.iter().collect();
        let m = fit_operator_level(&refs, &config(Family::Ols), DEFAULT_MIN_SAMPLES).unwrap();
        let coef = |k: &str| match &m.per_kind[&k.parse::<OperatorKind>().unwrap()] {
            BaseModel::Ols(l) => (l.intercept, l.coefficients[0]),
            other => panic!("{other:?}"),
        };
        let (i_scan, c_scan) = coef("seq_scan");
        let (i_sort, c_sort) = coef("sort");
        assert!((c_scan - 2.0).abs() < 1e-9 && i_scan.abs() < 1e-9);
        assert!((c_sort - 3.0).abs() < 1e-9 && i_sort.abs() < 1e-9);

        let p = m.predict_detailed(&plan(99, 10.0, 5.0));
        assert!((p.total_ms - 35.0).abs() < 1e-9, "{p:?}");
        assert!(p.fallback_kinds.is_empty());
    }

    #[test]
    fn rare_kinds_use_the_fallback() {
        let mut c = corpus();
        let odd = PlanNode::new("Materialize".parse().unwrap(), 0.0, 500.0, 1.0)
            .with_timing(1000.0, 1)
            .with_children(vec![c[0].root.clone()]);
        c[0] = PlanSample::new("odd", odd).with_execution_time(1000.0);
        let refs: Vec<&PlanSample> = c.iter().collect();
        let m = fit_operator_level(&refs, &config(Family::Ols), DEFAULT_MIN_SAMPLES).unwrap();
        let mat: OperatorKind = "materialize".parse().unwrap();
        assert!(!m.per_kind.contains_key(&mat));
        let pred = m.predict_detailed(&c[0]);
        assert_eq!(pred.fallback_kinds, vec![mat.clone()]);
        let expected_first = m
            .fallback
            .predict_cost(500.0 - c[1].root.total_cost.min(0.0) - refs[0].root.children[0].total_cost)
            .max(0.0);
        assert_eq!(pred.per_node_ms[0], expected_first);
    }

    #[test]
    fn single_node_plan_equals_base_prediction() {
        let c = corpus();
        let refs: Vec<&PlanSample> = c.iter().collect();
        let m = fit_operator_level(&refs, &config(Family::Knn), DEFAULT_MIN_SAMPLES).unwrap();
        let leaf = PlanSample::new("leaf", PlanNode::new("Seq Scan".parse().unwrap(), 0.0, 33.0, 1.0));
        let direct = m.per_kind[&"seq_scan".parse::<OperatorKind>().unwrap()].predict_cost(33.0);
        assert_eq!(m.predict(&leaf), direct.max(0.0));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            fit_operator_level(&[], &config(Family::Ols), 5),
            Err(Error::DegenerateFit(_))
        ));
        let untimed = PlanSample::new("u", PlanNode::new("Seq Scan".parse().unwrap(), 0.0, 1.0, 1.0));
        assert!(fit_operator_level(&[&untimed], &config(Family::Ols), 5).is_err());
    }
}
