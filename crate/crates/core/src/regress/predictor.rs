use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::knn::{KnnWeighting, DEFAULT_K};
use super::operator::{fit_base, fit_operator_level, BaseConfig, BaseModel, OperatorLevelModel, DEFAULT_MIN_SAMPLES};
use super::svr::SvrParams;
use crate::error::{Error, Result};
use crate::plan::{to_feature_vector, FeatureMode, FeatureSchema, OperatorKind, PlanSample};

/// Largest accepted neighbour count.
pub const MAX_K: usize = 99;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Ols,
    PowerLaw,
    Knn,
    Svr,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Ols, Family::PowerLaw, Family::Knn, Family::Svr];

    /// Tag used in model files.
    pub fn tag(self) -> &'static str {
        match self {
            Family::Ols => "ols",
            Family::PowerLaw => "power_law",
            Family::Knn => "knn",
            Family::Svr => "svr",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Family {
    type Err = Error;

    /// Accepts `power-law` as well as `power_law`.
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        Family::ALL.into_iter().find(|f| f.tag() == norm).ok_or_else(|| {
            Error::Config(format!(
                "unknown method `{s}`; valid methods are ols, power-law, knn, svr"
            ))
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    #[default]
    Plan,
    Operator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
    #[serde(default)]
    pub weighting: KnnWeighting,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams {
            k: DEFAULT_K,
            weighting: KnnWeighting::Uniform,
        }
    }
}

/// Which predictor to fit: family, plan or operator level, and feature set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictorConfig {
    pub family: Family,
    pub level: Level,
    pub features: FeatureMode,
    pub knn: KnnParams,
    pub svr: SvrParams,
    /// Records a kind needs before it gets its own operator-level model.
    pub min_samples: usize,
}

impl PredictorConfig {
    pub fn new(family: Family) -> Self {
        PredictorConfig {
            family,
            level: Level::Plan,
            features: FeatureMode::CostOnly,
            knn: KnnParams::default(),
            svr: SvrParams::default(),
            min_samples: DEFAULT_MIN_SAMPLES,
        }
    }

    pub fn with_level(mut self, level: Level) -> Self {
        self.level = level;
        self
    }

    pub fn with_features(mut self, features: FeatureMode) -> Self {
        self.features = features;
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.knn.k = k;
        self
    }

    pub fn with_svr(mut self, svr: SvrParams) -> Self {
        self.svr = svr;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_K).contains(&self.knn.k) {
            return Err(Error::Config(format!(
                "k must be between 1 and {MAX_K}, got {}",
                self.knn.k
            )));
        }
        if self.family == Family::Svr {
            self.svr.validate()?;
        }
        if self.features == FeatureMode::Flattened {
            if self.level == Level::Operator {
                return Err(Error::Config(
                    "operator-level models use the exclusive cost only; flattened features apply at plan level".into(),
                ));
            }
            if self.family == Family::PowerLaw {
                return Err(Error::Config(
                    "the power law takes the plan cost as its single feature".into(),
                ));
            }
        }
        if self.min_samples == 0 {
            return Err(Error::Config("min_samples must be at least 1".into()));
        }
        Ok(())
    }

    fn base(&self) -> BaseConfig {
        BaseConfig {
            family: self.family,
            knn: self.knn,
            svr: self.svr,
        }
    }
}

/// A whole-plan model together with the feature layout it was fitted on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanLevelModel {
    pub features: FeatureMode,
    pub schema: Arc<FeatureSchema>,
    pub model: BaseModel,
}

impl PlanLevelModel {
    pub fn predict(&self, sample: &PlanSample) -> Result<f64> {
        match &self.model {
            BaseModel::PowerLaw(m) => m.predict(sample.plan_cost()),
            BaseModel::Ols(m) => m.predict(&to_feature_vector(sample, self.features, Some(&self.schema))?),
            BaseModel::Knn(m) => m.predict(&to_feature_vector(sample, self.features, Some(&self.schema))?),
            BaseModel::Svr(m) => m.predict(&to_feature_vector(sample, self.features, Some(&self.schema))?),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Predictor {
    Plan(PlanLevelModel),
    Operator(OperatorLevelModel),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    /// Raw prediction in milliseconds, before any clamping.
    pub ms: f64,
    /// Operator kinds served by the pooled fallback model.
    pub fallback_kinds: Vec<OperatorKind>,
}

impl Predictor {
    pub fn family(&self) -> Family {
        match self {
            Predictor::Plan(m) => m.model.family(),
            Predictor::Operator(m) => m.base_family,
        }
    }

    pub fn level(&self) -> Level {
        match self {
            Predictor::Plan(_) => Level::Plan,
            Predictor::Operator(_) => Level::Operator,
        }
    }

    pub fn predict(&self, sample: &PlanSample) -> Result<Prediction> {
        match self {
            Predictor::Plan(m) => Ok(Prediction {
                ms: m.predict(sample)?,
                fallback_kinds: Vec::new(),
            }),
            Predictor::Operator(m) => {
                let p = m.predict_detailed(sample);
                Ok(Prediction {
                    ms: p.total_ms,
                    fallback_kinds: p.fallback_kinds,
                })
            }
        }
    }
}

/// Fits the predictor described by `config` on timed samples.
///
/// For flattened features, `schema` fixes the layout; without one it is
/// built from the operator kinds in `samples`.
pub fn fit_predictor(
    samples: &[&PlanSample],
    config: &PredictorConfig,
    schema: Option<&Arc<FeatureSchema>>,
) -> Result<Predictor> {
    config.validate()?;
    if samples.is_empty() {
        return Err(Error::DegenerateFit("no training samples".into()));
    }
    if config.level == Level::Operator {
        return Ok(Predictor::Operator(fit_operator_level(
            samples,
            &config.base(),
            config.min_samples,
        )?));
    }

    let mut times = Vec::with_capacity(samples.len());
    for s in samples {
        match s.execution_time_ms {
            Some(t) => times.push(t),
            None => {
                return Err(Error::DegenerateFit(format!(
                    "sample `{}` has no measured execution time",
                    s.query_id
                )))
            }
        }
    }
    let schema = match (config.features, schema) {
        (_, Some(s)) => Arc::clone(s),
        (FeatureMode::CostOnly, None) => Arc::new(FeatureSchema::cost_only()),
        (FeatureMode::Flattened, None) => Arc::new(FeatureSchema::flattened_from(samples.iter().copied())),
    };
    let model = if config.family == Family::PowerLaw {
        let costs: Vec<f64> = samples.iter().map(|s| s.plan_cost()).collect();
        fit_base(&costs, &times, &schema, &config.base())?
    } else {
        let vectors = samples
            .iter()
            .map(|s| to_feature_vector(s, config.features, Some(&schema)))
            .collect::<Result<Vec<_>>>()?;
        fit_vectors(vectors, &times, config)?
    };
    Ok(Predictor::Plan(PlanLevelModel {
        features: config.features,
        schema,
        model,
    }))
}

fn fit_vectors(vectors: Vec<crate::plan::FeatureVector>, times: &[f64], config: &PredictorConfig) -> Result<BaseModel> {
    use super::{fit_knn, fit_ols, fit_svr};
    Ok(match config.family {
        Family::Ols => BaseModel::Ols(fit_ols(&vectors, times)?),
        Family::Knn => {
            let pool: Vec<_> = vectors.into_iter().zip(times.iter().copied()).collect();
            BaseModel::Knn(fit_knn(&pool, config.knn.k)?.with_weighting(config.knn.weighting))
        }
        Family::Svr => BaseModel::Svr(fit_svr(&vectors, times, &config.svr)?),
        Family::PowerLaw => unreachable!("power law is fitted on raw costs"),
    })
}
