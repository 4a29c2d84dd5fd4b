use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{OperatorKind, PlanSample};
use crate::error::{Error, Result};

/// Instance count and summed cardinality estimate of one operator kind.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KindSummary {
    pub count: u64,
    pub cardinality_sum: f64,
}

/// Per-kind (count, Σ plan rows) summary of a plan. Kinds that do not occur
/// are absent rather than stored as zeros.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FlattenedPlan {
    pub entries: BTreeMap<OperatorKind, KindSummary>,
}

impl FlattenedPlan {
    pub fn get(&self, kind: &OperatorKind) -> KindSummary {
        self.entries.get(kind).copied().unwrap_or(KindSummary {
            count: 0,
            cardinality_sum: 0.0,
        })
    }

    pub fn total_count(&self) -> u64 {
        self.entries.values().map(|e| e.count).sum()
    }
}

pub fn flatten_plan(sample: &PlanSample) -> FlattenedPlan {
    let mut entries: BTreeMap<OperatorKind, KindSummary> = BTreeMap::new();
    for node in sample.root.iter() {
        let e = entries.entry(node.kind.clone()).or_insert(KindSummary {
            count: 0,
            cardinality_sum: 0.0,
        });
        e.count += 1;
        e.cardinality_sum += node.plan_rows;
    }
    FlattenedPlan { entries }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    /// The plan's total optimizer cost, alone.
    CostOnly,
    /// Count and cardinality sum per operator kind.
    Flattened,
}

pub const PLAN_COST_FEATURE: &str = "plan_cost";
pub const EXCLUSIVE_COST_FEATURE: &str = "exclusive_cost";

/// Ordered feature names giving each vector position its meaning.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureSchema {
    names: Vec<String>,
}

impl FeatureSchema {
    pub fn new(names: Vec<String>) -> Self {
        FeatureSchema { names }
    }

    pub fn cost_only() -> Self {
        FeatureSchema::new(vec![PLAN_COST_FEATURE.to_string()])
    }

    pub fn exclusive_cost() -> Self {
        FeatureSchema::new(vec![EXCLUSIVE_COST_FEATURE.to_string()])
    }

    /// `<kind>.count`, `<kind>.card_sum` for each kind, in the given order.
    pub fn flattened<'a>(kinds: impl IntoIterator<Item = &'a OperatorKind>) -> Self {
        let names = kinds
            .into_iter()
            .flat_map(|k| [format!("{k}.count"), format!("{k}.card_sum")])
            .collect();
        FeatureSchema::new(names)
    }

    /// Flattened schema covering every kind seen in `samples`, sorted by name.
    pub fn flattened_from<'a>(samples: impl IntoIterator<Item = &'a PlanSample>) -> Self {
        let kinds: BTreeSet<OperatorKind> = samples
            .into_iter()
            .flat_map(|s| s.root.iter().map(|n| n.kind.clone()))
            .collect();
        FeatureSchema::flattened(&kinds)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn mode(&self) -> FeatureMode {
        if self.names.len() == 1 && self.names[0] == PLAN_COST_FEATURE {
            FeatureMode::CostOnly
        } else {
            FeatureMode::Flattened
        }
    }

    /// Operator kinds of a flattened schema, in schema order.
    fn kinds(&self) -> Result<Vec<OperatorKind>> {
        if !self.names.len().is_multiple_of(2) {
            return Err(Error::Schema("flattened schema must hold count/card_sum pairs".into()));
        }
        self.names
            .chunks(2)
            .map(|pair| {
                let kind = pair[0]
                    .strip_suffix(".count")
                    .filter(|k| pair[1].strip_suffix(".card_sum") == Some(k))
                    .ok_or_else(|| Error::Schema(format!("malformed flattened schema entry `{}`", pair[0])))?;
                OperatorKind::new(kind)
            })
            .collect()
    }
}

/// Feature values laid out under a schema. Vectors are comparable only when
/// their schemas are identical.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    schema: Arc<FeatureSchema>,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(schema: Arc<FeatureSchema>, values: Vec<f64>) -> Result<Self> {
        if values.len() != schema.len() {
            return Err(Error::Schema(format!(
                "{} values for a schema of {} features",
                values.len(),
                schema.len()
            )));
        }
        Ok(FeatureVector { schema, values })
    }

    /// Single-feature vector, the common case for cost-only models.
    pub fn scalar(schema: &Arc<FeatureSchema>, value: f64) -> Result<Self> {
        FeatureVector::new(Arc::clone(schema), vec![value])
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn shared_schema(&self) -> &Arc<FeatureSchema> {
        &self.schema
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Checks that a vector was built under `expected`.
pub(crate) fn check_schema(expected: &FeatureSchema, x: &FeatureVector) -> Result<()> {
    if *x.schema == *expected {
        Ok(())
    } else {
        Err(Error::Schema(format!(
            "vector schema {:?} does not match model schema {:?}",
            x.schema.names(),
            expected.names()
        )))
    }
}

/// Builds a sample's feature vector.
///
/// In flattened mode without a fixed schema, the schema is derived from this
/// sample's own kinds. With a fixed schema, a kind the schema does not list
/// is an error: the caller has to rebuild the schema.
pub fn to_feature_vector(
    sample: &PlanSample,
    mode: FeatureMode,
    schema: Option<&Arc<FeatureSchema>>,
) -> Result<FeatureVector> {
    match mode {
        FeatureMode::CostOnly => {
            let schema = match schema {
                Some(s) if s.mode() == FeatureMode::CostOnly => Arc::clone(s),
                Some(s) => {
                    return Err(Error::Schema(format!(
                        "cost-only features requested under schema {:?}",
                        s.names()
                    )))
                }
                None => Arc::new(FeatureSchema::cost_only()),
            };
            FeatureVector::new(schema, vec![sample.plan_cost()])
        }
        FeatureMode::Flattened => {
            let flat = flatten_plan(sample);
            let schema = match schema {
                Some(s) => Arc::clone(s),
                None => Arc::new(FeatureSchema::flattened(flat.entries.keys())),
            };
            let kinds = schema.kinds()?;
            for kind in flat.entries.keys() {
                if !kinds.contains(kind) {
                    return Err(Error::Schema(format!(
                        "operator kind `{kind}` is not in the feature schema; rebuild it from data that includes this kind"
                    )));
                }
            }
            let values = kinds
                .iter()
                .flat_map(|k| {
                    let e = flat.get(k);
                    [e.count as f64, e.cardinality_sum]
                })
                .collect();
            FeatureVector::new(schema, values)
        }
    }
}
