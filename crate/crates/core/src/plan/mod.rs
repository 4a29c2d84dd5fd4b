//! Typed execution plans and the feature representations derived from them.

mod document;
mod features;
mod kind;
mod operators;
mod tree;

pub use document::{parse_explain_document, sample_from_value, sample_to_value, to_document_line};
pub(crate) use features::check_schema;
pub use features::{
    flatten_plan, to_feature_vector, FeatureMode, FeatureSchema, FeatureVector, FlattenedPlan, KindSummary,
    EXCLUSIVE_COST_FEATURE, PLAN_COST_FEATURE,
};
pub use kind::{normalize_operator_kind, OperatorKind};
pub use operators::{decompose_operators, OperatorRecord};
pub use tree::{PlanNode, PlanSample, PreOrder};
