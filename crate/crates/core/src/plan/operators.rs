use serde::Serialize;

use super::{OperatorKind, PlanNode, PlanSample};

/// One plan node with its own (exclusive) share of cost and time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorRecord {
    pub kind: OperatorKind,
    pub inclusive_cost: f64,
    pub exclusive_cost: f64,
    /// Absent when the node or one of its children carries no timing.
    pub inclusive_time_ms: Option<f64>,
    pub exclusive_time_ms: Option<f64>,
    pub plan_rows: f64,
    /// Set when a negative exclusive cost or time was clamped to zero.
    pub clamped: bool,
}

/// One record per node, in pre-order.
///
/// Exclusive cost is `max(0, total_cost - Σ children total_cost)`; exclusive
/// time is the same subtraction over inclusive times, where a node's
/// inclusive time is its per-loop time multiplied by its loop count.
pub fn decompose_operators(sample: &PlanSample) -> Vec<OperatorRecord> {
    sample.root.iter().map(record_for).collect()
}

fn record_for(node: &PlanNode) -> OperatorRecord {
    let child_cost: f64 = node.children.iter().map(|c| c.total_cost).sum();
    let raw_cost = node.total_cost - child_cost;

    let inclusive_time_ms = node.inclusive_time_ms();
    let child_times: Option<f64> = node.children.iter().map(PlanNode::inclusive_time_ms).sum();
    let raw_time = match (inclusive_time_ms, child_times) {
        (Some(t), Some(c)) => Some(t - c),
        _ => None,
    };

    OperatorRecord {
        kind: node.kind.clone(),
        inclusive_cost: node.total_cost,
        exclusive_cost: raw_cost.max(0.0),
        inclusive_time_ms,
        exclusive_time_ms: raw_time.map(|t| t.max(0.0)),
        plan_rows: node.plan_rows,
        clamped: raw_cost < 0.0 || raw_time.is_some_and(|t| t < 0.0),
    }
}
