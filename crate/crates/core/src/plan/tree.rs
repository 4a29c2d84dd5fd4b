use super::OperatorKind;

/// One operator in an execution plan.
///
/// Costs are in optimizer units (arbitrary scale). `actual_total_time_ms`
/// is the per-loop inclusive time as reported by `EXPLAIN ANALYZE`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanNode {
    pub kind: OperatorKind,
    pub startup_cost: f64,
    pub total_cost: f64,
    pub plan_rows: f64,
    pub actual_total_time_ms: Option<f64>,
    pub actual_loops: Option<u64>,
    pub children: Vec<PlanNode>,
}

impl PlanNode {
    /// A node with estimates only and no children.
    pub fn new(kind: OperatorKind, startup_cost: f64, total_cost: f64, plan_rows: f64) -> Self {
        PlanNode {
            kind,
            startup_cost,
            total_cost,
            plan_rows,
            actual_total_time_ms: None,
            actual_loops: None,
            children: Vec::new(),
        }
    }

    pub fn with_timing(mut self, per_loop_ms: f64, loops: u64) -> Self {
        self.actual_total_time_ms = Some(per_loop_ms);
        self.actual_loops = Some(loops);
        self
    }

    pub fn with_children(mut self, children: Vec<PlanNode>) -> Self {
        self.children = children;
        self
    }

    /// Inclusive measured time over all loops, when the node was timed.
    pub fn inclusive_time_ms(&self) -> Option<f64> {
        let per_loop = self.actual_total_time_ms?;
        Some(per_loop * self.actual_loops.unwrap_or(1) as f64)
    }

    /// Pre-order traversal.
    pub fn iter(&self) -> PreOrder<'_> {
        PreOrder { stack: vec![self] }
    }

    pub fn node_count(&self) -> usize {
        self.iter().count()
    }
}

pub struct PreOrder<'a> {
    stack: Vec<&'a PlanNode>,
}

impl<'a> Iterator for PreOrder<'a> {
    type Item = &'a PlanNode;

    fn next(&mut self) -> Option<Self::Item> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children.iter().rev());
        Some(node)
    }
}

/// One executed (or to-be-executed) query.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanSample {
    pub query_id: String,
    pub template_id: Option<String>,
    pub root: PlanNode,
    /// Measured wall time; `None` for prediction-only samples.
    pub execution_time_ms: Option<f64>,
}

impl PlanSample {
    pub fn new(query_id: impl Into<String>, root: PlanNode) -> Self {
        PlanSample {
            query_id: query_id.into(),
            template_id: None,
            root,
            execution_time_ms: None,
        }
    }

    pub fn with_template(mut self, template_id: impl Into<String>) -> Self {
        self.template_id = Some(template_id.into());
        self
    }

    pub fn with_execution_time(mut self, ms: f64) -> Self {
        self.execution_time_ms = Some(ms);
        self
    }

    /// Total optimizer cost of the plan, i.e. the root's total cost.
    pub fn plan_cost(&self) -> f64 {
        self.root.total_cost
    }

    pub fn is_timed(&self) -> bool {
        self.execution_time_ms.is_some()
    }

    /// Set when some node has more than two children. Such plans parse
    /// normally; whether to exclude them is left to the caller.
    pub fn is_non_tree(&self) -> bool {
        self.root.iter().any(|n| n.children.len() > 2)
    }
}
