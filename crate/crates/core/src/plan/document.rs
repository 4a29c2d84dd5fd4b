//! Plan documents: one JSON object per sample.
//!
//! ```text
//! {"query_id": "q1", "template_id": "t3", "execution_time_ms": 12.0,
//!  "plan": {"Node Type": "Seq Scan", "Startup Cost": 0.0, "Total Cost": 10.5,
//!           "Plan Rows": 100, "Actual Total Time": 11.9, "Actual Loops": 1,
//!           "Plans": [...]}}
//! ```
//!
//! Node keys are the subset of PostgreSQL `EXPLAIN (ANALYZE, FORMAT JSON)`
//! needed here; anything else is ignored. `"Plan"` and `"Execution Time"` are
//! accepted as aliases of `"plan"` and `"execution_time_ms"`.

use serde_json::{Map, Value};

use super::{normalize_operator_kind, PlanNode, PlanSample};
use crate::error::{Error, Result};

pub fn parse_explain_document(text: &str) -> Result<PlanSample> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::parse("$", format!("malformed document: {e}")))?;
    sample_from_value(&value)
}

pub fn sample_from_value(value: &Value) -> Result<PlanSample> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::parse("$", "document must be a JSON object"))?;

    let query_id = match obj.get("query_id") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(Error::parse("query_id", "expected a string")),
        None => return Err(Error::parse("query_id", "missing required key")),
    };
    let template_id = match obj.get("template_id") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(Error::parse("template_id", "expected a string or null")),
    };
    let (time_key, time) = match (obj.get("execution_time_ms"), obj.get("Execution Time")) {
        (Some(v), _) => ("execution_time_ms", v),
        (None, Some(v)) => ("Execution Time", v),
        (None, None) => ("execution_time_ms", &Value::Null),
    };
    let execution_time_ms = match time {
        Value::Null => None,
        v => {
            let t = v
                .as_f64()
                .ok_or_else(|| Error::parse(time_key, "expected a number or null"))?;
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::parse(
                    time_key,
                    format!("execution time must be positive, got {t}"),
                ));
            }
            Some(t)
        }
    };
    let (plan_key, plan) = match (obj.get("plan"), obj.get("Plan")) {
        (Some(p), _) => ("plan", p),
        (None, Some(p)) => ("Plan", p),
        (None, None) => return Err(Error::parse("plan", "missing required key")),
    };
    let root = node_from_value(plan, plan_key)?;

    Ok(PlanSample {
        query_id,
        template_id,
        root,
        execution_time_ms,
    })
}

fn node_from_value(value: &Value, path: &str) -> Result<PlanNode> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::parse(path, "plan node must be a JSON object"))?;

    let kind = match obj.get("Node Type") {
        Some(Value::String(s)) => {
            normalize_operator_kind(s).map_err(|_| Error::parse(format!("{path}.Node Type"), "empty operator name"))?
        }
        Some(_) => return Err(Error::parse(format!("{path}.Node Type"), "expected a string")),
        None => return Err(Error::parse(format!("{path}.Node Type"), "missing required key")),
    };
    let startup_cost = required_non_negative(obj, path, "Startup Cost")?;
    let total_cost = required_non_negative(obj, path, "Total Cost")?;
    if total_cost < startup_cost {
        return Err(Error::parse(
            format!("{path}.Total Cost"),
            format!("total cost {total_cost} is below startup cost {startup_cost}"),
        ));
    }
    let plan_rows = required_non_negative(obj, path, "Plan Rows")?;

    let actual_total_time_ms = optional_non_negative(obj, path, "Actual Total Time")?;
    let actual_loops = match obj.get("Actual Loops") {
        None | Some(Value::Null) => None,
        Some(v) => Some(loops_from_value(v, &format!("{path}.Actual Loops"))?),
    };
    let actual_loops = match (actual_total_time_ms, actual_loops) {
        (Some(_), None) => Some(1),
        (_, loops) => loops,
    };

    let children = match obj.get("Plans") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(i, child)| node_from_value(child, &format!("{path}.Plans[{i}]")))
            .collect::<Result<_>>()?,
        Some(_) => return Err(Error::parse(format!("{path}.Plans"), "expected an array")),
    };

    Ok(PlanNode {
        kind,
        startup_cost,
        total_cost,
        plan_rows,
        actual_total_time_ms,
        actual_loops,
        children,
    })
}

fn required_non_negative(obj: &Map<String, Value>, path: &str, key: &str) -> Result<f64> {
    optional_non_negative(obj, path, key)?.ok_or_else(|| Error::parse(format!("{path}.{key}"), "missing required key"))
}

fn optional_non_negative(obj: &Map<String, Value>, path: &str, key: &str) -> Result<Option<f64>> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => {
            let x = v
                .as_f64()
                .ok_or_else(|| Error::parse(format!("{path}.{key}"), "expected a number"))?;
            if !x.is_finite() || x < 0.0 {
                return Err(Error::parse(
                    format!("{path}.{key}"),
                    format!("expected a finite non-negative number, got {x}"),
                ));
            }
            Ok(Some(x))
        }
    }
}

fn loops_from_value(v: &Value, path: &str) -> Result<u64> {
    if let Some(n) = v.as_u64() {
        return Ok(n);
    }
    match v.as_f64() {
        Some(x) if x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 => Ok(x as u64),
        _ => Err(Error::parse(path, "expected a non-negative integer")),
    }
}

/// Inverse of [`sample_from_value`].
pub fn sample_to_value(sample: &PlanSample) -> Value {
    let mut obj = Map::new();
    obj.insert("query_id".into(), Value::String(sample.query_id.clone()));
    obj.insert(
        "template_id".into(),
        sample
            .template_id
            .as_ref()
            .map_or(Value::Null, |t| Value::String(t.clone())),
    );
    obj.insert(
        "execution_time_ms".into(),
        sample.execution_time_ms.map_or(Value::Null, Value::from),
    );
    obj.insert("plan".into(), node_to_value(&sample.root));
    Value::Object(obj)
}

fn node_to_value(node: &PlanNode) -> Value {
    let mut obj = Map::new();
    obj.insert("Node Type".into(), Value::String(node.kind.to_string()));
    obj.insert("Startup Cost".into(), Value::from(node.startup_cost));
    obj.insert("Total Cost".into(), Value::from(node.total_cost));
    obj.insert("Plan Rows".into(), Value::from(node.plan_rows));
    if let Some(t) = node.actual_total_time_ms {
        obj.insert("Actual Total Time".into(), Value::from(t));
    }
    if let Some(l) = node.actual_loops {
        obj.insert("Actual Loops".into(), Value::from(l));
    }
    if !node.children.is_empty() {
        obj.insert(
            "Plans".into(),
            Value::Array(node.children.iter().map(node_to_value).collect()),
        );
    }
    Value::Object(obj)
}

/// Single-line JSON rendering of a sample, as stored in corpus files.
pub fn to_document_line(sample: &PlanSample) -> String {
    sample_to_value(sample).to_string()
}
