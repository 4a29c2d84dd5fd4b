//! Model files: one JSON document with a `format_version` and a `family`
//! tag. Plan-level models are tagged with their regressor family,
//! operator-level models with `operator_level`.

use std::fs;
use std::path::Path;

use serde_json::{Map, Value};

use super::{OperatorLevelModel, PlanLevelModel, Predictor};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u64 = 1;
const OPERATOR_LEVEL_TAG: &str = "operator_level";
const PLAN_TAGS: [&str; 4] = ["ols", "power_law", "knn", "svr"];

pub fn model_to_value(predictor: &Predictor) -> Value {
    let (mut body, family) = match predictor {
        Predictor::Plan(m) => (serde_json::to_value(m), m.model.family().tag()),
        Predictor::Operator(m) => (serde_json::to_value(m), OPERATOR_LEVEL_TAG),
    };
    let body = body
        .as_mut()
        .expect("models serialize to JSON")
        .as_object_mut()
        .expect("models are objects");
    let mut doc = Map::new();
    doc.insert("format_version".into(), MODEL_FORMAT_VERSION.into());
    doc.insert("family".into(), family.into());
    if matches!(predictor, Predictor::Plan(_)) {
        doc.insert("level".into(), "plan".into());
    }
    doc.append(body);
    Value::Object(doc)
}

pub fn model_from_value(value: &Value, location: &str) -> Result<Predictor> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::format(location, "model file must hold a JSON object"))?;
    match obj.get("format_version").and_then(Value::as_u64) {
        Some(MODEL_FORMAT_VERSION) => {}
        Some(v) => {
            return Err(Error::format(
                location,
                format!("unsupported model format version {v} (this build reads version {MODEL_FORMAT_VERSION})"),
            ))
        }
        None => return Err(Error::format(location, "missing `format_version`")),
    }
    let family = obj
        .get("family")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::format(location, "missing `family` tag"))?;
    let bad = |e: serde_json::Error| Error::format(location, format!("invalid `{family}` model: {e}"));
    if family == OPERATOR_LEVEL_TAG {
        let m: OperatorLevelModel = serde_json::from_value(value.clone()).map_err(bad)?;
        return Ok(Predictor::Operator(m));
    }
    if PLAN_TAGS.contains(&family) {
        let m: PlanLevelModel = serde_json::from_value(value.clone()).map_err(bad)?;
        if m.model.family().tag() != family {
            return Err(Error::format(
                location,
                format!("`family` says {family} but the model body is {}", m.model.family()),
            ));
        }
        return Ok(Predictor::Plan(m));
    }
    Err(Error::format(
        location,
        format!("unknown model family `{family}`; expected one of ols, power_law, knn, svr, operator_level"),
    ))
}

pub fn save_model(predictor: &Predictor, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&model_to_value(predictor)).expect("JSON values always serialize");
    fs::write(path, text + "\n")?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<Predictor> {
    let location = path.display().to_string();
    let text = fs::read_to_string(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::format(&location, e))?;
    model_from_value(&value, &location)
}
