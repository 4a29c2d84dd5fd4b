use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde_json::Value;

use super::store::{CorpusMetadata, CorpusStore};
use crate::error::{Error, Result};
use crate::plan::{sample_from_value, PlanSample};

/// Reads plan documents from `paths`, in file order and then document
/// order.
///
/// A file may hold one (possibly pretty-printed) object or many objects
/// separated by whitespace, such as newline-delimited JSON. A corpus header
/// line is skipped, so saved corpus files can be re-ingested.
pub fn ingest<P: AsRef<Path>>(paths: &[P], label: &str) -> Result<CorpusStore> {
    let mut samples = Vec::new();
    let mut seen = HashSet::new();
    for path in paths {
        let path = path.as_ref();
        let text =
            fs::read_to_string(path).map_err(|e| Error::format(path.display(), format!("cannot read file: {e}")))?;
        for sample in parse_documents(&text, &path.display().to_string())? {
            if !seen.insert(sample.query_id.clone()) {
                return Err(Error::Duplicate(sample.query_id));
            }
            samples.push(sample);
        }
    }
    CorpusStore::new(CorpusMetadata::ingested(label), samples)
}

/// Parses every document in `text`; errors carry `origin` and the byte
/// offset where the offending document starts.
pub fn parse_documents(text: &str, origin: &str) -> Result<Vec<PlanSample>> {
    let mut out = Vec::new();
    let mut stream = serde_json::Deserializer::from_str(text).into_iter::<Value>();
    loop {
        let start = stream.byte_offset() + leading_whitespace(&text[stream.byte_offset()..]);
        let Some(next) = stream.next() else { break };
        let value =
            next.map_err(|e| Error::format(format!("{origin}: byte {start}"), format!("malformed JSON: {e}")))?;
        if value.get("format").and_then(Value::as_str) == Some("qpp-corpus") {
            continue;
        }
        out.push(sample_from_value(&value).map_err(|e| Error::format(format!("{origin}: byte {start}"), e))?);
    }
    Ok(out)
}

fn leading_whitespace(s: &str) -> usize {
    s.len() - s.trim_start().len()
}
