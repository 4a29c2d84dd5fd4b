use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalized operator name, e.g. `seq_scan` or `hash_join`.
///
/// The set is open: any non-empty name is accepted and kept after
/// normalization (lowercase, runs of whitespace collapsed to one `_`).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct OperatorKind(String);

impl OperatorKind {
    pub fn new(raw: &str) -> Result<Self> {
        normalize_operator_kind(raw)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Number of children this kind takes when synthetic plans are laid out
    /// from a pre-order sequence of kinds.
    pub(crate) fn synthetic_arity(&self) -> usize {
        match self.0.as_str() {
            "nested_loop" | "hash_join" | "merge_join" => 2,
            k if k.ends_with("_scan") => 0,
            _ => 1,
        }
    }
}

pub fn normalize_operator_kind(raw: &str) -> Result<OperatorKind> {
    let parts: Vec<String> = raw
        .split(|c: char| c.is_whitespace() || c == '_')
        .filter(|p| !p.is_empty())
        .map(str::to_lowercase)
        .collect();
    if parts.is_empty() {
        return Err(Error::parse("Node Type", "empty operator name"));
    }
    Ok(OperatorKind(parts.join("_")))
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for OperatorKind {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        normalize_operator_kind(&value)
    }
}

impl From<OperatorKind> for String {
    fn from(kind: OperatorKind) -> String {
        kind.0
    }
}

impl std::str::FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        normalize_operator_kind(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalizes_examples() {
        assert_eq!(normalize_operator_kind("Seq Scan").unwrap().as_str(), "seq_scan");
        assert_eq!(normalize_operator_kind("seq_scan").unwrap().as_str(), "seq_scan");
        assert_eq!(
            normalize_operator_kind("Bitmap  Heap Scan").unwrap().as_str(),
            "bitmap_heap_scan"
        );
        assert_eq!(normalize_operator_kind(" Hash\tJoin ").unwrap().as_str(), "hash_join");
    }

    #[test]
    fn empty_name_is_rejected() {
        for raw in ["", "   ", "__"] {
            let err = normalize_operator_kind(raw).unwrap_err();
            assert!(err.to_string().contains("empty operator name"), "{err}");
        }
    }

    #[test]
    fn arity() {
        let k = |s| OperatorKind::new(s).unwrap().synthetic_arity();
        assert_eq!(k("Hash Join"), 2);
        assert_eq!(k("Index Only Scan"), 0);
        assert_eq!(k("Sort"), 1);
    }

    proptest! {
        #[test]
        fn idempotent(raw in "[A-Za-z _\t]{1,24}") {
            if let Ok(once) = normalize_operator_kind(&raw) {
                let twice = normalize_operator_kind(once.as_str()).unwrap();
                prop_assert_eq!(once, twice);
            }
        }

        #[test]
        fn case_and_spacing_insensitive(words in prop::collection::vec("[a-z]{1,8}", 1..4), gaps in prop::collection::vec(" {1,3}", 3)) {
            let plain = words.join(" ");
            let mut shouted = String::new();
            for (i, w) in words.iter().enumerate() {
                if i > 0 {
                    shouted.push_str(&gaps[i - 1]);
                }
                shouted.push_str(&w.to_uppercase());
            }
            prop_assert_eq!(normalize_operator_kind(&plain).unwrap(), normalize_operator_kind(&shouted).unwrap());
        }
    }
}
