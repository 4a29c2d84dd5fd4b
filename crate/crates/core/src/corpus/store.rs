use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::synthetic::SyntheticSpec;
use crate::error::{Error, Result};
use crate::plan::{sample_from_value, to_document_line, PlanSample};

pub const CORPUS_FORMAT_VERSION: u32 = 1;
const FORMAT_TAG: &str = "qpp-corpus";

/// Where a corpus came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Generator {
    /// Serialized as the string `"ingested"`.
    Ingested(IngestedTag),
    Synthetic(Box<SyntheticSpec>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IngestedTag {
    Ingested,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusMetadata {
    pub label: String,
    pub generator: Generator,
    /// Supplied by the caller; never read from the clock, so generated
    /// files stay reproducible.
    #[serde(default)]
    pub created_at: Option<String>,
}

impl CorpusMetadata {
    pub fn ingested(label: impl Into<String>) -> Self {
        CorpusMetadata {
            label: label.into(),
            generator: Generator::Ingested(IngestedTag::Ingested),
            created_at: None,
        }
    }

    pub fn synthetic(spec: &SyntheticSpec) -> Self {
        CorpusMetadata {
            label: spec.label.clone(),
            generator: Generator::Synthetic(Box::new(spec.clone())),
            created_at: None,
        }
    }

    pub fn with_created_at(mut self, ts: impl Into<String>) -> Self {
        self.created_at = Some(ts.into());
        self
    }
}

/// An ordered corpus of samples with unique query ids.
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusStore {
    pub metadata: CorpusMetadata,
    samples: Vec<PlanSample>,
}

impl CorpusStore {
    pub fn new(metadata: CorpusMetadata, samples: Vec<PlanSample>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(samples.len());
        for s in &samples {
            if !seen.insert(s.query_id.as_str()) {
                return Err(Error::Duplicate(s.query_id.clone()));
            }
        }
        Ok(CorpusStore { metadata, samples })
    }

    pub fn samples(&self) -> &[PlanSample] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<PlanSample> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// A new store with `sample` appended at the end.
pub fn append_sample(store: &CorpusStore, sample: PlanSample) -> Result<CorpusStore> {
    if store.samples.iter().any(|s| s.query_id == sample.query_id) {
        return Err(Error::Duplicate(sample.query_id));
    }
    let mut next = store.clone();
    next.samples.push(sample);
    Ok(next)
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    #[serde(flatten)]
    metadata: CorpusMetadata,
}

/// Writes the header line and one document per line, through a temporary
/// file renamed into place.
pub fn save_corpus(store: &CorpusStore, path: &Path) -> Result<()> {
    let header = Header {
        format: FORMAT_TAG.into(),
        version: CORPUS_FORMAT_VERSION,
        metadata: store.metadata.clone(),
    };
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::format(path.display(), "corpus path has no file name"))?;
    let tmp = path.with_file_name(format!(".{}.tmp-{}", file_name.to_string_lossy(), std::process::id()));
    let write = || -> Result<()> {
        let mut out = std::io::BufWriter::new(fs::File::create(&tmp)?);
        serde_json::to_writer(&mut out, &header).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
        for s in &store.samples {
            out.write_all(to_document_line(s).as_bytes())?;
            out.write_all(b"\n")?;
        }
        out.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        fs::rename(&tmp, path)?;
        Ok(())
    };
    write().inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoadedCorpus {
    pub store: CorpusStore,
    pub warnings: Vec<String>,
}

pub fn load_corpus(path: &Path) -> Result<LoadedCorpus> {
    let text = fs::read_to_string(path)?;
    parse_corpus(&text, &path.display().to_string())
}

/// Parses corpus file contents; `origin` names the source in errors.
pub fn parse_corpus(text: &str, origin: &str) -> Result<LoadedCorpus> {
    if text.trim().is_empty() {
        return Ok(LoadedCorpus {
            store: CorpusStore::new(CorpusMetadata::ingested(""), Vec::new())?,
            warnings: vec![format!("{origin}: file is empty; loaded an empty corpus")],
        });
    }
    let mut lines = text.split('\n').enumerate().map(|(i, l)| (i + 1, l));
    let (_, first) = lines.next().expect("non-empty text has a line");
    let header_value: Value = serde_json::from_str(first)
        .map_err(|e| Error::format(format!("{origin}:1"), format!("unreadable corpus header: {e}")))?;
    match header_value.get("version").and_then(Value::as_u64) {
        Some(v) if v == CORPUS_FORMAT_VERSION as u64 => {}
        Some(v) => {
            return Err(Error::format(
                format!("{origin}:1"),
                format!("corpus format version {v} is not supported (expected {CORPUS_FORMAT_VERSION})"),
            ))
        }
        None => return Err(Error::format(format!("{origin}:1"), "corpus header has no `version`")),
    }
    let header: Header = serde_json::from_value(header_value)
        .map_err(|e| Error::format(format!("{origin}:1"), format!("invalid corpus header: {e}")))?;
    if header.format != FORMAT_TAG {
        return Err(Error::format(
            format!("{origin}:1"),
            format!("not a corpus file (format `{}`)", header.format),
        ));
    }

    let ends_with_newline = text.ends_with('\n');
    let mut samples = Vec::new();
    for (no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(line).map_err(|e| {
            let what = if !ends_with_newline && text.len() == line_end(text, no) {
                "truncated document"
            } else {
                "corrupted document"
            };
            Error::format(format!("{origin}:{no}"), format!("{what}: {e}"))
        })?;
        let sample = sample_from_value(&value).map_err(|e| Error::format(format!("{origin}:{no}"), e))?;
        samples.push(sample);
    }
    let store = CorpusStore::new(header.metadata, samples)?;
    Ok(LoadedCorpus {
        store,
        warnings: Vec::new(),
    })
}

/// Byte offset just past line `no` (1-based).
fn line_end(text: &str, no: usize) -> usize {
    text.split_inclusive('\n').take(no).map(str::len).sum()
}
