//! Plan corpora: files, ingestion and synthetic generation.

mod cost_model;
mod ingest;
mod store;
mod synthetic;

pub use cost_model::{optimizer_cost, CardinalityProfile, CostModelParams};
pub use ingest::{ingest, parse_documents};
pub use store::{
    append_sample, load_corpus, parse_corpus, save_corpus, CorpusMetadata, CorpusStore, Generator, IngestedTag,
    LoadedCorpus, CORPUS_FORMAT_VERSION,
};
pub use synthetic::{
    generate_synthetic, generate_synthetic_detailed, presets, CardinalityRanges, SyntheticSample, SyntheticSpec,
    TemplateSpec, TimeLaw,
};
