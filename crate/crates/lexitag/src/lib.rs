//! lexitag — a library and CLI toolkit for multi-label legal-document
//! tagging.
//!
//! The toolkit covers the desk-scale side of an instruction-tuned tagging
//! workflow: classical retrieval baselines (per-label TF-IDF centroids,
//! kNN over document vectors, BM25 with labels as queries), a one-vs-all
//! logistic testbed with inverse-frequency loss weighting, instruction
//! dataset export for external LLM trainers, parsing of generated label
//! lists, and a full micro/macro-F1 evaluation suite with frequency- and
//! length-bucketed reports. External LLMs are black boxes: they consume
//! the exported prompt datasets and return generations for parsing and
//! scoring.

pub mod baselines;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod fixture;
pub mod labelparse;
pub mod linear;
pub mod metrics;
pub mod prompting;
pub mod text;

pub use error::{Error, Result};
