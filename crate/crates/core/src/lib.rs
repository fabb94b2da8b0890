//! Streaming corpus-curation stages for building pre-training corpora for
//! morphologically rich languages.
//!
//! The crate is organised by stage family:
//!
//! - [`corpus`]: the [`Document`](corpus::Document) record, line-delimited IO
//!   and the provider traits (tokenizer, language classifier, morphological
//!   analyzer, embedder) that stages consume.
//! - [`filters`]: cleaning, language-ID, URL and PII stages.
//! - [`heuristic`]: line-structure quality metrics and their grid evaluation.
//! - [`morph`]: case-suffix entropy and lemma diversity, the rule-based
//!   analyzer and the threshold sweep.
//! - [`dedup`]: exact-hash and embedding-based deduplication.
//! - [`curriculum`]: page merging, phase pipelines, replay mixing and MLM masking.
//! - [`scoring`]: cosine, InfoNCE, guided negative masks and gated rewards.
//! - [`reporting`]: token statistics, weighted perplexity, production
//!   efficiency and report emission.
//!
//! Per-document work fans out through [`par`], which uses rayon when the
//! `parallel` feature is enabled and plain iterators otherwise. Every
//! parallel path collects in input order so results do not depend on the
//! thread count.

pub mod corpus;
pub mod curriculum;
pub mod decision;
pub mod dedup;
pub mod filters;
pub mod heuristic;
pub mod morph;
pub mod par;
pub mod reporting;
pub mod scoring;
pub mod synth;

pub use corpus::{Document, RecordError};
pub use decision::{Measure, Reason, StageDecision};
