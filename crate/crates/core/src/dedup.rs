//! Exact and embedding-based near-duplicate removal.
//!
//! Both passes keep the first occurrence in input order. Hashing and
//! embedding fan out over the worker pool; the keep/drop loop is sequential
//! over the original index, so results do not depend on the thread count.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use xxhash_rust::xxh3::xxh3_128;

use crate::corpus::{nfc, Document, Embedder};
use crate::decision::{Reason, StageDecision};
use crate::filters::ConfigError;
use crate::par;

pub const STAGE_EXACT: &str = "exact_dedup";
pub const STAGE_SEMANTIC: &str = "semantic_dedup";

pub const GENERAL_THRESHOLD: f64 = 0.75;
pub const LEGAL_THRESHOLD: f64 = 0.95;

// below this many retained vectors the similarity scan stays on one thread
const PAR_SCAN_MIN: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DedupMode {
    Exact,
    Semantic,
    Both,
}

impl FromStr for DedupMode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Self::Exact),
            "semantic" => Ok(Self::Semantic),
            "both" => Ok(Self::Both),
            other => Err(ConfigError(format!("unknown dedup mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    General,
    Legal,
}

impl Profile {
    pub fn threshold(self) -> f64 {
        match self {
            Self::General => GENERAL_THRESHOLD,
            Self::Legal => LEGAL_THRESHOLD,
        }
    }
}

impl FromStr for Profile {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "general" => Ok(Self::General),
            "legal" => Ok(Self::Legal),
            other => Err(ConfigError(format!("unknown dedup profile {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeepPolicy {
    #[default]
    FirstSeen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DedupConfig {
    pub mode: DedupMode,
    pub similarity_threshold: f64,
    pub keep_policy: KeepPolicy,
}

impl Default for DedupConfig {
    fn default() -> Self {
        Self::profile(Profile::General)
    }
}

impl DedupConfig {
    pub fn profile(p: Profile) -> Self {
        Self {
            mode: DedupMode::Both,
            similarity_threshold: p.threshold(),
            keep_policy: KeepPolicy::FirstSeen,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.similarity_threshold) {
            return Err(ConfigError(format!(
                "similarity_threshold {} outside [0,1]",
                self.similarity_threshold
            )));
        }
        Ok(())
    }
}

/// Per-document verdict; `similarity` is set only for semantic matches.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DedupDecision {
    pub id: String,
    pub kept: bool,
    pub duplicate_of: Option<String>,
    pub similarity: Option<f64>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub embed_error: bool,
}

impl DedupDecision {
    fn kept(id: &str) -> Self {
        Self {
            id: id.to_owned(),
            kept: true,
            duplicate_of: None,
            similarity: None,
            embed_error: false,
        }
    }

    pub fn to_stage(&self) -> StageDecision {
        match (self.kept, self.similarity) {
            (true, _) if self.embed_error => StageDecision::keep(STAGE_SEMANTIC).with("embed_error", 1usize),
            (true, _) => StageDecision::keep(if self.similarity.is_some() { STAGE_SEMANTIC } else { STAGE_EXACT }),
            (false, None) => StageDecision::drop(STAGE_EXACT, Reason::ExactDuplicate)
                .with("duplicate_of", self.duplicate_of.clone().unwrap_or_default()),
            (false, Some(sim)) => StageDecision::drop(STAGE_SEMANTIC, Reason::SemanticDuplicate)
                .with("duplicate_of", self.duplicate_of.clone().unwrap_or_default())
                .with("similarity", sim),
        }
    }
}

/// Streaming exact deduplicator. Retained texts are kept to confirm hash hits
/// byte for byte.
#[derive(Debug, Default)]
pub struct ExactDeduper {
    seen: HashMap<u128, Vec<(String, String)>>,
}

impl ExactDeduper {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, doc: &Document) -> DedupDecision {
        let text = nfc(&doc.text);
        let h = xxh3_128(text.as_bytes());
        self.observe_hashed(&doc.id, &text, h)
    }

    fn observe_hashed(&mut self, id: &str, text: &str, hash: u128) -> DedupDecision {
        let bucket = self.seen.entry(hash).or_default();
        if let Some((first, _)) = bucket.iter().find(|(_, t)| t == text) {
            return DedupDecision {
                id: id.to_owned(),
                kept: false,
                duplicate_of: Some(first.clone()),
                similarity: None,
                embed_error: false,
            };
        }
        bucket.push((id.to_owned(), text.to_owned()));
        DedupDecision::kept(id)
    }
}

pub fn dedup_exact(docs: &[Document]) -> Vec<DedupDecision> {
    let hashes = par::map(docs, |d| xxh3_128(nfc(&d.text).as_bytes()));
    let mut deduper = ExactDeduper::new();
    docs.iter()
        .zip(hashes)
        .map(|(d, h)| deduper.observe_hashed(&d.id, &nfc(&d.text), h))
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Greedy first-seen pass: a document is dropped when its cosine similarity to
/// any retained document reaches `threshold`. It then points at the most
/// similar retained document, ties going to the earliest. Documents whose
/// embedding fails, is non-finite, has the wrong dimension or is all zero are
/// kept and flagged.
pub fn dedup_semantic(docs: &[Document], threshold: f64, embedder: &dyn Embedder) -> Vec<DedupDecision> {
    let dim = embedder.dimension();
    let embedded = par::map(docs, |d| {
        let v = embedder.embed(&d.text).ok()?;
        if v.len() != dim || v.iter().any(|x| !x.is_finite()) {
            return None;
        }
        let n = dot(&v, &v);
        (n > 0.0).then_some((v, n))
    });

    let mut retained: Vec<(usize, Vec<f64>, f64)> = Vec::new();
    let mut out = Vec::with_capacity(docs.len());
    for (i, (doc, emb)) in docs.iter().zip(embedded).enumerate() {
        let Some((v, n)) = emb else {
            out.push(DedupDecision {
                embed_error: true,
                ..DedupDecision::kept(&doc.id)
            });
            continue;
        };
        let sim = |r: &(usize, Vec<f64>, f64)| (dot(&v, &r.1) / (n * r.2).sqrt()).clamp(-1.0, 1.0);
        let sims: Vec<f64> = if retained.len() >= PAR_SCAN_MIN {
            par::map(&retained, sim)
        } else {
            retained.iter().map(sim).collect()
        };
        let best = sims
            .iter()
            .enumerate()
            .fold(None, |acc: Option<(usize, f64)>, (k, &s)| match acc {
                Some((_, b)) if b >= s => acc,
                _ => Some((k, s)),
            });
        match best {
            Some((k, s)) if s >= threshold => out.push(DedupDecision {
                id: doc.id.clone(),
                kept: false,
                duplicate_of: Some(docs[retained[k].0].id.clone()),
                similarity: Some(s),
                embed_error: false,
            }),
            _ => {
                retained.push((i, v, n));
                out.push(DedupDecision::kept(&doc.id));
            }
        }
    }
    out
}

/// Runs the configured mode. In `Both`, exact duplicates are removed first and
/// only the survivors enter the semantic pass.
pub fn dedup(docs: &[Document], cfg: &DedupConfig, embedder: &dyn Embedder) -> Vec<DedupDecision> {
    match cfg.mode {
        DedupMode::Exact => dedup_exact(docs),
        DedupMode::Semantic => dedup_semantic(docs, cfg.similarity_threshold, embedder),
        DedupMode::Both => {
            let mut out = dedup_exact(docs);
            let survivors: Vec<usize> = (0..docs.len()).filter(|&i| out[i].kept).collect();
            let subset: Vec<Document> = survivors.iter().map(|&i| docs[i].clone()).collect();
            let semantic = dedup_semantic(&subset, cfg.similarity_threshold, embedder);
            for (i, d) in survivors.into_iter().zip(semantic) {
                out[i] = d;
            }
            out
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DedupSummary {
    pub total: usize,
    pub kept: usize,
    pub dropped_exact: usize,
    pub dropped_semantic: usize,
    pub duplicate_ratio: f64,
    pub embed_errors: usize,
}

impl fmt::Display for DedupSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "total={} kept={} dropped_exact={} dropped_semantic={} duplicate_ratio={}",
            self.total, self.kept, self.dropped_exact, self.dropped_semantic, self.duplicate_ratio
        )
    }
}

pub fn dedup_report(decisions: &[DedupDecision]) -> DedupSummary {
    let mut s = DedupSummary {
        total: decisions.len(),
        ..Default::default()
    };
    for d in decisions {
        match (d.kept, d.similarity) {
            (true, _) => s.kept += 1,
            (false, None) => s.dropped_exact += 1,
            (false, Some(_)) => s.dropped_semantic += 1,
        }
        s.embed_errors += usize::from(d.embed_error);
    }
    if s.total > 0 {
        s.duplicate_ratio = (s.total - s.kept) as f64 / s.total as f64;
    }
    s
}
