use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::merge::{merge_pages, MergeError};
use crate::corpus::{Document, Embedder, LanguageClassifier, MorphAnalyzer};
use crate::decision::{Measure, StageDecision};
use crate::dedup::{dedup_exact, dedup_semantic, DedupDecision, GENERAL_THRESHOLD};
use crate::filters::{
    anonymize_pii, clean, filter_language, filter_url, CleanConfig, ConfigError, LangFilterConfig, UrlFilterConfig,
};
use crate::heuristic::{filter_heuristic, HeuristicThresholds};
use crate::morph::{filter_morph, MorphFilterConfig};
use crate::par;
use crate::reporting::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageId {
    Clean,
    Langid,
    UrlFilter,
    Pii,
    HeuristicQuality,
    Morph,
    ExactDedup,
    SemanticDedup,
    PageMerge,
}

impl StageId {
    pub const ALL: [StageId; 9] = [
        Self::Clean,
        Self::Langid,
        Self::UrlFilter,
        Self::Pii,
        Self::HeuristicQuality,
        Self::Morph,
        Self::ExactDedup,
        Self::SemanticDedup,
        Self::PageMerge,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Clean => "clean",
            Self::Langid => "langid",
            Self::UrlFilter => "url_filter",
            Self::Pii => "pii",
            Self::HeuristicQuality => "heuristic_quality",
            Self::Morph => "morph",
            Self::ExactDedup => "exact_dedup",
            Self::SemanticDedup => "semantic_dedup",
            Self::PageMerge => "page_merge",
        }
    }
}

impl fmt::Display for StageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StageId {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| ConfigError(format!("unknown stage id {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoOptions {}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemanticDedupConfig {
    pub similarity_threshold: f64,
}

impl Default for SemanticDedupConfig {
    fn default() -> Self {
        Self {
            similarity_threshold: GENERAL_THRESHOLD,
        }
    }
}

/// A stage together with its settings, tagged by `id` when serialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum StageSpec {
    Clean(CleanConfig),
    Langid(LangFilterConfig),
    UrlFilter(UrlFilterConfig),
    Pii(NoOptions),
    HeuristicQuality(HeuristicThresholds),
    Morph(MorphFilterConfig),
    ExactDedup(NoOptions),
    SemanticDedup(SemanticDedupConfig),
    PageMerge(NoOptions),
}

impl StageSpec {
    pub fn default_for(id: StageId) -> Self {
        match id {
            StageId::Clean => Self::Clean(CleanConfig::default()),
            StageId::Langid => Self::Langid(LangFilterConfig::default()),
            StageId::UrlFilter => Self::UrlFilter(UrlFilterConfig::default()),
            StageId::Pii => Self::Pii(NoOptions {}),
            StageId::HeuristicQuality => Self::HeuristicQuality(HeuristicThresholds::default()),
            StageId::Morph => Self::Morph(MorphFilterConfig::default()),
            StageId::ExactDedup => Self::ExactDedup(NoOptions {}),
            StageId::SemanticDedup => Self::SemanticDedup(SemanticDedupConfig::default()),
            StageId::PageMerge => Self::PageMerge(NoOptions {}),
        }
    }

    pub fn id(&self) -> StageId {
        match self {
            Self::Clean(_) => StageId::Clean,
            Self::Langid(_) => StageId::Langid,
            Self::UrlFilter(_) => StageId::UrlFilter,
            Self::Pii(_) => StageId::Pii,
            Self::HeuristicQuality(_) => StageId::HeuristicQuality,
            Self::Morph(_) => StageId::Morph,
            Self::ExactDedup(_) => StageId::ExactDedup,
            Self::SemanticDedup(_) => StageId::SemanticDedup,
            Self::PageMerge(_) => StageId::PageMerge,
        }
    }

    /// Checks ranges and lowercases URL lists.
    pub fn validated(self) -> Result<Self, ConfigError> {
        let tag = |e: ConfigError| ConfigError(format!("stage {}: {}", self.id(), e.0));
        match &self {
            Self::Clean(c) => c.validate().map_err(tag)?,
            Self::Langid(c) => c.validate().map_err(tag)?,
            Self::HeuristicQuality(c) => c.validate().map_err(tag)?,
            Self::Morph(c) => c.validate().map_err(tag)?,
            Self::SemanticDedup(c) if !(0.0..=1.0).contains(&c.similarity_threshold) => {
                return Err(tag(ConfigError(format!(
                    "similarity_threshold {} outside [0,1]",
                    c.similarity_threshold
                ))))
            }
            Self::UrlFilter(c) => return Ok(Self::UrlFilter(UrlFilterConfig::new(&c.deny_keywords, &c.allow_domains))),
            _ => {}
        }
        Ok(self)
    }
}

/// Model-backed providers the stages draw on.
#[derive(Clone, Copy)]
pub struct Providers<'a> {
    pub classifier: &'a dyn LanguageClassifier,
    pub analyzer: &'a dyn MorphAnalyzer,
    pub embedder: &'a dyn Embedder,
}

/// A dropped document with the verdict that removed it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reject {
    pub id: String,
    pub stage: String,
    pub reason: String,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub measurements: BTreeMap<String, Measure>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    pub stage: String,
    pub docs_in: usize,
    pub docs_out: usize,
    pub reasons: BTreeMap<String, usize>,
}

impl StageReport {
    pub const COLUMNS: [&'static str; 5] = ["stage", "docs_in", "docs_out", "dropped", "reasons"];

    pub fn table(name: &str, rows: &[StageReport]) -> Table {
        let mut t = Table::new(name, Self::COLUMNS);
        for r in rows {
            let reasons: Vec<String> = r.reasons.iter().map(|(k, v)| format!("{k}={v}")).collect();
            t.push(vec![
                Cell::from(r.stage.as_str()),
                Cell::from(r.docs_in),
                Cell::from(r.docs_out),
                Cell::from(r.docs_in.saturating_sub(r.docs_out)),
                Cell::from(reasons.join(";")),
            ]);
        }
        t
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum StageError {
    #[error(transparent)]
    Merge(#[from] MergeError),
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub docs: Vec<Document>,
    pub reports: Vec<StageReport>,
    pub rejects: Vec<Reject>,
}

fn split(
    docs: Vec<Document>,
    decisions: Vec<StageDecision>,
    report: &mut StageReport,
    rejects: &mut Vec<Reject>,
) -> Vec<Document> {
    let mut kept = Vec::with_capacity(docs.len());
    for (doc, d) in docs.into_iter().zip(decisions) {
        if d.keep {
            kept.push(doc);
        } else {
            *report.reasons.entry(d.reason.as_str().to_owned()).or_default() += 1;
            rejects.push(Reject {
                id: doc.id,
                stage: d.stage,
                reason: d.reason.as_str().to_owned(),
                measurements: d.measurements,
            });
        }
    }
    kept
}

fn apply(
    spec: &StageSpec,
    docs: Vec<Document>,
    p: &Providers<'_>,
    report: &mut StageReport,
    rejects: &mut Vec<Reject>,
) -> Result<Vec<Document>, StageError> {
    let decisions: Vec<StageDecision> = match spec {
        StageSpec::Clean(c) => par::map(&docs, |d| clean(d, c)),
        StageSpec::Langid(c) => par::map(&docs, |d| filter_language(d, c, p.classifier)),
        StageSpec::UrlFilter(c) => par::map(&docs, |d| filter_url(d, c)),
        StageSpec::HeuristicQuality(c) => par::map(&docs, |d| filter_heuristic(d, c)),
        StageSpec::Morph(c) => par::map(&docs, |d| filter_morph(d, c, p.analyzer)),
        StageSpec::ExactDedup(_) => dedup_exact(&docs).iter().map(DedupDecision::to_stage).collect(),
        StageSpec::SemanticDedup(c) => dedup_semantic(&docs, c.similarity_threshold, p.embedder)
            .iter()
            .map(DedupDecision::to_stage)
            .collect(),
        StageSpec::Pii(_) => return Ok(par::map(&docs, |d| anonymize_pii(d).0)),
        StageSpec::PageMerge(_) => return Ok(merge_pages(docs)?),
    };
    Ok(split(docs, decisions, report, rejects))
}

/// Applies the stages in order. Each report row's `docs_in` equals the
/// previous row's `docs_out`.
pub fn run_stages(docs: Vec<Document>, stages: &[StageSpec], providers: &Providers<'_>) -> Result<RunOutput, StageError> {
    let mut out = RunOutput {
        docs,
        ..Default::default()
    };
    for spec in stages {
        let mut report = StageReport {
            stage: spec.id().as_str().to_owned(),
            docs_in: out.docs.len(),
            docs_out: 0,
            reasons: BTreeMap::new(),
        };
        out.docs = apply(spec, std::mem::take(&mut out.docs), providers, &mut report, &mut out.rejects)?;
        report.docs_out = out.docs.len();
        out.reports.push(report);
    }
    Ok(out)
}
