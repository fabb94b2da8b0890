//! Uniform keep/drop verdict shared by every filter stage.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Reason code attached to a [`StageDecision`].
///
/// Kept documents always carry [`Reason::Pass`]; every drop carries exactly
/// one of the other variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    Pass,
    // clean
    InvalidField,
    TooShort,
    TooLong,
    TableDominated,
    ImageDominated,
    // language
    WrongLanguage,
    LowConfidence,
    ClassifierError,
    // url
    UrlDenied,
    // heuristic quality
    ShortLine,
    CharDuplicates,
    NewLine,
    // morphology
    InsufficientMorphology,
    LowSuffixEntropy,
    LowLemmaDiversity,
    // dedup
    ExactDuplicate,
    SemanticDuplicate,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Reason::Pass => "pass",
            Reason::InvalidField => "invalid_field",
            Reason::TooShort => "too_short",
            Reason::TooLong => "too_long",
            Reason::TableDominated => "table_dominated",
            Reason::ImageDominated => "image_dominated",
            Reason::WrongLanguage => "wrong_language",
            Reason::LowConfidence => "low_confidence",
            Reason::ClassifierError => "classifier_error",
            Reason::UrlDenied => "url_denied",
            Reason::ShortLine => "short_line",
            Reason::CharDuplicates => "char_duplicates",
            Reason::NewLine => "new_line",
            Reason::InsufficientMorphology => "insufficient_morphology",
            Reason::LowSuffixEntropy => "low_suffix_entropy",
            Reason::LowLemmaDiversity => "low_lemma_diversity",
            Reason::ExactDuplicate => "exact_duplicate",
            Reason::SemanticDuplicate => "semantic_duplicate",
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A measured value recorded alongside a decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Measure {
    Num(f64),
    Text(String),
}

impl From<f64> for Measure {
    fn from(v: f64) -> Self {
        Measure::Num(v)
    }
}

impl From<usize> for Measure {
    fn from(v: usize) -> Self {
        Measure::Num(v as f64)
    }
}

impl From<&str> for Measure {
    fn from(v: &str) -> Self {
        Measure::Text(v.to_owned())
    }
}

impl From<String> for Measure {
    fn from(v: String) -> Self {
        Measure::Text(v)
    }
}

impl Measure {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Measure::Num(v) => Some(*v),
            Measure::Text(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageDecision {
    pub keep: bool,
    pub stage: String,
    pub reason: Reason,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub measurements: BTreeMap<String, Measure>,
}

impl StageDecision {
    pub fn keep(stage: &str) -> Self {
        Self {
            keep: true,
            stage: stage.to_owned(),
            reason: Reason::Pass,
            measurements: BTreeMap::new(),
        }
    }

    /// A drop verdict. `reason` must not be [`Reason::Pass`].
    pub fn drop(stage: &str, reason: Reason) -> Self {
        debug_assert!(reason != Reason::Pass);
        Self {
            keep: false,
            stage: stage.to_owned(),
            reason,
            measurements: BTreeMap::new(),
        }
    }

    /// Builds a verdict from an optional drop reason.
    pub fn from_reason(stage: &str, reason: Option<Reason>) -> Self {
        match reason {
            None => Self::keep(stage),
            Some(r) => Self::drop(stage, r),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Measure>) -> Self {
        self.measurements.insert(key.to_owned(), value.into());
        self
    }

    pub fn measure(&self, key: &str) -> Option<f64> {
        self.measurements.get(key).and_then(Measure::as_f64)
    }
}
