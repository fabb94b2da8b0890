use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::ConfigError;
use crate::corpus::{Document, LanguageClassifier};
use crate::decision::{Reason, StageDecision};

pub const STAGE: &str = "langid";
pub const DEFAULT_MIN_LANG_CONFIDENCE: f64 = 0.40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LangFilterConfig {
    pub target_languages: BTreeSet<String>,
    pub min_confidence: f64,
    pub top_k: usize,
    /// Accept when any of the top-k predictions is a confident target
    /// match, instead of requiring the top-1 prediction to match.
    pub any_of_top_k: bool,
}

impl Default for LangFilterConfig {
    fn default() -> Self {
        Self {
            target_languages: BTreeSet::from(["tur".to_owned()]),
            min_confidence: DEFAULT_MIN_LANG_CONFIDENCE,
            top_k: 3,
            any_of_top_k: false,
        }
    }
}

impl LangFilterConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.target_languages.is_empty() {
            return Err(ConfigError("langid: target_languages is empty".into()));
        }
        if !(0.0..=1.0).contains(&self.min_confidence) {
            return Err(ConfigError(format!(
                "langid: min_confidence must be in [0,1], got {}",
                self.min_confidence
            )));
        }
        if self.top_k == 0 {
            return Err(ConfigError("langid: top_k must be positive".into()));
        }
        Ok(())
    }
}

pub fn filter_language(
    doc: &Document,
    cfg: &LangFilterConfig,
    clf: &dyn LanguageClassifier,
) -> StageDecision {
    let preds = match clf.classify(&doc.text, cfg.top_k) {
        Ok(p) => p,
        Err(e) => {
            return StageDecision::drop(STAGE, Reason::ClassifierError).with("error", e.to_string())
        }
    };
    let Some(top) = preds.first() else {
        return StageDecision::drop(STAGE, Reason::LowConfidence)
            .with("top_language", "und")
            .with("top_confidence", 0.0);
    };
    let reason = if cfg.any_of_top_k {
        let targeted: Vec<_> = preds
            .iter()
            .take(cfg.top_k)
            .filter(|p| cfg.target_languages.contains(&p.code))
            .collect();
        if targeted.is_empty() {
            Some(Reason::WrongLanguage)
        } else if targeted.iter().all(|p| p.confidence < cfg.min_confidence) {
            Some(Reason::LowConfidence)
        } else {
            None
        }
    } else if !cfg.target_languages.contains(&top.code) {
        Some(Reason::WrongLanguage)
    } else if top.confidence < cfg.min_confidence {
        Some(Reason::LowConfidence)
    } else {
        None
    };
    StageDecision::from_reason(STAGE, reason)
        .with("top_language", top.code.as_str())
        .with("top_confidence", top.confidence)
}
