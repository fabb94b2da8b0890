//! TOML pipeline configuration.
//!
//! ```toml
//! seed = 7
//! on_error = "skip"
//!
//! [paths]
//! input = "corpus.jsonl"
//! output = "out/kept.jsonl"
//! rejects = "out/rejects.jsonl"
//! report_dir = "out/report"
//!
//! [providers.embedder]
//! kind = "hashing"
//! dimension = 1024
//!
//! [[stages]]
//! id = "clean"
//! min_chars = 64
//!
//! [[stages]]
//! id = "heuristic_quality"
//! ```
//!
//! Relative paths resolve against the config file's directory.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Result;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use forge_core::corpus::{
    Embedder, HashEmbedder, HashingTokenizer, LanguageClassifier, MorphAnalyzer, OnError, StopwordClassifier,
    Tokenizer,
};
use forge_core::curriculum::{Providers, StageSpec};
use forge_core::morph::RuleBasedAnalyzer;

use crate::config_error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub on_error: OnError,
    pub threads: Option<usize>,
    #[serde(default)]
    pub paths: Paths,
    #[serde(default)]
    pub providers: ProviderConfig,
    pub stages: Vec<StageSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub rejects: Option<PathBuf>,
    pub report_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    pub tokenizer: TokenizerConfig,
    pub classifier: ClassifierConfig,
    pub analyzer: AnalyzerConfig,
    pub embedder: EmbedderConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TokenizerConfig {
    Hashing {
        #[serde(default = "default_vocab")]
        vocab_size: usize,
    },
}

fn default_vocab() -> usize {
    32768
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self::Hashing {
            vocab_size: default_vocab(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassifierConfig {
    #[default]
    Stopword,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnalyzerConfig {
    #[default]
    RuleBased,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EmbedderConfig {
    Hashing {
        #[serde(default = "default_dimension")]
        dimension: usize,
        #[serde(default = "default_ngram")]
        ngram: usize,
    },
}

fn default_dimension() -> usize {
    1024
}

fn default_ngram() -> usize {
    5
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        Self::Hashing {
            dimension: default_dimension(),
            ngram: default_ngram(),
        }
    }
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<()> {
        let TokenizerConfig::Hashing { vocab_size } = self.tokenizer;
        if vocab_size <= HashingTokenizer::RESERVED as usize {
            return Err(config_error(format!("providers.tokenizer.vocab_size {vocab_size} too small")));
        }
        let EmbedderConfig::Hashing { dimension, ngram } = self.embedder;
        if dimension == 0 || ngram == 0 {
            return Err(config_error("providers.embedder: dimension and ngram must be positive"));
        }
        Ok(())
    }

    pub fn build(&self) -> ProviderSet {
        let TokenizerConfig::Hashing { vocab_size } = self.tokenizer;
        let EmbedderConfig::Hashing { dimension, ngram } = self.embedder;
        ProviderSet {
            tokenizer: Box::new(HashingTokenizer::new(vocab_size)),
            classifier: Box::new(StopwordClassifier),
            analyzer: Box::new(RuleBasedAnalyzer),
            embedder: Box::new(HashEmbedder::new(dimension).with_ngram(ngram)),
        }
    }
}

pub struct ProviderSet {
    pub tokenizer: Box<dyn Tokenizer>,
    pub classifier: Box<dyn LanguageClassifier>,
    pub analyzer: Box<dyn MorphAnalyzer>,
    pub embedder: Box<dyn Embedder>,
}

impl ProviderSet {
    pub fn stage_providers(&self) -> Providers<'_> {
        Providers {
            classifier: self.classifier.as_ref(),
            analyzer: self.analyzer.as_ref(),
            embedder: self.embedder.as_ref(),
        }
    }
}

/// Portion of the config that determines the output, hashed into the
/// manifest. Seed, paths and thread count are recorded separately.
#[derive(Serialize)]
struct Canonical<'a> {
    on_error: OnError,
    providers: &'a ProviderConfig,
    stages: &'a [StageSpec],
}

impl PipelineConfig {
    pub fn parse(src: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(src).map_err(|e| config_error(e.to_string().trim_end().to_owned()))?;
        cfg.validated()
    }

    /// Reads and validates a config file; relative paths are resolved
    /// against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let src = fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&src).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.paths.input,
            &mut cfg.paths.output,
            &mut cfg.paths.rejects,
            &mut cfg.paths.report_dir,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    fn validated(mut self) -> Result<Self> {
        if self.stages.is_empty() {
            return Err(config_error("no stages configured"));
        }
        self.providers.validate()?;
        self.stages = self
            .stages
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.validated().map_err(|e| config_error(format!("stages[{i}]: {}", e.0))))
            .collect::<Result<_>>()?;
        if self.threads == Some(0) {
            return Err(config_error("threads must be at least 1"));
        }
        Ok(self)
    }

    pub fn digest(&self) -> String {
        let canonical = Canonical {
            on_error: self.on_error,
            providers: &self.providers,
            stages: &self.stages,
        };
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

/// Optional `--config` for `forge phase`: provider settings and per-stage
/// overrides keyed by stage id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseOverrides {
    pub providers: ProviderConfig,
    pub stages: Vec<StageSpec>,
}

impl PhaseOverrides {
    pub fn load(path: &Path) -> Result<Self> {
        let src = fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        let cfg: Self = toml::from_str(&src)
            .map_err(|e| config_error(format!("{}: {}", path.display(), e.to_string().trim_end())))?;
        cfg.providers.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Failure;
    use forge_core::curriculum::StageId;

    fn is_config_error(e: &anyhow::Error) -> bool {
        matches!(e.downcast_ref::<Failure>(), Some(Failure::Config(_)))
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = PipelineConfig::parse("[[stages]]\nid = \"clean\"\n").unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.on_error, OnError::Skip);
        assert_eq!(cfg.stages, vec![StageSpec::default_for(StageId::Clean)]);
        assert_eq!(cfg.providers, ProviderConfig::default());
    }

    #[test]
    fn unknown_stage_is_named() {
        let err = PipelineConfig::parse("[[stages]]\nid = \"spellcheck\"\n").unwrap_err();
        assert!(is_config_error(&err));
        assert!(err.to_string().contains("spellcheck"), "{err}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        for src in [
            "[[stages]]\nid = \"clean\"\nmin_char = 3\n",
            "colour = 1\n[[stages]]\nid = \"clean\"\n",
            "[providers.embedder]\nkind = \"hashing\"\ndims = 3\n[[stages]]\nid = \"clean\"\n",
            "[providers.embedder]\nkind = \"bert\"\n[[stages]]\nid = \"clean\"\n",
        ] {
            assert!(PipelineConfig::parse(src).is_err(), "{src}");
        }
    }

    #[test]
    fn range_errors_name_the_stage() {
        let err = PipelineConfig::parse("[[stages]]\nid = \"clean\"\n[[stages]]\nid = \"morph\"\ntau_lemma = 3.0\n")
            .unwrap_err();
        assert!(err.to_string().contains("stages[1]"), "{err}");
        assert!(PipelineConfig::parse("stages = []\n").is_err());
    }

    #[test]
    fn digest_ignores_seed_and_paths() {
        let a = PipelineConfig::parse("seed = 1\n[paths]\ninput = \"a\"\n[[stages]]\nid = \"pii\"\n").unwrap();
        let b = PipelineConfig::parse("seed = 2\n[[stages]]\nid = \"pii\"\n").unwrap();
        let c = PipelineConfig::parse("[[stages]]\nid = \"exact_dedup\"\n").unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), c.digest());
    }
}
