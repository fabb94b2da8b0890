use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use xxhash_rust::xxh3::xxh3_64;

const FRACTION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskConfig {
    pub select_prob: f64,
    pub mask_frac: f64,
    pub random_frac: f64,
    pub keep_frac: f64,
    pub mask_token_id: u32,
    pub vocab_size: u32,
    pub seed: u64,
}

impl Default for MaskConfig {
    fn default() -> Self {
        Self {
            select_prob: 0.30,
            mask_frac: 0.80,
            random_frac: 0.10,
            keep_frac: 0.10,
            mask_token_id: 4,
            vocab_size: 32768,
            seed: 0,
        }
    }
}

impl MaskConfig {
    /// Lower masking rate used when scoring held-out text.
    pub fn evaluation() -> Self {
        Self {
            select_prob: 0.15,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), MaskError> {
        let bad = |m: String| Err(MaskError::Config(m));
        if !(self.select_prob > 0.0 && self.select_prob <= 1.0) {
            return bad(format!("select_prob {} outside (0,1]", self.select_prob));
        }
        let parts = [self.mask_frac, self.random_frac, self.keep_frac];
        if parts.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return bad(format!("replacement fractions {parts:?} must lie in [0,1]"));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > FRACTION_TOLERANCE {
            return bad(format!("replacement fractions sum to {sum}"));
        }
        if self.mask_token_id >= self.vocab_size {
            return bad(format!(
                "mask_token_id {} not below vocab_size {}",
                self.mask_token_id, self.vocab_size
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MaskError {
    #[error("empty token sequence")]
    EmptySequence,
    #[error("invalid mask config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaskedSequence {
    pub input_ids: Vec<u32>,
    pub labels: Vec<Option<u32>>,
    pub selection_mask: Vec<bool>,
}

/// Per-sequence seed so that masking one record does not depend on its
/// neighbours or on processing order.
pub fn sequence_seed(seed: u64, doc_id: &str) -> u64 {
    seed ^ xxh3_64(doc_id.as_bytes())
}

/// Selects each position independently with `select_prob`; a selected
/// position becomes the mask id, a uniform random id (which may equal the
/// original) or stays unchanged, in the configured proportions.
pub fn apply_mlm_masking(ids: &[u32], cfg: &MaskConfig) -> Result<MaskedSequence, MaskError> {
    cfg.validate()?;
    if ids.is_empty() {
        return Err(MaskError::EmptySequence);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = MaskedSequence {
        input_ids: Vec::with_capacity(ids.len()),
        labels: Vec::with_capacity(ids.len()),
        selection_mask: Vec::with_capacity(ids.len()),
    };
    for &id in ids {
        let selected = rng.gen::<f64>() < cfg.select_prob;
        let replaced = if selected {
            let u: f64 = rng.gen();
            if u < cfg.mask_frac {
                cfg.mask_token_id
            } else if u < cfg.mask_frac + cfg.random_frac {
                rng.gen_range(0..cfg.vocab_size)
            } else {
                id
            }
        } else {
            id
        };
        out.input_ids.push(replaced);
        out.labels.push(selected.then_some(id));
        out.selection_mask.push(selected);
    }
    Ok(out)
}
