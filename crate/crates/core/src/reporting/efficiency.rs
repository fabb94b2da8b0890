//! Production efficiency composite: quality weighted against deployment cost.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::emit::{Cell, Table};

const W_RETRIEVAL: f64 = 0.40;
const W_LEGAL: f64 = 0.40;
const W_PARAMS: f64 = 0.05;
const W_TIME: f64 = 0.05;
const SEQ_LEN_BONUS: f64 = 0.05;
const SEQ_LEN_CUTOFF: u32 = 512;
const EMB_DIM_BONUS: f64 = 0.05;
const EMB_DIM_CUTOFF: u32 = 2048;

/// One model row. Field names match the model CSV header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyInput {
    pub model: String,
    pub retrieval: f64,
    pub legal: f64,
    pub params_millions: f64,
    pub avg_ingest_time_s: f64,
    pub max_seq_len: u32,
    pub emb_dim: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyScore {
    pub model: String,
    pub raw: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyReport {
    /// Sorted by score, descending; ties keep input order.
    pub scores: Vec<EfficiencyScore>,
    /// Columns whose values were all equal and were normalized to 0.5.
    pub degenerate_columns: Vec<String>,
}

impl EfficiencyReport {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new("efficiency", ["rank", "model", "raw", "score"]);
        for (i, s) in self.scores.iter().enumerate() {
            t.push(vec![
                Cell::from(i + 1),
                Cell::from(s.model.as_str()),
                Cell::Float(s.raw),
                Cell::Float(s.score),
            ]);
        }
        t
    }

    pub fn score_of(&self, model: &str) -> Option<f64> {
        self.scores.iter().find(|s| s.model == model).map(|s| s.score)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EfficiencyError {
    #[error("need at least two models to normalize, got {0}")]
    TooFewModels(usize),
    #[error("model {model:?}: {message}")]
    InvalidInput { model: String, message: String },
}

fn min_max(values: &[f64]) -> Option<Vec<f64>> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    (range > 0.0).then(|| values.iter().map(|v| (v - lo) / range).collect())
}

fn check(m: &EfficiencyInput) -> Result<(), EfficiencyError> {
    let bad = |message: String| EfficiencyError::InvalidInput {
        model: m.model.clone(),
        message,
    };
    for (name, v) in [("retrieval", m.retrieval), ("legal", m.legal)] {
        if !v.is_finite() {
            return Err(bad(format!("{name} is not finite")));
        }
    }
    for (name, v) in [("params_millions", m.params_millions), ("avg_ingest_time_s", m.avg_ingest_time_s)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(bad(format!("{name} must be positive, got {v}")));
        }
    }
    if m.max_seq_len == 0 || m.emb_dim == 0 {
        return Err(bad("max_seq_len and emb_dim must be positive".into()));
    }
    Ok(())
}

/// Scores models by min-max normalizing retrieval, legal, parameter count
/// and ingestion time over the supplied set, combining them with fixed
/// weights and sequence-length / embedding-dimension bonuses, then shifting
/// so the best model scores exactly 100 (one raw unit = 100 points).
pub fn production_efficiency(models: &[EfficiencyInput]) -> Result<EfficiencyReport, EfficiencyError> {
    if models.len() < 2 {
        return Err(EfficiencyError::TooFewModels(models.len()));
    }
    models.iter().try_for_each(check)?;

    let mut degenerate = Vec::new();
    let mut column = |name: &str, f: fn(&EfficiencyInput) -> f64| {
        let raw: Vec<f64> = models.iter().map(f).collect();
        min_max(&raw).unwrap_or_else(|| {
            degenerate.push(name.to_owned());
            vec![0.5; raw.len()]
        })
    };
    let ret = column("retrieval", |m| m.retrieval);
    let legal = column("legal", |m| m.legal);
    let params = column("params_millions", |m| m.params_millions);
    let time = column("avg_ingest_time_s", |m| m.avg_ingest_time_s);

    let raw: Vec<f64> = models
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let seq = if m.max_seq_len > SEQ_LEN_CUTOFF { SEQ_LEN_BONUS } else { -SEQ_LEN_BONUS };
            let dim = if m.emb_dim < EMB_DIM_CUTOFF { EMB_DIM_BONUS } else { -EMB_DIM_BONUS };
            W_RETRIEVAL * ret[i] + W_LEGAL * legal[i] - W_PARAMS * params[i] - W_TIME * time[i]
                + seq
                + dim
        })
        .collect();
    let best = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut scores: Vec<EfficiencyScore> = models
        .iter()
        .zip(&raw)
        .map(|(m, &r)| EfficiencyScore {
            model: m.model.clone(),
            raw: r,
            score: 100.0 + 100.0 * (r - best),
        })
        .collect();
    scores.sort_by(|a, b| b.score.total_cmp(&a.score));
    Ok(EfficiencyReport {
        scores,
        degenerate_columns: degenerate,
    })
}
