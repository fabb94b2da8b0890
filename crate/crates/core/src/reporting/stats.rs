use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::emit::{Cell, Table};
use crate::corpus::{Document, Tokenizer};
use crate::par;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("empty_input: no rows to aggregate")]
    EmptyInput,
    #[error("invalid row {index}: {message}")]
    InvalidRow { index: usize, message: String },
}

/// Exact token-count statistics. Quartiles interpolate linearly between
/// the closest ranks; `token_std` is the population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TokenStats {
    pub doc_count: usize,
    pub token_total: u64,
    pub token_min: u64,
    pub token_q25: f64,
    pub token_median: f64,
    pub token_q75: f64,
    pub token_max: u64,
    pub token_mean: f64,
    pub token_std: f64,
}

impl TokenStats {
    pub const COLUMNS: [&'static str; 9] = [
        "doc_count",
        "token_total",
        "token_min",
        "token_q25",
        "token_median",
        "token_q75",
        "token_max",
        "token_mean",
        "token_std",
    ];

    pub fn to_table(&self, name: &str) -> Table {
        Table::new(name, Self::COLUMNS).row(vec![
            Cell::Int(self.doc_count as i64),
            Cell::Int(self.token_total as i64),
            Cell::Int(self.token_min as i64),
            Cell::Float(self.token_q25),
            Cell::Float(self.token_median),
            Cell::Float(self.token_q75),
            Cell::Int(self.token_max as i64),
            Cell::Float(self.token_mean),
            Cell::Float(self.token_std),
        ])
    }
}

fn quantile(sorted: &[u64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let (a, b) = (sorted[lo] as f64, sorted[hi] as f64);
    a + (h - lo as f64) * (b - a)
}

/// Statistics over raw per-document token counts.
pub fn token_stats(counts: &[u64]) -> Result<TokenStats, StatsError> {
    if counts.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    let total: u64 = sorted.iter().sum();
    let mean = total as f64 / n as f64;
    let var = sorted
        .iter()
        .map(|&x| {
            let d = x as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / n as f64;
    Ok(TokenStats {
        doc_count: n,
        token_total: total,
        token_min: sorted[0],
        token_q25: quantile(&sorted, 0.25),
        token_median: quantile(&sorted, 0.5),
        token_q75: quantile(&sorted, 0.75),
        token_max: sorted[n - 1],
        token_mean: mean,
        token_std: var.sqrt(),
    })
}

pub fn compute_token_stats(docs: &[Document], tokenizer: &dyn Tokenizer) -> Result<TokenStats, StatsError> {
    let counts = par::map(docs, |d| tokenizer.count_tokens(&d.text) as u64);
    token_stats(&counts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainPerplexity {
    pub domain: String,
    pub ppl: f64,
    pub token_count: u64,
}

/// Token-weighted mean perplexity: `Σ ppl·tokens / Σ tokens`.
pub fn weighted_perplexity(rows: &[DomainPerplexity]) -> Result<f64, StatsError> {
    if rows.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (index, r) in rows.iter().enumerate() {
        if !(r.ppl.is_finite() && r.ppl > 0.0) {
            return Err(StatsError::InvalidRow {
                index,
                message: format!("ppl must be positive and finite, got {}", r.ppl),
            });
        }
        if r.token_count == 0 {
            return Err(StatsError::InvalidRow {
                index,
                message: "token_count must be positive".into(),
            });
        }
        num += r.ppl * r.token_count as f64;
        den += r.token_count as f64;
    }
    // rounding can push the quotient an ulp past the extremes
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.ppl), hi.max(r.ppl)));
    Ok((num / den).clamp(lo, hi))
}
