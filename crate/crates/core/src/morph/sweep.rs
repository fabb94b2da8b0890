use serde::Serialize;
use thiserror::Error;

use super::metrics::{compute_morph_metrics, MorphFilterConfig};
use crate::corpus::{Document, MorphAnalyzer, Tokenizer};
use crate::par;
use crate::reporting::{token_stats, Cell, Table};

#[derive(Debug, Error, PartialEq)]
pub enum SweepError {
    #[error("empty_input: dataset has no documents")]
    EmptyInput,
    #[error("threshold grid is empty")]
    EmptyGrid,
    #[error("threshold {0} outside [0,1]")]
    OutOfRange(f64),
}

/// Retention statistics for one `(tau_suffix, tau_lemma)` pair. Token
/// statistics are over surviving documents and are all zero when none
/// survive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub tau_suffix: f64,
    pub tau_lemma: f64,
    pub surviving_docs: usize,
    pub surviving_tokens: u64,
    pub drop_ratio: f64,
    pub token_mean: f64,
    pub token_std: f64,
    pub token_min: u64,
    pub token_q25: f64,
    pub token_median: f64,
    pub token_q75: f64,
    pub token_max: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub total_docs: usize,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub const COLUMNS: [&'static str; 12] = [
        "tau_suffix",
        "tau_lemma",
        "surviving_docs",
        "surviving_tokens",
        "drop_ratio",
        "token_mean",
        "token_std",
        "token_min",
        "token_q25",
        "token_median",
        "token_q75",
        "token_max",
    ];

    pub fn to_table(&self, name: &str) -> Table {
        let mut t = Table::new(name, Self::COLUMNS);
        for r in &self.rows {
            t.push(vec![
                Cell::Float(r.tau_suffix),
                Cell::Float(r.tau_lemma),
                Cell::from(r.surviving_docs),
                Cell::from(r.surviving_tokens),
                Cell::Float(r.drop_ratio),
                Cell::Float(r.token_mean),
                Cell::Float(r.token_std),
                Cell::from(r.token_min),
                Cell::Float(r.token_q25),
                Cell::Float(r.token_median),
                Cell::Float(r.token_q75),
                Cell::from(r.token_max),
            ]);
        }
        t
    }
}

fn check_grid(grid: &[f64]) -> Result<(), SweepError> {
    if grid.is_empty() {
        return Err(SweepError::EmptyGrid);
    }
    match grid.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        Some(v) => Err(SweepError::OutOfRange(*v)),
        None => Ok(()),
    }
}

/// Evaluates every threshold pair in grid-product order (suffix outer,
/// lemma inner). Metrics and token counts are computed once per document.
pub fn sweep_thresholds(
    docs: &[Document],
    suffix_grid: &[f64],
    lemma_grid: &[f64],
    analyzer: &dyn MorphAnalyzer,
    tokenizer: &dyn Tokenizer,
    min_analyzed_tokens: usize,
) -> Result<SweepReport, SweepError> {
    check_grid(suffix_grid)?;
    check_grid(lemma_grid)?;
    if docs.is_empty() {
        return Err(SweepError::EmptyInput);
    }
    let measured = par::map(docs, |d| {
        (
            compute_morph_metrics(d, analyzer),
            tokenizer.count_tokens(&d.text) as u64,
        )
    });
    let pairs: Vec<(f64, f64)> = suffix_grid
        .iter()
        .flat_map(|&s| lemma_grid.iter().map(move |&l| (s, l)))
        .collect();
    let rows = par::map(&pairs, |&(tau_suffix, tau_lemma)| {
        let cfg = MorphFilterConfig {
            tau_suffix,
            tau_lemma,
            min_analyzed_tokens,
        };
        let survivors: Vec<u64> = measured
            .iter()
            .filter(|(m, _)| cfg.violation(m).is_none())
            .map(|&(_, t)| t)
            .collect();
        let stats = token_stats(&survivors).unwrap_or_default();
        SweepRow {
            tau_suffix,
            tau_lemma,
            surviving_docs: survivors.len(),
            surviving_tokens: stats.token_total,
            drop_ratio: 1.0 - survivors.len() as f64 / docs.len() as f64,
            token_mean: stats.token_mean,
            token_std: stats.token_std,
            token_min: stats.token_min,
            token_q25: stats.token_q25,
            token_median: stats.token_median,
            token_q75: stats.token_q75,
            token_max: stats.token_max,
        }
    });
    Ok(SweepReport {
        total_docs: docs.len(),
        rows,
    })
}
