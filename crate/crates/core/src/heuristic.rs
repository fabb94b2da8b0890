//! Line-structure quality metrics (short lines, duplicated lines, newline
//! density) with a strict-exceed drop rule and a grid evaluator.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Document;
use crate::decision::{Reason, StageDecision};
use crate::filters::ConfigError;
use crate::par;

pub const STAGE: &str = "heuristic_quality";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeuristicThresholds {
    pub short_line: f64,
    pub char_duplicates: f64,
    pub new_line: f64,
    pub short_line_length: usize,
}

impl Default for HeuristicThresholds {
    fn default() -> Self {
        Self {
            short_line: 0.67,
            char_duplicates: 0.03,
            new_line: 0.4,
            short_line_length: 30,
        }
    }
}

impl HeuristicThresholds {
    pub fn new(short_line: f64, char_duplicates: f64, new_line: f64) -> Self {
        Self {
            short_line,
            char_duplicates,
            new_line,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("short_line", self.short_line),
            ("char_duplicates", self.char_duplicates),
            ("new_line", self.new_line),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ConfigError(format!("heuristic_quality: {name} must be in [0,1], got {v}")));
            }
        }
        if self.short_line_length == 0 {
            return Err(ConfigError("heuristic_quality: short_line_length must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeuristicMetrics {
    pub short_line_ratio: f64,
    pub char_dup_ratio: f64,
    pub newline_ratio: f64,
    pub line_count: usize,
}

pub fn measure_heuristics(doc: &Document, cfg: &HeuristicThresholds) -> HeuristicMetrics {
    measure_text(&doc.text, cfg.short_line_length)
}

fn measure_text(text: &str, short_line_length: usize) -> HeuristicMetrics {
    let lines: Vec<&str> = crate::filters::lines(text).collect();
    let line_chars: Vec<usize> = lines.iter().map(|l| l.chars().count()).collect();
    let line_count = lines.len();

    let short = line_chars.iter().filter(|&&n| n < short_line_length).count();

    let mut occurrences: HashMap<&str, usize> = HashMap::with_capacity(line_count);
    for l in &lines {
        *occurrences.entry(l).or_default() += 1;
    }
    let total_chars: usize = line_chars.iter().sum();
    let dup_chars: usize = lines
        .iter()
        .zip(&line_chars)
        .filter(|(l, _)| occurrences[*l] > 1)
        .map(|(_, n)| n)
        .sum();

    let newlines = text.matches('\n').count();
    let words = text.split_whitespace().count().max(1);

    HeuristicMetrics {
        short_line_ratio: short as f64 / line_count as f64,
        char_dup_ratio: if total_chars == 0 {
            0.0
        } else {
            dup_chars as f64 / total_chars as f64
        },
        newline_ratio: (newlines as f64 / words as f64).min(1.0),
        line_count,
    }
}

/// First violated metric, in the order short_line, char_duplicates, new_line.
pub fn violation(m: &HeuristicMetrics, cfg: &HeuristicThresholds) -> Option<Reason> {
    if m.short_line_ratio > cfg.short_line {
        Some(Reason::ShortLine)
    } else if m.char_dup_ratio > cfg.char_duplicates {
        Some(Reason::CharDuplicates)
    } else if m.newline_ratio > cfg.new_line {
        Some(Reason::NewLine)
    } else {
        None
    }
}

pub fn decide(m: &HeuristicMetrics, cfg: &HeuristicThresholds) -> StageDecision {
    StageDecision::from_reason(STAGE, violation(m, cfg))
        .with("short_line_ratio", m.short_line_ratio)
        .with("char_dup_ratio", m.char_dup_ratio)
        .with("newline_ratio", m.newline_ratio)
}

pub fn filter_heuristic(doc: &Document, cfg: &HeuristicThresholds) -> StageDecision {
    decide(&measure_heuristics(doc, cfg), cfg)
}

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("empty_input: dataset has no documents")]
    EmptyInput,
    #[error("no configurations given")]
    NoConfigs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridRow {
    pub config: HeuristicThresholds,
    pub dropped: usize,
    pub total: usize,
    pub drop_ratio: f64,
}

/// Drop ratio of every configuration over the whole dataset, in config order.
pub fn evaluate_grid(
    docs: &[Document],
    configs: &[HeuristicThresholds],
) -> Result<Vec<GridRow>, GridError> {
    if configs.is_empty() {
        return Err(GridError::NoConfigs);
    }
    if docs.is_empty() {
        return Err(GridError::EmptyInput);
    }
    // metrics only depend on the short-line length, so measure once per length
    let mut by_length: HashMap<usize, Vec<HeuristicMetrics>> = HashMap::new();
    for cfg in configs {
        by_length
            .entry(cfg.short_line_length)
            .or_insert_with(|| par::map(docs, |d| measure_text(&d.text, cfg.short_line_length)));
    }
    Ok(configs
        .iter()
        .map(|cfg| {
            let metrics = &by_length[&cfg.short_line_length];
            let dropped = par::count(metrics, |m| violation(m, cfg).is_some());
            GridRow {
                config: *cfg,
                dropped,
                total: docs.len(),
                drop_ratio: dropped as f64 / docs.len() as f64,
            }
        })
        .collect())
}
