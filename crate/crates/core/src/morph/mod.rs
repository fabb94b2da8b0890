//! Morphology-driven quality metrics for Turkish text: the entropy of the
//! nominal case distribution and lemma diversity, the filter built on them
//! and the coarse-to-fine threshold sweep.

mod analyzer;
mod metrics;
mod sweep;

pub use analyzer::{analyze_rule_based, RuleBasedAnalyzer};
pub use metrics::{
    compute_morph_metrics, filter_morph, metrics_from_counts, MorphFilterConfig, MorphMetrics,
};
pub use sweep::{sweep_thresholds, SweepError, SweepReport, SweepRow};

pub const STAGE: &str = "morph";
