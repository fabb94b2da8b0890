//! Corpus statistics, aggregate scores and report emission.

mod efficiency;
mod emit;
mod stats;

pub use efficiency::{production_efficiency, EfficiencyError, EfficiencyInput, EfficiencyReport};
pub use emit::{emit_report, emit_report_with, format_float, Cell, Table};
pub use stats::{compute_token_stats, token_stats, weighted_perplexity, DomainPerplexity, StatsError, TokenStats};
