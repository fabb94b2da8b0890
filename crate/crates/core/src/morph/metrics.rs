use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::STAGE;
use crate::corpus::providers::pieces;
use crate::corpus::{Document, MorphAnalyzer, NominalCase};
use crate::decision::{Reason, StageDecision};
use crate::filters::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorphMetrics {
    /// Shannon entropy of the case-tag distribution, in nats.
    pub suffix_entropy: f64,
    /// Entropy divided by `ln(distinct cases)`; 0 when at most one case occurs.
    pub suffix_entropy_norm: f64,
    /// Distinct lemmas over analyzed tokens.
    pub lemma_diversity: f64,
    pub analyzed_token_count: usize,
    pub distinct_case_count: usize,
}

impl MorphMetrics {
    pub const EMPTY: MorphMetrics = MorphMetrics {
        suffix_entropy: 0.0,
        suffix_entropy_norm: 0.0,
        lemma_diversity: 0.0,
        analyzed_token_count: 0,
        distinct_case_count: 0,
    };
}

/// Metrics from per-case tag counts (indexed by [`NominalCase::index`]),
/// the number of distinct lemmas and the number of lemma-bearing tokens.
pub fn metrics_from_counts(
    case_counts: &[usize; 7],
    distinct_lemmas: usize,
    analyzed_tokens: usize,
) -> MorphMetrics {
    if analyzed_tokens == 0 {
        return MorphMetrics::EMPTY;
    }
    let tagged: usize = case_counts.iter().sum();
    let distinct = case_counts.iter().filter(|&&c| c > 0).count();
    let entropy = if tagged == 0 {
        0.0
    } else {
        // fixed case order keeps the sum independent of token order
        -case_counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / tagged as f64;
                p * p.ln()
            })
            .sum::<f64>()
    };
    let entropy = entropy.max(0.0);
    let norm = if distinct >= 2 {
        (entropy / (distinct as f64).ln()).clamp(0.0, 1.0)
    } else {
        0.0
    };
    MorphMetrics {
        suffix_entropy: entropy,
        suffix_entropy_norm: norm,
        lemma_diversity: distinct_lemmas as f64 / analyzed_tokens as f64,
        analyzed_token_count: analyzed_tokens,
        distinct_case_count: distinct,
    }
}

pub fn compute_morph_metrics(doc: &Document, analyzer: &dyn MorphAnalyzer) -> MorphMetrics {
    let mut case_counts = [0usize; 7];
    let mut lemmas: HashSet<String> = HashSet::new();
    let mut analyzed = 0usize;
    for piece in pieces(&doc.text) {
        if !piece.chars().next().is_some_and(char::is_alphanumeric) {
            continue;
        }
        let Some(analysis) = analyzer.analyze(piece) else {
            continue;
        };
        analyzed += 1;
        if let Some(case) = analysis.case_tag {
            case_counts[case.index()] += 1;
        }
        lemmas.insert(analysis.lemma);
    }
    metrics_from_counts(&case_counts, lemmas.len(), analyzed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MorphFilterConfig {
    pub tau_suffix: f64,
    pub tau_lemma: f64,
    pub min_analyzed_tokens: usize,
}

impl Default for MorphFilterConfig {
    fn default() -> Self {
        Self {
            tau_suffix: 0.75,
            tau_lemma: 0.50,
            min_analyzed_tokens: 10,
        }
    }
}

impl MorphFilterConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [("tau_suffix", self.tau_suffix), ("tau_lemma", self.tau_lemma)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ConfigError(format!("morph: {name} must be in [0,1], got {v}")));
            }
        }
        Ok(())
    }

    pub(crate) fn violation(&self, m: &MorphMetrics) -> Option<Reason> {
        if m.analyzed_token_count < self.min_analyzed_tokens {
            Some(Reason::InsufficientMorphology)
        } else if m.suffix_entropy_norm <= self.tau_suffix {
            Some(Reason::LowSuffixEntropy)
        } else if m.lemma_diversity <= self.tau_lemma {
            Some(Reason::LowLemmaDiversity)
        } else {
            None
        }
    }
}

pub(crate) fn decide(m: &MorphMetrics, cfg: &MorphFilterConfig) -> StageDecision {
    StageDecision::from_reason(STAGE, cfg.violation(m))
        .with("suffix_entropy", m.suffix_entropy)
        .with("suffix_entropy_norm", m.suffix_entropy_norm)
        .with("lemma_diversity", m.lemma_diversity)
        .with("analyzed_token_count", m.analyzed_token_count)
}

/// Keeps documents whose normalized suffix entropy and lemma diversity are
/// both strictly above their thresholds.
pub fn filter_morph(
    doc: &Document,
    cfg: &MorphFilterConfig,
    analyzer: &dyn MorphAnalyzer,
) -> StageDecision {
    decide(&compute_morph_metrics(doc, analyzer), cfg)
}

impl NominalCase {
    pub fn tag(self) -> &'static str {
        match self {
            NominalCase::Nom => "Nom",
            NominalCase::Acc => "Acc",
            NominalCase::Dat => "Dat",
            NominalCase::Loc => "Loc",
            NominalCase::Abl => "Abl",
            NominalCase::Gen => "Gen",
            NominalCase::Ins => "Ins",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{MorphAnalysis, PartOfSpeech};
    use crate::morph::RuleBasedAnalyzer;
    use proptest::prelude::*;

    struct Glued;

    impl MorphAnalyzer for Glued {
        // tokens look like `evLoc`: lowercase lemma then a capitalised case tag
        fn analyze(&self, token: &str) -> Option<MorphAnalysis> {
            let split = token.find(|c: char| c.is_uppercase())?;
            let (lemma, case) = token.split_at(split);
            let case = NominalCase::ALL.into_iter().find(|c| c.tag() == case);
            MorphAnalysis::new(lemma, PartOfSpeech::Noun, case)
        }
    }

    fn glued_doc(tokens: &[(&str, NominalCase)]) -> Document {
        let text: Vec<String> = tokens.iter().map(|(l, c)| format!("{l}{}", c.tag())).collect();
        Document::new("g", text.join(" "))
    }

    #[test]
    fn single_case_has_zero_entropy() {
        let doc = glued_doc(&[("ev", NominalCase::Loc), ("okul", NominalCase::Loc)]);
        let m = compute_morph_metrics(&doc, &Glued);
        assert_eq!(m.suffix_entropy, 0.0);
        assert_eq!(m.suffix_entropy_norm, 0.0);
        assert_eq!(m.distinct_case_count, 1);
        assert_eq!(m.lemma_diversity, 1.0);
    }

    #[test]
    fn uniform_three_cases() {
        let m = metrics_from_counts(&[2, 0, 2, 0, 2, 0, 0], 6, 6);
        assert!((m.suffix_entropy - 3f64.ln()).abs() < 1e-12);
        assert!((m.suffix_entropy - 1.0986).abs() < 1e-4);
        assert!((m.suffix_entropy_norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_quarter_quarter() {
        // oracle: -(.5 ln .5 + 2 * .25 ln .25) = 1.5 ln 2
        let m = metrics_from_counts(&[2, 1, 1, 0, 0, 0, 0], 3, 4);
        let oracle = 1.5 * 2f64.ln();
        assert!((m.suffix_entropy - oracle).abs() < 1e-12);
        assert!((m.suffix_entropy - 1.0397).abs() < 1e-4);
        assert!((m.suffix_entropy_norm - oracle / 3f64.ln()).abs() < 1e-12);
        assert!((m.suffix_entropy_norm - 0.9464).abs() < 1e-4);
        assert_eq!(m.lemma_diversity, 0.75);
    }

    #[test]
    fn no_analyzable_tokens() {
        let m = compute_morph_metrics(&Document::new("x", "1 2 3 ! ?"), &RuleBasedAnalyzer);
        assert_eq!(m, MorphMetrics::EMPTY);
    }

    #[test]
    fn rule_based_end_to_end() {
        let doc = Document::new("t", "Evde kitap var. Okuldan eve geldim, arabayla.");
        let m = compute_morph_metrics(&doc, &RuleBasedAnalyzer);
        assert_eq!(m.analyzed_token_count, 7);
        assert!(m.distinct_case_count >= 4);
        assert!(m.suffix_entropy > 0.0);
    }

    #[test]
    fn filter_boundaries() {
        let cfg = MorphFilterConfig::default();
        let base = MorphMetrics {
            suffix_entropy: 1.0,
            suffix_entropy_norm: 0.76,
            lemma_diversity: 0.51,
            analyzed_token_count: 20,
            distinct_case_count: 4,
        };
        assert!(decide(&base, &cfg).keep);
        let at = MorphMetrics {
            suffix_entropy_norm: 0.75,
            ..base
        };
        assert_eq!(decide(&at, &cfg).reason, Reason::LowSuffixEntropy);
        let ld = MorphMetrics {
            lemma_diversity: 0.50,
            ..base
        };
        assert_eq!(decide(&ld, &cfg).reason, Reason::LowLemmaDiversity);
        let few = MorphMetrics {
            analyzed_token_count: 9,
            ..base
        };
        let d = decide(&few, &cfg);
        assert_eq!(d.reason, Reason::InsufficientMorphology);
        assert_eq!(d.measure("suffix_entropy_norm"), Some(0.76));
        assert_eq!(d.measure("lemma_diversity"), Some(0.51));
    }

    fn case_seq() -> impl Strategy<Value = Vec<(u8, u8)>> {
        prop::collection::vec((0u8..7, 0u8..12), 1..60)
    }

    fn to_doc(seq: &[(u8, u8)]) -> Document {
        let toks: Vec<(String, NominalCase)> = seq
            .iter()
            .map(|&(c, l)| (format!("l{}", (b'a' + l) as char), NominalCase::ALL[c as usize]))
            .collect();
        let refs: Vec<(&str, NominalCase)> = toks.iter().map(|(l, c)| (l.as_str(), *c)).collect();
        glued_doc(&refs)
    }

    proptest! {
        #[test]
        fn entropy_and_diversity_bounds(seq in case_seq()) {
            let m = compute_morph_metrics(&to_doc(&seq), &Glued);
            prop_assert_eq!(m.analyzed_token_count, seq.len());
            prop_assert!(m.suffix_entropy >= 0.0);
            if m.distinct_case_count >= 1 {
                prop_assert!(m.suffix_entropy <= (m.distinct_case_count as f64).ln() + 1e-12);
            }
            prop_assert!((0.0..=1.0).contains(&m.suffix_entropy_norm));
            let n = m.analyzed_token_count as f64;
            prop_assert!(m.lemma_diversity >= 1.0 / n - 1e-15 && m.lemma_diversity <= 1.0);
        }

        #[test]
        fn token_order_does_not_matter(seq in case_seq(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = seq.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(
                compute_morph_metrics(&to_doc(&seq), &Glued),
                compute_morph_metrics(&to_doc(&shuffled), &Glued)
            );
        }

        #[test]
        fn norm_is_log_base_invariant(counts in proptest::array::uniform7(0usize..50)) {
            let total: usize = counts.iter().sum();
            prop_assume!(total > 0);
            let m = metrics_from_counts(&counts, 1, total);
            let distinct = counts.iter().filter(|&&c| c > 0).count();
            let h2: f64 = -counts
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| { let p = c as f64 / total as f64; p * p.log2() })
                .sum::<f64>();
            let norm2 = if distinct >= 2 { h2 / (distinct as f64).log2() } else { 0.0 };
            prop_assert!((m.suffix_entropy_norm - norm2.clamp(0.0, 1.0)).abs() < 1e-12);
        }
    }
}
