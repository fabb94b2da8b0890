//! Suffix-stripping case analyzer.
//!
//! Longest suffix first; a candidate only matches when its vowel agrees
//! with the last vowel of the remaining stem under two-way (a/e) or
//! four-way (ı/i/u/ü) harmony. Tokens with no harmonic case suffix are
//! tagged nominative. Only nominal case is modelled.

use crate::corpus::providers::turkish_lowercase;
use crate::corpus::{MorphAnalysis, MorphAnalyzer, NominalCase, PartOfSpeech};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Harmony {
    Two,
    Four,
}

use Harmony::{Four, Two};
use NominalCase::*;

/// Case suffix table, sorted longest first at lookup time.
const SUFFIXES: &[(&str, NominalCase, Harmony)] = &[
    ("yı", Acc, Four), ("yi", Acc, Four), ("yu", Acc, Four), ("yü", Acc, Four),
    ("ı", Acc, Four), ("i", Acc, Four), ("u", Acc, Four), ("ü", Acc, Four),
    ("ya", Dat, Two), ("ye", Dat, Two), ("a", Dat, Two), ("e", Dat, Two),
    ("da", Loc, Two), ("de", Loc, Two), ("ta", Loc, Two), ("te", Loc, Two),
    ("dan", Abl, Two), ("den", Abl, Two), ("tan", Abl, Two), ("ten", Abl, Two),
    ("nın", Gen, Four), ("nin", Gen, Four), ("nun", Gen, Four), ("nün", Gen, Four),
    ("ın", Gen, Four), ("in", Gen, Four), ("un", Gen, Four), ("ün", Gen, Four),
    ("yla", Ins, Two), ("yle", Ins, Two), ("la", Ins, Two), ("le", Ins, Two),
];

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'ı' | 'i' | 'o' | 'ö' | 'u' | 'ü')
}

fn expected_vowel(stem_vowel: char, harmony: Harmony) -> char {
    let back = matches!(stem_vowel, 'a' | 'ı' | 'o' | 'u');
    match harmony {
        Two if back => 'a',
        Two => 'e',
        Four => match stem_vowel {
            'a' | 'ı' => 'ı',
            'e' | 'i' => 'i',
            'o' | 'u' => 'u',
            _ => 'ü',
        },
    }
}

fn harmonic(stem: &str, suffix: &str, harmony: Harmony) -> bool {
    let Some(stem_vowel) = stem.chars().rev().find(|&c| is_vowel(c)) else {
        return false;
    };
    let Some(suffix_vowel) = suffix.chars().find(|&c| is_vowel(c)) else {
        return false;
    };
    suffix_vowel == expected_vowel(stem_vowel, harmony)
}

fn sorted_suffixes() -> &'static [(&'static str, NominalCase, Harmony)] {
    use std::sync::LazyLock;
    static SORTED: LazyLock<Vec<(&str, NominalCase, Harmony)>> = LazyLock::new(|| {
        let mut v = SUFFIXES.to_vec();
        v.sort_by_key(|(s, _, _)| std::cmp::Reverse(s.chars().count()));
        v
    });
    &SORTED
}

fn noun(lemma: &str, case: NominalCase) -> Option<MorphAnalysis> {
    MorphAnalysis::new(lemma, PartOfSpeech::Noun, Some(case))
}

pub fn analyze_rule_based(token: &str) -> Option<MorphAnalysis> {
    let word = turkish_lowercase(token);
    if word.chars().count() < 2 || word.chars().any(|c| c.is_ascii_digit()) {
        return None;
    }
    if let Some((stem, tail)) = word.split_once(['\'', '\u{2019}']) {
        if stem.is_empty() || !stem.chars().all(char::is_alphabetic) {
            return None;
        }
        let case = SUFFIXES
            .iter()
            .find(|(s, _, h)| *s == tail && harmonic(stem, s, *h))
            .map_or(Nom, |(_, c, _)| *c);
        return noun(stem, case);
    }
    if !word.chars().all(char::is_alphabetic) {
        return None;
    }
    for (suffix, case, harmony) in sorted_suffixes() {
        let Some(stem) = word.strip_suffix(suffix) else {
            continue;
        };
        if stem.chars().count() >= 2 && harmonic(stem, suffix, *harmony) {
            return noun(stem, *case);
        }
    }
    noun(&word, Nom)
}

/// [`MorphAnalyzer`] backed by [`analyze_rule_based`].
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleBasedAnalyzer;

impl MorphAnalyzer for RuleBasedAnalyzer {
    fn analyze(&self, token: &str) -> Option<MorphAnalysis> {
        analyze_rule_based(token)
    }
}
