//! Seeded generator of Turkish-like prose for fixtures and benchmarks.
//!
//! Lemmas are random syllable strings inflected for case with vowel
//! harmony, mixed with real function words, so the output passes the
//! bundled language, heuristic and morphology stages while two documents
//! share little beyond those function words.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::corpus::NominalCase;

const ONSETS: &[&str] = &["b", "c", "ç", "d", "g", "k", "l", "m", "n", "p", "r", "s", "ş", "t", "v", "y", "z"];
const VOWELS: &[char] = &['a', 'e', 'ı', 'i', 'o', 'ö', 'u', 'ü'];
const CODAS: &[&str] = &["", "", "k", "l", "m", "n", "r", "s", "t", "z"];
const FUNCTION_WORDS: &[&str] = &[
    "ve", "bir", "bu", "için", "ile", "olarak", "gibi", "daha", "çok", "ancak", "her", "kadar", "sonra", "göre",
];
const VERBS: &[&str] = &[
    "verdi", "inceledi", "belirtti", "kabul etti", "reddetti", "açıkladı", "istedi", "değerlendirdi", "bildirdi",
];

fn is_back(c: char) -> bool {
    matches!(c, 'a' | 'ı' | 'o' | 'u')
}

fn last_vowel(word: &str) -> char {
    word.chars().rev().find(|c| VOWELS.contains(c)).unwrap_or('a')
}

fn two(word: &str) -> char {
    if is_back(last_vowel(word)) {
        'a'
    } else {
        'e'
    }
}

fn four(word: &str) -> char {
    match last_vowel(word) {
        'a' | 'ı' => 'ı',
        'e' | 'i' => 'i',
        'o' | 'u' => 'u',
        _ => 'ü',
    }
}

pub fn lemma<R: Rng>(rng: &mut R) -> String {
    let syllables = rng.gen_range(2..=3);
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(ONSETS.choose(rng).unwrap());
        w.push(*VOWELS.choose(rng).unwrap());
    }
    w.push_str(CODAS.choose(rng).unwrap());
    w
}

/// Case-inflects `lemma` with harmony and buffer consonants.
pub fn inflect(lemma: &str, case: NominalCase) -> String {
    let ends_in_vowel = VOWELS.contains(&lemma.chars().last().unwrap_or('a'));
    let buffer = |c: &'static str| if ends_in_vowel { c } else { "" };
    let (a, i) = (two(lemma), four(lemma));
    match case {
        NominalCase::Nom => lemma.to_owned(),
        NominalCase::Acc => format!("{lemma}{}{i}", buffer("y")),
        NominalCase::Dat => format!("{lemma}{}{a}", buffer("y")),
        NominalCase::Loc => format!("{lemma}d{a}"),
        NominalCase::Abl => format!("{lemma}d{a}n"),
        NominalCase::Gen => format!("{lemma}{}{i}n", buffer("n")),
        NominalCase::Ins => format!("{lemma}{}l{a}", buffer("y")),
    }
}

fn sentence<R: Rng>(rng: &mut R, lemmas: &mut Vec<String>) -> String {
    let nouns = rng.gen_range(4..=7);
    let mut words = Vec::with_capacity(nouns + 3);
    for k in 0..nouns {
        let l = if lemmas.is_empty() || rng.gen_bool(0.8) {
            let l = lemma(rng);
            lemmas.push(l.clone());
            l
        } else {
            lemmas.choose(rng).unwrap().clone()
        };
        words.push(inflect(&l, *NominalCase::ALL.choose(rng).unwrap()));
        if k % 3 == 1 {
            words.push(FUNCTION_WORDS.choose(rng).unwrap().to_string());
        }
    }
    words.push(VERBS.choose(rng).unwrap().to_string());
    let mut s = words.join(" ");
    if let Some(first) = s.chars().next() {
        let upper: String = first.to_uppercase().collect();
        s.replace_range(..first.len_utf8(), &upper);
    }
    s.push('.');
    s
}

/// `paragraphs` lines of two to four sentences each.
pub fn turkish_prose<R: Rng>(rng: &mut R, paragraphs: usize) -> String {
    let mut lemmas = Vec::new();
    (0..paragraphs)
        .map(|_| {
            let n = rng.gen_range(2..=4);
            (0..n).map(|_| sentence(rng, &mut lemmas)).collect::<Vec<_>>().join(" ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Replaces `edits` randomly chosen words with fresh lemmas.
pub fn perturb<R: Rng>(rng: &mut R, text: &str, edits: usize) -> String {
    let mut lines: Vec<Vec<String>> = text
        .split('\n')
        .map(|l| l.split(' ').map(str::to_owned).collect())
        .collect();
    let total: usize = lines.iter().map(Vec::len).sum();
    for _ in 0..edits.min(total) {
        let mut k = rng.gen_range(0..total);
        for line in lines.iter_mut() {
            if k < line.len() {
                line[k] = lemma(rng);
                break;
            }
            k -= line.len();
        }
    }
    lines.iter().map(|l| l.join(" ")).collect::<Vec<_>>().join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, Embedder, HashEmbedder, LanguageClassifier, StopwordClassifier};
    use crate::heuristic::{filter_heuristic, HeuristicThresholds};
    use crate::morph::{analyze_rule_based, filter_morph, MorphFilterConfig, RuleBasedAnalyzer};
    use crate::scoring::cosine;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inflections_follow_harmony() {
        assert_eq!(inflect("kalem", NominalCase::Abl), "kalemden");
        assert_eq!(inflect("okul", NominalCase::Gen), "okulun");
        assert_eq!(inflect("masa", NominalCase::Acc), "masayı");
        assert_eq!(inflect("masa", NominalCase::Gen), "masanın");
        assert_eq!(inflect("göz", NominalCase::Ins), "gözle");
        assert_eq!(inflect("ütü", NominalCase::Dat), "ütüye");
    }

    #[test]
    fn consonant_final_lemmas_round_trip_through_analyzer() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut hits = 0;
        for _ in 0..200 {
            let l = lemma(&mut rng);
            if VOWELS.contains(&l.chars().last().unwrap()) {
                continue;
            }
            for case in [NominalCase::Loc, NominalCase::Abl, NominalCase::Ins] {
                let a = analyze_rule_based(&inflect(&l, case)).unwrap();
                assert_eq!(a.case_tag, Some(case), "{l}");
                hits += 1;
            }
        }
        assert!(hits > 100);
    }

    #[test]
    fn prose_passes_default_stages_and_is_diverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let docs: Vec<Document> = (0..50)
            .map(|i| Document::new(format!("d{i}"), turkish_prose(&mut rng, 4)))
            .collect();
        let emb = HashEmbedder::default();
        for d in &docs {
            assert!(filter_heuristic(d, &HeuristicThresholds::default()).keep, "{}", d.text);
            assert!(filter_morph(d, &MorphFilterConfig::default(), &RuleBasedAnalyzer).keep, "{}", d.text);
            let top = &StopwordClassifier.classify(&d.text, 3).unwrap()[0];
            assert!(top.code == "tur" && top.confidence >= 0.4);
        }
        let vecs: Vec<Vec<f64>> = docs.iter().map(|d| emb.embed(&d.text).unwrap()).collect();
        let mut max = f64::MIN;
        for i in 0..vecs.len() {
            for j in 0..i {
                max = max.max(cosine(&vecs[i], &vecs[j]).unwrap());
            }
        }
        assert!(max < 0.5, "max cross-document cosine {max}");
        let near = perturb(&mut rng, &docs[0].text, 3);
        assert!(cosine(&vecs[0], &emb.embed(&near).unwrap()).unwrap() > 0.8);
    }
}
