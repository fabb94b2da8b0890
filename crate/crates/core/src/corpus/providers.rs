//! Pluggable provider interfaces and the built-in deterministic backends.
//!
//! Every provider must be callable concurrently (`Send + Sync`); stages fan
//! out over documents and share one provider instance.

use serde::{Deserialize, Serialize};
use thiserror::Error;
use xxhash_rust::xxh3::xxh3_64_with_seed;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("provider error: {0}")]
pub struct ProviderError(pub String);

pub trait Tokenizer: Send + Sync {
    /// Token ids for `text`, special tokens excluded.
    fn tokenize(&self, text: &str) -> Vec<u32>;

    fn count_tokens(&self, text: &str) -> usize {
        self.tokenize(text).len()
    }

    fn vocab_size(&self) -> usize;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LangPrediction {
    pub code: String,
    pub confidence: f64,
}

pub trait LanguageClassifier: Send + Sync {
    /// Up to `k` predictions, descending by confidence.
    fn classify(&self, text: &str, k: usize) -> Result<Vec<LangPrediction>, ProviderError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PartOfSpeech {
    Noun,
    Verb,
    Other,
}

/// The seven Turkish nominal cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NominalCase {
    Nom,
    Acc,
    Dat,
    Loc,
    Abl,
    Gen,
    Ins,
}

impl NominalCase {
    pub const ALL: [NominalCase; 7] = [
        NominalCase::Nom,
        NominalCase::Acc,
        NominalCase::Dat,
        NominalCase::Loc,
        NominalCase::Abl,
        NominalCase::Gen,
        NominalCase::Ins,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphAnalysis {
    pub lemma: String,
    pub pos: PartOfSpeech,
    pub case_tag: Option<NominalCase>,
}

impl MorphAnalysis {
    /// Returns `None` when the lemma is empty or a case tag is attached to
    /// something other than a noun or verb.
    pub fn new(lemma: impl Into<String>, pos: PartOfSpeech, case_tag: Option<NominalCase>) -> Option<Self> {
        let lemma = lemma.into();
        if lemma.is_empty() || (case_tag.is_some() && pos == PartOfSpeech::Other) {
            return None;
        }
        Some(Self { lemma, pos, case_tag })
    }
}

pub trait MorphAnalyzer: Send + Sync {
    /// `None` for tokens the analyzer cannot handle.
    fn analyze(&self, token: &str) -> Option<MorphAnalysis>;
}

pub trait Embedder: Send + Sync {
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Result<Vec<f64>, ProviderError>;
}

/// Splits text into word pieces (alphanumeric runs, apostrophes kept inside
/// words) and single punctuation characters.
pub(crate) fn pieces(text: &str) -> impl Iterator<Item = &str> {
    let mut rest = text;
    std::iter::from_fn(move || {
        rest = rest.trim_start_matches(char::is_whitespace);
        let first = rest.chars().next()?;
        let end = if first.is_alphanumeric() {
            rest.char_indices()
                .find(|&(i, c)| {
                    !(c.is_alphanumeric() || (i > 0 && is_apostrophe(c) && next_is_alnum(rest, i)))
                })
                .map_or(rest.len(), |(i, _)| i)
        } else {
            first.len_utf8()
        };
        let (piece, tail) = rest.split_at(end);
        rest = tail;
        Some(piece)
    })
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

fn next_is_alnum(s: &str, i: usize) -> bool {
    s[i..].chars().nth(1).is_some_and(char::is_alphanumeric)
}

/// Turkish-aware lowercasing (`I` → `ı`, `İ` → `i`).
pub fn turkish_lowercase(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            'I' => out.push('ı'),
            'İ' => out.push('i'),
            _ => out.extend(c.to_lowercase()),
        }
    }
    out
}

/// Feature-hashing word tokenizer. Ids `0..RESERVED` are kept for special
/// tokens; [`HashingTokenizer::MASK_ID`] is the mask token.
#[derive(Debug, Clone)]
pub struct HashingTokenizer {
    vocab_size: usize,
}

impl HashingTokenizer {
    pub const RESERVED: u32 = 5;
    pub const MASK_ID: u32 = 4;

    pub fn new(vocab_size: usize) -> Self {
        assert!(vocab_size > Self::RESERVED as usize, "vocab too small");
        Self { vocab_size }
    }

    fn id_of(&self, piece: &str) -> u32 {
        let span = self.vocab_size as u64 - Self::RESERVED as u64;
        let h = xxh3_64_with_seed(turkish_lowercase(piece).as_bytes(), 0x746f6b);
        Self::RESERVED + (h % span) as u32
    }
}

impl Default for HashingTokenizer {
    fn default() -> Self {
        Self::new(32_768)
    }
}

impl Tokenizer for HashingTokenizer {
    fn tokenize(&self, text: &str) -> Vec<u32> {
        pieces(text).map(|p| self.id_of(p)).collect()
    }

    fn count_tokens(&self, text: &str) -> usize {
        pieces(text).count()
    }

    fn vocab_size(&self) -> usize {
        self.vocab_size
    }
}

const TUR_STOPWORDS: &[&str] = &[
    "ve", "bir", "bu", "da", "de", "için", "ile", "olarak", "olan", "gibi", "daha", "çok", "ama",
    "ancak", "veya", "ya", "her", "şu", "o", "ki", "mi", "ne", "kadar", "sonra", "önce", "göre",
    "değil", "var", "yok", "ise", "üzerine", "tarafından", "hem", "en",
];
const ENG_STOPWORDS: &[&str] = &[
    "the", "and", "of", "to", "in", "is", "that", "for", "it", "with", "as", "was", "on", "are",
    "be", "by", "this", "an", "or", "from", "at", "which", "not", "have", "has",
];
const DEU_STOPWORDS: &[&str] = &[
    "der", "die", "und", "in", "den", "von", "zu", "das", "mit", "sich", "des", "auf", "für",
    "ist", "im", "dem", "nicht", "ein", "eine", "als", "auch", "es", "an", "werden", "aus",
];

/// Stopword-vote language identifier over `tur`, `eng` and `deu`.
///
/// Each word votes for every language whose stopword list contains it;
/// Turkish-only letters (ğ, ı, ş) vote for `tur`. Confidence is
/// `votes / (total votes + 1)`, so short texts never reach certainty.
#[derive(Debug, Clone, Default)]
pub struct StopwordClassifier;

impl LanguageClassifier for StopwordClassifier {
    fn classify(&self, text: &str, k: usize) -> Result<Vec<LangPrediction>, ProviderError> {
        let langs: [(&str, &[&str]); 3] = [
            ("tur", TUR_STOPWORDS),
            ("eng", ENG_STOPWORDS),
            ("deu", DEU_STOPWORDS),
        ];
        let mut votes = [0usize; 3];
        for piece in pieces(text) {
            if !piece.chars().next().is_some_and(char::is_alphabetic) {
                continue;
            }
            let word = turkish_lowercase(piece);
            for (i, (_, list)) in langs.iter().enumerate() {
                if list.contains(&word.as_str()) {
                    votes[i] += 1;
                }
            }
            if word.contains(['ğ', 'ı', 'ş']) {
                votes[0] += 1;
            }
        }
        let total: usize = votes.iter().sum();
        let mut out: Vec<LangPrediction> = langs
            .iter()
            .zip(votes)
            .filter(|(_, v)| *v > 0)
            .map(|((code, _), v)| LangPrediction {
                code: (*code).to_owned(),
                confidence: v as f64 / (total + 1) as f64,
            })
            .collect();
        out.sort_by(|a, b| {
            b.confidence
                .total_cmp(&a.confidence)
                .then_with(|| a.code.cmp(&b.code))
        });
        out.truncate(k);
        Ok(out)
    }
}

/// Signed feature-hashing embedder over character n-grams of the
/// lowercased, whitespace-collapsed text.
///
/// Texts sharing most n-grams (e.g. differing only in a header line) land
/// close in cosine distance, which makes it a usable deterministic stand-in
/// for a dense encoder.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    dimension: usize,
    ngram: usize,
}

impl HashEmbedder {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension >= 1);
        Self { dimension, ngram: 5 }
    }

    pub fn with_ngram(mut self, n: usize) -> Self {
        assert!(n >= 1);
        self.ngram = n;
        self
    }
}

impl Default for HashEmbedder {
    fn default() -> Self {
        Self::new(1024)
    }
}

impl Embedder for HashEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, ProviderError> {
        let norm: Vec<char> = turkish_lowercase(text)
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ")
            .chars()
            .collect();
        let mut v = vec![0.0; self.dimension];
        if norm.len() < self.ngram {
            return Ok(v);
        }
        let mut buf = String::new();
        for w in norm.windows(self.ngram) {
            buf.clear();
            buf.extend(w);
            let h = xxh3_64_with_seed(buf.as_bytes(), 0x656d62);
            let bucket = (h % self.dimension as u64) as usize;
            let sign = if (h >> 63) & 1 == 0 { 1.0 } else { -1.0 };
            v[bucket] += sign;
        }
        Ok(v)
    }
}
