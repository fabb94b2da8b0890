//! Corpus data model, line-delimited record IO and provider interfaces.

mod document;
mod io;
pub mod providers;

pub use document::{nfc, Document};
pub use io::{
    read_dataset, read_dataset_from, write_dataset, write_dataset_to, DatasetReader, ErrorRecord,
    OnError, RecordError, WriteError,
};
pub use providers::{
    Embedder, HashEmbedder, HashingTokenizer, LangPrediction, LanguageClassifier, MorphAnalysis,
    MorphAnalyzer, NominalCase, PartOfSpeech, ProviderError, StopwordClassifier, Tokenizer,
};
