//! Record-level safety and sanity stages.

mod clean;
mod lang;
mod pii;
mod url;

pub use self::clean::{clean, CleanConfig};
pub use self::lang::{filter_language, LangFilterConfig, DEFAULT_MIN_LANG_CONFIDENCE};
pub use self::pii::{anonymize_pii, anonymize_text, luhn_valid, tc_kimlik_valid};
pub use self::url::{filter_url, UrlFilterConfig};

/// Splits on `\n` and strips a trailing `\r` from each line.
pub(crate) fn lines(text: &str) -> impl Iterator<Item = &str> {
    text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l))
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid config: {0}")]
pub struct ConfigError(pub String);
