use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{lines, ConfigError};
use crate::corpus::Document;
use crate::decision::{Reason, StageDecision};

pub const STAGE: &str = "clean";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CleanConfig {
    pub min_chars: usize,
    pub max_chars: usize,
    pub max_table_line_ratio: f64,
    pub max_image_link_ratio: f64,
}

impl Default for CleanConfig {
    fn default() -> Self {
        Self {
            min_chars: 64,
            max_chars: 1_000_000,
            max_table_line_ratio: 0.5,
            max_image_link_ratio: 0.5,
        }
    }
}

impl CleanConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.min_chars == 0 || self.min_chars >= self.max_chars {
            return Err(ConfigError(format!(
                "clean: need 0 < min_chars < max_chars, got {} and {}",
                self.min_chars, self.max_chars
            )));
        }
        for (name, v) in [
            ("max_table_line_ratio", self.max_table_line_ratio),
            ("max_image_link_ratio", self.max_image_link_ratio),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ConfigError(format!("clean: {name} must be in [0,1], got {v}")));
            }
        }
        Ok(())
    }
}

// A whole line that is a markdown image/link or an HTML <img> tag.
static IMAGE_LINE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"(?i)^(?:!?\[[^\]]*\]\([^)]*\)|<img\b[^>]*>|<a\b[^>]*>\s*(?:<img\b[^>]*>)?\s*</a>)$"#)
        .unwrap()
});

fn is_table_line(line: &str) -> bool {
    line.chars().filter(|&c| c == '|' || c == '\t').count() >= 2
}

fn is_image_line(line: &str) -> bool {
    IMAGE_LINE.is_match(line.trim())
}

pub fn clean(doc: &Document, cfg: &CleanConfig) -> StageDecision {
    let char_count = doc.text.chars().count();
    let mut n_lines = 0usize;
    let mut table = 0usize;
    let mut image = 0usize;
    for line in lines(&doc.text) {
        n_lines += 1;
        table += is_table_line(line) as usize;
        image += is_image_line(line) as usize;
    }
    let table_ratio = table as f64 / n_lines as f64;
    let image_ratio = image as f64 / n_lines as f64;

    let reason = if doc.id.is_empty() || doc.text.trim().is_empty() || doc.text.contains('\0') {
        Some(Reason::InvalidField)
    } else if char_count < cfg.min_chars {
        Some(Reason::TooShort)
    } else if char_count > cfg.max_chars {
        Some(Reason::TooLong)
    } else if table_ratio > cfg.max_table_line_ratio {
        Some(Reason::TableDominated)
    } else if image_ratio > cfg.max_image_link_ratio {
        Some(Reason::ImageDominated)
    } else {
        None
    };
    StageDecision::from_reason(STAGE, reason)
        .with("char_count", char_count)
        .with("table_line_ratio", table_ratio)
        .with("image_link_ratio", image_ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn prose(n: usize) -> String {
        "Mahkeme kararı açık ve gerekçelidir. "
            .chars()
            .cycle()
            .take(n)
            .collect()
    }

    #[test]
    fn one_below_minimum_is_too_short() {
        let cfg = CleanConfig::default();
        let d = clean(&Document::new("a", prose(cfg.min_chars - 1)), &cfg);
        assert!(!d.keep);
        assert_eq!(d.reason, Reason::TooShort);
        let d = clean(&Document::new("a", prose(cfg.min_chars)), &cfg);
        assert!(d.keep);
        assert_eq!(d.reason, Reason::Pass);
    }

    #[test]
    fn long_text_is_dropped() {
        let cfg = CleanConfig {
            max_chars: 100,
            ..Default::default()
        };
        assert_eq!(clean(&Document::new("a", prose(101)), &cfg).reason, Reason::TooLong);
    }

    #[test]
    fn table_dominated_ratio() {
        let mut lines = vec!["a | b | c"; 7];
        lines.extend(["bu satır düz bir cümledir ve tablo değildir efendim"; 3]);
        let text = lines.join("\n");
        let cfg = CleanConfig {
            min_chars: 10,
            ..Default::default()
        };
        let d = clean(&Document::new("t", text), &cfg);
        assert_eq!(d.reason, Reason::TableDominated);
        assert!((d.measure("table_line_ratio").unwrap() - 0.7).abs() < 1e-12);
        assert!(d.measurements.contains_key("char_count"));
        assert!(d.measurements.contains_key("image_link_ratio"));
    }

    #[test]
    fn tab_separated_lines_count_as_table() {
        assert!(is_table_line("a\tb\tc"));
        assert!(is_table_line("a|b\tc"));
        assert!(!is_table_line("a | b"));
    }

    #[test]
    fn image_dominated() {
        let text = [
            "![logo](http://x/logo.png)",
            "[anasayfa](http://x/)",
            "<img src=\"a.png\" alt=\"\">",
            "Bu belge yalnızca resim bağlantılarından oluşmaktadır, metin azdır.",
        ]
        .join("\n");
        let cfg = CleanConfig {
            min_chars: 10,
            ..Default::default()
        };
        let d = clean(&Document::new("i", text), &cfg);
        assert_eq!(d.reason, Reason::ImageDominated);
        assert!((d.measure("image_link_ratio").unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn invalid_fields() {
        let cfg = CleanConfig::default();
        assert_eq!(clean(&Document::new("", prose(100)), &cfg).reason, Reason::InvalidField);
        assert_eq!(clean(&Document::new("a", " \n\t "), &cfg).reason, Reason::InvalidField);
        let mut t = prose(100);
        t.push('\0');
        assert_eq!(clean(&Document::new("a", t), &cfg).reason, Reason::InvalidField);
    }

    #[test]
    fn config_validation() {
        assert!(CleanConfig::default().validate().is_ok());
        let bad = CleanConfig {
            min_chars: 10,
            max_chars: 10,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn lowering_min_chars_never_drops_a_kept_doc(
            text in "[a-zçğıöşü |\n]{0,200}",
            min in 1usize..150,
            lower in 0usize..150,
        ) {
            let hi = CleanConfig { min_chars: min, ..Default::default() };
            let lo = CleanConfig { min_chars: min.saturating_sub(lower).max(1), ..Default::default() };
            let doc = Document::new("p", text);
            if clean(&doc, &hi).keep {
                prop_assert!(clean(&doc, &lo).keep);
            }
        }
    }
}
