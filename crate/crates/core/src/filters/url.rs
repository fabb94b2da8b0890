use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::decision::{Reason, StageDecision};

pub const STAGE: &str = "url_filter";

/// Keyword deny list with a domain allowlist that takes precedence.
/// Both sets are matched case-insensitively.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UrlFilterConfig {
    pub deny_keywords: BTreeSet<String>,
    pub allow_domains: BTreeSet<String>,
}

impl UrlFilterConfig {
    pub fn new<I, J, S, T>(deny: I, allow: J) -> Self
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        Self {
            deny_keywords: deny.into_iter().map(|s| s.as_ref().to_lowercase()).collect(),
            allow_domains: allow
                .into_iter()
                .map(|s| s.as_ref().trim_end_matches('.').to_lowercase())
                .collect(),
        }
    }

    fn is_allowed_host(&self, host: &str) -> bool {
        // host itself or any parent domain of it
        let mut h = host;
        loop {
            if self.allow_domains.contains(h) {
                return true;
            }
            match h.split_once('.') {
                Some((_, rest)) if !rest.is_empty() => h = rest,
                _ => return false,
            }
        }
    }
}

fn host_of(raw: &str) -> Option<String> {
    let parsed = url::Url::parse(raw)
        .ok()
        .or_else(|| url::Url::parse(&format!("http://{raw}")).ok())?;
    let host = parsed.host_str()?.trim_end_matches('.').to_lowercase();
    Some(host)
}

pub fn filter_url(doc: &Document, cfg: &UrlFilterConfig) -> StageDecision {
    let Some(raw) = doc.url.as_deref() else {
        return StageDecision::keep(STAGE);
    };
    if let Some(host) = host_of(raw) {
        if cfg.is_allowed_host(&host) {
            return StageDecision::keep(STAGE).with("allowlisted", host);
        }
    }
    let lowered = raw.to_lowercase();
    match cfg.deny_keywords.iter().find(|k| lowered.contains(k.as_str())) {
        Some(k) => StageDecision::drop(STAGE, Reason::UrlDenied).with("matched_keyword", k.as_str()),
        None => StageDecision::keep(STAGE),
    }
}
