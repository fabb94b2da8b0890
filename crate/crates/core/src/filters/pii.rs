//! Rule-based PII anonymization.
//!
//! Detected spans are replaced with `<EMAIL>`, `<URL>`, `<FIN_NUM>`,
//! `<NATIONAL_ID>` or `<PHONE>`; everything else is left byte-identical.
//! Passes run in that order over the progressively rewritten text. No
//! placeholder contains a digit, `@` or a URL prefix, so a second
//! application finds nothing new.

use std::sync::LazyLock;

use regex::Regex;

use crate::corpus::Document;
use crate::decision::StageDecision;

pub const STAGE: &str = "pii";

static EMAIL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,}").unwrap()
});
static URL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r#"(?i)\b(?:https?://|www\.)[^\s<>"']+"#).unwrap());
static IBAN: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\b[A-Z]{2}[0-9]{2}(?: ?[A-Z0-9]{4}){2,7}(?: ?[A-Z0-9]{1,3})?\b").unwrap()
});
// digit runs with optional single space/dash grouping and leading +
static NUMBER_RUN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\+?[0-9](?:[ -]?[0-9])*").unwrap());

const URL_TRAILING: &[char] = &['.', ',', ';', ':', '!', '?', ')', ']', '}'];

/// Turkish national identity number check: 11 digits, first nonzero,
/// 10th digit = (7·odd-position sum − even-position sum) mod 10 over the
/// first nine, 11th digit = sum of the first ten mod 10.
pub fn tc_kimlik_valid(digits: &[u8]) -> bool {
    if digits.len() != 11 || digits[0] == 0 || digits.iter().any(|&d| d > 9) {
        return false;
    }
    let d = |i: usize| digits[i] as i32;
    let odd = d(0) + d(2) + d(4) + d(6) + d(8);
    let even = d(1) + d(3) + d(5) + d(7);
    let c10 = (odd * 7 - even).rem_euclid(10);
    let c11 = (0..10).map(d).sum::<i32>() % 10;
    c10 == d(9) && c11 == d(10)
}

pub fn luhn_valid(digits: &[u8]) -> bool {
    if digits.is_empty() || digits.iter().any(|&d| d > 9) {
        return false;
    }
    let sum: u32 = digits
        .iter()
        .rev()
        .enumerate()
        .map(|(i, &d)| {
            let d = d as u32;
            if i % 2 == 1 {
                let x = d * 2;
                if x > 9 {
                    x - 9
                } else {
                    x
                }
            } else {
                d
            }
        })
        .sum();
    sum.is_multiple_of(10)
}

fn classify_number(span: &str) -> Option<&'static str> {
    let digits: Vec<u8> = span
        .bytes()
        .filter(u8::is_ascii_digit)
        .map(|b| b - b'0')
        .collect();
    let plain = digits.len() == span.len();
    if plain && tc_kimlik_valid(&digits) {
        Some("<NATIONAL_ID>")
    } else if digits.len() == 16 && !span.starts_with('+') && luhn_valid(&digits) {
        Some("<FIN_NUM>")
    } else if (10..=13).contains(&digits.len()) {
        Some("<PHONE>")
    } else {
        None
    }
}

fn is_word_char(c: Option<char>) -> bool {
    c.is_some_and(|c| c.is_alphanumeric() || c == '_')
}

fn replace_simple(text: &str, re: &Regex, placeholder: &str, trim: &[char]) -> Option<String> {
    let mut out = String::new();
    let mut last = 0;
    for m in re.find_iter(text) {
        let span = m.as_str().trim_end_matches(trim);
        if span.is_empty() {
            continue;
        }
        out.push_str(&text[last..m.start()]);
        out.push_str(placeholder);
        last = m.start() + span.len();
    }
    if last == 0 && out.is_empty() {
        return None;
    }
    out.push_str(&text[last..]);
    Some(out)
}

fn replace_numbers(text: &str) -> Option<String> {
    let mut out = String::new();
    let mut last = 0;
    let mut changed = false;
    for m in NUMBER_RUN.find_iter(text) {
        let before = text[..m.start()].chars().next_back();
        let after = text[m.end()..].chars().next();
        if is_word_char(before) || is_word_char(after) {
            continue;
        }
        if let Some(placeholder) = classify_number(m.as_str()) {
            out.push_str(&text[last..m.start()]);
            out.push_str(placeholder);
            last = m.end();
            changed = true;
        }
    }
    if !changed {
        return None;
    }
    out.push_str(&text[last..]);
    Some(out)
}

/// Anonymizes a text; returns the input unchanged when nothing matched.
pub fn anonymize_text(text: &str) -> String {
    let mut cur = text.to_owned();
    for (re, placeholder, trim) in [
        (&*EMAIL, "<EMAIL>", &[][..]),
        (&*URL, "<URL>", URL_TRAILING),
        (&*IBAN, "<FIN_NUM>", &[][..]),
    ] {
        if let Some(next) = replace_simple(&cur, re, placeholder, trim) {
            cur = next;
        }
    }
    if let Some(next) = replace_numbers(&cur) {
        cur = next;
    }
    cur
}

/// Never drops; the decision records whether anything was redacted.
pub fn anonymize_pii(doc: &Document) -> (Document, StageDecision) {
    let text = anonymize_text(&doc.text);
    let redacted = text != doc.text;
    let decision = StageDecision::keep(STAGE).with("redacted", usize::from(redacted));
    (Document { text, ..doc.clone() }, decision)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Builds a checksum-valid id from nine leading digits.
    fn make_tc(first9: [u8; 9]) -> String {
        let d = |i: usize| first9[i] as i32;
        let odd = d(0) + d(2) + d(4) + d(6) + d(8);
        let even = d(1) + d(3) + d(5) + d(7);
        let c10 = (odd * 7 - even).rem_euclid(10) as u8;
        let c11 = ((first9.iter().map(|&x| x as i32).sum::<i32>() + c10 as i32) % 10) as u8;
        first9
            .iter()
            .chain([c10, c11].iter())
            .map(|d| char::from(b'0' + d))
            .collect()
    }

    #[test]
    fn email_is_replaced() {
        assert_eq!(anonymize_text("yaz: ali@ex.com"), "yaz: <EMAIL>");
    }

    #[test]
    fn national_id_is_replaced() {
        let id = make_tc([1, 2, 3, 4, 5, 6, 7, 8, 9]);
        assert_eq!(id, "12345678950");
        let digits: Vec<u8> = id.bytes().map(|b| b - b'0').collect();
        assert!(tc_kimlik_valid(&digits));
        assert_eq!(
            anonymize_text(&format!("TC no: {id}, ad: Ali")),
            "TC no: <NATIONAL_ID>, ad: Ali"
        );
    }

    #[test]
    fn checksum_invalid_eleven_digits_is_a_phone() {
        // 11 digits failing the checksum still look like a phone number
        assert_eq!(anonymize_text("no 12345678951"), "no <PHONE>");
        assert!(!tc_kimlik_valid(&[0, 2, 3, 4, 5, 6, 7, 8, 9, 5, 0]));
    }

    #[test]
    fn phone_variants() {
        assert_eq!(anonymize_text("ara +90 532 123 45 67."), "ara <PHONE>.");
        assert_eq!(anonymize_text("tel: 0212-555-12-34"), "tel: <PHONE>");
        // too short, a year, a date
        assert_eq!(anonymize_text("1234 2024 12-05-2023"), "1234 2024 12-05-2023");
        // glued to letters
        assert_eq!(anonymize_text("abc05321234567"), "abc05321234567");
    }

    #[test]
    fn card_and_iban() {
        assert!(luhn_valid(&[4, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1]));
        assert_eq!(anonymize_text("kart 4111 1111 1111 1111 ok"), "kart <FIN_NUM> ok");
        assert_eq!(
            anonymize_text("IBAN: TR33 0006 1005 1978 6457 8413 26"),
            "IBAN: <FIN_NUM>"
        );
        // 16 digits failing Luhn are not a card and too long for a phone
        assert_eq!(anonymize_text("4111111111111112"), "4111111111111112");
    }

    #[test]
    fn urls_are_replaced_without_trailing_punctuation() {
        assert_eq!(
            anonymize_text("bkz. https://www.resmigazete.gov.tr/eskiler/2020.pdf, ve www.x.org."),
            "bkz. <URL>, ve <URL>."
        );
    }

    #[test]
    fn clean_text_is_unchanged() {
        assert_eq!(anonymize_text("no pii here"), "no pii here");
        let doc = Document::new("a", "no pii here").with_url("http://keep.me");
        let (out, d) = anonymize_pii(&doc);
        assert_eq!(out, doc);
        assert_eq!(d.measure("redacted"), Some(0.0));
    }

    #[test]
    fn whitespace_around_spans_is_preserved() {
        assert_eq!(
            anonymize_text("  a@b.co\t\n 05321234567  "),
            "  <EMAIL>\t\n <PHONE>  "
        );
    }

    proptest! {
        #[test]
        fn anonymization_is_idempotent(
            text in "([a-zA-Z0-9@.:/+_ -]|www\\.|http://|<|>|\n|TR[0-9]{2}){0,60}"
        ) {
            let once = anonymize_text(&text);
            prop_assert_eq!(anonymize_text(&once), once);
        }

        #[test]
        fn valid_ids_always_detected(first in 1u8..10, rest in proptest::array::uniform8(0u8..10)) {
            let mut nine = [0u8; 9];
            nine[0] = first;
            nine[1..].copy_from_slice(&rest);
            let id = make_tc(nine);
            prop_assert_eq!(anonymize_text(&format!("x {id} y")), "x <NATIONAL_ID> y");
        }
    }
}
