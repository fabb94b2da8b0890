//! Regenerates `tests/data/mini.jsonl`, the pipeline fixture.
//!
//!     cargo run -p forge-cli --example fixture > crates/cli/tests/data/mini.jsonl

use std::io::{self, Write};

use forge_core::corpus::{Document, NominalCase};
use forge_core::synth::{inflect, lemma, perturb, turkish_prose};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CLEAN: usize = 990;

fn prose(seed: u64) -> String {
    turkish_prose(&mut ChaCha8Rng::seed_from_u64(seed), 4)
}

/// Plenty of analyzable nouns, all in one case.
fn flat_morphology(rng: &mut ChaCha8Rng) -> String {
    let lines: Vec<String> = (0..6)
        .map(|_| {
            let words: Vec<String> = (0..12).map(|_| inflect(&lemma(rng), NominalCase::Loc)).collect();
            format!("Bu {} ve bir {} için verdi.", words[..6].join(" "), words[6..].join(" "))
        })
        .collect();
    lines.join("\n")
}

fn main() -> io::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let domains = ["haber.example.com.tr", "arsiv.example.org", "blog.example.net", "kutuphane.example.edu.tr"];
    let mut docs: Vec<Document> = (0..CLEAN as u64)
        .map(|i| {
            let d = Document::new(format!("doc-{i:04}"), prose(i));
            if i % 3 == 0 {
                let host = domains.choose(&mut rng).unwrap();
                d.with_url(format!("https://{host}/yazi/{i}"))
            } else {
                d
            }
        })
        .collect();

    let mut extra = vec![
        Document::new("v-short", "Kısa bir not."),
        Document::new(
            "v-english",
            "The committee reviewed the annual budget and it was agreed that the funds for the new library \
             would be released in the spring, after the final report has been submitted to the board.\n"
                .repeat(3),
        ),
        Document::new("v-casino", prose(5001)).with_url("https://mega-casino.example.com/tr/bonus"),
        Document::new("v-lines", "Kısa satır ve\n".repeat(30) + &prose(5002)),
        Document::new("v-morph", flat_morphology(&mut rng)),
        Document::new("v-exact", docs[17].text.clone()),
        Document::new("v-near", perturb(&mut rng, &docs[42].text, 3)),
        Document::new(
            "v-pii",
            format!(
                "{}\nBilgi için ayse.yilmaz@example.com adresine yazın ya da +90 532 123 45 67 numarasını arayın.",
                prose(5003)
            ),
        ),
        Document::new("page-b", prose(5005)).with_page("kitap-1", 2),
        Document::new("page-a", prose(5004)).with_page("kitap-1", 1),
    ];
    // Scatter the special records through the stream.
    for d in extra.drain(..) {
        let at = rng.gen_range(50..docs.len());
        docs.insert(at, d);
    }

    let mut out = io::stdout().lock();
    for d in &docs {
        serde_json::to_writer(&mut out, d)?;
        out.write_all(b"\n")?;
    }
    out.write_all(b"{\"id\": \"broken\", \"text\": \n")?;
    Ok(())
}
