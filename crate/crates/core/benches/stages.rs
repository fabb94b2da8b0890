use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use forge_core::corpus::{Document, HashEmbedder, HashingTokenizer};
use forge_core::dedup::dedup_semantic;
use forge_core::filters::anonymize_pii;
use forge_core::heuristic::{evaluate_grid, HeuristicThresholds};
use forge_core::morph::{sweep_thresholds, RuleBasedAnalyzer};
use forge_core::par;
use forge_core::synth::{perturb, turkish_prose};

fn corpus(n: usize) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut docs: Vec<Document> = Vec::with_capacity(n);
    for i in 0..n {
        let text = if i % 10 == 9 {
            perturb(&mut rng, &docs[i - 1].text, 2)
        } else {
            turkish_prose(&mut rng, 6)
        };
        let text = if i % 7 == 0 {
            format!("{text}\nİletişim: ornek{i}@posta.com.tr veya 0532 555 12 {:02}", i % 100)
        } else {
            text
        };
        docs.push(Document::new(format!("d{i}"), text));
    }
    docs
}

fn both<F: Fn()>(c: &mut Criterion, group: &str, f: F) {
    let mut g = c.benchmark_group(group);
    g.bench_function(BenchmarkId::new("mode", "parallel"), |b| b.iter(&f));
    g.bench_function(BenchmarkId::new("mode", "sequential"), |b| b.iter(|| par::with_sequential(&f)));
    g.finish();
}

fn heuristic_grid(c: &mut Criterion) {
    let docs = corpus(4000);
    let mut configs = Vec::new();
    for a in [0.5, 0.6, 0.67, 0.75] {
        for b in [0.01, 0.03, 0.05] {
            for n in [0.2, 0.3, 0.4] {
                configs.push(HeuristicThresholds::new(a, b, n));
            }
        }
    }
    both(c, "heuristic_grid", || {
        black_box(evaluate_grid(&docs, &configs).unwrap());
    });
}

fn morph_sweep(c: &mut Criterion) {
    let docs = corpus(2000);
    let tok = HashingTokenizer::default();
    both(c, "morph_sweep", || {
        black_box(
            sweep_thresholds(&docs, &[0.5, 0.7, 0.9], &[0.75, 0.8, 0.85, 0.9], &RuleBasedAnalyzer, &tok, 10).unwrap(),
        );
    });
}

fn semantic_dedup(c: &mut Criterion) {
    let docs = corpus(1500);
    let emb = HashEmbedder::default();
    both(c, "semantic_dedup", || {
        black_box(dedup_semantic(&docs, 0.75, &emb));
    });
}

fn pii(c: &mut Criterion) {
    let docs = corpus(4000);
    both(c, "pii", || {
        black_box(par::map(&docs, |d| anonymize_pii(d).0));
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = heuristic_grid, morph_sweep, semantic_dedup, pii
}
criterion_main!(benches);
