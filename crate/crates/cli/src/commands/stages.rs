use std::fs;
use std::path::Path;

use anyhow::Result;
use serde::Serialize;

use forge_core::corpus::{Document, HashEmbedder, HashingTokenizer, Tokenizer};
use forge_core::curriculum::{
    apply_mlm_masking, run_stages, sequence_seed, MaskConfig, MaskError, Reject, StageSpec,
};
use forge_core::dedup::{dedup as run_dedup, dedup_report, DedupConfig, DedupMode, KeepPolicy, Profile};
use forge_core::filters::{CleanConfig, LangFilterConfig, UrlFilterConfig};
use forge_core::heuristic::HeuristicThresholds;
use forge_core::morph::MorphFilterConfig;
use forge_core::par;

use crate::cli::{
    CleanArgs, DedupArgs, LangidArgs, MaskArgs, ModeArg, MorphArgs, ProfileArg, QualityArgs, StageIo, UrlfilterArgs,
};
use crate::config::ProviderConfig;
use crate::dataset::{load, reject_lines, save, write_jsonl};
use crate::{config_error, data_error};

/// Validates `spec`, then filters `io.input` through it.
fn single_stage(io: StageIo, spec: StageSpec) -> Result<()> {
    let spec = spec.validated().map_err(|e| config_error(e.0))?;
    let providers = ProviderConfig::default().build();
    let loaded = load(&io.input, io.on_error)?;
    let n_in = loaded.docs.len();
    let out = run_stages(loaded.docs, std::slice::from_ref(&spec), &providers.stage_providers())
        .map_err(|e| data_error(e.to_string()))?;
    save(&out.docs, &io.output)?;
    if let Some(path) = &io.rejects {
        write_jsonl(&reject_lines(&loaded.errors, &out.rejects, &loaded.lines), path)?;
    }
    eprintln!(
        "{}: {} in, {} out, {} unreadable",
        spec.id(),
        n_in,
        out.docs.len(),
        loaded.errors.len()
    );
    Ok(())
}

pub fn clean(a: CleanArgs) -> Result<()> {
    let cfg = CleanConfig {
        min_chars: a.min_chars,
        max_chars: a.max_chars,
        max_table_line_ratio: a.max_table_ratio,
        max_image_link_ratio: a.max_image_ratio,
    };
    single_stage(a.io, StageSpec::Clean(cfg))
}

pub fn langid(a: LangidArgs) -> Result<()> {
    let cfg = LangFilterConfig {
        target_languages: a.targets.into_iter().collect(),
        min_confidence: a.min_confidence,
        top_k: a.top_k,
        any_of_top_k: a.any_of_top_k,
    };
    single_stage(a.io, StageSpec::Langid(cfg))
}

fn read_list(path: &Path) -> Result<Vec<String>> {
    let raw = fs::read_to_string(path).map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
    Ok(raw
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect())
}

pub fn urlfilter(a: UrlfilterArgs) -> Result<()> {
    let mut deny = a.deny_keywords;
    let mut allow = a.allow_domains;
    if let Some(p) = &a.denylist {
        deny.extend(read_list(p)?);
    }
    if let Some(p) = &a.allowlist {
        allow.extend(read_list(p)?);
    }
    single_stage(a.io, StageSpec::UrlFilter(UrlFilterConfig::new(deny, allow)))
}

pub fn pii(io: StageIo) -> Result<()> {
    single_stage(io, StageSpec::default_for(forge_core::curriculum::StageId::Pii))
}

pub fn quality(a: QualityArgs) -> Result<()> {
    let cfg = HeuristicThresholds {
        short_line_length: a.short_line_length,
        ..HeuristicThresholds::new(a.short_line, a.char_duplicates, a.new_line)
    };
    single_stage(a.io, StageSpec::HeuristicQuality(cfg))
}

pub fn morph(a: MorphArgs) -> Result<()> {
    let cfg = MorphFilterConfig {
        tau_suffix: a.tau_suffix,
        tau_lemma: a.tau_lemma,
        min_analyzed_tokens: a.min_tokens,
    };
    single_stage(a.io, StageSpec::Morph(cfg))
}

pub fn dedup_config(a: &DedupArgs) -> Result<DedupConfig> {
    let profile = match a.profile {
        ProfileArg::General => Profile::General,
        ProfileArg::Legal => Profile::Legal,
    };
    let cfg = DedupConfig {
        mode: match a.mode {
            ModeArg::Exact => DedupMode::Exact,
            ModeArg::Semantic => DedupMode::Semantic,
            ModeArg::Both => DedupMode::Both,
        },
        similarity_threshold: a.threshold.unwrap_or(profile.threshold()),
        keep_policy: KeepPolicy::FirstSeen,
    };
    cfg.validate().map_err(|e| config_error(e.0))?;
    if a.embed_dim == 0 || a.ngram == 0 {
        return Err(config_error("--embed-dim and --ngram must be positive"));
    }
    Ok(cfg)
}

pub fn dedup(a: DedupArgs) -> Result<()> {
    let cfg = dedup_config(&a)?;
    let embedder = HashEmbedder::new(a.embed_dim).with_ngram(a.ngram);
    let loaded = load(&a.io.input, a.io.on_error)?;
    let decisions = run_dedup(&loaded.docs, &cfg, &embedder);
    let summary = dedup_report(&decisions);
    let mut kept = Vec::with_capacity(summary.kept);
    let mut rejects = Vec::new();
    for (doc, d) in loaded.docs.iter().zip(&decisions) {
        if d.kept {
            kept.push(doc.clone());
        } else {
            let s = d.to_stage();
            rejects.push(Reject {
                id: doc.id.clone(),
                stage: s.stage,
                reason: s.reason.as_str().to_owned(),
                measurements: s.measurements,
            });
        }
    }
    save(&kept, &a.io.output)?;
    if let Some(path) = &a.io.rejects {
        write_jsonl(&reject_lines(&loaded.errors, &rejects, &loaded.lines), path)?;
    }
    if let Some(path) = &a.decisions {
        write_jsonl(&decisions, path)?;
    }
    eprintln!("dedup: {summary}");
    Ok(())
}

#[derive(Serialize)]
struct MaskedRecord<'a> {
    #[serde(flatten)]
    doc: &'a Document,
    input_ids: Vec<u32>,
    labels: Vec<Option<u32>>,
}

pub fn mask(a: MaskArgs, seed: u64) -> Result<()> {
    let mut base = if a.evaluation { MaskConfig::evaluation() } else { MaskConfig::default() };
    if let Some(p) = a.select_prob {
        base.select_prob = p;
    }
    if a.vocab_size <= HashingTokenizer::RESERVED as usize || a.vocab_size > u32::MAX as usize {
        return Err(config_error(format!("--vocab-size {} out of range", a.vocab_size)));
    }
    base.vocab_size = a.vocab_size as u32;
    base.mask_token_id = HashingTokenizer::MASK_ID;
    base.validate().map_err(|e| config_error(e.to_string()))?;

    let tok = HashingTokenizer::new(a.vocab_size);
    let loaded = load(&a.input, a.on_error)?;
    let masked = par::map(&loaded.docs, |d| {
        let cfg = MaskConfig {
            seed: sequence_seed(seed, &d.id),
            ..base.clone()
        };
        apply_mlm_masking(&tok.tokenize(&d.text), &cfg)
    });
    let mut records = Vec::with_capacity(masked.len());
    let mut skipped = 0;
    for (doc, m) in loaded.docs.iter().zip(masked) {
        match m {
            Ok(m) => records.push(MaskedRecord {
                doc,
                input_ids: m.input_ids,
                labels: m.labels,
            }),
            Err(MaskError::EmptySequence) if a.on_error == forge_core::corpus::OnError::Skip => skipped += 1,
            Err(e) => return Err(data_error(format!("record {:?}: {e}", doc.id))),
        }
    }
    write_jsonl(&records, &a.output)?;
    eprintln!("mask: {} records written, {} without tokens skipped", records.len(), skipped);
    Ok(())
}
