use std::fs;
use std::path::Path;

use anyhow::Result;
use serde_json::{json, Map, Value};

use forge_core::corpus::HashingTokenizer;
use forge_core::heuristic::{evaluate_grid, HeuristicThresholds};
use forge_core::morph::{sweep_thresholds, RuleBasedAnalyzer};
use forge_core::reporting::{
    compute_token_stats, emit_report_with, format_float, production_efficiency, Cell, EfficiencyInput, Table,
};
use forge_core::scoring::{gist_negative_mask, infonce_loss_with_margin, SimilarityMatrix};

use crate::cli::{EfficiencyArgs, MorphSweepArgs, QualityGridArgs, ScoreCommand, StatsArgs};
use crate::dataset::{create_parent, load};
use crate::manifest::{digest_of, Manifest};
use crate::{config_error, data_error};

fn manifest_entry(m: &Manifest) -> Map<String, Value> {
    let mut extra = Map::new();
    extra.insert("manifest".into(), m.to_value());
    extra
}

fn emit(dir: &Path, tables: &[Table], manifest: &Manifest) -> Result<()> {
    emit_report_with(dir, tables, manifest_entry(manifest))
        .map_err(|e| data_error(format!("writing report to {}: {e}", dir.display())))?;
    Ok(())
}

fn check_unit(name: &str, values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        Some(v) => Err(config_error(format!("{name}: {v} outside [0,1]"))),
        None if values.is_empty() => Err(config_error(format!("{name}: empty grid"))),
        None => Ok(()),
    }
}

pub fn quality_grid(a: QualityGridArgs) -> Result<()> {
    check_unit("--short-line", &a.short_line)?;
    check_unit("--char-duplicates", &a.char_duplicates)?;
    check_unit("--new-line", &a.new_line)?;
    let mut configs = Vec::new();
    for &s in &a.short_line {
        for &c in &a.char_duplicates {
            for &n in &a.new_line {
                configs.push(HeuristicThresholds::new(s, c, n));
            }
        }
    }
    let params = json!({"command": "quality-grid", "configs": configs});
    let loaded = load(&a.input, a.on_error)?;
    let manifest = Manifest::from_digests("quality-grid", digest_of(&params), 0, vec![loaded.digest("input", &a.input)]);
    let rows = evaluate_grid(&loaded.docs, &configs).map_err(|e| data_error(e.to_string()))?;
    let mut t = Table::new(
        "quality_grid",
        ["short_line", "char_duplicates", "new_line", "dropped", "total", "drop_ratio"],
    );
    for r in &rows {
        t.push(vec![
            Cell::Float(r.config.short_line),
            Cell::Float(r.config.char_duplicates),
            Cell::Float(r.config.new_line),
            Cell::from(r.dropped),
            Cell::from(r.total),
            Cell::Float(r.drop_ratio),
        ]);
    }
    emit(&a.report_dir, &[t], &manifest)?;
    eprintln!("quality-grid: {} configurations over {} records", rows.len(), loaded.docs.len());
    Ok(())
}

pub fn morph_sweep(a: MorphSweepArgs) -> Result<()> {
    check_unit("--suffix-grid", &a.suffix_grid)?;
    check_unit("--lemma-grid", &a.lemma_grid)?;
    let params = json!({
        "command": "morph-sweep",
        "suffix_grid": a.suffix_grid,
        "lemma_grid": a.lemma_grid,
        "min_tokens": a.min_tokens,
        "vocab_size": a.vocab_size,
    });
    let loaded = load(&a.input, a.on_error)?;
    let manifest = Manifest::from_digests("morph-sweep", digest_of(&params), 0, vec![loaded.digest("input", &a.input)]);
    let tok = HashingTokenizer::new(a.vocab_size);
    let report = sweep_thresholds(
        &loaded.docs,
        &a.suffix_grid,
        &a.lemma_grid,
        &RuleBasedAnalyzer,
        &tok,
        a.min_tokens,
    )
    .map_err(|e| data_error(e.to_string()))?;
    emit(&a.report_dir, &[report.to_table("morph_sweep")], &manifest)?;
    eprintln!("morph-sweep: {} threshold pairs over {} records", report.rows.len(), report.total_docs);
    Ok(())
}

pub fn stats(a: StatsArgs) -> Result<()> {
    let params = json!({"command": "stats", "vocab_size": a.vocab_size});
    let loaded = load(&a.input, a.on_error)?;
    let manifest = Manifest::from_digests("stats", digest_of(&params), 0, vec![loaded.digest("input", &a.input)]);
    let tok = HashingTokenizer::new(a.vocab_size);
    let s = compute_token_stats(&loaded.docs, &tok).map_err(|e| data_error(e.to_string()))?;
    emit(&a.report_dir, &[s.to_table("token_stats")], &manifest)?;
    eprintln!("stats: {} records, {} tokens", s.doc_count, s.token_total);
    Ok(())
}

fn read_models(path: &Path) -> Result<Vec<EfficiencyInput>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| data_error(format!("{}: {e}", path.display())))?;
    r.deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| data_error(format!("{} row {}: {e}", path.display(), i + 1))))
        .collect()
}

pub fn efficiency(a: EfficiencyArgs) -> Result<()> {
    let manifest = Manifest::new("efficiency", digest_of(&json!({"command": "efficiency"})), 0, &[("models", &a.models)])?;
    let models = read_models(&a.models)?;
    let report = production_efficiency(&models).map_err(|e| data_error(e.to_string()))?;
    let table = report.to_table();
    let body = json!({
        "manifest": manifest.to_value(),
        "degenerate_columns": report.degenerate_columns,
        "efficiency": table.to_json(),
    });
    create_parent(&a.report)?;
    let mut text = serde_json::to_string_pretty(&body)?;
    text.push('\n');
    fs::write(&a.report, text).map_err(|e| data_error(format!("{}: {e}", a.report.display())))?;
    print!("{}", table.to_csv());
    Ok(())
}

/// Parses a similarity matrix CSV: a `pos` column with the positive column
/// index of each row, every other column a similarity.
pub fn read_matrix(path: &Path) -> Result<(Vec<String>, SimilarityMatrix)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| data_error(format!("{}: {e}", path.display())))?;
    let headers = r.headers().map_err(|e| data_error(format!("{}: {e}", path.display())))?.clone();
    let pos_col = headers
        .iter()
        .position(|h| h.trim() == "pos")
        .ok_or_else(|| data_error(format!("{}: no pos column", path.display())))?;
    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != pos_col)
        .map(|(_, h)| h.trim().to_owned())
        .collect();
    let mut rows = Vec::new();
    let mut pos = Vec::new();
    for (n, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| data_error(format!("{}: {e}", path.display())))?;
        let bad = |field: &str| data_error(format!("{} row {}: cannot parse {field:?}", path.display(), n + 1));
        let mut row = Vec::with_capacity(names.len());
        for (i, field) in rec.iter().enumerate() {
            let field = field.trim();
            if i == pos_col {
                pos.push(field.parse::<usize>().map_err(|_| bad(field))?);
            } else {
                row.push(field.parse::<f64>().map_err(|_| bad(field))?);
            }
        }
        rows.push(row);
    }
    let m = SimilarityMatrix::new(rows, pos).map_err(|e| data_error(format!("{}: {e}", path.display())))?;
    Ok((names, m))
}

pub fn score(c: ScoreCommand) -> Result<()> {
    match c {
        ScoreCommand::Infonce { matrix, tau, margin } => {
            if !(tau.is_finite() && tau > 0.0) {
                return Err(config_error(format!("--tau must be positive, got {tau}")));
            }
            let (_, m) = read_matrix(&matrix)?;
            let loss = infonce_loss_with_margin(&m, tau, margin).map_err(|e| data_error(e.to_string()))?;
            println!("{loss:e}");
            eprintln!("infonce: {} rows, loss {}", m.rows(), format_float(loss));
        }
        ScoreCommand::Gist { matrix, margin } => {
            if !margin.is_finite() {
                return Err(config_error("--margin must be finite"));
            }
            let (names, m) = read_matrix(&matrix)?;
            let mut t = Table::new("gist_mask", names);
            for row in gist_negative_mask(&m, margin) {
                t.push(row.into_iter().map(|b| Cell::from(usize::from(b))).collect());
            }
            print!("{}", t.to_csv());
        }
    }
    Ok(())
}
