use std::fs;
use std::path::PathBuf;

use anyhow::Result;
use serde_json::{json, Map};

use forge_core::corpus::OnError;
use forge_core::curriculum::{run_phase, run_stages, Phase, PhaseError, PhaseSpec, StageReport, StageSpec};
use forge_core::reporting::{compute_token_stats, emit_report_with};

use super::with_pool;
use crate::cli::{PhaseArgs, PipelineArgs, VerifyArgs};
use crate::config::{PhaseOverrides, PipelineConfig, ProviderConfig};
use crate::dataset::{create_parent, load, reject_lines, save, write_jsonl};
use crate::manifest::{digest_of, Manifest};
use crate::{config_error, data_error};

/// Fully resolved pipeline invocation.
pub struct Plan {
    pub config: PipelineConfig,
    pub input: PathBuf,
    pub output: Option<PathBuf>,
    pub rejects: Option<PathBuf>,
    pub report_dir: Option<PathBuf>,
    pub on_error: OnError,
    pub seed: u64,
    pub threads: Option<usize>,
}

/// Loads the config and applies flag overrides. Touches no data file.
pub fn plan(args: &PipelineArgs, threads: Option<usize>, seed: Option<u64>) -> Result<Plan> {
    let config = PipelineConfig::load(&args.config)?;
    let input = args
        .input
        .clone()
        .or_else(|| config.paths.input.clone())
        .ok_or_else(|| config_error("no input path (set paths.input or --input)"))?;
    let output = args.output.clone().or_else(|| config.paths.output.clone());
    Ok(Plan {
        rejects: args.rejects.clone().or_else(|| config.paths.rejects.clone()),
        report_dir: args.report_dir.clone().or_else(|| config.paths.report_dir.clone()),
        on_error: args.on_error.unwrap_or(config.on_error),
        seed: seed.unwrap_or(config.seed),
        threads: threads.or(config.threads),
        input,
        output,
        config,
    })
}

impl Plan {
    pub fn describe(&self) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map_or("-".to_owned(), |p| p.display().to_string());
        let mut s = format!(
            "config digest: {}\ninput: {}\noutput: {}\nrejects: {}\nreport dir: {}\nseed: {}\non_error: {}\nthreads: {}\n",
            self.config.digest(),
            self.input.display(),
            path(&self.output),
            path(&self.rejects),
            path(&self.report_dir),
            self.seed,
            serde_json::to_value(self.on_error).expect("serializes").as_str().unwrap_or("?"),
            self.threads.map_or("auto".to_owned(), |t| t.to_string()),
        );
        s.push_str(&format!(
            "providers: {}\nstages:\n",
            serde_json::to_string(&self.config.providers).expect("serializes")
        ));
        for (i, stage) in self.config.stages.iter().enumerate() {
            s.push_str(&format!(
                "  {}. {}\n",
                i + 1,
                serde_json::to_string(stage).expect("serializes")
            ));
        }
        s
    }
}

pub fn run_pipeline(args: &PipelineArgs, threads: Option<usize>, seed: Option<u64>) -> Result<()> {
    let plan = plan(args, threads, seed)?;
    if args.dry_run {
        print!("{}", plan.describe());
        return Ok(());
    }
    with_pool(plan.threads, || execute(&plan))
}

fn execute(plan: &Plan) -> Result<()> {
    let output = plan
        .output
        .as_ref()
        .ok_or_else(|| config_error("no output path (set paths.output or --output)"))?;
    let providers = plan.config.providers.build();
    let loaded = load(&plan.input, plan.on_error)?;
    let manifest = Manifest::from_digests(
        "pipeline",
        plan.config.digest(),
        plan.seed,
        vec![loaded.digest("input", &plan.input)],
    );
    let out = run_stages(loaded.docs, &plan.config.stages, &providers.stage_providers())
        .map_err(|e| data_error(format!("{e}; no outputs written")))?;

    save(&out.docs, output)?;
    if let Some(path) = &plan.rejects {
        write_jsonl(&reject_lines(&loaded.errors, &out.rejects, &loaded.lines), path)?;
    }
    if let Some(dir) = &plan.report_dir {
        let mut tables = vec![StageReport::table("stages", &out.reports)];
        if let Ok(stats) = compute_token_stats(&out.docs, providers.tokenizer.as_ref()) {
            tables.push(stats.to_table("output_token_stats"));
        }
        let mut extra = Map::new();
        extra.insert("manifest".into(), manifest.to_value());
        extra.insert("unreadable_records".into(), loaded.errors.len().into());
        emit_report_with(dir, &tables, extra).map_err(|e| data_error(format!("{}: {e}", dir.display())))?;
    }
    for r in &out.reports {
        eprintln!("{:<18} {:>8} -> {:>8}", r.stage, r.docs_in, r.docs_out);
    }
    Ok(())
}

fn phase_error(e: PhaseError) -> anyhow::Error {
    match e {
        PhaseError::Stage(e) => data_error(e.to_string()),
        other => config_error(other.to_string()),
    }
}

pub fn phase(a: PhaseArgs, seed: u64) -> Result<()> {
    let phase: Phase = a.phase.parse().map_err(|e: forge_core::filters::ConfigError| config_error(e.0))?;
    let mut spec = PhaseSpec::new(phase);
    if let Some(f) = a.replay_fraction {
        spec = spec.with_replay_fraction(f);
    }
    let overrides = match &a.config {
        Some(p) => PhaseOverrides::load(p)?,
        None => PhaseOverrides::default(),
    };
    if !(0.0..=1.0).contains(&spec.replay_fraction) {
        return Err(config_error(format!("--replay-fraction {} outside [0,1]", spec.replay_fraction)));
    }
    match (spec.replay_fraction > 0.0, &a.replay) {
        (true, None) => {
            return Err(config_error(format!(
                "phase {phase} mixes replay_fraction {} and needs --replay (or --replay-fraction 0)",
                spec.replay_fraction
            )))
        }
        (false, Some(_)) => return Err(config_error("--replay given but replay fraction is 0")),
        _ => {}
    }
    let stages: Vec<StageSpec> = spec
        .resolve(&overrides.stages)
        .into_iter()
        .map(|s| s.validated().map_err(|e| config_error(e.0)))
        .collect::<Result<_>>()?;

    #[derive(serde::Serialize)]
    struct Canonical<'a> {
        phase: &'a PhaseSpec,
        stages: &'a [StageSpec],
        providers: &'a ProviderConfig,
        on_error: OnError,
    }
    let digest = digest_of(&Canonical {
        phase: &spec,
        stages: &stages,
        providers: &overrides.providers,
        on_error: a.on_error,
    });
    let providers = overrides.providers.build();
    let loaded = load(&a.input, a.on_error)?;
    let mut inputs = vec![loaded.digest("input", &a.input)];
    let replay = match &a.replay {
        Some(p) => {
            let r = load(p, a.on_error)?;
            inputs.push(r.digest("replay", p));
            Some(r)
        }
        None => None,
    };
    let manifest = Manifest::from_digests("phase", digest, seed, inputs);
    let out = run_phase(
        loaded.docs,
        &spec,
        &stages,
        &providers.stage_providers(),
        replay.as_ref().map(|r| r.docs.as_slice()),
        seed,
    )
    .map_err(phase_error)?;

    save(&out.run.docs, &a.output)?;
    if let Some(path) = &a.rejects {
        write_jsonl(&reject_lines(&loaded.errors, &out.run.rejects, &loaded.lines), path)?;
    }
    let body = json!({
        "manifest": manifest.to_value(),
        "phase": phase.to_string(),
        "replayed": out.replayed,
        "stages": StageReport::table("stages", &out.run.reports).to_json(),
    });
    create_parent(&a.report)?;
    let mut text = serde_json::to_string_pretty(&body)?;
    text.push('\n');
    fs::write(&a.report, text).map_err(|e| data_error(format!("{}: {e}", a.report.display())))?;
    for r in &out.run.reports {
        eprintln!("{:<18} {:>8} -> {:>8}", r.stage, r.docs_in, r.docs_out);
    }
    if out.replayed > 0 {
        eprintln!("replayed {} records", out.replayed);
    }
    Ok(())
}

pub fn verify(a: VerifyArgs) -> Result<()> {
    let m = Manifest::locate(&a.manifest)?;
    let problems = m.verify();
    if problems.is_empty() {
        println!("ok: {} input(s) match manifest {}", m.inputs.len(), m.digest);
        return Ok(());
    }
    for p in &problems {
        println!("mismatch: {p}");
    }
    Err(data_error(format!("{} problem(s) found", problems.len())))
}
