use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use super::stage::{run_stages, Providers, RunOutput, StageError, StageId, StageSpec};
use crate::corpus::Document;
use crate::filters::ConfigError;

pub const DEFAULT_REPLAY_FRACTION: f64 = 0.1;
pub const REPLAY_PREFIX: &str = "replay:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    P1,
    P2,
    P3,
    P4,
}

impl FromStr for Phase {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim_start_matches(['p', 'P']) {
            "1" => Ok(Self::P1),
            "2" => Ok(Self::P2),
            "3" => Ok(Self::P3),
            "4" => Ok(Self::P4),
            _ => Err(ConfigError(format!("unknown phase {s:?}"))),
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseSpec {
    pub phase: Phase,
    pub stages: Vec<StageId>,
    pub replay_fraction: f64,
}

impl PhaseSpec {
    pub fn new(phase: Phase) -> Self {
        use StageId::*;
        let (stages, replay_fraction) = match phase {
            Phase::P1 => (vec![SemanticDedup, HeuristicQuality, PageMerge], 0.0),
            Phase::P2 => (vec![HeuristicQuality], DEFAULT_REPLAY_FRACTION),
            Phase::P3 | Phase::P4 => (vec![Clean, Langid, SemanticDedup, HeuristicQuality, UrlFilter], 0.0),
        };
        Self {
            phase,
            stages,
            replay_fraction,
        }
    }

    /// Builds a spec from stage names, failing on the first unknown one.
    pub fn custom(phase: Phase, stages: &[&str], replay_fraction: f64) -> Result<Self, PhaseError> {
        let stages = stages
            .iter()
            .map(|s| s.parse::<StageId>().map_err(|_| PhaseError::UnknownStage(s.to_string())))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            phase,
            stages,
            replay_fraction,
        })
    }

    pub fn with_replay_fraction(mut self, f: f64) -> Self {
        self.replay_fraction = f;
        self
    }

    /// Stage settings for this phase: an override with a matching id wins,
    /// otherwise defaults.
    pub fn resolve(&self, overrides: &[StageSpec]) -> Vec<StageSpec> {
        self.stages
            .iter()
            .map(|&id| {
                overrides
                    .iter()
                    .find(|s| s.id() == id)
                    .cloned()
                    .unwrap_or_else(|| StageSpec::default_for(id))
            })
            .collect()
    }

    /// Number of replay documents drawn from a source of `n`.
    pub fn replay_count(&self, n: usize) -> usize {
        // guard against products like 0.7 * 10 = 7.000000000000001
        let k = (self.replay_fraction * n as f64 - 1e-9).ceil().max(0.0) as usize;
        k.min(n)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PhaseError {
    #[error("unknown stage id {0:?}")]
    UnknownStage(String),
    #[error("replay_fraction {0} outside [0,1]")]
    ReplayFraction(f64),
    #[error("replay_fraction {0} requires a replay source")]
    MissingReplay(f64),
    #[error("a replay source was given but replay_fraction is 0")]
    UnusedReplay,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Stage(#[from] StageError),
}

#[derive(Debug, Clone, Default)]
pub struct PhaseOutput {
    pub run: RunOutput,
    pub replayed: usize,
}

/// Runs the phase's stages in order, then appends a seeded uniform sample of
/// the replay source (in source order, ids prefixed with `replay:`).
/// Configuration is checked before any document is touched.
pub fn run_phase(
    docs: Vec<Document>,
    spec: &PhaseSpec,
    overrides: &[StageSpec],
    providers: &Providers<'_>,
    replay: Option<&[Document]>,
    seed: u64,
) -> Result<PhaseOutput, PhaseError> {
    if !(0.0..=1.0).contains(&spec.replay_fraction) {
        return Err(PhaseError::ReplayFraction(spec.replay_fraction));
    }
    match (spec.replay_fraction > 0.0, replay.is_some()) {
        (true, false) => return Err(PhaseError::MissingReplay(spec.replay_fraction)),
        (false, true) => return Err(PhaseError::UnusedReplay),
        _ => {}
    }
    let stages = spec
        .resolve(overrides)
        .into_iter()
        .map(StageSpec::validated)
        .collect::<Result<Vec<_>, _>>()?;

    let mut run = run_stages(docs, &stages, providers)?;
    let mut replayed = 0;
    if let Some(source) = replay {
        let k = spec.replay_count(source.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picks = rand::seq::index::sample(&mut rng, source.len(), k).into_vec();
        picks.sort_unstable();
        run.docs.extend(picks.into_iter().map(|i| {
            let mut d = source[i].clone();
            d.id = format!("{REPLAY_PREFIX}{}", d.id);
            d
        }));
        replayed = k;
    }
    Ok(PhaseOutput { run, replayed })
}
