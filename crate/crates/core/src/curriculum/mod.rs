//! Phase pipelines, page reassembly, replay mixing and MLM masking.

mod mask;
mod merge;
mod phase;
mod stage;

pub use self::mask::{apply_mlm_masking, sequence_seed, MaskConfig, MaskError, MaskedSequence};
pub use self::merge::{merge_pages, MergeError, PAGE_SEPARATOR};
pub use self::phase::{run_phase, Phase, PhaseError, PhaseOutput, PhaseSpec, DEFAULT_REPLAY_FRACTION, REPLAY_PREFIX};
pub use self::stage::{
    run_stages, Providers, Reject, RunOutput, SemanticDedupConfig, StageError, StageId, StageReport, StageSpec,
};
