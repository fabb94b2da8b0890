//! Subcommand implementations.

mod analysis;
mod pipeline;
mod stages;

use anyhow::Result;

use crate::cli::{Cli, Command};
use crate::config_error;

pub use self::pipeline::{plan, run_pipeline};

pub fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    if let Command::Pipeline(args) = &cli.command {
        return run_pipeline(args, cli.threads, cli.seed);
    }
    with_pool(cli.threads, || match cli.command {
        Command::Clean(a) => stages::clean(a),
        Command::Langid(a) => stages::langid(a),
        Command::Urlfilter(a) => stages::urlfilter(a),
        Command::Pii(a) => stages::pii(a),
        Command::Quality(a) => stages::quality(a),
        Command::Morph(a) => stages::morph(a),
        Command::Dedup(a) => stages::dedup(a),
        Command::Mask(a) => stages::mask(a, seed),
        Command::QualityGrid(a) => analysis::quality_grid(a),
        Command::MorphSweep(a) => analysis::morph_sweep(a),
        Command::Stats(a) => analysis::stats(a),
        Command::Efficiency(a) => analysis::efficiency(a),
        Command::Score(c) => analysis::score(c),
        Command::Phase(a) => pipeline::phase(a, seed),
        Command::Verify(a) => pipeline::verify(a),
        Command::Pipeline(_) => unreachable!("handled above"),
    })
}

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub fn with_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<R> + Send) -> Result<R> {
    match threads {
        None => f(),
        Some(0) => Err(config_error("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| config_error(format!("thread pool: {e}")))?
            .install(f),
    }
}
