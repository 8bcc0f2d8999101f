//! `asymgraph`: synthetic data, training, embedding, retrieval, cold start
//! and evaluation from the command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or format error,
//! 3 numerical failure.

mod commands;
mod io;
mod manifest;

use std::fmt;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::*;

#[derive(Debug, Parser)]
#[command(name = "asymgraph", version, about = "Directed product-graph embeddings for related-product recommendation")]
struct Cli {
    /// Worker threads (default: all cores). `--threads 1` runs the sequential path.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Root seed; overrides the `seed` key of synth/train configs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Generate a synthetic marketplace graph with planted structure.
    Synth(SynthArgs),
    /// Validate an edge file and write its canonical dump and statistics.
    BuildGraph(BuildGraphArgs),
    /// Train a model; writes checkpoint, state, log and embeddings.
    Train(TrainArgs),
    /// Embed every product of a graph with a trained model.
    Embed(EmbedArgs),
    /// Top-k related or similar products for known keys.
    Recommend(RecommendArgs),
    /// Embed new products from features alone and recommend for them.
    Coldstart(ColdstartArgs),
    /// Offline evaluation on the held-out split of a trained model.
    Eval(EvalArgs),
}

/// A flag or argument combination that can never succeed.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 1;
    }
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<asymgraph::Error>() {
            return if e.is_numerical() { 3 } else { 2 };
        }
    }
    2
}

fn setup_threads(threads: Option<usize>) -> anyhow::Result<()> {
    match threads {
        Some(0) => Err(UsageError("--threads must be >= 1".into()).into()),
        Some(1) => {
            asymgraph::par::set_force_sequential(true);
            Ok(())
        }
        #[cfg(feature = "parallel")]
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| anyhow::anyhow!("thread pool: {e}")),
        #[cfg(not(feature = "parallel"))]
        Some(_) => {
            log::warn!("built without the `parallel` feature; --threads ignored");
            Ok(())
        }
        None => Ok(()),
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    setup_threads(cli.threads)?;
    match &cli.cmd {
        Cmd::Synth(a) => synth(a, cli.seed),
        Cmd::BuildGraph(a) => build_graph(a),
        Cmd::Train(a) => train(a, cli.seed),
        Cmd::Embed(a) => embed(a),
        Cmd::Recommend(a) => recommend(a, cli.seed),
        Cmd::Coldstart(a) => coldstart(a),
        Cmd::Eval(a) => eval(a, cli.seed),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ASYMGRAPH_LOG", "info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_error_kind() {
        let usage: anyhow::Error = UsageError("x".into()).into();
        assert_eq!(exit_code(&usage), 1);
        let data: anyhow::Error = asymgraph::Error::parse("f", 3, "bad").into();
        assert_eq!(exit_code(&data.context("loading")), 2);
        let num: anyhow::Error = asymgraph::Error::NonFinite("loss".into()).into();
        assert_eq!(exit_code(&num), 3);
        assert_eq!(exit_code(&anyhow::anyhow!("other")), 2);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
