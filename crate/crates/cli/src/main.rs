//! `curvecast`: validation-curve forecasting and benchmark distillation.
//!
//! Every subcommand writes its primary output atomically (to `--out`, or
//! stdout) and, when it writes to a file, a `<out>.manifest.json` recording
//! argv, seed and SHA-256 digests of inputs and outputs.

mod cmd;
mod io;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Worker count override; takes precedence over `--workers`.
const WORKERS_ENV: &str = "CURVECAST_WORKERS";

#[derive(Parser)]
#[command(name = "curvecast", version, about = "Learning-curve forecasting and benchmark distillation")]
struct Cli {
    /// Worker threads for data-parallel loops (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// Where to write the run manifest (default: `<out>.manifest.json`).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Meta-features of one tabular dataset.
    Meta(cmd::data::MetaArgs),
    /// Fit the curve law or a power-law baseline to every curve.
    Fit(cmd::curves::FitArgs),
    /// Train the curve predictor.
    Train(cmd::predictor::TrainArgs),
    /// Predict a curve from its first epochs and dataset meta-features.
    Predict(cmd::predictor::PredictArgs),
    /// Score a trained predictor against observed curves (CSV).
    Eval(cmd::predictor::EvalArgs),
    /// Advise whether a run is worth continuing.
    Advise(cmd::predictor::AdviseArgs),
    /// Pick a rank-consistent subset of benchmark datasets.
    Distill(cmd::bench::DistillArgs),
    /// Tree-vs-DNN preference scores and stratified picks.
    Treednn(cmd::bench::TreeDnnArgs),
    /// Seed-level win/tie/lose rates against an anchor method (CSV).
    Ttest(cmd::bench::TtestArgs),
    /// Generate a synthetic curve corpus with a planted meta-feature map.
    Synth(cmd::data::SynthArgs),
}

/// Output location shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct OutArgs {
    /// Output file (default: stdout).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

fn workers(flag: usize) -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(flag)
}

#[cfg(feature = "parallel")]
fn init_pool(n: usize) -> anyhow::Result<usize> {
    if n > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(rayon::current_num_threads())
}

#[cfg(not(feature = "parallel"))]
fn init_pool(_n: usize) -> anyhow::Result<usize> {
    Ok(1)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let workers = init_pool(workers(cli.workers))?;
    let ctx = cmd::Ctx {
        manifest: cli.manifest,
        workers,
    };
    match cli.command {
        Command::Meta(a) => cmd::data::meta(&ctx, a),
        Command::Fit(a) => cmd::curves::fit(&ctx, a),
        Command::Train(a) => cmd::predictor::train(&ctx, a),
        Command::Predict(a) => cmd::predictor::predict(&ctx, a),
        Command::Eval(a) => cmd::predictor::eval(&ctx, a),
        Command::Advise(a) => cmd::predictor::advise(&ctx, a),
        Command::Distill(a) => cmd::bench::distill(&ctx, a),
        Command::Treednn(a) => cmd::bench::treednn(&ctx, a),
        Command::Ttest(a) => cmd::bench::ttest(&ctx, a),
        Command::Synth(a) => cmd::data::synth(&ctx, a),
    }
}

/// `{"error", "kind", "path"}` for the first library error in the chain.
fn error_json(err: &anyhow::Error) -> serde_json::Value {
    let core = err.chain().find_map(|e| e.downcast_ref::<curvecast_core::Error>());
    // Library errors already print their source; stop the chain there.
    let mut parts = Vec::new();
    for e in err.chain() {
        parts.push(e.to_string());
        if e.is::<curvecast_core::Error>() {
            break;
        }
    }
    serde_json::json!({
        "error": parts.join(": "),
        "kind": core.map_or("other", |e| e.kind()),
        "path": core.and_then(|e| e.path()).map(|p| p.display().to_string()),
    })
}

fn main() -> ExitCode {
    // Usage errors exit with status 2 from inside clap.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(1)
        }
    }
}
