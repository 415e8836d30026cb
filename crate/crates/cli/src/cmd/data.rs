//! `meta` and `synth`.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use curvecast_core::data::{load_dataset, load_schema};
use curvecast_core::metafeatures::extract;
use curvecast_core::synth::{synth_corpus, SynthConfig};
use curvecast_core::TaskType;

use super::Ctx;
use crate::manifest::{manifest_for, Run};
use crate::OutArgs;

#[derive(Args, Debug)]
pub struct MetaArgs {
    /// Dataset CSV with a header row.
    pub dataset: PathBuf,
    /// JSON object mapping every column name to "numerical" or "categorical".
    #[arg(long)]
    pub schema: PathBuf,
    /// Name of the target column.
    #[arg(long)]
    pub label: String,
    #[command(flatten)]
    pub out: OutArgs,
}

pub fn meta(ctx: &Ctx, args: MetaArgs) -> Result<()> {
    let mut run = Run::new("meta");
    run.input(&args.dataset)?;
    run.input(&args.schema)?;
    let schema = load_schema(&args.schema)?;
    let summary = load_dataset(&args.dataset, &schema, &args.label)?;
    let mfv = extract(&summary)?;
    run.emit_json(args.out.out.as_deref(), &mfv)?;
    run.finish(ctx.manifest_path(args.out.out.as_deref()), ctx.workers)
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 100)]
    pub n_curves: usize,
    #[arg(long, default_value_t = 200)]
    pub horizon: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise_sd: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Task types, assigned to curves round-robin.
    #[arg(long, value_delimiter = ',', default_value = "binclass")]
    pub tasks: Vec<TaskType>,
    /// Directory for curves.json, meta.json and theta.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn synth(ctx: &Ctx, args: SynthArgs) -> Result<()> {
    let mut run = Run::new("synth");
    run.seed(args.seed);
    let corpus = synth_corpus(&SynthConfig {
        n_curves: args.n_curves,
        horizon: args.horizon,
        noise_sd: args.noise_sd,
        seed: args.seed,
        tasks: args.tasks,
    })?;
    std::fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    run.emit_json(Some(&args.out_dir.join("curves.json")), &corpus.curves)?;
    run.emit_json(Some(&args.out_dir.join("meta.json")), &corpus.meta)?;
    run.emit_json(Some(&args.out_dir.join("theta.json")), &corpus.theta)?;
    let manifest = ctx.manifest.clone().unwrap_or_else(|| manifest_for(&args.out_dir));
    run.finish(Some(manifest), ctx.workers)
}
