//! `fit`.

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, ValueEnum};
use curvecast_core::curves::{epoch_points, extrapolate, fit_baseline, fit_law, split_curve, CurveModel, Family};
use curvecast_core::data::load_curves;
use curvecast_core::par;
use serde::Serialize;

use super::Ctx;
use crate::manifest::Run;
use crate::OutArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    Ours,
    M1,
    M2,
    M3,
    M4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Points {
    /// Only the first `k` epochs.
    Support,
    /// Every observed epoch.
    Full,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Curve corpus JSON.
    pub curves: PathBuf,
    #[arg(long, value_enum, default_value_t = FamilyArg::Ours)]
    pub family: FamilyArg,
    /// Support size.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Seed for the baseline multi-start.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Points::Support)]
    pub points: Points,
    /// Also write the fitted curve at t = 1..=horizon.
    #[arg(long)]
    pub horizon: Option<u32>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Serialize)]
struct FitRecord {
    dataset_id: String,
    family: FamilyArg,
    n_points: usize,
    params: CurveModel,
    residual_rmse: f64,
    converged: bool,
    /// Design-matrix rank, for the law.
    #[serde(skip_serializing_if = "Option::is_none")]
    rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    clamped: Vec<u32>,
}

pub fn fit(ctx: &Ctx, args: FitArgs) -> Result<()> {
    let mut run = Run::new("fit");
    run.seed(args.seed);
    run.input(&args.curves)?;
    let curves = load_curves(&args.curves, args.k)?;
    let records = par::try_map(&curves, |c| -> curvecast_core::Result<FitRecord> {
        let values = match args.points {
            Points::Support => split_curve(c, args.k)?.support,
            Points::Full => c.values.clone(),
        };
        let pts = epoch_points(&values);
        let (params, residual_rmse, converged, rank) = match args.family {
            FamilyArg::Ours => {
                let f = fit_law(&pts)?;
                (CurveModel::Law(f.params), f.residual_rmse, true, Some(f.rank))
            }
            fam => {
                let family = match fam {
                    FamilyArg::M1 => Family::M1,
                    FamilyArg::M2 => Family::M2,
                    FamilyArg::M3 => Family::M3,
                    _ => Family::M4,
                };
                let f = fit_baseline(family, &pts, args.seed)?;
                (CurveModel::Baseline(f.params), f.residual_rmse, f.converged, None)
            }
        };
        let (values, clamped) = match args.horizon {
            Some(h) => {
                let e = extrapolate(&params, h)?;
                (Some(e.values), e.clamped)
            }
            None => (None, Vec::new()),
        };
        Ok(FitRecord {
            dataset_id: c.dataset_id.clone(),
            family: args.family,
            n_points: pts.len(),
            params,
            residual_rmse,
            converged,
            rank,
            values,
            clamped,
        })
    })?;
    run.emit_json(args.out.out.as_deref(), &records)?;
    run.finish(ctx.manifest_path(args.out.out.as_deref()), ctx.workers)
}
