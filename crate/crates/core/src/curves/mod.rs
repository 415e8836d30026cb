//! Curve families, their fitting routines and extrapolation.

mod baselines;
mod law;
pub mod linalg;
mod lm;

pub use baselines::{fit_baseline, BaselineFit, BaselineParams, Family, RESTARTS};
pub use law::{basis, eval_law, fit_law, CurveParams, LawFit};
pub use lm::{levenberg_marquardt, LmOutcome, LmSettings};

use serde::{Deserialize, Serialize};

use crate::data::ValidationCurve;
use crate::{Error, Result};

/// Any fitted curve: the four-term law or one of the baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CurveModel {
    Law(CurveParams),
    Baseline(BaselineParams),
}

/// Values at `t = 1..=horizon`, plus the epochs whose value had to be clamped
/// to a bound because the implicit family had no root there.
#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolation {
    pub values: Vec<f64>,
    pub clamped: Vec<u32>,
}

impl CurveModel {
    /// Value at epoch `t`, and whether it was clamped.
    pub fn eval(&self, t: u32) -> Result<(f64, bool)> {
        match self {
            CurveModel::Law(p) => Ok((p.eval(t)?, false)),
            CurveModel::Baseline(p) => {
                if t == 0 {
                    return Err(Error::invalid("epochs start at t = 1"));
                }
                Ok(p.eval(f64::from(t)))
            }
        }
    }
}

/// Evaluates `model` at `t = 1..=horizon`.
pub fn extrapolate(model: &CurveModel, horizon: u32) -> Result<Extrapolation> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let mut values = Vec::with_capacity(horizon as usize);
    let mut clamped = Vec::new();
    for t in 1..=horizon {
        let (v, c) = model.eval(t)?;
        values.push(v);
        if c {
            clamped.push(t);
        }
    }
    Ok(Extrapolation { values, clamped })
}

/// Observed prefix and the remainder of a curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSplit {
    pub support: Vec<f64>,
    pub query: Vec<f64>,
}

pub fn split_curve(curve: &ValidationCurve, k: usize) -> Result<CurveSplit> {
    if k == 0 {
        return Err(Error::invalid("support size must be at least 1"));
    }
    if curve.len() <= k {
        return Err(Error::invalid(format!(
            "curve `{}` has {} epochs; need more than {k} to leave a query",
            curve.dataset_id,
            curve.len()
        )));
    }
    Ok(CurveSplit {
        support: curve.values[..k].to_vec(),
        query: curve.values[k..].to_vec(),
    })
}

/// `(t, value)` pairs for `values` observed at epochs `1..`.
pub fn epoch_points(values: &[f64]) -> Vec<(f64, f64)> {
    values.iter().enumerate().map(|(i, &v)| ((i + 1) as f64, v)).collect()
}
