use serde::{Deserialize, Serialize};

use super::linalg;
use crate::{Error, Result};

/// Parameters of `a(t) = A ln t + B sqrt(t) + C + D / t`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CurveParams {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "D")]
    pub d: f64,
}

/// The law's basis functions at `t`: `[ln t, sqrt t, 1, 1/t]`.
#[inline]
pub fn basis(t: f64) -> [f64; 4] {
    [t.ln(), t.sqrt(), 1.0, 1.0 / t]
}

impl CurveParams {
    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        CurveParams { a, b, c, d }
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        CurveParams::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Value at a real epoch `t >= 1`; no domain check.
    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        let [l, s, one, inv] = basis(t);
        self.a * l + self.b * s + self.c * one + self.d * inv
    }

    pub fn eval(&self, t: u32) -> Result<f64> {
        eval_law(self, t)
    }
}

pub fn eval_law(theta: &CurveParams, t: u32) -> Result<f64> {
    if t == 0 {
        return Err(Error::invalid("the curve law is undefined at t = 0"));
    }
    Ok(theta.at(f64::from(t)))
}

/// Least-squares fit of the law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawFit {
    pub params: CurveParams,
    pub residual_rmse: f64,
    /// Numerical rank of the design matrix; below 4 the returned parameters
    /// are the minimum-norm minimiser.
    pub rank: usize,
}

impl LawFit {
    pub fn rank_deficient(&self) -> bool {
        self.rank < 4
    }
}

/// Fits the law to `(t, value)` points. The model is linear in its
/// parameters, so this is an exact linear least-squares solve.
pub fn fit_law(points: &[(f64, f64)]) -> Result<LawFit> {
    if points.len() < 4 {
        return Err(Error::invalid(format!("fitting the curve law needs at least 4 points, got {}", points.len())));
    }
    if let Some(&(t, _)) = points.iter().find(|(t, _)| !(t.is_finite() && *t >= 1.0)) {
        return Err(Error::invalid(format!("epoch {t} outside [1, inf)")));
    }
    if points.iter().any(|(_, y)| !y.is_finite()) {
        return Err(Error::invalid("non-finite curve value"));
    }
    let design: Vec<Vec<f64>> = points.iter().map(|&(t, _)| basis(t).to_vec()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let sol = linalg::lstsq(&design, &y);
    let params = CurveParams::from_array([sol.x[0], sol.x[1], sol.x[2], sol.x[3]]);
    let sse: f64 = points.iter().map(|&(t, y)| (params.at(t) - y).powi(2)).sum();
    Ok(LawFit {
        params,
        residual_rmse: (sse / points.len() as f64).sqrt(),
        rank: sol.rank,
    })
}
