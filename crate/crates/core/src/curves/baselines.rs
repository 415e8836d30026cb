//! Power-law baselines:
//!
//! * M1: `y = a t^b`
//! * M2: `y = a t^b + c`
//! * M3: `y = a (t + d)^b + c`, `d >= -1 + eps`
//! * M4: `(y - eps_inf) / (eps0 - y)^a = b t^c`, `eps0 > eps_inf`
//!
//! Each is fitted by Levenberg-Marquardt from [`RESTARTS`] starting points.
//! M2 and M3 always include the best fit of the family they nest (M1 with
//! `c = 0`, M2 with `d = 0`) among their starts, so on the same points the
//! residual never exceeds that of the nested family.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::lm::{levenberg_marquardt, numeric_jacobian, LmSettings};
use crate::{rng, Error, Result};

/// Multi-start restarts per fit.
pub const RESTARTS: usize = 8;

const D_MIN: f64 = -1.0 + 1e-6;
const M4_GAP: f64 = 1e-9;
const M4_TINY: f64 = 1e-12;
const BISECTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    M1,
    M2,
    M3,
    M4,
}

impl Family {
    pub fn n_params(self) -> usize {
        match self {
            Family::M1 => 2,
            Family::M2 => 3,
            Family::M3 => 4,
            Family::M4 => 5,
        }
    }

    fn stream_name(self) -> &'static str {
        match self {
            Family::M1 => "baseline/m1",
            Family::M2 => "baseline/m2",
            Family::M3 => "baseline/m3",
            Family::M4 => "baseline/m4",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "m1" => Ok(Family::M1),
            "m2" => Ok(Family::M2),
            "m3" => Ok(Family::M3),
            "m4" => Ok(Family::M4),
            other => Err(Error::invalid(format!("unknown baseline family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum BaselineParams {
    M1 { a: f64, b: f64 },
    M2 { a: f64, b: f64, c: f64 },
    M3 { a: f64, b: f64, c: f64, d: f64 },
    M4 { a: f64, b: f64, c: f64, eps0: f64, eps_inf: f64 },
}

impl BaselineParams {
    pub fn family(&self) -> Family {
        match self {
            BaselineParams::M1 { .. } => Family::M1,
            BaselineParams::M2 { .. } => Family::M2,
            BaselineParams::M3 { .. } => Family::M3,
            BaselineParams::M4 { .. } => Family::M4,
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        match *self {
            BaselineParams::M1 { a, b } => vec![a, b],
            BaselineParams::M2 { a, b, c } => vec![a, b, c],
            BaselineParams::M3 { a, b, c, d } => vec![a, b, c, d],
            BaselineParams::M4 { a, b, c, eps0, eps_inf } => vec![a, b, c, eps0, eps_inf],
        }
    }

    pub fn from_slice(family: Family, p: &[f64]) -> Self {
        match family {
            Family::M1 => BaselineParams::M1 { a: p[0], b: p[1] },
            Family::M2 => BaselineParams::M2 { a: p[0], b: p[1], c: p[2] },
            Family::M3 => BaselineParams::M3 {
                a: p[0],
                b: p[1],
                c: p[2],
                d: p[3],
            },
            Family::M4 => BaselineParams::M4 {
                a: p[0],
                b: p[1],
                c: p[2],
                eps0: p[3],
                eps_inf: p[4],
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.to_vec().iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite baseline parameter"));
        }
        match *self {
            BaselineParams::M3 { d, .. } if d < D_MIN => Err(Error::invalid(format!("M3 requires d >= -1 + eps, got {d}"))),
            BaselineParams::M4 { eps0, eps_inf, .. } if eps0 <= eps_inf => {
                Err(Error::invalid("M4 requires eps0 > eps_inf"))
            }
            _ => Ok(()),
        }
    }

    /// Value at epoch `t`, and whether it had to be clamped (M4 only).
    pub fn eval(&self, t: f64) -> (f64, bool) {
        match *self {
            BaselineParams::M1 { a, b } => (a * t.powf(b), false),
            BaselineParams::M2 { a, b, c } => (a * t.powf(b) + c, false),
            BaselineParams::M3 { a, b, c, d } => (a * (t + d).powf(b) + c, false),
            BaselineParams::M4 { a, b, c, eps0, eps_inf } => solve_m4(a, b, c, eps0, eps_inf, t),
        }
    }
}

/// Root of `(y - eps_inf) - b t^c (eps0 - y)^a` on `(eps_inf, eps0)` by
/// bisection. Without a sign change the value is clamped to whichever bound
/// has the smaller residual.
fn solve_m4(a: f64, b: f64, c: f64, eps0: f64, eps_inf: f64, t: f64) -> (f64, bool) {
    let k = b * t.powf(c);
    let f = |y: f64| (y - eps_inf) - k * (eps0 - y).max(0.0).powf(a);
    let (mut lo, mut hi) = (eps_inf, eps0);
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return (lo, false);
    }
    if fhi == 0.0 {
        return (hi, false);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        let y = if flo.abs() <= fhi.abs() || !fhi.is_finite() { lo } else { hi };
        return (y, true);
    }
    let lo_negative = flo < 0.0;
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return (mid, false);
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi), false)
}

/// Best restart of a baseline fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineFit {
    pub params: BaselineParams,
    /// RMSE between the fitted curve and the points, in value space.
    pub residual_rmse: f64,
    pub converged: bool,
}

/// Fits `family` to `(t, value)` points with seeded multi-start
/// Levenberg-Marquardt.
pub fn fit_baseline(family: Family, points: &[(f64, f64)], seed: u64) -> Result<BaselineFit> {
    if points.len() < family.n_params() {
        return Err(Error::invalid(format!(
            "{family:?} needs at least {} points, got {}",
            family.n_params(),
            points.len()
        )));
    }
    if let Some(&(t, _)) = points.iter().find(|(t, _)| !(t.is_finite() && *t >= 1.0)) {
        return Err(Error::invalid(format!("epoch {t} outside [1, inf)")));
    }
    if points.iter().any(|(_, y)| !y.is_finite()) {
        return Err(Error::invalid("non-finite curve value"));
    }
    let ts: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();

    let nested = match family {
        Family::M1 | Family::M4 => None,
        Family::M2 => Some(fit_baseline(Family::M1, points, seed)?.params.to_vec().into_iter().chain([0.0]).collect()),
        Family::M3 => Some(fit_baseline(Family::M2, points, seed)?.params.to_vec().into_iter().chain([0.0]).collect()),
    };
    let starts = starting_points(family, &ts, &ys, seed, nested);

    let settings = LmSettings::default();
    let m = ts.len();
    let mut best: Option<(f64, Vec<f64>, bool)> = None;
    for x0 in starts {
        let out = match family {
            Family::M1 => levenberg_marquardt(
                &x0,
                m,
                |p, r| residual_m1(&ts, &ys, p, r),
                |p, j| jacobian_m1(&ts, p, j),
                |_| {},
                &settings,
            ),
            Family::M2 => levenberg_marquardt(
                &x0,
                m,
                |p, r| residual_m2(&ts, &ys, p, r),
                |p, j| jacobian_m2(&ts, p, j),
                |_| {},
                &settings,
            ),
            Family::M3 => levenberg_marquardt(
                &x0,
                m,
                |p, r| residual_m3(&ts, &ys, p, r),
                |p, j| jacobian_m3(&ts, p, j),
                project_m3,
                &settings,
            ),
            Family::M4 => {
                let res = |p: &[f64], r: &mut [f64]| residual_m4(&ts, &ys, p, r);
                levenberg_marquardt(&x0, m, res, |p, j| numeric_jacobian(p, m, &res, j), project_m4, &settings)
            }
        };
        if !out.cost.is_finite() {
            continue;
        }
        if best.as_ref().is_none_or(|b| out.cost < b.0) {
            best = Some((out.cost, out.x, out.converged));
        }
    }
    let (_, x, converged) = best.ok_or_else(|| Error::Degenerate(format!("no finite {family:?} fit from any start")))?;
    let params = BaselineParams::from_slice(family, &x);
    let sse: f64 = points.iter().map(|&(t, y)| (params.eval(t).0 - y).powi(2)).sum();
    Ok(BaselineFit {
        params,
        residual_rmse: (sse / m as f64).sqrt(),
        converged,
    })
}

/// Start 0 is deterministic (the nested family's optimum when there is one,
/// else a data-driven guess); the rest are drawn from the family's ranges,
/// scaled by the data's level and span:
///
/// * M1: `a = y(t_min) * U(0.5, 1.5)`, `b ~ U(-1, 1)`
/// * M2, M3: `c = y(t_max) + span * U(-1, 1)`, `b ~ U(-1.5, 0.5)`,
///   `a = (y(t_min) - c) * U(0.5, 1.5)`; M3 adds `d ~ U(-0.9, 5)`
/// * M4: `eps_inf = min(y) - span * U(0, 1)`, `eps0 = max(y) + span * U(0, 1)`,
///   `a ~ U(0.2, 2)`, `b = exp(U(-2, 2))`, `|c| ~ U(0.2, 1.5)` signed by trend
fn starting_points(family: Family, ts: &[f64], ys: &[f64], seed: u64, nested: Option<Vec<f64>>) -> Vec<Vec<f64>> {
    let first = ys[argmin(ts)];
    let last = ys[argmax(ts)];
    let ymin = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let ymax = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (ymax - ymin).max((last - first).abs()).max(1e-3);
    let rising = last >= first;

    let mut starts = Vec::with_capacity(RESTARTS);
    starts.push(match (family, nested) {
        (_, Some(n)) => n,
        (Family::M1, None) => m1_loglog_guess(ts, ys),
        (Family::M4, None) => vec![1.0, 1.0, if rising { 0.5 } else { -0.5 }, ymax + 0.5 * span, ymin - 0.5 * span],
        _ => unreachable!("M2/M3 always have a nested start"),
    });
    for i in 1..RESTARTS {
        let mut r = rng::substream(seed, family.stream_name(), i as u64);
        let x = match family {
            Family::M1 => vec![first * r.random_range(0.5..1.5), r.random_range(-1.0..1.0)],
            Family::M2 | Family::M3 => {
                let c = last + span * r.random_range(-1.0..1.0);
                let b = r.random_range(-1.5..0.5);
                let a = (first - c) * r.random_range(0.5..1.5);
                let mut x = vec![a, b, c];
                if family == Family::M3 {
                    x.push(r.random_range(-0.9..5.0));
                }
                x
            }
            Family::M4 => {
                let eps_inf = ymin - span * r.random_range(0.0..1.0);
                let eps0 = ymax + span * r.random_range(0.0..1.0);
                let a = r.random_range(0.2..2.0);
                let b = r.random_range(-2.0f64..2.0).exp();
                let c = r.random_range(0.2..1.5) * if rising { 1.0 } else { -1.0 };
                vec![a, b, c, eps0, eps_inf]
            }
        };
        starts.push(x);
    }
    starts
}

fn argmin(v: &[f64]) -> usize {
    (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap_or(0)
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b]).then(b.cmp(&a))).unwrap_or(0)
}

fn m1_loglog_guess(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    let positive = ys.iter().all(|&y| y > 0.0);
    let negative = ys.iter().all(|&y| y < 0.0);
    if !(positive || negative) {
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        return vec![mean, 0.0];
    }
    let sign = if positive { 1.0 } else { -1.0 };
    let lx: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| (sign * y).ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    vec![sign * (my - b * mx).exp(), b]
}

fn residual_m1(ts: &[f64], ys: &[f64], p: &[f64], r: &mut [f64]) {
    for (i, (&t, &y)) in ts.iter().zip(ys).enumerate() {
        r[i] = p[0] * t.powf(p[1]) - y;
    }
}

fn jacobian_m1(ts: &[f64], p: &[f64], j: &mut [f64]) {
    for (i, &t) in ts.iter().enumerate() {
        let tb = t.powf(p[1]);
        j[2 * i] = tb;
        j[2 * i + 1] = p[0] * tb * t.ln();
    }
}

fn residual_m2(ts: &[f64], ys: &[f64], p: &[f64], r: &mut [f64]) {
    for (i, (&t, &y)) in ts.iter().zip(ys).enumerate() {
        r[i] = p[0] * t.powf(p[1]) + p[2] - y;
    }
}

fn jacobian_m2(ts: &[f64], p: &[f64], j: &mut [f64]) {
    for (i, &t) in ts.iter().enumerate() {
        let tb = t.powf(p[1]);
        j[3 * i] = tb;
        j[3 * i + 1] = p[0] * tb * t.ln();
        j[3 * i + 2] = 1.0;
    }
}

fn residual_m3(ts: &[f64], ys: &[f64], p: &[f64], r: &mut [f64]) {
    for (i, (&t, &y)) in ts.iter().zip(ys).enumerate() {
        r[i] = p[0] * (t + p[3]).powf(p[1]) + p[2] - y;
    }
}

fn jacobian_m3(ts: &[f64], p: &[f64], j: &mut [f64]) {
    for (i, &t) in ts.iter().enumerate() {
        let s = t + p[3];
        let sb = s.powf(p[1]);
        j[4 * i] = sb;
        j[4 * i + 1] = p[0] * sb * s.ln();
        j[4 * i + 2] = 1.0;
        j[4 * i + 3] = p[0] * p[1] * sb / s;
    }
}

fn project_m3(p: &mut [f64]) {
    p[3] = p[3].max(D_MIN);
}

fn residual_m4(ts: &[f64], ys: &[f64], p: &[f64], r: &mut [f64]) {
    let (a, b, c, eps0, eps_inf) = (p[0], p[1], p[2], p[3], p[4]);
    for (i, (&t, &y)) in ts.iter().zip(ys).enumerate() {
        r[i] = (y - eps_inf) - b * t.powf(c) * (eps0 - y).max(M4_TINY).powf(a);
    }
}

fn project_m4(p: &mut [f64]) {
    p[0] = p[0].max(0.0);
    p[1] = p[1].max(M4_TINY);
    if p[3] <= p[4] + M4_GAP {
        p[3] = p[4] + M4_GAP;
    }
}
