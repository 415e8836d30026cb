//! Levenberg-Marquardt for small nonlinear least-squares problems.

use super::linalg;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmSettings {
    pub initial_damping: f64,
    pub damping_up: f64,
    pub damping_down: f64,
    pub max_iterations: usize,
    /// Stop once `||J^T r||_inf` falls below this.
    pub gradient_tol: f64,
    /// Stop once a relative step falls below this.
    pub step_tol: f64,
}

impl Default for LmSettings {
    fn default() -> Self {
        LmSettings {
            initial_damping: 1e-3,
            damping_up: 10.0,
            damping_down: 10.0,
            max_iterations: 200,
            gradient_tol: 1e-10,
            step_tol: 1e-15,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub x: Vec<f64>,
    /// `0.5 * ||r(x)||^2`.
    pub cost: f64,
    pub iterations: usize,
    /// False only when the iteration budget ran out.
    pub converged: bool,
}

const MAX_DAMPING: f64 = 1e32;

/// Minimises `0.5 * ||r(x)||^2` starting from `x0`.
///
/// `residuals(x, r)` fills `r` (length `m`); `jacobian(x, j)` fills the
/// row-major `m x n` Jacobian. `project` maps a trial point back into the
/// feasible box. Only cost-decreasing steps are accepted, so the final cost
/// never exceeds the starting cost.
pub fn levenberg_marquardt<R, J, P>(
    x0: &[f64],
    m: usize,
    residuals: R,
    jacobian: J,
    project: P,
    settings: &LmSettings,
) -> LmOutcome
where
    R: Fn(&[f64], &mut [f64]),
    J: Fn(&[f64], &mut [f64]),
    P: Fn(&mut [f64]),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    project(&mut x);
    let mut r = vec![0.0; m];
    residuals(&x, &mut r);
    let mut cost = half_sq(&r);
    if !cost.is_finite() {
        return LmOutcome {
            x,
            cost: f64::INFINITY,
            iterations: 0,
            converged: false,
        };
    }
    let mut jac = vec![0.0; m * n];
    let mut lambda = settings.initial_damping;
    let mut trial = vec![0.0; n];
    let mut r_trial = vec![0.0; m];

    for iter in 0..settings.max_iterations {
        if cost == 0.0 {
            return LmOutcome {
                x,
                cost,
                iterations: iter,
                converged: true,
            };
        }
        jacobian(&x, &mut jac);
        let mut g = vec![0.0; n];
        let mut h = vec![vec![0.0; n]; n];
        for i in 0..m {
            let row = &jac[i * n..(i + 1) * n];
            for a in 0..n {
                g[a] += row[a] * r[i];
                for b in a..n {
                    h[a][b] += row[a] * row[b];
                }
            }
        }
        for a in 0..n {
            for b in 0..a {
                h[a][b] = h[b][a];
            }
        }
        if g.iter().all(|v| v.is_finite()) && g.iter().fold(0.0f64, |acc, v| acc.max(v.abs())) < settings.gradient_tol {
            return LmOutcome {
                x,
                cost,
                iterations: iter,
                converged: true,
            };
        }

        loop {
            let mut damped = h.clone();
            for a in 0..n {
                damped[a][a] += lambda * h[a][a].max(1e-12);
            }
            let step = linalg::solve(damped, g.iter().map(|v| -v).collect());
            if let Some(step) = step {
                for a in 0..n {
                    trial[a] = x[a] + step[a];
                }
                project(&mut trial);
                residuals(&trial, &mut r_trial);
                let new_cost = half_sq(&r_trial);
                if new_cost.is_finite() && new_cost < cost {
                    let step_norm = trial.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                    let x_norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    std::mem::swap(&mut x, &mut trial);
                    std::mem::swap(&mut r, &mut r_trial);
                    cost = new_cost;
                    lambda = (lambda / settings.damping_down).max(1e-300);
                    if step_norm <= settings.step_tol * (x_norm + settings.step_tol) {
                        return LmOutcome {
                            x,
                            cost,
                            iterations: iter + 1,
                            converged: true,
                        };
                    }
                    break;
                }
            }
            lambda *= settings.damping_up;
            if lambda > MAX_DAMPING {
                // No descent step exists at working precision.
                return LmOutcome {
                    x,
                    cost,
                    iterations: iter + 1,
                    converged: true,
                };
            }
        }
    }
    LmOutcome {
        x,
        cost,
        iterations: settings.max_iterations,
        converged: false,
    }
}

fn half_sq(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|v| v * v).sum::<f64>()
}

/// Central-difference Jacobian of `residuals` at `x`.
pub(crate) fn numeric_jacobian<R>(x: &[f64], m: usize, residuals: &R, jac: &mut [f64])
where
    R: Fn(&[f64], &mut [f64]),
{
    let n = x.len();
    let mut xp = x.to_vec();
    let mut rp = vec![0.0; m];
    let mut rm = vec![0.0; m];
    for k in 0..n {
        let h = 1e-7 * x[k].abs().max(1e-3);
        xp[k] = x[k] + h;
        residuals(&xp, &mut rp);
        xp[k] = x[k] - h;
        residuals(&xp, &mut rm);
        xp[k] = x[k];
        for i in 0..m {
            jac[i * n + k] = (rp[i] - rm[i]) / (2.0 * h);
        }
    }
}
