//! Seed-level significance: Welch's t-test between an anchor method and each
//! opponent on every dataset.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::data::ResultsTable;
use crate::{par, Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Win,
    Tie,
    Lose,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Welch {
    pub t: f64,
    pub df: f64,
    /// Two-sided p-value.
    pub p: f64,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (m, x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0))
}

/// Welch's unequal-variance t-test. Two constant samples give `p = 1` when
/// their means agree and `p = 0` otherwise.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<Welch> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::invalid("t-test needs at least 2 values per sample"));
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (sa, sb) = (va / a.len() as f64, vb / b.len() as f64);
    let se2 = sa + sb;
    if se2 == 0.0 {
        let p = if ma == mb { 1.0 } else { 0.0 };
        let t = if ma == mb { 0.0 } else { (ma - mb).signum() * f64::INFINITY };
        return Ok(Welch { t, df: f64::NAN, p });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (a.len() as f64 - 1.0) + sb * sb / (b.len() as f64 - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::invalid(e.to_string()))?;
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(Welch { t, df, p })
}

/// Outcome for `anchor` against `opponent` on one dataset.
pub fn compare(anchor: &[f64], opponent: &[f64], alpha: f64, higher_is_better: bool) -> Result<Outcome> {
    let w = welch_t_test(anchor, opponent)?;
    if w.p > alpha {
        return Ok(Outcome::Tie);
    }
    let diff = anchor.iter().sum::<f64>() / anchor.len() as f64 - opponent.iter().sum::<f64>() / opponent.len() as f64;
    Ok(match (diff > 0.0) == higher_is_better {
        _ if diff == 0.0 => Outcome::Tie,
        true => Outcome::Win,
        false => Outcome::Lose,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseRates {
    pub opponent: String,
    pub win: f64,
    pub tie: f64,
    pub lose: f64,
    pub n_datasets: usize,
}

/// Win/tie/lose frequencies of `anchor` against every other method over all
/// datasets, in method order.
pub fn pairwise_significance(results: &ResultsTable, anchor: &str, alpha: f64) -> Result<Vec<PairwiseRates>> {
    let seeds = results
        .seeds
        .as_ref()
        .ok_or_else(|| Error::invalid("significance testing needs seed-level results"))?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha must lie in (0, 1)"));
    }
    let a = results
        .method_index(anchor)
        .ok_or_else(|| Error::invalid(format!("unknown anchor method `{anchor}`")))?;
    let d = results.n_datasets();
    (0..results.n_methods())
        .filter(|&m| m != a)
        .map(|m| {
            let outcomes =
                par::map_range(d, |i| compare(&seeds[i][a], &seeds[i][m], alpha, results.higher_is_better[i]));
            let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
            let rate = |o: Outcome| outcomes.iter().filter(|&&x| x == o).count() as f64 / d as f64;
            Ok(PairwiseRates {
                opponent: results.methods[m].clone(),
                win: rate(Outcome::Win),
                tie: rate(Outcome::Tie),
                lose: rate(Outcome::Lose),
                n_datasets: d,
            })
        })
        .collect()
}
