use serde::{Deserialize, Serialize};

use crate::data::ResultsTable;
use crate::{Error, Result};

/// Per-dataset ranks of every method; rank 1 is best. Tied methods share the
/// mean of the positions they span, so each row sums to `L(L+1)/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankMatrix {
    pub methods: Vec<String>,
    pub datasets: Vec<String>,
    /// `ranks[dataset][method]`.
    pub ranks: Vec<Vec<f64>>,
}

/// Average ranks of `values`, best first.
pub fn rank_row(values: &[f64], higher_is_better: bool) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let c = values[a].total_cmp(&values[b]);
        if higher_is_better {
            c.reverse()
        } else {
            c
        }
    });
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // Positions i+1..=j share their mean.
        let r = (i + 1 + j) as f64 / 2.0;
        for &m in &order[i..j] {
            ranks[m] = r;
        }
        i = j;
    }
    ranks
}

pub fn rank(results: &ResultsTable) -> RankMatrix {
    rank_methods(results, &(0..results.n_methods()).collect::<Vec<_>>())
}

/// Ranks among the methods at `methods` only, in that order.
pub fn rank_methods(results: &ResultsTable, methods: &[usize]) -> RankMatrix {
    let ranks = results
        .values
        .iter()
        .zip(&results.higher_is_better)
        .map(|(row, &hib)| {
            let sub: Vec<f64> = methods.iter().map(|&m| row[m]).collect();
            rank_row(&sub, hib)
        })
        .collect();
    RankMatrix {
        methods: methods.iter().map(|&m| results.methods[m].clone()).collect(),
        datasets: results.datasets.clone(),
        ranks,
    }
}

impl RankMatrix {
    pub fn n_datasets(&self) -> usize {
        self.datasets.len()
    }

    pub fn n_methods(&self) -> usize {
        self.methods.len()
    }

    /// Sum of the rank rows at `subset`.
    pub fn rank_sums(&self, subset: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_methods()];
        for &d in subset {
            for (o, r) in out.iter_mut().zip(&self.ranks[d]) {
                *o += r;
            }
        }
        out
    }

    pub fn average_ranks(&self, subset: &[usize]) -> Vec<f64> {
        let n = subset.len() as f64;
        self.rank_sums(subset).into_iter().map(|s| s / n).collect()
    }

    /// Average ranks over every dataset.
    pub fn full_average(&self) -> Vec<f64> {
        self.average_ranks(&(0..self.n_datasets()).collect::<Vec<_>>())
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.datasets.iter().position(|d| d == id)
    }

    /// Dataset indices of `ids`; unknown or repeated IDs are errors.
    pub fn indices_of(&self, ids: &[String]) -> Result<Vec<usize>> {
        let mut seen = std::collections::BTreeSet::new();
        ids.iter()
            .map(|id| {
                let i = self.index_of(id).ok_or_else(|| Error::invalid(format!("unknown dataset `{id}`")))?;
                if !seen.insert(i) {
                    return Err(Error::invalid(format!("dataset `{id}` listed twice")));
                }
                Ok(i)
            })
            .collect()
    }
}

/// Mean over methods of the gap between full-benchmark and subset average
/// ranks.
pub fn rank_mae(full: &RankMatrix, subset: &[usize]) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::invalid("subset is empty"));
    }
    if let Some(&d) = subset.iter().find(|&&d| d >= full.n_datasets()) {
        return Err(Error::invalid(format!("dataset index {d} out of range")));
    }
    Ok(mae_against(&full.full_average(), full, subset))
}

/// [`rank_mae`] with the full-benchmark averages precomputed.
pub(crate) fn mae_against(full_avg: &[f64], full: &RankMatrix, subset: &[usize]) -> f64 {
    let sub = full.average_ranks(subset);
    let l = full_avg.len() as f64;
    full_avg.iter().zip(&sub).map(|(a, b)| (a - b).abs()).sum::<f64>() / l
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_examples() {
        assert_eq!(rank_row(&[0.9, 0.8, 0.7], true), vec![1.0, 2.0, 3.0]);
        assert_eq!(rank_row(&[0.9, 0.9, 0.7], true), vec![1.5, 1.5, 3.0]);
        assert_eq!(rank_row(&[1.0, 2.0], false), vec![1.0, 2.0]);
        assert_eq!(rank_row(&[5.0, 5.0, 5.0, 1.0], false), vec![3.0, 3.0, 3.0, 1.0]);
    }

    fn matrix(rows: Vec<Vec<f64>>) -> RankMatrix {
        RankMatrix {
            methods: (0..rows[0].len()).map(|m| format!("m{m}")).collect(),
            datasets: (0..rows.len()).map(|d| format!("d{d}")).collect(),
            ranks: rows,
        }
    }

    #[test]
    fn rank_mae_examples() {
        let m = matrix(vec![vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert_eq!(rank_mae(&m, &[0]).unwrap(), 0.5);
        assert_eq!(rank_mae(&m, &[1, 0]).unwrap(), 0.0);
        assert!(rank_mae(&m, &[]).is_err());
        let single = matrix(vec![vec![1.0], vec![1.0]]);
        assert_eq!(rank_mae(&single, &[1]).unwrap(), 0.0);
    }
}
