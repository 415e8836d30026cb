//! Tree-vs-DNN preference scores and the size-stratified pick of
//! tree-friendly, DNN-friendly and tied datasets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::select::{Strategy, SubsetSelection};
use crate::data::{DatasetInfo, ResultsTable};
use crate::{Error, Result, TaskType};

/// Default tie threshold on the normalized score.
pub const DEFAULT_TAU: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preference {
    #[serde(rename = "TF")]
    TreeFriendly,
    #[serde(rename = "DF")]
    DnnFriendly,
    Tie,
}

impl Preference {
    pub fn of(score: f64, tau: f64) -> Self {
        if score > tau {
            Preference::TreeFriendly
        } else if score < -tau {
            Preference::DnnFriendly
        } else {
            Preference::Tie
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Preference::TreeFriendly => "TF",
            Preference::DnnFriendly => "DF",
            Preference::Tie => "Tie",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDnnScore {
    pub dataset_id: String,
    pub score: f64,
    pub label: Preference,
}

fn lookup(results: &ResultsTable, names: &[String]) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|n| results.method_index(n).ok_or_else(|| Error::invalid(format!("unknown method `{n}`"))))
        .collect()
}

/// Per dataset: min-max normalize the tree and DNN methods' values together
/// (lower-is-better metrics negated first), then take best tree minus best
/// DNN. A dataset where all of them agree scores 0.
pub fn tree_dnn_score(results: &ResultsTable, tree: &[String], dnn: &[String], tau: f64) -> Result<Vec<TreeDnnScore>> {
    if tree.is_empty() || dnn.is_empty() {
        return Err(Error::invalid("tree and DNN method sets must be non-empty"));
    }
    if !(tau >= 0.0) {
        return Err(Error::invalid("tau must be non-negative"));
    }
    let (t, d) = (lookup(results, tree)?, lookup(results, dnn)?);
    if let Some(m) = t.iter().find(|m| d.contains(m)) {
        return Err(Error::invalid(format!("method `{}` is in both sets", results.methods[*m])));
    }
    Ok(results
        .values
        .iter()
        .zip(&results.higher_is_better)
        .zip(&results.datasets)
        .map(|((row, &hib), id)| {
            let v = |m: usize| if hib { row[m] } else { -row[m] };
            let all = t.iter().chain(&d).map(|&m| v(m));
            let lo = all.clone().fold(f64::INFINITY, f64::min);
            let hi = all.fold(f64::NEG_INFINITY, f64::max);
            let norm = |m: usize| if hi > lo { (v(m) - lo) / (hi - lo) } else { 0.5 };
            let best = |set: &[usize]| set.iter().map(|&m| norm(m)).fold(f64::NEG_INFINITY, f64::max);
            let score = best(&t) - best(&d);
            TreeDnnScore {
                dataset_id: id.clone(),
                score,
                label: Preference::of(score, tau),
            }
        })
        .collect())
}

/// Default groups per task type.
pub fn default_groups() -> BTreeMap<TaskType, usize> {
    BTreeMap::from([(TaskType::Binclass, 5), (TaskType::Multiclass, 4), (TaskType::Regression, 6)])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// Highest score in its group.
    Tree,
    /// Lowest score in its group.
    Dnn,
    /// Score closest to zero.
    Tie,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pick {
    pub dataset_id: String,
    pub task: TaskType,
    pub group: usize,
    pub role: Role,
    pub score: f64,
    pub label: Preference,
}

/// Splits `n` items into `g` contiguous groups; the first `n % g` groups get
/// one extra item. Returns `(start, len)` pairs.
pub fn partition(n: usize, g: usize) -> Vec<(usize, usize)> {
    let (base, rem) = (n / g, n % g);
    let mut start = 0;
    (0..g)
        .map(|i| {
            let len = base + usize::from(i < rem);
            let out = (start, len);
            start += len;
            out
        })
        .collect()
}

/// Within each task type, sorts datasets by size, cuts them into
/// `groups[task]` contiguous groups and picks the highest-scoring,
/// lowest-scoring and closest-to-zero dataset of each group. Ties go to the
/// dataset listed first in `scores`.
///
/// With `balance_categorical`, a pick that would push the gap between picked
/// categorical and purely numerical datasets above one (and widen it) is
/// swapped for the next candidate in the same role, if there is one.
pub fn group_and_pick(
    scores: &[TreeDnnScore],
    info: &[DatasetInfo],
    groups: &BTreeMap<TaskType, usize>,
    balance_categorical: bool,
) -> Result<SubsetSelection> {
    let by_id: BTreeMap<&str, &DatasetInfo> = info.iter().map(|d| (d.id.as_str(), d)).collect();
    let mut per_task: BTreeMap<TaskType, Vec<(usize, f64)>> = BTreeMap::new();
    for (i, s) in scores.iter().enumerate() {
        let d = by_id
            .get(s.dataset_id.as_str())
            .ok_or_else(|| Error::invalid(format!("no size information for dataset `{}`", s.dataset_id)))?;
        let size = d
            .size
            .ok_or_else(|| Error::invalid(format!("dataset `{}` has no size", s.dataset_id)))?;
        if balance_categorical && d.has_categorical.is_none() {
            return Err(Error::invalid(format!(
                "dataset `{}` lacks has_categorical, needed for balancing",
                s.dataset_id
            )));
        }
        per_task.entry(d.task).or_default().push((i, size));
    }

    let is_cat = |i: usize| by_id[scores[i].dataset_id.as_str()].has_categorical == Some(true);
    let mut n_cat = 0i64;
    let mut n_num = 0i64;
    let mut picks = Vec::new();
    for (&task, &g) in groups {
        let Some(members) = per_task.get_mut(&task) else {
            if g == 0 {
                continue;
            }
            return Err(Error::invalid(format!("no {task} datasets to split into {g} groups")));
        };
        if g == 0 {
            return Err(Error::invalid(format!("group count for {task} must be positive")));
        }
        members.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        for (gi, (start, len)) in partition(members.len(), g).into_iter().enumerate() {
            if len < 3 {
                return Err(Error::invalid(format!(
                    "{task} group {gi} holds {len} datasets; each group needs at least 3"
                )));
            }
            let mut pool: Vec<usize> = members[start..start + len].iter().map(|m| m.0).collect();
            pool.sort_unstable();
            for role in [Role::Tree, Role::Dnn, Role::Tie] {
                let key = |i: usize| match role {
                    Role::Tree => -scores[i].score,
                    Role::Dnn => scores[i].score,
                    Role::Tie => scores[i].score.abs(),
                };
                // Candidates in preference order; stable sort keeps dataset order on ties.
                let mut ranked = pool.clone();
                ranked.sort_by(|&a, &b| key(a).partial_cmp(&key(b)).expect("finite scores"));
                let mut pick = ranked[0];
                if balance_categorical && ranked.len() > 1 {
                    let gap = |c: bool| if c { (n_cat + 1 - n_num).abs() } else { (n_num + 1 - n_cat).abs() };
                    let now = (n_cat - n_num).abs();
                    if gap(is_cat(pick)) > 1 && gap(is_cat(pick)) > now {
                        pick = ranked[1];
                    }
                }
                if is_cat(pick) {
                    n_cat += 1;
                } else {
                    n_num += 1;
                }
                pool.retain(|&i| i != pick);
                picks.push(Pick {
                    dataset_id: scores[pick].dataset_id.clone(),
                    task,
                    group: gi,
                    role,
                    score: scores[pick].score,
                    label: scores[pick].label,
                });
            }
        }
    }
    Ok(SubsetSelection {
        strategy: Strategy::TreeDnn,
        chosen: picks.iter().map(|p| p.dataset_id.clone()).collect(),
        rank_mae: None,
        trials: None,
        seed: None,
        eta: None,
        picks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: Vec<Vec<f64>>, hib: Vec<bool>) -> ResultsTable {
        let methods = ["XGBoost", "CatBoost", "RandomForest", "MLP", "ResNet", "FTT"];
        ResultsTable::new(
            methods.iter().map(|s| s.to_string()).collect(),
            (0..rows.len()).map(|d| format!("d{d}")).collect(),
            hib,
            rows,
        )
        .unwrap()
    }

    fn sets() -> (Vec<String>, Vec<String>) {
        (
            vec!["XGBoost".into(), "CatBoost".into(), "RandomForest".into()],
            vec!["MLP".into(), "ResNet".into(), "FTT".into()],
        )
    }

    #[test]
    fn hand_example() {
        let t = table(vec![vec![0.9, 0.8, 0.7, 0.6, 0.5, 0.4]], vec![true]);
        let (tr, dn) = sets();
        let s = &tree_dnn_score(&t, &tr, &dn, DEFAULT_TAU).unwrap()[0];
        assert!((s.score - 0.6).abs() < 1e-12, "{}", s.score);
        assert_eq!(s.label, Preference::TreeFriendly);
    }

    #[test]
    fn ties_and_direction() {
        let (tr, dn) = sets();
        let t = table(
            vec![vec![0.9, 0.8, 0.7, 0.9, 0.5, 0.4], vec![0.3; 6], vec![1.0, 2.0, 3.0, 0.5, 4.0, 5.0]],
            vec![true, true, false],
        );
        let s = tree_dnn_score(&t, &tr, &dn, DEFAULT_TAU).unwrap();
        assert_eq!((s[0].score, s[0].label), (0.0, Preference::Tie));
        assert_eq!((s[1].score, s[1].label), (0.0, Preference::Tie));
        assert_eq!(s[2].label, Preference::DnnFriendly);
    }

    #[test]
    fn overlapping_sets_rejected() {
        let t = table(vec![vec![0.9, 0.8, 0.7, 0.6, 0.5, 0.4]], vec![true]);
        let (tr, _) = sets();
        assert!(tree_dnn_score(&t, &tr, &["XGBoost".into()], 0.05).is_err());
        assert!(tree_dnn_score(&t, &tr, &[], 0.05).is_err());
    }

    #[test]
    fn partition_spreads_remainder_first() {
        assert_eq!(partition(101, 5), vec![(0, 21), (21, 20), (41, 20), (61, 20), (81, 20)]);
        assert_eq!(partition(3, 1), vec![(0, 3)]);
    }

    fn scored(s: &[f64]) -> (Vec<TreeDnnScore>, Vec<DatasetInfo>) {
        let scores = s
            .iter()
            .enumerate()
            .map(|(i, &v)| TreeDnnScore {
                dataset_id: format!("d{i}"),
                score: v,
                label: Preference::of(v, DEFAULT_TAU),
            })
            .collect();
        let info = (0..s.len())
            .map(|i| DatasetInfo {
                id: format!("d{i}"),
                task: TaskType::Binclass,
                size: Some(i as f64),
                has_categorical: Some(i % 2 == 0),
            })
            .collect();
        (scores, info)
    }

    #[test]
    fn group_of_three_takes_all() {
        let (s, info) = scored(&[0.1, -0.4, 0.5]);
        let groups = BTreeMap::from([(TaskType::Binclass, 1)]);
        let sel = group_and_pick(&s, &info, &groups, false).unwrap();
        assert_eq!(sel.chosen, vec!["d2", "d1", "d0"]);
        assert_eq!(sel.picks.iter().map(|p| p.role).collect::<Vec<_>>(), vec![Role::Tree, Role::Dnn, Role::Tie]);
    }

    #[test]
    fn duplicate_scores_take_earliest() {
        let (s, info) = scored(&[0.5, 0.5, -0.1, 0.0]);
        let groups = BTreeMap::from([(TaskType::Binclass, 1)]);
        let sel = group_and_pick(&s, &info, &groups, false).unwrap();
        assert_eq!(sel.chosen, vec!["d0", "d2", "d3"]);
    }

    #[test]
    fn small_groups_rejected() {
        let (s, info) = scored(&[0.1, 0.2, 0.3, 0.4, 0.5]);
        let groups = BTreeMap::from([(TaskType::Binclass, 2)]);
        assert!(group_and_pick(&s, &info, &groups, false).is_err());
    }

    #[test]
    fn balancing_swaps_to_second_candidate() {
        // Even ids are categorical. Without balancing all three picks would
        // be categorical.
        let (s, info) = scored(&[0.9, 0.8, -0.9, -0.8, 0.0, 0.01]);
        let groups = BTreeMap::from([(TaskType::Binclass, 1)]);
        let plain = group_and_pick(&s, &info, &groups, false).unwrap();
        assert_eq!(plain.chosen, vec!["d0", "d2", "d4"]);
        let bal = group_and_pick(&s, &info, &groups, true).unwrap();
        assert_eq!(bal.chosen, vec!["d0", "d3", "d4"]);
    }
}
