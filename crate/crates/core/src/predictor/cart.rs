//! CART regression trees, used only for their impurity-based feature
//! importances.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 8,
            min_leaf: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
    /// Total squared-error reduction attributed to each feature (unnormalized).
    pub gains: Vec<f64>,
}

impl RegressionTree {
    /// Grows a tree on rows `x` (all of equal width) and targets `y`.
    pub fn fit(x: &[Vec<f64>], y: &[f64], params: TreeParams) -> Self {
        assert_eq!(x.len(), y.len());
        let width = x.first().map_or(0, Vec::len);
        let mut tree = RegressionTree {
            nodes: Vec::new(),
            gains: vec![0.0; width],
        };
        let idx: Vec<usize> = (0..y.len()).collect();
        tree.grow(x, y, idx, 0, params);
        tree
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    /// Gains normalized to sum to one; all zeros when the tree never split.
    pub fn importances(&self) -> Vec<f64> {
        let total: f64 = self.gains.iter().sum();
        if total > 0.0 {
            self.gains.iter().map(|g| g / total).collect()
        } else {
            vec![0.0; self.gains.len()]
        }
    }

    fn grow(&mut self, x: &[Vec<f64>], y: &[f64], idx: Vec<usize>, depth: usize, p: TreeParams) -> usize {
        let at = self.nodes.len();
        let mean = idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len().max(1) as f64;
        self.nodes.push(Node::Leaf { value: mean });
        if depth >= p.max_depth || idx.len() < 2 * p.min_leaf.max(1) {
            return at;
        }
        let Some(best) = best_split(x, y, &idx, p.min_leaf.max(1)) else {
            return at;
        };
        self.gains[best.feature] += best.gain;
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x[i][best.feature] <= best.threshold);
        let left = self.grow(x, y, l, depth + 1, p);
        let right = self.grow(x, y, r, depth + 1, p);
        self.nodes[at] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        at
    }
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Split maximising the reduction in summed squared error. Ties keep the
/// lowest feature index and the lowest threshold.
fn best_split(x: &[Vec<f64>], y: &[f64], idx: &[usize], min_leaf: usize) -> Option<Split> {
    let n = idx.len();
    let total: f64 = idx.iter().map(|&i| y[i]).sum();
    let total_sq: f64 = idx.iter().map(|&i| y[i] * y[i]).sum();
    let parent_sse = total_sq - total * total / n as f64;
    if !(parent_sse > 1e-14 * total_sq.max(f64::MIN_POSITIVE)) {
        return None;
    }
    let width = x[idx[0]].len();
    let mut best: Option<Split> = None;
    let mut order = idx.to_vec();
    for f in 0..width {
        order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        let (mut ls, mut lsq) = (0.0, 0.0);
        for k in 0..n - 1 {
            let yi = y[order[k]];
            ls += yi;
            lsq += yi * yi;
            let nl = k + 1;
            let nr = n - nl;
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let (xa, xb) = (x[order[k]][f], x[order[k + 1]][f]);
            if xa == xb {
                continue;
            }
            let rs = total - ls;
            let rsq = total_sq - lsq;
            let sse = (lsq - ls * ls / nl as f64) + (rsq - rs * rs / nr as f64);
            let gain = parent_sse - sse;
            if gain > 0.0 && best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(Split {
                    feature: f,
                    threshold: xa + (xb - xa) / 2.0,
                    gain,
                });
            }
        }
    }
    best
}
