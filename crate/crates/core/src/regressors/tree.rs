//! CART regression tree: variance-reduction splits at midpoints between
//! consecutive distinct feature values, leaves predict the mean target.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    /// `None` grows until leaves are pure.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Features examined per split; `None` examines all of them.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: None,
        }
    }
}

impl TreeParams {
    pub fn with_max_depth(depth: usize) -> Self {
        Self {
            max_depth: Some(depth),
            ..Self::default()
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.min_samples_split < 2 {
            return Err(Error::config("min_samples_split", "must be at least 2"));
        }
        if self.min_samples_leaf < 1 {
            return Err(Error::config("min_samples_leaf", "must be at least 1"));
        }
        if self.max_features == Some(0) {
            return Err(Error::config("max_features", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node<T> {
    Leaf {
        value: T,
    },
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree<T> {
    nodes: Vec<Node<T>>,
    dim: usize,
}

struct Task {
    node: usize,
    samples: Vec<usize>,
    depth: usize,
}

impl<T: Scalar> RegressionTree<T> {
    pub fn fit<R: Rng>(x: &Matrix<T>, y: &[T], params: &TreeParams, rng: &mut R) -> Result<Self> {
        super::check_training(x, y)?;
        params.validate()?;
        Ok(Self::fit_samples(x, y, (0..x.nrows()).collect(), params, rng))
    }

    /// Fits on the given rows of `x`; indices may repeat (bootstrap samples).
    pub(crate) fn fit_samples<R: Rng>(
        x: &Matrix<T>,
        y: &[T],
        samples: Vec<usize>,
        params: &TreeParams,
        rng: &mut R,
    ) -> Self {
        let dim = x.ncols();
        let mut nodes = vec![Node::Leaf { value: T::zero() }];
        let mut stack = vec![Task {
            node: 0,
            samples,
            depth: 0,
        }];
        let mut features: Vec<usize> = (0..dim).collect();

        while let Some(task) = stack.pop() {
            let n = task.samples.len();
            let sum: T = task.samples.iter().map(|&i| y[i]).sum();
            let mean = sum / T::from_usize_lossy(n);
            nodes[task.node] = Node::Leaf { value: mean };

            let depth_ok = params.max_depth.is_none_or(|d| task.depth < d);
            if !depth_ok || n < params.min_samples_split || n < 2 * params.min_samples_leaf || is_pure(y, &task.samples)
            {
                continue;
            }

            features.shuffle(rng);
            let take = params.max_features.map_or(dim, |m| m.min(dim));
            let Some(best) = best_split(x, y, &task.samples, &features[..take], params.min_samples_leaf) else {
                continue;
            };

            let (left_samples, right_samples): (Vec<usize>, Vec<usize>) = task
                .samples
                .iter()
                .partition(|&&i| x.get(i, best.feature) <= best.threshold);
            let left = nodes.len();
            let right = left + 1;
            nodes.push(Node::Leaf { value: T::zero() });
            nodes.push(Node::Leaf { value: T::zero() });
            nodes[task.node] = Node::Split {
                feature: best.feature,
                threshold: best.threshold,
                left,
                right,
            };
            stack.push(Task {
                node: right,
                samples: right_samples,
                depth: task.depth + 1,
            });
            stack.push(Task {
                node: left,
                samples: left_samples,
                depth: task.depth + 1,
            });
        }
        Self { nodes, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn predict_row(&self, row: &[T]) -> T {
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

    pub fn predict(&self, x: &Matrix<T>) -> Result<Vec<T>> {
        super::check_dim(self.dim, x)?;
        Ok(x.rows_iter().map(|r| self.predict_row(r)).collect())
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk<T>(nodes: &[Node<T>], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

fn is_pure<T: Scalar>(y: &[T], samples: &[usize]) -> bool {
    let first = y[samples[0]];
    samples.iter().all(|&i| y[i] == first)
}

struct SplitChoice<T> {
    feature: usize,
    threshold: T,
}

/// Maximises `sum_l^2 / n_l + sum_r^2 / n_r`, which is equivalent to
/// minimising the children's total squared error. The first feature (in the
/// shuffled order) wins ties.
fn best_split<T: Scalar>(
    x: &Matrix<T>,
    y: &[T],
    samples: &[usize],
    features: &[usize],
    min_leaf: usize,
) -> Option<SplitChoice<T>> {
    let n = samples.len();
    let total: T = samples.iter().map(|&i| y[i]).sum();
    let mut order = samples.to_vec();
    let mut best: Option<(T, SplitChoice<T>)> = None;

    for &f in features {
        order.sort_by(|&a, &b| {
            x.get(a, f)
                .partial_cmp(&x.get(b, f))
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut left_sum = T::zero();
        for pos in 1..n {
            left_sum = left_sum + y[order[pos - 1]];
            if pos < min_leaf || n - pos < min_leaf {
                continue;
            }
            let lo = x.get(order[pos - 1], f);
            let hi = x.get(order[pos], f);
            if !(lo < hi) {
                continue;
            }
            let nl = T::from_usize_lossy(pos);
            let nr = T::from_usize_lossy(n - pos);
            let right_sum = total - left_sum;
            let proxy = left_sum * left_sum / nl + right_sum * right_sum / nr;
            if best.as_ref().is_none_or(|(b, _)| proxy > *b) {
                let mut threshold = (lo + hi) / T::of(2.0);
                if threshold >= hi || !threshold.is_finite() {
                    threshold = lo;
                }
                best = Some((proxy, SplitChoice { feature: f, threshold }));
            }
        }
    }
    best.map(|(_, s)| s)
}
