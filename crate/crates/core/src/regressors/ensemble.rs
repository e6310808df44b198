//! Tree ensembles: bootstrap random forest, least-squares gradient boosting
//! and AdaBoost.R2.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;

use super::rng::stream_rng;
use super::tree::{RegressionTree, TreeParams};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest<T> {
    trees: Vec<RegressionTree<T>>,
    dim: usize,
}

impl<T: Scalar> RandomForest<T> {
    /// Tree `e` draws its bootstrap sample and feature orders from stream `e`.
    pub fn fit(
        x: &Matrix<T>,
        y: &[T],
        n_estimators: usize,
        bootstrap: bool,
        tree: &TreeParams,
        seed: u64,
    ) -> Result<Self> {
        super::check_training(x, y)?;
        tree.validate()?;
        if n_estimators == 0 {
            return Err(Error::config("n_estimators", "must be at least 1"));
        }
        let n = x.nrows();
        let trees = (0..n_estimators)
            .into_par_iter()
            .map(|e| {
                let mut rng = stream_rng(seed, e as u64);
                let samples = if bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                RegressionTree::fit_samples(x, y, samples, tree, &mut rng)
            })
            .collect();
        Ok(Self { trees, dim: x.ncols() })
    }

    pub fn n_estimators(&self) -> usize {
        self.trees.len()
    }

    pub fn trees(&self) -> &[RegressionTree<T>] {
        &self.trees
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn predict(&self, x: &Matrix<T>) -> Result<Vec<T>> {
        super::check_dim(self.dim, x)?;
        let k = T::from_usize_lossy(self.trees.len());
        Ok(x.rows_iter()
            .map(|row| self.trees.iter().map(|t| t.predict_row(row)).sum::<T>() / k)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientBoosting<T> {
    init: T,
    learning_rate: T,
    trees: Vec<RegressionTree<T>>,
    dim: usize,
}

impl<T: Scalar> GradientBoosting<T> {
    /// Squared loss: starts from the target mean and fits each tree to the
    /// current residuals. With `subsample < 1` each round trains on a random
    /// subset drawn from stream `e`.
    pub fn fit(
        x: &Matrix<T>,
        y: &[T],
        n_estimators: usize,
        learning_rate: f64,
        subsample: f64,
        tree: &TreeParams,
        seed: u64,
    ) -> Result<Self> {
        super::check_training(x, y)?;
        tree.validate()?;
        if n_estimators == 0 {
            return Err(Error::config("n_estimators", "must be at least 1"));
        }
        if !(learning_rate > 0.0) {
            return Err(Error::config("learning_rate", "must be positive"));
        }
        if !(subsample > 0.0 && subsample <= 1.0) {
            return Err(Error::config("subsample", "must lie in (0, 1]"));
        }
        let n = x.nrows();
        let lr = T::of(learning_rate);
        let init = y.iter().copied().sum::<T>() / T::from_usize_lossy(n);
        let mut current = vec![init; n];
        let mut trees = Vec::with_capacity(n_estimators);
        for e in 0..n_estimators {
            let residual: Vec<T> = y.iter().zip(&current).map(|(&t, &f)| t - f).collect();
            let mut rng = stream_rng(seed, e as u64);
            let samples = if subsample < 1.0 {
                let take = ((subsample * n as f64).round() as usize).max(1);
                rand::seq::index::sample(&mut rng, n, take).into_vec()
            } else {
                (0..n).collect()
            };
            let t = RegressionTree::fit_samples(x, &residual, samples, tree, &mut rng);
            for (i, f) in current.iter_mut().enumerate() {
                *f = *f + lr * t.predict_row(x.row(i));
            }
            trees.push(t);
        }
        Ok(Self {
            init,
            learning_rate: lr,
            trees,
            dim: x.ncols(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn predict(&self, x: &Matrix<T>) -> Result<Vec<T>> {
        super::check_dim(self.dim, x)?;
        Ok(x.rows_iter()
            .map(|row| {
                self.trees
                    .iter()
                    .fold(self.init, |acc, t| acc + self.learning_rate * t.predict_row(row))
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaBoostR2<T> {
    trees: Vec<RegressionTree<T>>,
    weights: Vec<T>,
    dim: usize,
}

impl<T: Scalar> AdaBoostR2<T> {
    /// AdaBoost.R2 with linear loss. Each round fits a tree on a weighted
    /// bootstrap drawn from stream `e`, then down-weights well-predicted rows.
    /// Stops early on a perfect round or when the weighted loss reaches 0.5.
    pub fn fit(
        x: &Matrix<T>,
        y: &[T],
        n_estimators: usize,
        learning_rate: f64,
        tree: &TreeParams,
        seed: u64,
    ) -> Result<Self> {
        super::check_training(x, y)?;
        tree.validate()?;
        if n_estimators == 0 {
            return Err(Error::config("n_estimators", "must be at least 1"));
        }
        if !(learning_rate > 0.0) {
            return Err(Error::config("learning_rate", "must be positive"));
        }
        let n = x.nrows();
        let mut sample_weight = vec![1.0 / n as f64; n];
        let mut trees = Vec::new();
        let mut weights = Vec::new();

        for e in 0..n_estimators {
            let mut rng = stream_rng(seed, e as u64);
            let dist = WeightedIndex::new(&sample_weight)
                .map_err(|err| Error::InvalidInput(format!("degenerate boosting weights: {err}")))?;
            let samples: Vec<usize> = (0..n).map(|_| dist.sample(&mut rng)).collect();
            let t = RegressionTree::fit_samples(x, y, samples, tree, &mut rng);

            let errors: Vec<f64> = (0..n)
                .map(|i| (t.predict_row(x.row(i)) - y[i]).abs().as_f64())
                .collect();
            let active = |i: &usize| sample_weight[*i] > 0.0;
            let max_err = (0..n).filter(active).map(|i| errors[i]).fold(0.0, f64::max);
            let loss: Vec<f64> = errors
                .iter()
                .map(|&err| if max_err > 0.0 { err / max_err } else { err })
                .collect();
            let estimator_error: f64 = (0..n).filter(active).map(|i| sample_weight[i] * loss[i]).sum();

            if estimator_error <= 0.0 {
                trees.push(t);
                weights.push(T::one());
                break;
            }
            if estimator_error >= 0.5 {
                if trees.is_empty() {
                    trees.push(t);
                    weights.push(T::one());
                }
                break;
            }
            let beta = estimator_error / (1.0 - estimator_error);
            trees.push(t);
            weights.push(T::of(learning_rate * (1.0 / beta).ln()));

            if e + 1 < n_estimators {
                for (w, l) in sample_weight.iter_mut().zip(&loss) {
                    if *w > 0.0 {
                        *w *= beta.powf((1.0 - l) * learning_rate);
                    }
                }
                let total: f64 = sample_weight.iter().sum();
                if !(total > 0.0) {
                    break;
                }
                for w in &mut sample_weight {
                    *w /= total;
                }
            }
        }
        Ok(Self {
            trees,
            weights,
            dim: x.ncols(),
        })
    }

    pub fn n_estimators(&self) -> usize {
        self.trees.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Weighted median of the member predictions.
    pub fn predict(&self, x: &Matrix<T>) -> Result<Vec<T>> {
        super::check_dim(self.dim, x)?;
        let total: T = self.weights.iter().copied().sum();
        let half = total / T::of(2.0);
        Ok(x.rows_iter()
            .map(|row| {
                let mut preds: Vec<(T, T)> = self
                    .trees
                    .iter()
                    .zip(&self.weights)
                    .map(|(t, &w)| (t.predict_row(row), w))
                    .collect();
                preds.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
                let mut cdf = T::zero();
                for &(p, w) in &preds {
                    cdf = cdf + w;
                    if cdf >= half {
                        return p;
                    }
                }
                preds[preds.len() - 1].0
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wave(n: usize) -> (Matrix<f64>, Vec<f64>) {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let t = i as f64 / n as f64;
                vec![t, (7.0 * t).fract()]
            })
            .collect();
        let y = rows.iter().map(|r| (6.0 * r[0]).sin() + 0.3 * r[1]).collect();
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn forest_is_seed_deterministic() {
        let (x, y) = wave(60);
        let a = RandomForest::fit(&x, &y, 30, true, &TreeParams::default(), 11).unwrap();
        let b = RandomForest::fit(&x, &y, 30, true, &TreeParams::default(), 11).unwrap();
        assert_eq!(a.predict(&x).unwrap(), b.predict(&x).unwrap());
        let c = RandomForest::fit(&x, &y, 30, true, &TreeParams::default(), 12).unwrap();
        assert_ne!(a.predict(&x).unwrap(), c.predict(&x).unwrap());
    }

    #[test]
    fn smaller_forest_is_a_prefix_of_a_larger_one() {
        let (x, y) = wave(40);
        let small = RandomForest::fit(&x, &y, 5, true, &TreeParams::default(), 3).unwrap();
        let large = RandomForest::fit(&x, &y, 12, true, &TreeParams::default(), 3).unwrap();
        assert_eq!(small.trees[..], large.trees[..5]);
    }

    #[test]
    fn one_boosting_round_with_unit_rate_hits_separable_targets() {
        // one stump on two separable points: init 0.5, residuals -0.5/+0.5
        let x = Matrix::column_vector(&[0.0, 1.0]);
        let y = [0.0, 1.0];
        let gb = GradientBoosting::fit(&x, &y, 1, 1.0, 1.0, &TreeParams::with_max_depth(1), 0).unwrap();
        assert_eq!(gb.predict(&x).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn boosting_reduces_training_error() {
        let (x, y) = wave(80);
        let sse = |p: Vec<f64>| p.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let few = GradientBoosting::fit(&x, &y, 5, 0.1, 1.0, &TreeParams::with_max_depth(3), 0).unwrap();
        let many = GradientBoosting::fit(&x, &y, 100, 0.1, 1.0, &TreeParams::with_max_depth(3), 0).unwrap();
        assert!(sse(many.predict(&x).unwrap()) < sse(few.predict(&x).unwrap()));
    }

    #[test]
    fn adaboost_is_deterministic_and_bounded() {
        let (x, y) = wave(50);
        let a = AdaBoostR2::fit(&x, &y, 20, 1.0, &TreeParams::with_max_depth(3), 5).unwrap();
        let b = AdaBoostR2::fit(&x, &y, 20, 1.0, &TreeParams::with_max_depth(3), 5).unwrap();
        let pa = a.predict(&x).unwrap();
        assert_eq!(pa, b.predict(&x).unwrap());
        let (lo, hi) = y.iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
        assert!(pa.iter().all(|&p| p >= lo && p <= hi));
    }

    #[test]
    fn adaboost_stops_on_perfect_fit() {
        let x = Matrix::column_vector(&[0.0, 1.0, 2.0, 3.0]);
        let y = [1.0, 1.0, 3.0, 3.0];
        let m = AdaBoostR2::fit(&x, &y, 10, 1.0, &TreeParams::with_max_depth(3), 0).unwrap();
        assert!(m.n_estimators() <= 10);
        assert_eq!(m.predict(&x).unwrap().len(), 4);
    }
}
