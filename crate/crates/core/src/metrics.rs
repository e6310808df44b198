//! Prediction quality: mean absolute error and the pairwise monotonicity
//! score.
//!
//! A pair (i, j) is a violation when the true and predicted differences have
//! strictly opposite signs. A pair tied on exactly one side counts as half a
//! violation, which is the expected count under random tie-breaking; a
//! constant predictor therefore scores exactly 0.5 on distinct targets.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mae: f64,
    pub violations: f64,
    pub monotonicity_score: f64,
    pub n: usize,
    pub acceleration: f64,
    /// Pairs of samples with equal true targets.
    pub true_tie_pairs: usize,
}

impl EvalReport {
    pub fn evaluate<T: Scalar>(y_true: &[T], y_pred: &[T], acceleration: f64) -> Result<Self> {
        let mae = mae(y_true, y_pred)?.as_f64();
        let violations = count_violations(y_true, y_pred)?;
        Ok(Self {
            mae,
            violations,
            monotonicity_score: score_from_violations(violations, y_true.len()),
            n: y_true.len(),
            acceleration,
            true_tie_pairs: tie_pairs(y_true),
        })
    }

    pub fn max_violations(&self) -> f64 {
        pairs(self.n) as f64
    }

    /// Score recomputed from the violation count agrees with the stored one.
    pub fn is_consistent(&self) -> bool {
        self.violations <= self.max_violations()
            && (score_from_violations(self.violations, self.n) - self.monotonicity_score).abs() <= 1e-12
    }
}

#[inline]
fn pairs(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

fn score_from_violations(violations: f64, n: usize) -> f64 {
    1.0 - violations / pairs(n) as f64
}

fn check_pair<T: Scalar>(y_true: &[T], y_pred: &[T], min_len: usize) -> Result<()> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            found: y_pred.len(),
        });
    }
    if y_true.len() < min_len {
        return Err(Error::InvalidInput(format!(
            "need at least {min_len} samples, got {}",
            y_true.len()
        )));
    }
    if y_true.iter().chain(y_pred).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in targets or predictions".into()));
    }
    Ok(())
}

pub fn mae<T: Scalar>(y_true: &[T], y_pred: &[T]) -> Result<T> {
    check_pair(y_true, y_pred, 1)?;
    let total: T = y_true.iter().zip(y_pred).map(|(&t, &p)| (t - p).abs()).sum();
    Ok(total / T::from_usize_lossy(y_true.len()))
}

/// Violations over all n(n-1)/2 pairs, in O(n log n): strictly discordant
/// pairs are counted as inversions of the predictions after sorting by
/// (truth, prediction); one-sided ties come from group sizes.
pub fn count_violations<T: Scalar>(y_true: &[T], y_pred: &[T]) -> Result<f64> {
    check_pair(y_true, y_pred, 2)?;
    let cmp = |a: &T, b: &T| a.partial_cmp(b).unwrap_or(Ordering::Equal);

    let mut joint: Vec<(T, T)> = y_true.iter().copied().zip(y_pred.iter().copied()).collect();
    joint.sort_by(|a, b| cmp(&a.0, &b.0).then_with(|| cmp(&a.1, &b.1)));

    let tied_true = run_pairs(&joint, |a, b| a.0 == b.0);
    let tied_both = run_pairs(&joint, |a, b| a.0 == b.0 && a.1 == b.1);

    let mut preds: Vec<T> = joint.iter().map(|p| p.1).collect();
    let mut buf = preds.clone();
    let discordant = inversions(&mut preds, &mut buf);
    // `preds` is now sorted
    let tied_pred = run_pairs(&preds, |a, b| a == b);

    let half_units = 2 * discordant + (tied_true - tied_both) + (tied_pred - tied_both);
    Ok(half_units as f64 / 2.0)
}

pub fn monotonicity_score<T: Scalar>(y_true: &[T], y_pred: &[T]) -> Result<f64> {
    Ok(score_from_violations(count_violations(y_true, y_pred)?, y_true.len()))
}

/// Sum of c(c-1)/2 over maximal runs of equal neighbours in a sorted slice.
fn run_pairs<E>(sorted: &[E], same: impl Fn(&E, &E) -> bool) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if same(&w[0], &w[1]) {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Merge sort counting pairs i < j with v[i] > v[j].
fn inversions<T: Scalar>(v: &mut [T], buf: &mut [T]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (l, r) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        inversions(l, bl) + inversions(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            count += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..n].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    count
}

fn tie_pairs<T: Scalar>(values: &[T]) -> usize {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    run_pairs(&v, |a, b| a == b) as usize
}

/// Fraction of the training budget not spent: `1 - used / total`.
pub fn acceleration(num_epochs_used: usize, total_epochs: usize) -> Result<f64> {
    if total_epochs == 0 || num_epochs_used > total_epochs {
        return Err(Error::InvalidInput(format!(
            "cannot use {num_epochs_used} of {total_epochs} epochs"
        )));
    }
    Ok(1.0 - num_epochs_used as f64 / total_epochs as f64)
}

/// Constant predictor emitting the training-target mean.
pub fn naive_reference<T: Scalar>(train_targets: &[T], test_targets: &[T]) -> Result<EvalReport> {
    if train_targets.is_empty() || test_targets.is_empty() {
        return Err(Error::InvalidInput(
            "naive reference needs train and test targets".into(),
        ));
    }
    let mean = train_targets.iter().copied().sum::<T>() / T::from_usize_lossy(train_targets.len());
    let preds = vec![mean; test_targets.len()];
    if test_targets.len() == 1 {
        let m = mae(test_targets, &preds)?.as_f64();
        return Ok(EvalReport {
            mae: m,
            violations: 0.0,
            monotonicity_score: 1.0,
            n: 1,
            acceleration: 1.0,
            true_tie_pairs: 0,
        });
    }
    EvalReport::evaluate(test_targets, &preds, 1.0)
}
