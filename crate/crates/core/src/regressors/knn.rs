use crate::error::{Error, Result};
use crate::matrix::{squared_distance, Matrix};
use crate::scalar::Scalar;

/// Uniform-weight k-nearest-neighbour regression under Euclidean distance.
/// Equal distances are resolved in favour of the earlier training row.
#[derive(Debug, Clone, PartialEq)]
pub struct KNearest<T> {
    k: usize,
    x: Matrix<T>,
    y: Vec<T>,
}

impl<T: Scalar> KNearest<T> {
    pub fn fit(k: usize, x: &Matrix<T>, y: &[T]) -> Result<Self> {
        super::check_training(x, y)?;
        if k == 0 {
            return Err(Error::config("k", "must be at least 1"));
        }
        if k > x.nrows() {
            return Err(Error::config(
                "k",
                format!("{k} neighbours requested from {} training rows", x.nrows()),
            ));
        }
        Ok(Self {
            k,
            x: x.clone(),
            y: y.to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn predict_row(&self, row: &[T]) -> T {
        let mut dist: Vec<(T, usize)> = self
            .x
            .rows_iter()
            .enumerate()
            .map(|(i, r)| (squared_distance(r, row), i))
            .collect();
        let by_distance = |a: &(T, usize), b: &(T, usize)| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
        };
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, by_distance);
        }
        let sum: T = dist[..self.k].iter().map(|&(_, i)| self.y[i]).sum();
        sum / T::from_usize_lossy(self.k)
    }

    pub fn predict(&self, x: &Matrix<T>) -> Result<Vec<T>> {
        super::check_dim(self.x.ncols(), x)?;
        Ok(x.rows_iter().map(|r| self.predict_row(r)).collect())
    }
}
