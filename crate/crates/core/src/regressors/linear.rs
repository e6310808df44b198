//! Least-squares linear regression and its power-transformed variant
//! `y = (w·x + b + 1)^D`, fitted as ordinary least squares on
//! `y^(1/D) - 1`.

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel<T> {
    coef: Vec<T>,
    intercept: T,
    degree: f64,
}

impl<T: Scalar> LinearModel<T> {
    /// Ordinary least squares with an intercept.
    pub fn fit(x: &Matrix<T>, y: &[T]) -> Result<Self> {
        super::check_training(x, y)?;
        let (coef, intercept) = least_squares(x, y);
        Ok(Self {
            coef,
            intercept,
            degree: 1.0,
        })
    }

    /// Power-transformed fit. `degree == 1` is plain least squares.
    pub fn fit_degree(degree: f64, x: &Matrix<T>, y: &[T]) -> Result<Self> {
        super::check_training(x, y)?;
        if !(degree > 0.0) || !degree.is_finite() {
            return Err(Error::config("degree", format!("{degree} is not a positive degree")));
        }
        if degree == 1.0 {
            return Self::fit(x, y);
        }
        let odd_integer = degree.fract() == 0.0 && (degree as u64) % 2 == 1;
        let inv = T::of(1.0 / degree);
        let mut transformed = Vec::with_capacity(y.len());
        for (i, &v) in y.iter().enumerate() {
            if v < T::zero() && !odd_integer {
                return Err(Error::InvalidInput(format!(
                    "target {v} at row {i} has no real root for degree {degree}"
                )));
            }
            let root = if v < T::zero() { -(-v).powf(inv) } else { v.powf(inv) };
            transformed.push(root - T::one());
        }
        let (coef, intercept) = least_squares(x, &transformed);
        Ok(Self {
            coef,
            intercept,
            degree,
        })
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coef
    }

    pub fn intercept(&self) -> T {
        self.intercept
    }

    pub fn degree(&self) -> f64 {
        self.degree
    }

    /// Rebuilds a model from explicit parameters.
    pub fn from_parts(coef: Vec<T>, intercept: T, degree: f64) -> Self {
        Self {
            coef,
            intercept,
            degree,
        }
    }

    pub fn predict_row(&self, row: &[T]) -> T {
        let linear = dot(&self.coef, row) + self.intercept;
        if self.degree == 1.0 {
            return linear;
        }
        let base = linear + T::one();
        if self.degree.fract() != 0.0 {
            base.max(T::zero()).powf(T::of(self.degree))
        } else {
            base.powi(self.degree as i32)
        }
    }

    pub fn predict(&self, x: &Matrix<T>) -> Result<Vec<T>> {
        super::check_dim(self.coef.len(), x)?;
        Ok(x.rows_iter().map(|r| self.predict_row(r)).collect())
    }
}

/// Minimises `||X w + b - y||^2`. Columns are centred, then solved with
/// column-pivoted Householder QR; numerically dependent columns get a zero
/// coefficient.
pub(crate) fn least_squares<T: Scalar>(x: &Matrix<T>, y: &[T]) -> (Vec<T>, T) {
    let n = x.nrows();
    let d = x.ncols();
    let nf = T::from_usize_lossy(n);
    let x_mean: Vec<T> = (0..d).map(|c| x.column(c).into_iter().sum::<T>() / nf).collect();
    let y_mean = y.iter().copied().sum::<T>() / nf;

    // column-major centred copy
    let mut cols: Vec<Vec<T>> = (0..d)
        .map(|c| x.column(c).into_iter().map(|v| v - x_mean[c]).collect())
        .collect();
    let mut rhs: Vec<T> = y.iter().map(|&v| v - y_mean).collect();
    let mut perm: Vec<usize> = (0..d).collect();

    let steps = n.min(d);
    let mut diag = Vec::with_capacity(steps);
    let mut rank = 0;
    let mut lead = T::zero();
    let tol = T::epsilon() * T::from_usize_lossy(n.max(d)) * T::of(16.0);
    for k in 0..steps {
        let norm_below = |col: &Vec<T>| col[k..].iter().map(|&v| v * v).sum::<T>();
        let (p, _) = (k..d)
            .map(|c| (c, norm_below(&cols[c])))
            .fold(
                (k, T::neg_infinity()),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        cols.swap(k, p);
        perm.swap(k, p);

        let alpha = norm_below(&cols[k]).sqrt();
        if k == 0 {
            lead = alpha;
        }
        if !(alpha > tol * lead.max(T::min_positive_value())) {
            break;
        }
        let sign = if cols[k][k] >= T::zero() { T::one() } else { -T::one() };
        let r_kk = -sign * alpha;
        // Householder vector v = x - r_kk e_k, stored in place
        let mut v: Vec<T> = cols[k][k..].to_vec();
        v[0] = v[0] - r_kk;
        let vnorm2: T = v.iter().map(|&a| a * a).sum();
        if vnorm2 > T::zero() {
            let reflect = |col: &mut [T]| {
                let s = dot(&v, col) * T::of(2.0) / vnorm2;
                for (c, &vi) in col.iter_mut().zip(&v) {
                    *c = *c - s * vi;
                }
            };
            for col in cols.iter_mut().skip(k + 1) {
                reflect(&mut col[k..]);
            }
            reflect(&mut rhs[k..]);
        }
        cols[k][k] = r_kk;
        diag.push(r_kk);
        rank += 1;
    }

    let mut solved = vec![T::zero(); d];
    for k in (0..rank).rev() {
        let mut acc = rhs[k];
        for j in k + 1..rank {
            acc = acc - cols[j][k] * solved[j];
        }
        solved[k] = acc / diag[k];
    }
    let mut coef = vec![T::zero(); d];
    for (k, &c) in perm.iter().enumerate() {
        coef[c] = solved[k];
    }
    let intercept = y_mean - dot(&coef, &x_mean);
    (coef, intercept)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_is_interpolated() {
        let xs = [0.0, 1.0, 2.5, 4.0, 7.0];
        let x = Matrix::column_vector(&xs);
        let y: Vec<f64> = xs.iter().map(|v| 2.0 * v + 1.0).collect();
        let m = LinearModel::fit(&x, &y).unwrap();
        for (p, t) in m.predict(&x).unwrap().iter().zip(&y) {
            assert!((p - t).abs() < 1e-9);
        }
        assert!((m.coefficients()[0] - 2.0).abs() < 1e-12);
        assert!((m.intercept() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn square_root_model_is_recovered() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let x = Matrix::column_vector(&xs);
        let y: Vec<f64> = xs.iter().map(|v| (3.0 * v + 1.0f64).sqrt()).collect();
        let m = LinearModel::fit_degree(0.5, &x, &y).unwrap();
        assert!((m.coefficients()[0] - 3.0).abs() < 1e-9);
        assert!(m.intercept().abs() < 1e-9);
        for (p, t) in m.predict(&x).unwrap().iter().zip(&y) {
            assert!((p - t).abs() < 1e-9);
        }
    }

    #[test]
    fn degree_one_matches_plain_least_squares() {
        let x = Matrix::from_rows(&[vec![1.0, 0.2], vec![0.3, 2.0], vec![1.7, 1.1], vec![0.9, 0.4]]).unwrap();
        let y = [0.5, 0.9, 0.6, 0.7];
        let a = LinearModel::fit(&x, &y).unwrap().predict(&x).unwrap();
        let b = LinearModel::fit_degree(1.0, &x, &y).unwrap().predict(&x).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn negative_target_with_fractional_degree_fails() {
        let x = Matrix::column_vector(&[0.0, 1.0]);
        assert!(LinearModel::fit_degree(0.25, &x, &[-0.1, 0.5]).is_err());
        assert!(LinearModel::fit_degree(0.0, &x, &[0.1, 0.5]).is_err());
    }

    #[test]
    fn fractional_degree_clamps_negative_base() {
        let m = LinearModel::<f64>::from_parts(vec![1.0], 0.0, 0.5);
        assert_eq!(m.predict_row(&[-3.0]), 0.0);
        assert!((m.predict_row(&[3.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn duplicated_column_is_handled() {
        let x = Matrix::<f64>::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0], vec![4.0, 4.0]]).unwrap();
        let y = [3.0, 5.0, 7.0, 9.0];
        let m = LinearModel::fit(&x, &y).unwrap();
        for (p, t) in m.predict(&x).unwrap().iter().zip(&y) {
            assert!((p - t).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_target_fits() {
        let x = Matrix::<f64>::column_vector(&[1.0, 2.0, 3.0]);
        let m = LinearModel::fit(&x, &[0.4, 0.4, 0.4]).unwrap();
        assert!(m.predict(&x).unwrap().iter().all(|p| (p - 0.4).abs() < 1e-12));
    }
}
