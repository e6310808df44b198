//! ε-insensitive support vector regression solved by sequential minimal
//! optimisation.
//!
//! The dual has 2l variables `β = (α, α*)` with labels `s = (+1.., -1..)`:
//!
//! ```text
//! min ½ βᵀQβ + pᵀβ   s.t.  sᵀβ = 0,  0 ≤ β ≤ C
//! Q_ij = s_i s_j K(x_i mod l, x_j mod l),  p = (ε - y, ε + y)
//! ```
//!
//! Working pairs are chosen with second-order information, and the solver
//! stops when the maximal KKT violation `m(β) - M(β)` drops below `tol`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, squared_distance, Matrix};
use crate::scalar::Scalar;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Rbf,
    Polynomial,
    Linear,
}

/// Kernel width. `Scale` resolves to `1 / (d · var(X))` over all entries of
/// the training matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Gamma {
    Value(f64),
    Named(GammaRule),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaRule {
    Scale,
    Auto,
}

impl Default for Gamma {
    fn default() -> Self {
        Gamma::Named(GammaRule::Scale)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvrParams {
    pub kernel: KernelKind,
    pub c: f64,
    pub epsilon: f64,
    pub gamma: Gamma,
    pub degree: u32,
    pub coef0: f64,
    /// Stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvrParams {
    fn default() -> Self {
        Self {
            kernel: KernelKind::Rbf,
            c: 1.0,
            epsilon: 0.1,
            gamma: Gamma::default(),
            degree: 3,
            coef0: 0.0,
            tol: 1e-3,
            max_iter: 10_000_000,
        }
    }
}

impl SvrParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::config("c", "must be positive"));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::config("epsilon", "must be nonnegative"));
        }
        if let Gamma::Value(g) = self.gamma {
            if !(g > 0.0) {
                return Err(Error::config("gamma", "must be positive"));
            }
        }
        if !(self.tol > 0.0) {
            return Err(Error::config("tol", "must be positive"));
        }
        if self.kernel == KernelKind::Polynomial && self.degree == 0 {
            return Err(Error::config("degree", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel<T> {
    Rbf { gamma: T },
    Polynomial { gamma: T, degree: i32, coef0: T },
    Linear,
}

impl<T: Scalar> Kernel<T> {
    #[inline]
    pub fn eval(&self, a: &[T], b: &[T]) -> T {
        match *self {
            Kernel::Rbf { gamma } => (-gamma * squared_distance(a, b)).exp(),
            Kernel::Polynomial { gamma, degree, coef0 } => (gamma * dot(a, b) + coef0).powi(degree),
            Kernel::Linear => dot(a, b),
        }
    }

    fn resolve(params: &SvrParams, x: &Matrix<T>) -> Self {
        let gamma = || match params.gamma {
            Gamma::Value(g) => T::of(g),
            Gamma::Named(GammaRule::Auto) => T::one() / T::from_usize_lossy(x.ncols()),
            Gamma::Named(GammaRule::Scale) => {
                let data = x.as_slice();
                let n = T::from_usize_lossy(data.len());
                let mean = data.iter().copied().sum::<T>() / n;
                let var = data.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
                if var > T::zero() {
                    T::one() / (T::from_usize_lossy(x.ncols()) * var)
                } else {
                    T::one()
                }
            }
        };
        match params.kernel {
            KernelKind::Rbf => Kernel::Rbf { gamma: gamma() },
            KernelKind::Polynomial => Kernel::Polynomial {
                gamma: gamma(),
                degree: params.degree as i32,
                coef0: T::of(params.coef0),
            },
            KernelKind::Linear => Kernel::Linear,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportVectorRegressor<T> {
    kernel: Kernel<T>,
    support: Matrix<T>,
    /// `α_i - α*_i` for each retained support vector.
    dual_coef: Vec<T>,
    bias: T,
    iterations: usize,
    kkt_gap: f64,
}

impl<T: Scalar> SupportVectorRegressor<T> {
    pub fn fit(params: &SvrParams, x: &Matrix<T>, y: &[T]) -> Result<Self> {
        super::check_training(x, y)?;
        params.validate()?;
        let kernel = Kernel::resolve(params, x);
        let solution = solve(&kernel, params, x, y)?;
        let l = x.nrows();
        let mut keep = Vec::new();
        let mut dual_coef = Vec::new();
        for i in 0..l {
            let coef = solution.beta[i] - solution.beta[i + l];
            if coef != 0.0 {
                keep.push(i);
                dual_coef.push(T::of(coef));
            }
        }
        Ok(Self {
            kernel,
            support: x.select_rows(&keep),
            dual_coef,
            bias: T::of(-solution.rho),
            iterations: solution.iterations,
            kkt_gap: solution.gap,
        })
    }

    pub fn predict_row(&self, row: &[T]) -> T {
        self.support
            .rows_iter()
            .zip(&self.dual_coef)
            .fold(self.bias, |acc, (sv, &c)| acc + c * self.kernel.eval(sv, row))
    }

    pub fn predict(&self, x: &Matrix<T>) -> Result<Vec<T>> {
        super::check_dim(self.support.ncols(), x)?;
        Ok(x.rows_iter().map(|r| self.predict_row(r)).collect())
    }

    pub fn dim(&self) -> usize {
        self.support.ncols()
    }

    pub fn kernel(&self) -> Kernel<T> {
        self.kernel
    }

    pub fn support_count(&self) -> usize {
        self.dual_coef.len()
    }

    pub fn bias(&self) -> T {
        self.bias
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Maximal KKT violation at termination.
    pub fn kkt_gap(&self) -> f64 {
        self.kkt_gap
    }
}

/// Raw dual solution over the 2l variables, exposed for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub beta: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub gap: f64,
}

/// Solves the dual problem. The kernel matrix is computed once (the training
/// sets here have a few hundred rows).
pub fn solve<T: Scalar>(kernel: &Kernel<T>, params: &SvrParams, x: &Matrix<T>, y: &[T]) -> Result<DualSolution> {
    let l = x.nrows();
    let n = 2 * l;
    let c = params.c;
    let eps = params.epsilon;

    let mut gram = vec![0.0f64; l * l];
    for i in 0..l {
        for j in i..l {
            let v = kernel.eval(x.row(i), x.row(j)).as_f64();
            gram[i * l + j] = v;
            gram[j * l + i] = v;
        }
    }
    let sign = |i: usize| if i < l { 1.0 } else { -1.0 };
    let q = |i: usize, j: usize| sign(i) * sign(j) * gram[(i % l) * l + (j % l)];
    let qd: Vec<f64> = (0..n).map(|i| gram[(i % l) * l + (i % l)]).collect();

    let mut beta = vec![0.0f64; n];
    let mut grad: Vec<f64> = (0..n)
        .map(|i| {
            if i < l {
                eps - y[i].as_f64()
            } else {
                eps + y[i - l].as_f64()
            }
        })
        .collect();

    let is_upper = |b: f64| b >= c;
    let is_lower = |b: f64| b <= 0.0;
    let mut iterations = 0;
    let gap = loop {
        // first index: maximal violation among the "up" set
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if sign(t) > 0.0 {
                if !is_upper(beta[t]) && -grad[t] >= gmax {
                    gmax = -grad[t];
                    i_sel = Some(t);
                }
            } else if !is_lower(beta[t]) && grad[t] >= gmax {
                gmax = grad[t];
                i_sel = Some(t);
            }
        }
        // second index: largest objective decrease
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut best_obj = f64::INFINITY;
        if let Some(i) = i_sel {
            for j in 0..n {
                if sign(j) > 0.0 {
                    if !is_lower(beta[j]) {
                        let diff = gmax + grad[j];
                        if grad[j] >= gmax2 {
                            gmax2 = grad[j];
                        }
                        if diff > 0.0 {
                            let quad = qd[i] + qd[j] - 2.0 * sign(i) * q(i, j);
                            let obj = -(diff * diff) / if quad > 0.0 { quad } else { TAU };
                            if obj <= best_obj {
                                best_obj = obj;
                                j_sel = Some(j);
                            }
                        }
                    }
                } else if !is_upper(beta[j]) {
                    let diff = gmax - grad[j];
                    if -grad[j] >= gmax2 {
                        gmax2 = -grad[j];
                    }
                    if diff > 0.0 {
                        let quad = qd[i] + qd[j] + 2.0 * sign(i) * q(i, j);
                        let obj = -(diff * diff) / if quad > 0.0 { quad } else { TAU };
                        if obj <= best_obj {
                            best_obj = obj;
                            j_sel = Some(j);
                        }
                    }
                }
            }
        }
        let gap = gmax + gmax2;
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            break gap.max(0.0);
        };
        if gap < params.tol {
            break gap;
        }
        if iterations >= params.max_iter {
            return Err(Error::NotConverged { iterations, gap });
        }
        iterations += 1;

        let (old_i, old_j) = (beta[i], beta[j]);
        if sign(i) != sign(j) {
            let mut quad = qd[i] + qd[j] + 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = beta[i] - beta[j];
            beta[i] += delta;
            beta[j] += delta;
            if diff > 0.0 {
                if beta[j] < 0.0 {
                    beta[j] = 0.0;
                    beta[i] = diff;
                }
            } else if beta[i] < 0.0 {
                beta[i] = 0.0;
                beta[j] = -diff;
            }
            if diff > 0.0 {
                if beta[i] > c {
                    beta[i] = c;
                    beta[j] = c - diff;
                }
            } else if beta[j] > c {
                beta[j] = c;
                beta[i] = c + diff;
            }
        } else {
            let mut quad = qd[i] + qd[j] - 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = beta[i] + beta[j];
            beta[i] -= delta;
            beta[j] += delta;
            if sum > c {
                if beta[i] > c {
                    beta[i] = c;
                    beta[j] = sum - c;
                }
            } else if beta[j] < 0.0 {
                beta[j] = 0.0;
                beta[i] = sum;
            }
            if sum > c {
                if beta[j] > c {
                    beta[j] = c;
                    beta[i] = sum - c;
                }
            } else if beta[i] < 0.0 {
                beta[i] = 0.0;
                beta[j] = sum;
            }
        }
        let (di, dj) = (beta[i] - old_i, beta[j] - old_j);
        for (k, g) in grad.iter_mut().enumerate() {
            *g += q(i, k) * di + q(j, k) * dj;
        }
    };

    // bias from free variables, or the midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free_count) = (0.0, 0usize);
    for i in 0..n {
        let yg = sign(i) * grad[i];
        if is_upper(beta[i]) {
            if sign(i) < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if is_lower(beta[i]) {
            if sign(i) > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free_count += 1;
            free_sum += yg;
        }
    }
    let rho = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        (ub + lb) / 2.0
    };
    Ok(DualSolution {
        beta,
        rho,
        iterations,
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_kernel_keeps_exact_line_inside_tube() {
        let xs: Vec<f64> = (0..12).map(|i| i as f64 / 4.0).collect();
        let x = Matrix::column_vector(&xs);
        let y: Vec<f64> = xs.iter().map(|v| 0.5 * v - 0.2).collect();
        let params = SvrParams {
            kernel: KernelKind::Linear,
            c: 1000.0,
            epsilon: 0.01,
            tol: 1e-6,
            ..SvrParams::default()
        };
        let m = SupportVectorRegressor::fit(&params, &x, &y).unwrap();
        for (p, t) in m.predict(&x).unwrap().iter().zip(&y) {
            assert!((p - t).abs() <= 0.01 + 1e-5, "{p} vs {t}");
        }
    }

    #[test]
    fn iteration_cap_reports_gap() {
        let x = Matrix::column_vector(&[0.0, 1.0, 2.0, 3.0]);
        let params = SvrParams {
            epsilon: 0.0,
            c: 100.0,
            tol: 1e-12,
            max_iter: 1,
            ..SvrParams::default()
        };
        let err = SupportVectorRegressor::fit(&params, &x, &[0.0, 1.0, 0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NotConverged { iterations: 1, gap } if gap > 0.0));
    }

    #[test]
    fn flat_targets_inside_tube_give_no_support_vectors() {
        let x = Matrix::column_vector(&[0.0, 1.0, 2.0]);
        let m = SupportVectorRegressor::fit(&SvrParams::default(), &x, &[0.5, 0.5, 0.5]).unwrap();
        assert_eq!(m.support_count(), 0);
        assert!(m.predict(&x).unwrap().iter().all(|p| (p - 0.5f64).abs() <= 0.1));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let bad_c = SvrParams {
            c: 0.0,
            ..SvrParams::default()
        };
        assert!(bad_c.validate().is_err());
        let bad_eps = SvrParams {
            epsilon: -1.0,
            ..SvrParams::default()
        };
        assert!(bad_eps.validate().is_err());
        let bad_gamma = SvrParams {
            gamma: Gamma::Value(0.0),
            ..SvrParams::default()
        };
        assert!(bad_gamma.validate().is_err());
    }

    #[test]
    fn gamma_parses_from_config_values() {
        #[derive(Deserialize)]
        struct W {
            gamma: Gamma,
        }
        let a: W = toml::from_str("gamma = \"scale\"").unwrap();
        assert_eq!(a.gamma, Gamma::Named(GammaRule::Scale));
        let b: W = toml::from_str("gamma = 0.5").unwrap();
        assert_eq!(b.gamma, Gamma::Value(0.5));
    }
}
