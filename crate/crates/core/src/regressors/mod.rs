//! Regression families behind one fit/predict contract.
//!
//! Hyperparameters not set in a [`ModelSpec`] take the defaults below:
//!
//! | family              | default                                                   |
//! |---------------------|-----------------------------------------------------------|
//! | `knn`               | k = 5, uniform weights, Euclidean distance                |
//! | `linear`            | degree 1 (ordinary least squares with intercept)          |
//! | `decision_tree`     | CART, grown to purity, all features per split             |
//! | `random_forest`     | 100 trees, bootstrap, all features per split              |
//! | `gradient_boosting` | 100 rounds, learning rate 0.1, depth 3, no subsampling    |
//! | `ada_boost`         | 50 rounds, AdaBoost.R2 linear loss, rate 1.0, depth 3     |
//! | `svr`               | RBF, C = 1, ε = 0.1, γ = 1/(d·var X), degree 3, coef0 = 0 |

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

pub mod ensemble;
pub mod knn;
pub mod linear;
pub mod rng;
pub mod svr;
pub mod tree;

pub use ensemble::{AdaBoostR2, GradientBoosting, RandomForest};
pub use knn::KNearest;
pub use linear::LinearModel;
pub use svr::{Gamma, GammaRule, Kernel, KernelKind, SupportVectorRegressor, SvrParams};
pub use tree::{RegressionTree, TreeParams};

fn default_k() -> usize {
    5
}
fn default_degree() -> f64 {
    1.0
}
fn default_forest_size() -> usize {
    100
}
fn default_boosting_rounds() -> usize {
    100
}
fn default_adaboost_rounds() -> usize {
    50
}
fn default_gb_rate() -> f64 {
    0.1
}
fn default_ada_rate() -> f64 {
    1.0
}
fn default_subsample() -> f64 {
    1.0
}
fn default_true() -> bool {
    true
}
fn depth3() -> TreeParams {
    TreeParams::with_max_depth(3)
}

/// Algorithm family plus its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    Knn {
        #[serde(default = "default_k")]
        k: usize,
    },
    Linear {
        #[serde(default = "default_degree")]
        degree: f64,
    },
    DecisionTree {
        #[serde(default)]
        tree: TreeParams,
    },
    RandomForest {
        #[serde(default = "default_forest_size")]
        n_estimators: usize,
        #[serde(default = "default_true")]
        bootstrap: bool,
        #[serde(default)]
        tree: TreeParams,
    },
    GradientBoosting {
        #[serde(default = "default_boosting_rounds")]
        n_estimators: usize,
        #[serde(default = "default_gb_rate")]
        learning_rate: f64,
        #[serde(default = "default_subsample")]
        subsample: f64,
        #[serde(default = "depth3")]
        tree: TreeParams,
    },
    AdaBoost {
        #[serde(default = "default_adaboost_rounds")]
        n_estimators: usize,
        #[serde(default = "default_ada_rate")]
        learning_rate: f64,
        #[serde(default = "depth3")]
        tree: TreeParams,
    },
    Svr {
        #[serde(default, flatten)]
        params: SvrParams,
    },
}

impl ModelSpec {
    pub fn knn(k: usize) -> Self {
        ModelSpec::Knn { k }
    }

    pub fn linear(degree: f64) -> Self {
        ModelSpec::Linear { degree }
    }

    pub fn decision_tree() -> Self {
        ModelSpec::DecisionTree {
            tree: TreeParams::default(),
        }
    }

    pub fn random_forest(n_estimators: usize) -> Self {
        ModelSpec::RandomForest {
            n_estimators,
            bootstrap: true,
            tree: TreeParams::default(),
        }
    }

    pub fn gradient_boosting(n_estimators: usize) -> Self {
        ModelSpec::GradientBoosting {
            n_estimators,
            learning_rate: default_gb_rate(),
            subsample: 1.0,
            tree: depth3(),
        }
    }

    pub fn ada_boost(n_estimators: usize) -> Self {
        ModelSpec::AdaBoost {
            n_estimators,
            learning_rate: default_ada_rate(),
            tree: depth3(),
        }
    }

    pub fn svr(kernel: KernelKind) -> Self {
        ModelSpec::Svr {
            params: SvrParams {
                kernel,
                ..SvrParams::default()
            },
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            ModelSpec::Knn { .. } => "knn",
            ModelSpec::Linear { .. } => "linear",
            ModelSpec::DecisionTree { .. } => "decision_tree",
            ModelSpec::RandomForest { .. } => "random_forest",
            ModelSpec::GradientBoosting { .. } => "gradient_boosting",
            ModelSpec::AdaBoost { .. } => "ada_boost",
            ModelSpec::Svr { .. } => "svr",
        }
    }

    /// Whether fitting consumes random draws. Deterministic families give
    /// the same model for every seed.
    pub fn is_stochastic(&self) -> bool {
        match self {
            ModelSpec::Knn { .. } | ModelSpec::Linear { .. } | ModelSpec::Svr { .. } => false,
            // feature visiting order breaks ties between equal-gain splits
            ModelSpec::DecisionTree { .. }
            | ModelSpec::RandomForest { .. }
            | ModelSpec::GradientBoosting { .. }
            | ModelSpec::AdaBoost { .. } => true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Knn { k } if *k == 0 => Err(Error::config("k", "must be at least 1")),
            ModelSpec::Linear { degree } if !(*degree > 0.0 && degree.is_finite()) => {
                Err(Error::config("degree", "must be positive"))
            }
            ModelSpec::DecisionTree { tree } => tree.validate(),
            ModelSpec::RandomForest { n_estimators, tree, .. }
            | ModelSpec::GradientBoosting { n_estimators, tree, .. }
            | ModelSpec::AdaBoost { n_estimators, tree, .. } => {
                if *n_estimators == 0 {
                    return Err(Error::config("n_estimators", "must be at least 1"));
                }
                tree.validate()
            }
            ModelSpec::Svr { params } => params.validate(),
            _ => Ok(()),
        }
    }
}

/// A model specification bound to a seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressorSpec {
    pub model: ModelSpec,
    pub seed: u64,
}

impl RegressorSpec {
    pub fn new(model: ModelSpec, seed: u64) -> Self {
        Self { model, seed }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel<T> {
    Knn(KNearest<T>),
    Linear(LinearModel<T>),
    DecisionTree(RegressionTree<T>),
    RandomForest(RandomForest<T>),
    GradientBoosting(GradientBoosting<T>),
    AdaBoost(AdaBoostR2<T>),
    Svr(SupportVectorRegressor<T>),
}

/// Fits `spec` on `(x, y)`. Identical inputs and seed give an identical model.
pub fn fit<T: Scalar>(spec: &RegressorSpec, x: &Matrix<T>, y: &[T]) -> Result<FittedModel<T>> {
    check_training(x, y)?;
    spec.model.validate()?;
    let seed = spec.seed;
    Ok(match &spec.model {
        ModelSpec::Knn { k } => FittedModel::Knn(KNearest::fit(*k, x, y)?),
        ModelSpec::Linear { degree } => FittedModel::Linear(LinearModel::fit_degree(*degree, x, y)?),
        ModelSpec::DecisionTree { tree } => {
            FittedModel::DecisionTree(RegressionTree::fit(x, y, tree, &mut rng::stream_rng(seed, 0))?)
        }
        ModelSpec::RandomForest {
            n_estimators,
            bootstrap,
            tree,
        } => FittedModel::RandomForest(RandomForest::fit(x, y, *n_estimators, *bootstrap, tree, seed)?),
        ModelSpec::GradientBoosting {
            n_estimators,
            learning_rate,
            subsample,
            tree,
        } => FittedModel::GradientBoosting(GradientBoosting::fit(
            x,
            y,
            *n_estimators,
            *learning_rate,
            *subsample,
            tree,
            seed,
        )?),
        ModelSpec::AdaBoost {
            n_estimators,
            learning_rate,
            tree,
        } => FittedModel::AdaBoost(AdaBoostR2::fit(x, y, *n_estimators, *learning_rate, tree, seed)?),
        ModelSpec::Svr { params } => FittedModel::Svr(SupportVectorRegressor::fit(params, x, y)?),
    })
}

/// Degree-D power-transformed least squares.
pub fn fit_linear_degree<T: Scalar>(degree: f64, x: &Matrix<T>, y: &[T]) -> Result<FittedModel<T>> {
    Ok(FittedModel::Linear(LinearModel::fit_degree(degree, x, y)?))
}

/// ε-SVR with the given kernel; `gamma_or_degree` is γ for RBF and the
/// degree for the polynomial kernel (γ then follows the scale rule).
pub fn fit_svr<T: Scalar>(
    kernel: KernelKind,
    c: f64,
    epsilon: f64,
    gamma_or_degree: f64,
    x: &Matrix<T>,
    y: &[T],
) -> Result<FittedModel<T>> {
    let mut params = SvrParams {
        kernel,
        c,
        epsilon,
        ..SvrParams::default()
    };
    match kernel {
        KernelKind::Rbf => params.gamma = Gamma::Value(gamma_or_degree),
        KernelKind::Polynomial => {
            if gamma_or_degree < 1.0 || gamma_or_degree.fract() != 0.0 {
                return Err(Error::config("degree", "polynomial degree must be a positive integer"));
            }
            params.degree = gamma_or_degree as u32;
        }
        KernelKind::Linear => {}
    }
    Ok(FittedModel::Svr(SupportVectorRegressor::fit(&params, x, y)?))
}

impl<T: Scalar> FittedModel<T> {
    pub fn dim(&self) -> usize {
        match self {
            FittedModel::Knn(m) => m.dim(),
            FittedModel::Linear(m) => m.coefficients().len(),
            FittedModel::DecisionTree(m) => m.dim(),
            FittedModel::RandomForest(m) => m.dim(),
            FittedModel::GradientBoosting(m) => m.dim(),
            FittedModel::AdaBoost(m) => m.dim(),
            FittedModel::Svr(m) => m.dim(),
        }
    }

    pub fn predict(&self, x: &Matrix<T>) -> Result<Vec<T>> {
        match self {
            FittedModel::Knn(m) => m.predict(x),
            FittedModel::Linear(m) => m.predict(x),
            FittedModel::DecisionTree(m) => m.predict(x),
            FittedModel::RandomForest(m) => m.predict(x),
            FittedModel::GradientBoosting(m) => m.predict(x),
            FittedModel::AdaBoost(m) => m.predict(x),
            FittedModel::Svr(m) => m.predict(x),
        }
    }

    /// Predictions clipped to `[lo, hi]`.
    pub fn predict_clamped(&self, x: &Matrix<T>, lo: T, hi: T) -> Result<Vec<T>> {
        Ok(self.predict(x)?.into_iter().map(|p| p.max(lo).min(hi)).collect())
    }
}

pub fn predict<T: Scalar>(model: &FittedModel<T>, x: &Matrix<T>) -> Result<Vec<T>> {
    model.predict(x)
}

pub(crate) fn check_training<T: Scalar>(x: &Matrix<T>, y: &[T]) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            found: y.len(),
        });
    }
    if x.nrows() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 training rows, got {}",
            x.nrows()
        )));
    }
    if x.ncols() == 0 {
        return Err(Error::InvalidInput("training matrix has no columns".into()));
    }
    if x.as_slice().iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("training data contains non-finite values".into()));
    }
    Ok(())
}

pub(crate) fn check_dim<T: Scalar>(expected: usize, x: &Matrix<T>) -> Result<()> {
    if x.ncols() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: x.ncols(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parses_with_defaults() {
        let rf: ModelSpec = toml::from_str("family = \"random_forest\"\nn_estimators = 25").unwrap();
        assert_eq!(rf, ModelSpec::random_forest(25));
        let svr: ModelSpec = toml::from_str("family = \"svr\"\nkernel = \"polynomial\"").unwrap();
        assert_eq!(svr, ModelSpec::svr(KernelKind::Polynomial));
        let gb: ModelSpec = toml::from_str("family = \"gradient_boosting\"").unwrap();
        assert_eq!(gb, ModelSpec::gradient_boosting(100));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(ModelSpec::knn(0).validate().is_err());
        assert!(ModelSpec::linear(0.0).validate().is_err());
        assert!(ModelSpec::random_forest(0).validate().is_err());
    }

    #[test]
    fn zero_rows_is_an_error_and_constant_targets_fit() {
        let empty = Matrix::<f64>::zeros(0, 2);
        assert!(fit(&RegressorSpec::new(ModelSpec::knn(1), 0), &empty, &[]).is_err());
        let x = Matrix::column_vector(&[0.0, 1.0, 2.0]);
        let y = [0.3; 3];
        for model in [
            ModelSpec::knn(2),
            ModelSpec::linear(0.5),
            ModelSpec::decision_tree(),
            ModelSpec::random_forest(4),
            ModelSpec::gradient_boosting(3),
            ModelSpec::ada_boost(3),
            ModelSpec::svr(KernelKind::Rbf),
        ] {
            let m = fit(&RegressorSpec::new(model.clone(), 1), &x, &y).unwrap();
            for p in m.predict(&x).unwrap() {
                assert!((p - 0.3f64).abs() < 0.1 + 1e-9, "{model:?}: {p}");
            }
        }
    }

    #[test]
    fn predict_checks_dimension() {
        let x = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let m = fit(&RegressorSpec::new(ModelSpec::knn(1), 0), &x, &[0.0, 1.0]).unwrap();
        assert_eq!(m.dim(), 2);
        let wrong = Matrix::column_vector(&[0.0]);
        assert!(matches!(
            m.predict(&wrong),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn clamping_is_opt_in() {
        let x = Matrix::column_vector(&[0.0, 1.0, 2.0]);
        let m = fit_linear_degree(1.0, &x, &[0.5, 1.0, 1.5]).unwrap();
        let far = Matrix::column_vector(&[4.0]);
        assert!(m.predict(&far).unwrap()[0] > 1.0);
        assert_eq!(m.predict_clamped(&far, 0.0, 1.0).unwrap()[0], 1.0);
    }
}
