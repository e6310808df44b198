//! Accuracy prediction for small convolutional architectures: search-space
//! enumeration, dataset handling, feature assembly, regressors and rank
//! metrics, plus the experiment runner that ties them together.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the precision used by the runner.

// NaN-rejecting checks are written as negated comparisons on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod cost;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod features;
pub mod manifest;
pub mod matrix;
pub mod metrics;
pub mod regressors;
pub mod report;
pub mod scalar;
pub mod space;
pub mod synthetic;

pub use calibration::{check_space, AccountingFit, SpaceCheck};
pub use cost::{count_macs, count_params, scheme_features, Accounting, CostModel, InputShape, SchemeFeatures};
pub use dataset::{
    load_dataset, read_dataset, save_dataset, split_into_bins, split_train_test, write_dataset, ArchitectureRecord,
    ColumnMapping, Dataset, EpochMetrics, Split,
};
pub use error::{Error, Result};
pub use experiment::{
    run_baseline, run_epoch_ablation, run_log_feature_check, run_naive, run_scheme_ablation, ExperimentConfig,
    ExperimentPlan, LabelledModel, PreparedData, ReportFormat, RunOptions,
};
pub use features::{
    apply_normalizer, assemble_features, fit_normalizer, DesignMatrices, FeatureSetConfig, Normalizer, SchemeFeature,
    SchemeSubset,
};
pub use manifest::{export_training_manifest, TrainingManifest, TrainingRecipe};
pub use matrix::Matrix;
pub use metrics::{acceleration, count_violations, mae, monotonicity_score, naive_reference, EvalReport};
pub use regressors::{fit, fit_linear_degree, fit_svr, predict, FittedModel, KernelKind, ModelSpec, RegressorSpec};
pub use report::{emit_reports, CellOutcome, CellResult, PlotRow, ReportTable, SeedReport, TableKind};
pub use scalar::Scalar;
pub use space::{enumerate_schemes, ConstraintSpec, LayerSpec, Scheme};

pub type Matrix64 = Matrix<f64>;
pub type Matrix32 = Matrix<f32>;
pub type FittedModel64 = FittedModel<f64>;
pub type FittedModel32 = FittedModel<f32>;
pub type Normalizer64 = Normalizer<f64>;
pub type Normalizer32 = Normalizer<f32>;
pub type DesignMatrices64 = DesignMatrices<f64>;
