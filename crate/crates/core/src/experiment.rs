//! Experiment grids: the regressor baseline, the scheme-feature and epoch
//! ablations and the log-parameter check. Every cell is fitted once per seed
//! and summarised by its median-violation seed.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{split_train_test, ArchitectureRecord, ColumnMapping, Dataset, Split};
use crate::error::{Error, Result};
use crate::features::{assemble_features, FeatureSetConfig, Normalizer, SchemeFeature, SchemeSubset};
use crate::metrics::{acceleration, naive_reference, EvalReport};
use crate::regressors::{self, KernelKind, ModelSpec, RegressorSpec};
use crate::report::{CellOutcome, CellResult, PlotRow, ReportTable, SeedReport, TableKind};

pub const DEFAULT_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

/// A model specification with the row label used in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelledModel {
    pub label: String,
    #[serde(flatten)]
    pub model: ModelSpec,
}

impl LabelledModel {
    pub fn new(label: impl Into<String>, model: ModelSpec) -> Self {
        Self {
            label: label.into(),
            model,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    /// Comma-separated, one line per seed report.
    Csv,
    /// Aligned plain-text tables.
    Text,
    /// Per-architecture true/predicted values for each cell.
    Plot,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(ReportFormat::Csv),
            "text" | "txt" => Ok(ReportFormat::Text),
            "plot" => Ok(ReportFormat::Plot),
            other => Err(Error::config("formats", format!("unknown report format `{other}`"))),
        }
    }
}

fn default_seeds() -> Vec<u64> {
    DEFAULT_SEEDS.to_vec()
}
fn default_formats() -> Vec<ReportFormat> {
    vec![ReportFormat::Csv, ReportFormat::Text, ReportFormat::Plot]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineConfig {
    pub epochs: Vec<usize>,
    /// Scheme columns used when no epoch features are included.
    pub scheme_without_epochs: SchemeSubset,
    /// Scheme columns used together with epoch features.
    pub scheme_with_epochs: SchemeSubset,
    pub models: Vec<LabelledModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeAblationConfig {
    pub num_epochs: usize,
    /// Feature sets as `(row label, subset)`; rendered in this order.
    pub subsets: Vec<LabelledSubset>,
    pub model: LabelledModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelledSubset {
    pub label: String,
    pub scheme: SchemeSubset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpochAblationConfig {
    pub epochs: Vec<usize>,
    pub subsets: Vec<LabelledSubset>,
    pub model: LabelledModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogCheckConfig {
    pub num_epochs: usize,
    pub raw: LabelledSubset,
    pub log: LabelledSubset,
    pub model: LabelledModel,
}

/// Everything an experiment needs besides the data file and output location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_formats")]
    pub formats: Vec<ReportFormat>,
    /// Standardise the training target before fitting and map predictions
    /// back. Power-transformed linear models always see the raw target.
    #[serde(default)]
    pub standardize_target: bool,
    /// Clip predictions to [0, 1].
    #[serde(default)]
    pub clamp_predictions: bool,
    #[serde(default)]
    pub columns: ColumnMapping,
    pub baseline: BaselineConfig,
    pub scheme_ablation: SchemeAblationConfig,
    pub epoch_ablation: EpochAblationConfig,
    pub log_check: LogCheckConfig,
}

const DEFAULT_EXPERIMENT: &str = include_str!("../config/experiment.toml");

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::from_toml_str(DEFAULT_EXPERIMENT).expect("shipped experiment config parses")
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::config("experiment config", e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        validate_seeds(&self.seeds)?;
        if self.formats.is_empty() {
            return Err(Error::config("formats", "no report format selected"));
        }
        if self.baseline.models.is_empty() {
            return Err(Error::config("baseline.models", "no regressors listed"));
        }
        let models = self.baseline.models.iter().chain([
            &self.scheme_ablation.model,
            &self.epoch_ablation.model,
            &self.log_check.model,
        ]);
        for m in models {
            m.model
                .validate()
                .map_err(|e| Error::config(format!("model `{}`", m.label), e.to_string()))?;
        }
        for (name, list) in [
            ("baseline.epochs", &self.baseline.epochs),
            ("epoch_ablation.epochs", &self.epoch_ablation.epochs),
        ] {
            if list.is_empty() {
                return Err(Error::config(name, "empty epoch list"));
            }
        }
        if self.scheme_ablation.subsets.is_empty() {
            return Err(Error::config("scheme_ablation.subsets", "no feature sets listed"));
        }
        if self.epoch_ablation.subsets.is_empty() {
            return Err(Error::config("epoch_ablation.subsets", "no feature sets listed"));
        }
        Ok(())
    }
}

fn validate_seeds(seeds: &[u64]) -> Result<()> {
    if seeds.is_empty() {
        return Err(Error::config("seeds", "at least one seed is required"));
    }
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::config("seeds", "seeds must be distinct"));
    }
    Ok(())
}

/// A configuration bound to its input and output locations.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub dataset: PathBuf,
    pub output: PathBuf,
    pub config: ExperimentConfig,
}

impl ExperimentPlan {
    pub fn new(dataset: impl Into<PathBuf>, output: impl Into<PathBuf>, config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            dataset: dataset.into(),
            output: output.into(),
            config,
        })
    }

    pub fn load_data(&self) -> Result<PreparedData> {
        let dataset = crate::dataset::load_dataset(&self.dataset, &self.config.columns)?;
        PreparedData::new(dataset)
    }
}

/// Loaded records with their train/test split.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    pub dataset: Dataset,
    pub split: Split,
    /// Epochs per record; the denominator of the acceleration.
    pub total_epochs: usize,
}

impl PreparedData {
    /// Uses the standard 40-bin split.
    pub fn new(dataset: Dataset) -> Result<Self> {
        let split = split_train_test(&dataset.records)?;
        Self::with_split(dataset, split)
    }

    pub fn with_split(dataset: Dataset, split: Split) -> Result<Self> {
        let total_epochs = dataset
            .records
            .iter()
            .map(|r| r.epochs().len())
            .min()
            .ok_or_else(|| Error::data("dataset holds no records"))?;
        if split.train_ids.len() < 2 || split.test_ids.is_empty() {
            return Err(Error::data(format!(
                "split needs at least 2 train and 1 test record, has {} and {}",
                split.train_ids.len(),
                split.test_ids.len()
            )));
        }
        Ok(Self {
            dataset,
            split,
            total_epochs,
        })
    }

    pub fn records(&self) -> &[ArchitectureRecord] {
        &self.dataset.records
    }

    fn targets(&self, ids: &[usize]) -> Vec<f64> {
        let by_id: std::collections::HashMap<usize, f64> =
            self.records().iter().map(|r| (r.id(), r.target())).collect();
        ids.iter().map(|id| by_id[id]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    pub standardize_target: bool,
    pub clamp_predictions: bool,
}

impl From<&ExperimentConfig> for RunOptions {
    fn from(c: &ExperimentConfig) -> Self {
        Self {
            standardize_target: c.standardize_target,
            clamp_predictions: c.clamp_predictions,
        }
    }
}

/// One (regressor, feature set) cell to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub struct CellTask {
    pub row: String,
    pub column: String,
    pub model: ModelSpec,
    /// `None` marks a cell left empty by design.
    pub features: Option<FeatureSetConfig>,
}

struct SeedFit {
    report: EvalReport,
    predictions: Vec<f64>,
}

fn fit_one(
    data: &PreparedData,
    model: &ModelSpec,
    features: &FeatureSetConfig,
    seed: u64,
    options: RunOptions,
) -> Result<SeedFit> {
    let m = assemble_features::<f64>(data.records(), &data.split, features)?;
    let normalizer = Normalizer::fit(&m.train_x)?;
    let train_x = normalizer.apply(&m.train_x)?;
    let test_x = normalizer.apply(&m.test_x)?;

    let power_linear = matches!(model, ModelSpec::Linear { degree } if *degree != 1.0);
    let (shift, scale) = if options.standardize_target && !power_linear {
        let n = m.train_y.len() as f64;
        let mean = m.train_y.iter().sum::<f64>() / n;
        let sd = (m.train_y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        (mean, if sd > 0.0 { sd } else { 1.0 })
    } else {
        (0.0, 1.0)
    };
    let train_y: Vec<f64> = m.train_y.iter().map(|v| (v - shift) / scale).collect();

    let fitted = regressors::fit(&RegressorSpec::new(model.clone(), seed), &train_x, &train_y)?;
    let mut predictions: Vec<f64> = fitted
        .predict(&test_x)?
        .into_iter()
        .map(|p| p * scale + shift)
        .collect();
    if options.clamp_predictions {
        for p in &mut predictions {
            *p = p.clamp(0.0, 1.0);
        }
    }
    let acc = acceleration(features.num_epochs, data.total_epochs)?;
    let report = EvalReport::evaluate(&m.test_y, &predictions, acc)?;
    Ok(SeedFit { report, predictions })
}

/// Index of the report with the median violation count; among equal counts
/// the lower MAE, then the lower seed, wins.
pub fn select_median(reports: &[SeedReport]) -> Option<usize> {
    if reports.is_empty() {
        return None;
    }
    let mut v: Vec<f64> = reports.iter().map(|r| r.report.violations).collect();
    v.sort_by(f64::total_cmp);
    let median = v[(v.len() - 1) / 2];
    (0..reports.len())
        .filter(|&i| reports[i].report.violations == median)
        .min_by(|&a, &b| {
            let (ra, rb) = (&reports[a], &reports[b]);
            ra.report.mae.total_cmp(&rb.report.mae).then(ra.seed.cmp(&rb.seed))
        })
}

/// Ordinal ranks (1 = smallest), equal values ordered by position.
fn ranks(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut rank = vec![0; values.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r + 1;
    }
    rank
}

fn plot_rows(cell: &str, ids: &[usize], truth: &[f64], predictions: &[f64]) -> Vec<PlotRow> {
    let true_rank = ranks(truth);
    let pred_rank = ranks(predictions);
    (0..ids.len())
        .map(|i| PlotRow {
            cell: cell.to_string(),
            id: ids[i],
            true_accuracy: truth[i],
            predicted_accuracy: predictions[i],
            true_rank: true_rank[i],
            predicted_rank: pred_rank[i],
        })
        .collect()
}

/// Fits `task` once per seed. Failures are captured in the outcome.
pub fn run_cell(
    data: &PreparedData,
    task: &CellTask,
    seeds: &[u64],
    options: RunOptions,
) -> (CellResult, Vec<PlotRow>) {
    let Some(features) = &task.features else {
        return (
            CellResult {
                row: task.row.clone(),
                column: task.column.clone(),
                acceleration: None,
                outcome: CellOutcome::Empty,
            },
            Vec::new(),
        );
    };
    let acc = acceleration(features.num_epochs, data.total_epochs).ok();
    let fits: Result<Vec<(u64, SeedFit)>> = seeds
        .iter()
        .map(|&seed| fit_one(data, &task.model, features, seed, options).map(|f| (seed, f)))
        .collect();
    match fits {
        Err(e) => (
            CellResult {
                row: task.row.clone(),
                column: task.column.clone(),
                acceleration: acc,
                outcome: CellOutcome::Failed(e.to_string()),
            },
            Vec::new(),
        ),
        Ok(fits) => {
            let per_seed: Vec<SeedReport> = fits
                .iter()
                .map(|(seed, f)| SeedReport {
                    seed: *seed,
                    report: f.report,
                })
                .collect();
            let selected = select_median(&per_seed).expect("at least one seed");
            let truth = data.targets(&data.split.test_ids);
            let plot = plot_rows(
                &format!("{} | {}", task.row, task.column),
                &data.split.test_ids,
                &truth,
                &fits[selected].1.predictions,
            );
            (
                CellResult {
                    row: task.row.clone(),
                    column: task.column.clone(),
                    acceleration: acc,
                    outcome: CellOutcome::Done { per_seed, selected },
                },
                plot,
            )
        }
    }
}

/// Runs every task in parallel; results keep the task order.
pub fn run_cells(
    data: &PreparedData,
    tasks: &[CellTask],
    seeds: &[u64],
    options: RunOptions,
) -> Result<(Vec<CellResult>, Vec<PlotRow>)> {
    validate_seeds(seeds)?;
    let results: Vec<(CellResult, Vec<PlotRow>)> =
        tasks.par_iter().map(|t| run_cell(data, t, seeds, options)).collect();
    let mut cells = Vec::with_capacity(results.len());
    let mut plot = Vec::new();
    for (c, p) in results {
        cells.push(c);
        plot.extend(p);
    }
    Ok((cells, plot))
}

fn epoch_column(k: usize, total: usize) -> String {
    let pct = acceleration(k, total).map(|a| a * 100.0).unwrap_or(f64::NAN);
    format!("{pct:.1}% ({k} epochs)")
}

fn check_epochs(data: &PreparedData, epochs: &[usize]) -> Result<()> {
    if let Some(&k) = epochs.iter().find(|&&k| k > data.total_epochs) {
        return Err(Error::config(
            "epochs",
            format!("{k} epochs requested, records hold {}", data.total_epochs),
        ));
    }
    Ok(())
}

/// The mean-of-train reference, evaluated on the test split.
pub fn run_naive(data: &PreparedData, seeds: &[u64]) -> Result<CellResult> {
    validate_seeds(seeds)?;
    let train = data.targets(&data.split.train_ids);
    let test = data.targets(&data.split.test_ids);
    let report = naive_reference(&train, &test)?;
    let per_seed = seeds
        .iter()
        .map(|&seed| SeedReport { seed, report })
        .collect::<Vec<_>>();
    let selected = select_median(&per_seed).expect("seeds are non-empty");
    Ok(CellResult {
        row: NAIVE_LABEL.to_string(),
        column: "-".to_string(),
        acceleration: Some(1.0),
        outcome: CellOutcome::Done { per_seed, selected },
    })
}

pub const NAIVE_LABEL: &str = "Naive reference (train mean)";

pub fn naive_table(data: &PreparedData, seeds: &[u64]) -> Result<ReportTable> {
    let cell = run_naive(data, seeds)?;
    Ok(ReportTable {
        name: "naive".into(),
        kind: TableKind::Metrics,
        rows: vec![cell.row.clone()],
        columns: vec![cell.column.clone()],
        reference: None,
        cells: vec![cell],
        plot: Vec::new(),
    })
}

/// Every baseline regressor at every epoch count, with the naive reference
/// on top.
pub fn run_baseline(config: &ExperimentConfig, data: &PreparedData) -> Result<ReportTable> {
    let b = &config.baseline;
    check_epochs(data, &b.epochs)?;
    let columns: Vec<String> = b.epochs.iter().map(|&k| epoch_column(k, data.total_epochs)).collect();
    let mut tasks = Vec::new();
    for m in &b.models {
        for (&k, col) in b.epochs.iter().zip(&columns) {
            let scheme = if k == 0 {
                b.scheme_without_epochs.clone()
            } else {
                b.scheme_with_epochs.clone()
            };
            tasks.push(CellTask {
                row: m.label.clone(),
                column: col.clone(),
                model: m.model.clone(),
                features: Some(FeatureSetConfig::new(scheme, k)),
            });
        }
    }
    let (cells, plot) = run_cells(data, &tasks, &config.seeds, config.into())?;
    Ok(ReportTable {
        name: "baseline".into(),
        kind: TableKind::Grid,
        rows: b.models.iter().map(|m| m.label.clone()).collect(),
        columns,
        reference: Some(run_naive(data, &config.seeds)?),
        cells,
        plot,
    })
}

/// One row per scheme-feature subset, single regressor, fixed epoch count.
pub fn run_scheme_ablation(config: &ExperimentConfig, data: &PreparedData) -> Result<ReportTable> {
    let a = &config.scheme_ablation;
    check_epochs(data, &[a.num_epochs])?;
    let column = epoch_column(a.num_epochs, data.total_epochs);
    let tasks: Vec<CellTask> = a
        .subsets
        .iter()
        .map(|s| CellTask {
            row: s.label.clone(),
            column: column.clone(),
            model: a.model.model.clone(),
            features: Some(FeatureSetConfig::new(s.scheme.clone(), a.num_epochs)),
        })
        .collect();
    let (cells, plot) = run_cells(data, &tasks, &config.seeds, config.into())?;
    Ok(ReportTable {
        name: "scheme_ablation".into(),
        kind: TableKind::Metrics,
        rows: a.subsets.iter().map(|s| s.label.clone()).collect(),
        columns: vec![column],
        reference: None,
        cells,
        plot,
    })
}

/// Violations for every (epoch count, scheme subset) pair. A subset with no
/// columns at zero epochs has no features and is left empty.
pub fn run_epoch_ablation(config: &ExperimentConfig, data: &PreparedData) -> Result<ReportTable> {
    let a = &config.epoch_ablation;
    check_epochs(data, &a.epochs)?;
    let rows: Vec<String> = a.epochs.iter().map(|k| format!("{k} epochs")).collect();
    let mut tasks = Vec::new();
    for (&k, row) in a.epochs.iter().zip(&rows) {
        for s in &a.subsets {
            let features = FeatureSetConfig::new(s.scheme.clone(), k);
            tasks.push(CellTask {
                row: row.clone(),
                column: s.label.clone(),
                model: a.model.model.clone(),
                features: (features.dimension() > 0).then_some(features),
            });
        }
    }
    let (cells, plot) = run_cells(data, &tasks, &config.seeds, config.into())?;
    Ok(ReportTable {
        name: "epoch_ablation".into(),
        kind: TableKind::ViolationsGrid,
        rows,
        columns: a.subsets.iter().map(|s| s.label.clone()).collect(),
        reference: None,
        cells,
        plot,
    })
}

/// Raw against log-transformed parameter count under one regressor.
pub fn run_log_feature_check(config: &ExperimentConfig, data: &PreparedData) -> Result<ReportTable> {
    let c = &config.log_check;
    check_epochs(data, &[c.num_epochs])?;
    let column = epoch_column(c.num_epochs, data.total_epochs);
    let tasks: Vec<CellTask> = [&c.raw, &c.log]
        .into_iter()
        .map(|s| CellTask {
            row: s.label.clone(),
            column: column.clone(),
            model: c.model.model.clone(),
            features: Some(FeatureSetConfig::new(s.scheme.clone(), c.num_epochs)),
        })
        .collect();
    let (cells, plot) = run_cells(data, &tasks, &config.seeds, config.into())?;
    Ok(ReportTable {
        name: "log_check".into(),
        kind: TableKind::Metrics,
        rows: vec![c.raw.label.clone(), c.log.label.clone()],
        columns: vec![column],
        reference: None,
        cells,
        plot,
    })
}

/// The 24 baseline rows with their default hyperparameters.
pub fn default_baseline_models() -> Vec<LabelledModel> {
    let mut v = vec![LabelledModel::new("Decision Tree", ModelSpec::decision_tree())];
    for k in [1, 3, 5, 7, 9] {
        v.push(LabelledModel::new(format!("{k}-NN"), ModelSpec::knn(k)));
    }
    v.push(LabelledModel::new("Linear Regression", ModelSpec::linear(1.0)));
    for d in [0.5, 0.25] {
        v.push(LabelledModel::new(
            format!("Linear Regression (D={d})"),
            ModelSpec::linear(d),
        ));
    }
    for n in [25, 50, 100, 200] {
        v.push(LabelledModel::new(
            format!("Gradient Boosting (N={n})"),
            ModelSpec::gradient_boosting(n),
        ));
    }
    for n in [25, 50, 100, 200] {
        v.push(LabelledModel::new(format!("AdaBoost (N={n})"), ModelSpec::ada_boost(n)));
    }
    for (name, kernel) in [
        ("RBF", KernelKind::Rbf),
        ("Polynomial", KernelKind::Polynomial),
        ("Linear", KernelKind::Linear),
    ] {
        v.push(LabelledModel::new(
            format!("SVR ({name} kernel)"),
            ModelSpec::svr(kernel),
        ));
    }
    for n in [25, 50, 100, 200] {
        v.push(LabelledModel::new(
            format!("Random Forest (N={n})"),
            ModelSpec::random_forest(n),
        ));
    }
    v
}

/// Leave-one-out rows, the full set and the two-column pair.
pub fn default_scheme_subsets() -> Vec<LabelledSubset> {
    let mut v = Vec::new();
    for f in SchemeFeature::FULL {
        v.push(LabelledSubset {
            label: format!("All but {}", display_name(f)),
            scheme: SchemeSubset::leave_one_out(f),
        });
    }
    v.push(LabelledSubset {
        label: "All".into(),
        scheme: SchemeSubset::Full,
    });
    v.push(LabelledSubset {
        label: "LogNumParams & NumStages".into(),
        scheme: SchemeSubset::Limited,
    });
    v
}

fn display_name(f: SchemeFeature) -> &'static str {
    match f {
        SchemeFeature::Depth => "Depth",
        SchemeFeature::NumStages => "NumStages",
        SchemeFeature::FirstLayerWidth => "FirstLayerWidth",
        SchemeFeature::LastLayerWidth => "LastLayerWidth",
        SchemeFeature::LogNumParams => "LogNumParams",
        SchemeFeature::NumMacs => "NumMACs",
        SchemeFeature::NumParams => "NumParams",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::EvalReport;

    fn report(violations: f64, mae: f64) -> EvalReport {
        EvalReport {
            mae,
            violations,
            monotonicity_score: 1.0 - violations / 780.0,
            n: 40,
            acceleration: 1.0,
            true_tie_pairs: 0,
        }
    }

    #[test]
    fn shipped_config_matches_built_in_defaults() {
        let c = ExperimentConfig::default();
        assert_eq!(c.seeds, DEFAULT_SEEDS.to_vec());
        assert_eq!(c.baseline.models, default_baseline_models());
        assert_eq!(c.baseline.models.len(), 24);
        assert_eq!(c.baseline.epochs, vec![0, 3, 6, 9]);
        assert_eq!(c.scheme_ablation.subsets, default_scheme_subsets());
        assert_eq!(c.epoch_ablation.epochs, vec![0, 3, 6, 9, 12, 15, 18]);
        assert_eq!(c.scheme_ablation.model.model, ModelSpec::random_forest(200));
        assert_eq!(c.epoch_ablation.model.model, ModelSpec::random_forest(200));
        assert!(!c.standardize_target && !c.clamp_predictions);
    }

    #[test]
    fn config_round_trips_through_toml() {
        let c = ExperimentConfig::default();
        let text = c.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), c);
    }

    #[test]
    fn duplicate_seeds_are_rejected() {
        let c = ExperimentConfig {
            seeds: vec![1, 2, 2],
            ..ExperimentConfig::default()
        };
        assert!(matches!(c.validate(), Err(Error::Config { .. })));
    }

    #[test]
    fn median_picks_third_order_statistic() {
        let reports: Vec<SeedReport> = [
            (1, 40.0, 0.01),
            (2, 30.0, 0.01),
            (3, 50.0, 0.01),
            (4, 35.0, 0.01),
            (5, 45.0, 0.01),
        ]
        .into_iter()
        .map(|(seed, v, m)| SeedReport {
            seed,
            report: report(v, m),
        })
        .collect();
        assert_eq!(reports[select_median(&reports).unwrap()].report.violations, 40.0);
    }

    #[test]
    fn median_ties_prefer_lower_mae_then_seed() {
        let mk = |seed, v, m| SeedReport {
            seed,
            report: report(v, m),
        };
        let reports = vec![
            mk(1, 40.0, 0.02),
            mk(2, 40.0, 0.01),
            mk(3, 40.0, 0.01),
            mk(4, 10.0, 0.0),
            mk(5, 90.0, 0.0),
        ];
        assert_eq!(reports[select_median(&reports).unwrap()].seed, 2);
    }

    #[test]
    fn ranks_are_ordinal() {
        assert_eq!(ranks(&[0.3, 0.1, 0.2]), vec![3, 1, 2]);
        assert_eq!(ranks(&[0.5, 0.5]), vec![1, 2]);
    }

    #[test]
    fn model_labels_follow_table_layout() {
        let labels: Vec<String> = default_baseline_models().into_iter().map(|m| m.label).collect();
        assert_eq!(labels[0], "Decision Tree");
        assert_eq!(labels[7], "Linear Regression (D=0.5)");
        assert_eq!(labels[8], "Linear Regression (D=0.25)");
        assert_eq!(labels[19], "SVR (Linear kernel)");
        assert_eq!(labels[23], "Random Forest (N=200)");
    }
}
