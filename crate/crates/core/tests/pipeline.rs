use std::sync::OnceLock;

use naap_core::experiment::{run_cell, select_median, CellTask, NAIVE_LABEL};
use naap_core::features::{FeatureSetConfig, SchemeSubset};
use naap_core::regressors::SvrParams;
use naap_core::synthetic::{synthetic_dataset, SyntheticOptions};
use naap_core::{
    emit_reports, run_baseline, run_epoch_ablation, run_log_feature_check, run_scheme_ablation, ArchitectureRecord,
    CellOutcome, ConstraintSpec, Dataset, ExperimentConfig, LabelledModel, ModelSpec, PreparedData, ReportFormat,
    ReportTable, RunOptions,
};

fn data() -> &'static PreparedData {
    static DATA: OnceLock<PreparedData> = OnceLock::new();
    DATA.get_or_init(|| {
        let d = synthetic_dataset(&ConstraintSpec::naap440(), &SyntheticOptions::default()).unwrap();
        PreparedData::new(d).unwrap()
    })
}

fn baseline() -> &'static ReportTable {
    static TABLE: OnceLock<ReportTable> = OnceLock::new();
    TABLE.get_or_init(|| run_baseline(&ExperimentConfig::default(), data()).unwrap())
}

fn small_config() -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.baseline.models = vec![
        LabelledModel::new("1-NN", ModelSpec::knn(1)),
        LabelledModel::new("Random Forest (N=10)", ModelSpec::random_forest(10)),
        LabelledModel::new("Gradient Boosting (N=20)", ModelSpec::gradient_boosting(20)),
    ];
    c.scheme_ablation.model = LabelledModel::new("Random Forest (N=20)", ModelSpec::random_forest(20));
    c.epoch_ablation.model = c.scheme_ablation.model.clone();
    c
}

#[test]
fn baseline_grid_is_complete() {
    let t = baseline();
    assert_eq!(t.rows.len(), 24);
    assert_eq!(t.columns.len(), 4);
    assert_eq!(t.cells.len(), 96);
    for row in &t.rows {
        for col in &t.columns {
            let cell = t.cell(row, col).unwrap_or_else(|| panic!("missing {row} / {col}"));
            assert!(matches!(cell.outcome, CellOutcome::Done { .. }), "{row} / {col}");
        }
    }
    let naive = t.reference.as_ref().unwrap();
    assert_eq!(naive.row, NAIVE_LABEL);
    assert_eq!(naive.report().unwrap().monotonicity_score, 0.5);
    assert_eq!(t.plot.len(), 96 * 40);
}

#[test]
fn selected_report_is_the_median_seed() {
    for cell in &baseline().cells {
        let CellOutcome::Done { per_seed, selected } = &cell.outcome else {
            panic!("cell failed");
        };
        assert_eq!(per_seed.len(), 5);
        let mut v: Vec<f64> = per_seed.iter().map(|s| s.report.violations).collect();
        v.sort_by(f64::total_cmp);
        assert_eq!(per_seed[*selected].report.violations, v[2]);
        assert_eq!(select_median(per_seed), Some(*selected));
    }
}

#[test]
fn deterministic_rows_repeat_across_seeds() {
    let t = baseline();
    let config = ExperimentConfig::default();
    let deterministic: Vec<&LabelledModel> = config
        .baseline
        .models
        .iter()
        .filter(|m| !m.model.is_stochastic())
        .collect();
    assert_eq!(deterministic.len(), 11);
    for m in deterministic {
        let row = m.label.as_str();
        for col in &t.columns {
            let CellOutcome::Done { per_seed, .. } = &t.cell(row, col).unwrap().outcome else {
                panic!("{row} failed");
            };
            assert!(per_seed.iter().all(|s| s.report == per_seed[0].report), "{row} / {col}");
        }
    }
}

#[test]
fn acceleration_follows_the_column() {
    let t = baseline();
    let expected = [1.0, 1.0 - 3.0 / 90.0, 1.0 - 6.0 / 90.0, 1.0 - 9.0 / 90.0];
    for (col, acc) in t.columns.iter().zip(expected) {
        let cell = t.cell("1-NN", col).unwrap();
        assert!((cell.acceleration.unwrap() - acc).abs() < 1e-12);
        assert!((cell.report().unwrap().acceleration - acc).abs() < 1e-12);
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let config = small_config();
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let formats = [ReportFormat::Csv, ReportFormat::Text, ReportFormat::Plot];
    for dir in [&dir_a, &dir_b] {
        let d = PreparedData::new(synthetic_dataset(&ConstraintSpec::naap440(), &SyntheticOptions::default()).unwrap())
            .unwrap();
        emit_reports(&run_baseline(&config, &d).unwrap(), &formats, dir.path()).unwrap();
        emit_reports(&run_scheme_ablation(&config, &d).unwrap(), &formats, dir.path()).unwrap();
    }
    for name in [
        "baseline.csv",
        "baseline.txt",
        "baseline_plot.csv",
        "scheme_ablation.csv",
    ] {
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn csv_report_round_trips() {
    let t = run_baseline(&small_config(), data()).unwrap();
    let text = t.to_csv().unwrap();
    let back = ReportTable::from_csv(&text).unwrap();
    assert_eq!(back.to_csv().unwrap(), text);
    assert_eq!(back.cells.len(), t.cells.len());
}

#[test]
fn epoch_ablation_leaves_the_featureless_cell_empty() {
    let config = small_config();
    let t = run_epoch_ablation(&config, data()).unwrap();
    assert_eq!(t.rows.len(), 7);
    assert_eq!(t.columns.len(), 3);
    let empty = t.cell("0 epochs", "0 scheme features").unwrap();
    assert!(matches!(empty.outcome, CellOutcome::Empty));
    assert_eq!(t.failed_cells(), 0);
    let filled = t
        .cells
        .iter()
        .filter(|c| matches!(c.outcome, CellOutcome::Done { .. }))
        .count();
    assert_eq!(filled, 20);
    assert!(t.render_text().contains("0 epochs"));
}

#[test]
fn matching_cells_agree_between_ablations() {
    let config = small_config();
    let scheme = run_scheme_ablation(&config, data()).unwrap();
    let epochs = run_epoch_ablation(&config, data()).unwrap();
    let a = scheme.cell("LogNumParams & NumStages", &scheme.columns[0]).unwrap();
    let b = epochs.cell("0 epochs", "2 scheme features").unwrap();
    assert_eq!(a.outcome, b.outcome);
    let all = scheme.cell("All", &scheme.columns[0]).unwrap();
    let six = epochs.cell("0 epochs", "6 scheme features").unwrap();
    assert_eq!(all.outcome, six.outcome);
}

#[test]
fn log_check_is_neutral_when_params_are_constant() {
    let d = &data().dataset;
    let records: Vec<ArchitectureRecord> = d
        .records
        .iter()
        .map(|r| {
            let mut f = *r.features();
            f.num_params = 12_345;
            f.log_num_params = 12_345f64.ln();
            ArchitectureRecord::new(r.id(), f, r.epochs().to_vec()).unwrap()
        })
        .collect();
    let flat = PreparedData::new(Dataset {
        records,
        accuracy_was_percent: false,
    })
    .unwrap();
    let t = run_log_feature_check(&ExperimentConfig::default(), &flat).unwrap();
    let raw = t.cell(&t.rows[0], &t.columns[0]).unwrap().report().unwrap();
    let log = t.cell(&t.rows[1], &t.columns[0]).unwrap().report().unwrap();
    assert_eq!(raw, log);
}

#[test]
fn failed_cells_are_recorded_not_dropped() {
    let mut config = small_config();
    config.baseline.models.push(LabelledModel::new(
        "SVR (starved)",
        ModelSpec::Svr {
            params: SvrParams {
                epsilon: 0.0,
                max_iter: 1,
                ..SvrParams::default()
            },
        },
    ));
    let t = run_baseline(&config, data()).unwrap();
    assert_eq!(t.cells.len(), 4 * 4);
    assert_eq!(t.failed_cells(), 4);
    let failed = t.cell("SVR (starved)", &t.columns[0]).unwrap();
    assert!(failed.is_failed());
    assert!(t.render_text().contains("SVR (starved)"));
    let csv = t.to_csv().unwrap();
    assert!(csv.lines().any(|l| l.contains("SVR (starved)") && l.contains("failed")));
}

#[test]
fn single_cells_can_run_alone() {
    let task = CellTask {
        row: "custom".into(),
        column: "pair".into(),
        model: ModelSpec::knn(3),
        features: Some(FeatureSetConfig::new(SchemeSubset::Limited, 0)),
    };
    let (cell, plot) = run_cell(data(), &task, &[7, 8, 9], RunOptions::default());
    let CellOutcome::Done { per_seed, .. } = &cell.outcome else {
        panic!("cell failed");
    };
    assert_eq!(per_seed.iter().map(|s| s.seed).collect::<Vec<_>>(), vec![7, 8, 9]);
    assert_eq!(plot.len(), 40);
    let mut ranks: Vec<usize> = plot.iter().map(|p| p.true_rank).collect();
    ranks.sort_unstable();
    assert_eq!(ranks, (1..=40).collect::<Vec<_>>());
}

#[test]
fn shipped_config_round_trips() {
    let c = ExperimentConfig::default();
    let again = ExperimentConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
    assert_eq!(c, again);
    assert_eq!(c.baseline.models.len(), 24);
    assert_eq!(c.seeds, vec![1, 2, 3, 4, 5]);
    assert_eq!(c.scheme_ablation.subsets.len(), 8);
}
