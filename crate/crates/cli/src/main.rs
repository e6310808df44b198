use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use naap_core::calibration::check_space;
use naap_core::dataset::{load_dataset, save_dataset, ColumnMapping};
use naap_core::experiment::{
    naive_table, run_baseline, run_epoch_ablation, run_log_feature_check, run_scheme_ablation, ExperimentConfig,
    PreparedData, ReportFormat,
};
use naap_core::manifest::export_training_manifest;
use naap_core::report::{emit_reports, ReportTable};
use naap_core::space::{enumerate_schemes, ConstraintSpec};
use naap_core::synthetic::{synthetic_dataset, SyntheticOptions};
use naap_core::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "naap",
    version,
    about = "Accuracy-prediction experiments over a small CNN search space"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Configuration file. Search-space TOML for `enumerate`, `check-space`
    /// and `synth`; experiment TOML otherwise. Defaults to the shipped file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Training-curve table (CSV).
    #[arg(long, value_name = "FILE")]
    dataset: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "results")]
    out: PathBuf,
    /// Comma-separated seeds, overriding the configuration.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Comma-separated report formats: csv, text, plot.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    formats: Option<Vec<String>>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate the search space; writes schemes.csv and manifest.json.
    Enumerate(Common),
    /// Match the search space against the dataset's scheme columns under
    /// every parameter-accounting option.
    CheckSpace {
        #[command(flatten)]
        common: Common,
        /// Experiment TOML supplying the dataset column names.
        #[arg(long, value_name = "FILE")]
        experiment: Option<PathBuf>,
    },
    /// Compute the 40-bin train/test split; writes split.json.
    Split(Common),
    /// Mean-of-train reference on the test split.
    Naive(Common),
    /// All baseline regressors at every epoch count.
    Baseline(Common),
    /// Scheme-feature leave-one-out ablation.
    AblateScheme(Common),
    /// Scheme subsets against epoch counts.
    AblateEpochs(Common),
    /// Raw against log parameter count with linear regression.
    LogCheck(Common),
    /// Write a synthetic training-curve table for the search space.
    Synth(Common),
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config { .. } => EXIT_CONFIG,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn config_failure(e: Error) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: e.to_string(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> CliResult<u8> {
    match command {
        Command::Enumerate(c) => enumerate(&c),
        Command::CheckSpace { common, experiment } => check(&common, experiment.as_deref()),
        Command::Split(c) => split(&c),
        Command::Synth(c) => synth(&c),
        Command::Naive(c) => grid(&c, |cfg, data| naive_table(data, &cfg.seeds)),
        Command::Baseline(c) => grid(&c, run_baseline),
        Command::AblateScheme(c) => grid(&c, run_scheme_ablation),
        Command::AblateEpochs(c) => grid(&c, run_epoch_ablation),
        Command::LogCheck(c) => grid(&c, run_log_feature_check),
    }
}

fn load_space(c: &Common) -> CliResult<ConstraintSpec> {
    let spec = match &c.config {
        Some(p) => ConstraintSpec::from_file(p).map_err(config_failure)?,
        None => ConstraintSpec::naap440(),
    };
    spec.validate().map_err(config_failure)?;
    Ok(spec)
}

fn load_config(path: Option<&Path>) -> CliResult<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::from_file(p).map_err(config_failure),
        None => Ok(ExperimentConfig::default()),
    }
}

/// The experiment configuration with command-line overrides applied.
fn experiment_config(c: &Common) -> CliResult<ExperimentConfig> {
    let mut config = load_config(c.config.as_deref())?;
    if let Some(seeds) = &c.seeds {
        config.seeds = seeds.clone();
    }
    if let Some(formats) = &c.formats {
        config.formats = formats
            .iter()
            .map(|f| f.parse::<ReportFormat>())
            .collect::<Result<_, _>>()
            .map_err(config_failure)?;
    }
    config.validate().map_err(config_failure)?;
    Ok(config)
}

fn dataset_path(c: &Common) -> CliResult<&Path> {
    c.dataset.as_deref().ok_or(Failure {
        code: EXIT_CONFIG,
        message: "--dataset is required for this command".into(),
    })
}

fn load(c: &Common, columns: &ColumnMapping) -> CliResult<PreparedData> {
    let dataset = load_dataset(dataset_path(c)?, columns)?;
    if dataset.accuracy_was_percent {
        eprintln!("note: accuracy columns read as percentages and divided by 100");
    }
    Ok(PreparedData::new(dataset)?)
}

fn create_out(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| {
        Failure::from(Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })
    })
}

fn enumerate(c: &Common) -> CliResult<u8> {
    let spec = load_space(c)?;
    let schemes = enumerate_schemes(&spec)?;
    create_out(&c.out)?;
    let mut table = String::from("id,scheme,depth,num_stages,first_layer_width,last_layer_width,num_params,num_macs\n");
    for (id, s) in schemes.iter().enumerate() {
        let f = spec.cost.features(s);
        table.push_str(&format!(
            "{id},{s},{},{},{},{},{},{}\n",
            f.depth, f.num_stages, f.first_layer_width, f.last_layer_width, f.num_params, f.num_macs
        ));
    }
    let table_path = c.out.join("schemes.csv");
    std::fs::write(&table_path, table).map_err(|e| {
        Failure::from(Error::Io {
            path: table_path.clone(),
            source: e,
        })
    })?;
    export_training_manifest(&schemes, &spec.cost, c.out.join("manifest.json"))?;
    println!("{} schemes written to {}", schemes.len(), c.out.display());
    Ok(0)
}

fn check(c: &Common, experiment: Option<&Path>) -> CliResult<u8> {
    let spec = load_space(c)?;
    let columns = load_config(experiment)?.columns;
    let dataset = load_dataset(dataset_path(c)?, &columns)?;
    let report = check_space(&spec, &dataset.records)?;
    println!("schemes: {}  records: {}", report.scheme_count, report.record_count);
    println!("batch_norm  head  head_bias  structural  exact");
    for f in &report.fits {
        let a = f.accounting;
        println!(
            "{:<10}  {:<4}  {:<9}  {:>10}  {:>5}",
            a.batch_norm, a.classifier_head, a.head_bias, f.structural_rows, f.matched_rows
        );
    }
    if report.exact() {
        println!("space matches the dataset exactly");
        Ok(0)
    } else {
        println!("space does not match the dataset");
        Ok(EXIT_DATA)
    }
}

fn split(c: &Common) -> CliResult<u8> {
    let config = load_config(c.config.as_deref())?;
    let data = load(c, &config.columns)?;
    create_out(&c.out)?;
    let path = c.out.join("split.json");
    data.split.write(&path)?;
    println!(
        "train {} / test {} written to {}; {} tied target pairs",
        data.split.train_ids.len(),
        data.split.test_ids.len(),
        path.display(),
        data.dataset.target_ties()
    );
    Ok(0)
}

fn synth(c: &Common) -> CliResult<u8> {
    let spec = load_space(c)?;
    let seed = c.seeds.as_ref().and_then(|s| s.first().copied()).unwrap_or(0);
    let dataset = synthetic_dataset(
        &spec,
        &SyntheticOptions {
            seed,
            ..SyntheticOptions::default()
        },
    )?;
    create_out(&c.out)?;
    let path = c.out.join("synthetic.csv");
    let mapping = ColumnMapping {
        id: Some("id".into()),
        ..ColumnMapping::default()
    };
    save_dataset(&path, &dataset.records, &mapping)?;
    println!(
        "{} synthetic records written to {}",
        dataset.records.len(),
        path.display()
    );
    Ok(0)
}

fn grid(
    c: &Common,
    runner: impl Fn(&ExperimentConfig, &PreparedData) -> naap_core::Result<ReportTable>,
) -> CliResult<u8> {
    let config = experiment_config(c)?;
    let data = load(c, &config.columns)?;
    let table = runner(&config, &data)?;
    emit_reports(&table, &config.formats, &c.out)?;
    print!("{}", table.render_text());
    let failed = table.failed_cells();
    if failed > 0 {
        eprintln!("{failed} cell(s) failed; see the report for details");
        return Ok(EXIT_PARTIAL);
    }
    Ok(0)
}
