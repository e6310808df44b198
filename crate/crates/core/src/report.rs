//! Result tables and their three output forms: comma-separated rows (one per
//! seed report, parseable back into the table), aligned text, and per-cell
//! plot data.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::ReportFormat;
use crate::metrics::EvalReport;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: u64,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    /// `selected` indexes the median-violation report in `per_seed`.
    Done {
        per_seed: Vec<SeedReport>,
        selected: usize,
    },
    Failed(String),
    /// No features; left blank on purpose.
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub row: String,
    pub column: String,
    pub acceleration: Option<f64>,
    pub outcome: CellOutcome,
}

impl CellResult {
    pub fn selected(&self) -> Option<&SeedReport> {
        match &self.outcome {
            CellOutcome::Done { per_seed, selected } => per_seed.get(*selected),
            _ => None,
        }
    }

    pub fn report(&self) -> Option<&EvalReport> {
        self.selected().map(|s| &s.report)
    }

    pub fn is_failed(&self) -> bool {
        matches!(self.outcome, CellOutcome::Failed(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub cell: String,
    pub id: usize,
    pub true_accuracy: f64,
    pub predicted_accuracy: f64,
    pub true_rank: usize,
    pub predicted_rank: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableKind {
    /// Rows × columns of "MAE / score / violations".
    Grid,
    /// Rows × columns of violation counts.
    ViolationsGrid,
    /// One cell per row, shown as MAE, score and violations columns.
    Metrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub name: String,
    pub kind: TableKind,
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    /// Shown above the grid; not counted among `cells`.
    pub reference: Option<CellResult>,
    /// Row-major.
    pub cells: Vec<CellResult>,
    pub plot: Vec<PlotRow>,
}

impl ReportTable {
    pub fn cell(&self, row: &str, column: &str) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.row == row && c.column == column)
    }

    pub fn failed_cells(&self) -> usize {
        self.cells
            .iter()
            .chain(&self.reference)
            .filter(|c| c.is_failed())
            .count()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let mut emit = |role: Role, cell: &CellResult| -> Result<()> {
            for row in csv_rows(&self.name, self.kind, role, cell) {
                wtr.serialize(row).map_err(|e| Error::Serialization(e.to_string()))?;
            }
            Ok(())
        };
        if let Some(r) = &self.reference {
            emit(Role::Reference, r)?;
        }
        for c in &self.cells {
            emit(Role::Cell, c)?;
        }
        let bytes = wtr.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// Rebuilds a table from [`to_csv`](Self::to_csv) output. Plot data is
    /// not part of this format.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let mut parsed: Vec<CsvRow> = Vec::new();
        for row in rdr.deserialize() {
            parsed.push(row.map_err(|e| Error::Serialization(e.to_string()))?);
        }
        let first = parsed
            .first()
            .ok_or_else(|| Error::Serialization("report has no rows".into()))?;
        let mut table = ReportTable {
            name: first.table.clone(),
            kind: first.kind,
            rows: Vec::new(),
            columns: Vec::new(),
            reference: None,
            cells: Vec::new(),
            plot: Vec::new(),
        };
        let mut i = 0;
        while i < parsed.len() {
            let head = &parsed[i];
            let mut j = i + 1;
            while j < parsed.len()
                && parsed[j].role == head.role
                && parsed[j].row == head.row
                && parsed[j].column == head.column
                && parsed[j].status == Status::Ok
                && head.status == Status::Ok
            {
                j += 1;
            }
            let cell = cell_from_rows(&parsed[i..j])?;
            match head.role {
                Role::Reference => table.reference = Some(cell),
                Role::Cell => {
                    if !table.rows.contains(&cell.row) {
                        table.rows.push(cell.row.clone());
                    }
                    if !table.columns.contains(&cell.column) {
                        table.columns.push(cell.column.clone());
                    }
                    table.cells.push(cell);
                }
            }
            i = j;
        }
        Ok(table)
    }

    pub fn plot_csv(&self) -> Result<String> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        for p in &self.plot {
            wtr.serialize(p).map_err(|e| Error::Serialization(e.to_string()))?;
        }
        let bytes = wtr.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn render_text(&self) -> String {
        let grid = match self.kind {
            TableKind::Grid | TableKind::ViolationsGrid => self.grid_lines(),
            TableKind::Metrics => self.metric_lines(),
        };
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.name);
        out.push_str(&align(&grid));
        out
    }

    fn grid_lines(&self) -> Vec<Line> {
        let corner = match self.kind {
            TableKind::ViolationsGrid => "Training length",
            _ => "Algorithm",
        };
        let mut lines = vec![Line::Cells(
            std::iter::once(corner.to_string())
                .chain(self.columns.iter().cloned())
                .collect(),
        )];
        lines.push(Line::Rule);
        if let Some(r) = &self.reference {
            let text = self.cell_text(r);
            lines.push(Line::Cells(
                std::iter::once(r.row.clone())
                    .chain(self.columns.iter().map(|_| text.clone()))
                    .collect(),
            ));
            lines.push(Line::Rule);
        }
        for row in &self.rows {
            let mut cells = vec![row.clone()];
            for col in &self.columns {
                cells.push(
                    self.cell(row, col)
                        .map_or_else(|| "-".to_string(), |c| self.cell_text(c)),
                );
            }
            lines.push(Line::Cells(cells));
        }
        lines
    }

    fn metric_lines(&self) -> Vec<Line> {
        let header = ["Feature set", "Accel.", "MAE", "Score", "#Violations"];
        let mut lines = vec![Line::Cells(header.iter().map(|s| s.to_string()).collect()), Line::Rule];
        for c in self.reference.iter().chain(&self.cells) {
            let accel = c.acceleration.map_or("-".to_string(), |a| format!("{:.1}%", a * 100.0));
            let cells = match (&c.outcome, c.report()) {
                (_, Some(r)) => vec![
                    c.row.clone(),
                    accel,
                    format!("{:.4}", r.mae),
                    format!("{:.3}", r.monotonicity_score),
                    format_violations(r.violations),
                ],
                (CellOutcome::Failed(msg), None) => vec![
                    c.row.clone(),
                    accel,
                    format!("error: {msg}"),
                    String::new(),
                    String::new(),
                ],
                _ => vec![c.row.clone(), accel, "-".into(), "-".into(), "-".into()],
            };
            lines.push(Line::Cells(cells));
        }
        lines
    }

    fn cell_text(&self, c: &CellResult) -> String {
        match (&c.outcome, c.report()) {
            (_, Some(r)) if self.kind == TableKind::ViolationsGrid => format_violations(r.violations),
            (_, Some(r)) => format!(
                "{:.3} / {:.3} / {}",
                r.mae,
                r.monotonicity_score,
                format_violations(r.violations)
            ),
            (CellOutcome::Failed(_), None) => "error".into(),
            _ => "-".into(),
        }
    }
}

/// Integral counts print without decimals.
pub fn format_violations(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v}")
    }
}

enum Line {
    Cells(Vec<String>),
    Rule,
}

fn align(lines: &[Line]) -> String {
    let mut widths: Vec<usize> = Vec::new();
    for line in lines {
        if let Line::Cells(cells) = line {
            for (i, c) in cells.iter().enumerate() {
                let w = c.chars().count();
                if i >= widths.len() {
                    widths.push(w);
                } else {
                    widths[i] = widths[i].max(w);
                }
            }
        }
    }
    let total = widths.iter().sum::<usize>() + 3 * widths.len().saturating_sub(1);
    let mut out = String::new();
    for line in lines {
        match line {
            Line::Rule => {
                out.push_str(&"-".repeat(total));
            }
            Line::Cells(cells) => {
                let parts: Vec<String> = cells
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        if i == 0 {
                            format!("{c:<w$}", w = widths[i])
                        } else {
                            format!("{c:>w$}", w = widths[i])
                        }
                    })
                    .collect();
                out.push_str(parts.join(" | ").trim_end());
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Role {
    Reference,
    Cell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Status {
    Ok,
    Failed,
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CsvRow {
    table: String,
    kind: TableKind,
    role: Role,
    row: String,
    column: String,
    status: Status,
    acceleration: Option<f64>,
    seed: Option<u64>,
    selected: Option<bool>,
    mae: Option<f64>,
    monotonicity_score: Option<f64>,
    violations: Option<f64>,
    n: Option<usize>,
    true_tie_pairs: Option<usize>,
    error: Option<String>,
}

fn csv_rows(table: &str, kind: TableKind, role: Role, cell: &CellResult) -> Vec<CsvRow> {
    let base = |status| CsvRow {
        table: table.to_string(),
        kind,
        role,
        row: cell.row.clone(),
        column: cell.column.clone(),
        status,
        acceleration: cell.acceleration,
        seed: None,
        selected: None,
        mae: None,
        monotonicity_score: None,
        violations: None,
        n: None,
        true_tie_pairs: None,
        error: None,
    };
    match &cell.outcome {
        CellOutcome::Done { per_seed, selected } => per_seed
            .iter()
            .enumerate()
            .map(|(i, s)| CsvRow {
                seed: Some(s.seed),
                selected: Some(i == *selected),
                mae: Some(s.report.mae),
                monotonicity_score: Some(s.report.monotonicity_score),
                violations: Some(s.report.violations),
                n: Some(s.report.n),
                true_tie_pairs: Some(s.report.true_tie_pairs),
                ..base(Status::Ok)
            })
            .collect(),
        CellOutcome::Failed(msg) => vec![CsvRow {
            error: Some(msg.clone()),
            ..base(Status::Failed)
        }],
        CellOutcome::Empty => vec![base(Status::Empty)],
    }
}

fn cell_from_rows(rows: &[CsvRow]) -> Result<CellResult> {
    let head = &rows[0];
    let missing = |what: &str| Error::Serialization(format!("row `{}` / `{}` lacks {what}", head.row, head.column));
    let outcome = match head.status {
        Status::Failed => CellOutcome::Failed(head.error.clone().unwrap_or_default()),
        Status::Empty => CellOutcome::Empty,
        Status::Ok => {
            let mut per_seed = Vec::with_capacity(rows.len());
            let mut selected = None;
            for (i, r) in rows.iter().enumerate() {
                if r.selected == Some(true) {
                    selected = Some(i);
                }
                per_seed.push(SeedReport {
                    seed: r.seed.ok_or_else(|| missing("seed"))?,
                    report: EvalReport {
                        mae: r.mae.ok_or_else(|| missing("mae"))?,
                        violations: r.violations.ok_or_else(|| missing("violations"))?,
                        monotonicity_score: r.monotonicity_score.ok_or_else(|| missing("monotonicity_score"))?,
                        n: r.n.ok_or_else(|| missing("n"))?,
                        acceleration: r.acceleration.ok_or_else(|| missing("acceleration"))?,
                        true_tie_pairs: r.true_tie_pairs.ok_or_else(|| missing("true_tie_pairs"))?,
                    },
                });
            }
            CellOutcome::Done {
                per_seed,
                selected: selected.ok_or_else(|| missing("a selected seed"))?,
            }
        }
    };
    Ok(CellResult {
        row: head.row.clone(),
        column: head.column.clone(),
        acceleration: head.acceleration,
        outcome,
    })
}

/// Writes `<name>.csv`, `<name>.txt` and `<name>_plot.csv` under
/// `destination` as selected by `formats`. Returns the written paths.
pub fn emit_reports(
    table: &ReportTable,
    formats: &[ReportFormat],
    destination: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    let dir = destination.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for format in formats {
        let (file, body) = match format {
            ReportFormat::Csv => (format!("{}.csv", table.name), table.to_csv()?),
            ReportFormat::Text => (format!("{}.txt", table.name), table.render_text()),
            ReportFormat::Plot => {
                if table.plot.is_empty() {
                    continue;
                }
                (format!("{}_plot.csv", table.name), table.plot_csv()?)
            }
        };
        let path = dir.join(file);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
