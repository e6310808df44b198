//! Loading the per-architecture training table, deriving the regression
//! target and the binned train/test split.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cost::SchemeFeatures;
use crate::error::{Error, Result};

pub const NUM_EPOCHS: usize = 90;
pub const NUM_RECORDS: usize = 440;
pub const NUM_BINS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    /// Fraction in [0, 1].
    pub test_accuracy: f64,
    pub mean_train_loss: f64,
    pub median_train_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArchitectureRecord {
    id: usize,
    features: SchemeFeatures,
    epochs: Vec<EpochMetrics>,
    target: f64,
}

impl ArchitectureRecord {
    /// Validates metric ranges and caches the max-accuracy target. Any epoch
    /// count is accepted here; the loader enforces the expected count.
    pub fn new(id: usize, features: SchemeFeatures, epochs: Vec<EpochMetrics>) -> Result<Self> {
        if epochs.is_empty() {
            return Err(Error::data_at(id, "epochs", "no epoch metrics"));
        }
        for (e, m) in epochs.iter().enumerate() {
            if !(0.0..=1.0).contains(&m.test_accuracy) {
                return Err(Error::data_at(
                    id,
                    format!("epoch {} test accuracy", e + 1),
                    format!("{} outside [0, 1]", m.test_accuracy),
                ));
            }
            for (name, v) in [("mean", m.mean_train_loss), ("median", m.median_train_loss)] {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::data_at(
                        id,
                        format!("epoch {} {name} train loss", e + 1),
                        format!("{v} is not a finite nonnegative loss"),
                    ));
                }
            }
        }
        if features.num_params == 0 || features.num_macs == 0 {
            return Err(Error::data_at(id, "num_params/num_macs", "must be positive"));
        }
        let target = derive_target(&epochs);
        Ok(Self {
            id,
            features,
            epochs,
            target,
        })
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn features(&self) -> &SchemeFeatures {
        &self.features
    }

    pub fn epochs(&self) -> &[EpochMetrics] {
        &self.epochs
    }

    /// Highest test accuracy over all epochs.
    pub fn target(&self) -> f64 {
        self.target
    }
}

/// Max over the epochs' test accuracies.
pub fn derive_target(epochs: &[EpochMetrics]) -> f64 {
    epochs.iter().map(|m| m.test_accuracy).fold(f64::NEG_INFINITY, f64::max)
}

/// Column names in the input table. Epoch templates contain `{epoch}`,
/// substituted with `first_epoch`, `first_epoch + 1`, ...
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMapping {
    /// When unset, records are numbered by row order.
    pub id: Option<String>,
    pub depth: String,
    pub num_stages: String,
    pub first_layer_width: String,
    pub last_layer_width: String,
    pub num_params: String,
    pub num_macs: String,
    pub test_accuracy: String,
    pub mean_train_loss: String,
    pub median_train_loss: String,
    pub first_epoch: usize,
    pub num_epochs: usize,
    /// Row count the file must contain; `None` accepts any count.
    pub expected_records: Option<usize>,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            id: None,
            depth: "depth".into(),
            num_stages: "num_stages".into(),
            first_layer_width: "first_layer_width".into(),
            last_layer_width: "last_layer_width".into(),
            num_params: "num_params".into(),
            num_macs: "num_macs".into(),
            test_accuracy: "test_acc_{epoch}".into(),
            mean_train_loss: "train_loss_mean_{epoch}".into(),
            median_train_loss: "train_loss_median_{epoch}".into(),
            first_epoch: 1,
            num_epochs: NUM_EPOCHS,
            expected_records: Some(NUM_RECORDS),
        }
    }
}

impl ColumnMapping {
    fn epoch_column(template: &str, epoch: usize) -> String {
        template.replace("{epoch}", &epoch.to_string())
    }

    /// Header row matching this mapping.
    pub fn header(&self) -> Vec<String> {
        let mut h = Vec::new();
        if let Some(id) = &self.id {
            h.push(id.clone());
        }
        h.extend([
            self.depth.clone(),
            self.num_stages.clone(),
            self.first_layer_width.clone(),
            self.last_layer_width.clone(),
            self.num_params.clone(),
            self.num_macs.clone(),
        ]);
        for e in 0..self.num_epochs {
            let epoch = self.first_epoch + e;
            h.push(Self::epoch_column(&self.test_accuracy, epoch));
            h.push(Self::epoch_column(&self.mean_train_loss, epoch));
            h.push(Self::epoch_column(&self.median_train_loss, epoch));
        }
        h
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<ArchitectureRecord>,
    /// The accuracy columns were stored as percentages and have been divided by 100.
    pub accuracy_was_percent: bool,
}

impl Dataset {
    /// Number of pairs of records with exactly equal targets.
    pub fn target_ties(&self) -> usize {
        let mut counts: HashMap<u64, usize> = HashMap::new();
        for r in &self.records {
            *counts.entry(r.target().to_bits()).or_default() += 1;
        }
        counts.values().map(|&c| c * (c - 1) / 2).sum()
    }
}

struct Columns {
    index: HashMap<String, usize>,
}

impl Columns {
    fn new(headers: &csv::StringRecord) -> Result<Self> {
        let mut index = HashMap::new();
        let mut dup = HashSet::new();
        for (i, h) in headers.iter().enumerate() {
            let name = h.trim().to_string();
            if index.insert(name.clone(), i).is_some() {
                dup.insert(name);
            }
        }
        // an ambiguous column is only an error if the mapping asks for it
        for d in dup {
            index.insert(d, usize::MAX);
        }
        Ok(Self { index })
    }

    fn find(&self, name: &str) -> Result<usize> {
        match self.index.get(name) {
            None => Err(Error::Data {
                row: None,
                field: Some(name.to_string()),
                message: "required column is missing".into(),
            }),
            Some(&usize::MAX) => Err(Error::Data {
                row: None,
                field: Some(name.to_string()),
                message: "column name is ambiguous (appears more than once)".into(),
            }),
            Some(&i) => Ok(i),
        }
    }
}

fn parse_real(row: usize, field: &str, text: &str) -> Result<f64> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| Error::data_at(row, field, format!("`{text}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::data_at(row, field, "value is not finite"));
    }
    Ok(v)
}

fn parse_count(row: usize, field: &str, text: &str) -> Result<u64> {
    let t = text.trim();
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    let v = parse_real(row, field, t)?;
    if v < 0.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
        return Err(Error::data_at(
            row,
            field,
            format!("`{text}` is not a nonnegative integer"),
        ));
    }
    Ok(v as u64)
}

/// Reads the table at `path`. Accuracy columns holding any value above 1.5
/// are taken to be percentages and the whole file is rescaled.
pub fn load_dataset(path: impl AsRef<Path>, mapping: &ColumnMapping) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(file, mapping)
}

pub fn read_dataset<R: std::io::Read>(reader: R, mapping: &ColumnMapping) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::data(e.to_string()))?.clone();
    let cols = Columns::new(&headers)?;

    let id_col = mapping.id.as_deref().map(|n| cols.find(n)).transpose()?;
    let scheme_cols = [
        &mapping.depth,
        &mapping.num_stages,
        &mapping.first_layer_width,
        &mapping.last_layer_width,
        &mapping.num_params,
        &mapping.num_macs,
    ]
    .map(|n| cols.find(n).map(|i| (n.as_str(), i)))
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut epoch_cols = Vec::with_capacity(mapping.num_epochs);
    for e in 0..mapping.num_epochs {
        let epoch = mapping.first_epoch + e;
        let names = [
            ColumnMapping::epoch_column(&mapping.test_accuracy, epoch),
            ColumnMapping::epoch_column(&mapping.mean_train_loss, epoch),
            ColumnMapping::epoch_column(&mapping.median_train_loss, epoch),
        ];
        let idx = [cols.find(&names[0])?, cols.find(&names[1])?, cols.find(&names[2])?];
        epoch_cols.push((names, idx));
    }

    struct Raw {
        id: usize,
        counts: [u64; 6],
        epochs: Vec<EpochMetrics>,
    }
    let mut raws = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Data {
            row: Some(row),
            field: None,
            message: e.to_string(),
        })?;
        let cell = |i: usize| rec.get(i).unwrap_or("");
        let id = match id_col {
            Some(i) => parse_count(row, mapping.id.as_deref().unwrap_or("id"), cell(i))? as usize,
            None => row,
        };
        let mut counts = [0u64; 6];
        for (slot, (name, i)) in counts.iter_mut().zip(&scheme_cols) {
            *slot = parse_count(row, name, cell(*i))?;
        }
        let mut epochs = Vec::with_capacity(mapping.num_epochs);
        for (names, idx) in &epoch_cols {
            epochs.push(EpochMetrics {
                test_accuracy: parse_real(row, &names[0], cell(idx[0]))?,
                mean_train_loss: parse_real(row, &names[1], cell(idx[1]))?,
                median_train_loss: parse_real(row, &names[2], cell(idx[2]))?,
            });
        }
        raws.push(Raw { id, counts, epochs });
    }

    if let Some(expected) = mapping.expected_records {
        if raws.len() != expected {
            return Err(Error::data(format!(
                "expected {expected} records, found {}",
                raws.len()
            )));
        }
    }
    let mut seen = HashSet::new();
    for (row, r) in raws.iter().enumerate() {
        if !seen.insert(r.id) {
            return Err(Error::data_at(row, "id", format!("duplicate id {}", r.id)));
        }
    }

    let percent = raws.iter().flat_map(|r| r.epochs.iter()).any(|m| m.test_accuracy > 1.5);
    let mut records = Vec::with_capacity(raws.len());
    for (row, mut r) in raws.into_iter().enumerate() {
        if percent {
            for m in &mut r.epochs {
                m.test_accuracy /= 100.0;
            }
        }
        let [depth, num_stages, first, last, num_params, num_macs] = r.counts;
        let narrow =
            |v: u64, field: &str| u32::try_from(v).map_err(|_| Error::data_at(row, field, "value out of range"));
        let features = SchemeFeatures {
            depth: narrow(depth, &mapping.depth)?,
            num_stages: narrow(num_stages, &mapping.num_stages)?,
            first_layer_width: narrow(first, &mapping.first_layer_width)?,
            last_layer_width: narrow(last, &mapping.last_layer_width)?,
            num_params,
            log_num_params: (num_params as f64).ln(),
            num_macs,
        };
        let record = ArchitectureRecord::new(r.id, features, r.epochs).map_err(|e| match e {
            Error::Data { field, message, .. } => Error::Data {
                row: Some(row),
                field,
                message,
            },
            other => other,
        })?;
        records.push(record);
    }
    Ok(Dataset {
        records,
        accuracy_was_percent: percent,
    })
}

/// Writes records with the given mapping (fractions, not percentages). An
/// `id` column is written when the mapping names one.
pub fn write_dataset<W: std::io::Write>(
    writer: W,
    records: &[ArchitectureRecord],
    mapping: &ColumnMapping,
) -> Result<()> {
    let ser = |e: csv::Error| Error::Serialization(e.to_string());
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(mapping.header()).map_err(ser)?;
    for r in records {
        if r.epochs.len() != mapping.num_epochs {
            return Err(Error::data_at(r.id, "epochs", "epoch count differs from the mapping"));
        }
        let f = &r.features;
        let mut row: Vec<String> = Vec::new();
        if mapping.id.is_some() {
            row.push(r.id.to_string());
        }
        row.extend(
            [
                u64::from(f.depth),
                u64::from(f.num_stages),
                u64::from(f.first_layer_width),
                u64::from(f.last_layer_width),
                f.num_params,
                f.num_macs,
            ]
            .map(|v| v.to_string()),
        );
        for m in &r.epochs {
            row.push(m.test_accuracy.to_string());
            row.push(m.mean_train_loss.to_string());
            row.push(m.median_train_loss.to_string());
        }
        wtr.write_record(&row).map_err(ser)?;
    }
    wtr.flush().map_err(|e| Error::Serialization(e.to_string()))
}

pub fn save_dataset(path: impl AsRef<Path>, records: &[ArchitectureRecord], mapping: &ColumnMapping) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset(std::io::BufWriter::new(file), records, mapping)
}

/// Train and test ids, each listed in ascending target order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train_ids: Vec<usize>,
    pub test_ids: Vec<usize>,
}

impl Split {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Test ids present in one split but not the other, as
    /// (only in `self`, only in `other`), both sorted.
    pub fn test_set_difference(&self, other: &Split) -> (Vec<usize>, Vec<usize>) {
        let a: HashSet<_> = self.test_ids.iter().copied().collect();
        let b: HashSet<_> = other.test_ids.iter().copied().collect();
        let mut only_a: Vec<_> = a.difference(&b).copied().collect();
        let mut only_b: Vec<_> = b.difference(&a).copied().collect();
        only_a.sort_unstable();
        only_b.sort_unstable();
        (only_a, only_b)
    }
}

/// The 40-bin split of 440 records.
pub fn split_train_test(records: &[ArchitectureRecord]) -> Result<Split> {
    if records.len() != NUM_RECORDS {
        return Err(Error::data(format!(
            "expected {NUM_RECORDS} records for the 40-bin split, found {}",
            records.len()
        )));
    }
    split_into_bins(records, NUM_BINS)
}

/// Sorts by (target, id), cuts into `bins` consecutive equal-size bins and
/// sends each bin's central element to the test set.
pub fn split_into_bins(records: &[ArchitectureRecord], bins: usize) -> Result<Split> {
    if bins == 0 || !records.len().is_multiple_of(bins) {
        return Err(Error::config(
            "bins",
            format!("{} records do not divide into {bins} equal bins", records.len()),
        ));
    }
    let mut order: Vec<(f64, usize)> = records.iter().map(|r| (r.target(), r.id())).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let bin_size = records.len() / bins;
    let centre = bin_size / 2;
    let mut split = Split {
        train_ids: Vec::with_capacity(records.len() - bins),
        test_ids: Vec::with_capacity(bins),
    };
    for (pos, &(_, id)) in order.iter().enumerate() {
        if pos % bin_size == centre {
            split.test_ids.push(id);
        } else {
            split.train_ids.push(id);
        }
    }
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn features() -> SchemeFeatures {
        SchemeFeatures {
            depth: 3,
            num_stages: 2,
            first_layer_width: 16,
            last_layer_width: 32,
            num_params: 1000,
            log_num_params: 1000f64.ln(),
            num_macs: 5000,
        }
    }

    fn flat(acc: f64) -> Vec<EpochMetrics> {
        vec![
            EpochMetrics {
                test_accuracy: acc,
                mean_train_loss: 1.0,
                median_train_loss: 1.0,
            };
            NUM_EPOCHS
        ]
    }

    fn records_with_targets(targets: impl Iterator<Item = f64>) -> Vec<ArchitectureRecord> {
        targets
            .enumerate()
            .map(|(id, t)| ArchitectureRecord::new(id, features(), flat(t)).unwrap())
            .collect()
    }

    #[test]
    fn target_is_max_accuracy() {
        assert_eq!(derive_target(&flat(0.7)), 0.7);
        let mut e = flat(0.0);
        e[0].test_accuracy = 0.1;
        e[1].test_accuracy = 0.9;
        e[2].test_accuracy = 0.8;
        assert_eq!(derive_target(&e), 0.9);
    }

    #[test]
    fn record_rejects_out_of_range_metrics() {
        let mut e = flat(0.5);
        e[3].test_accuracy = 1.2;
        assert!(ArchitectureRecord::new(0, features(), e).is_err());
        let mut e = flat(0.5);
        e[3].median_train_loss = -0.1;
        assert!(ArchitectureRecord::new(0, features(), e).is_err());
    }

    #[test]
    fn split_takes_central_index_of_each_bin() {
        let records = records_with_targets((0..440).map(|i| 0.001 * i as f64));
        let split = split_train_test(&records).unwrap();
        assert_eq!(split.train_ids.len(), 400);
        assert_eq!(split.test_ids.len(), 40);
        let expected: Vec<usize> = (0..40).map(|k| 5 + 11 * k).collect();
        assert_eq!(split.test_ids, expected);
    }

    #[test]
    fn split_breaks_ties_by_id() {
        let records = records_with_targets(std::iter::repeat_n(0.5, 440));
        let split = split_train_test(&records).unwrap();
        let expected: Vec<usize> = (0..40).map(|k| 5 + 11 * k).collect();
        assert_eq!(split.test_ids, expected);
    }

    #[test]
    fn split_requires_440_records() {
        let records = records_with_targets((0..439).map(|i| i as f64 / 1000.0));
        assert!(split_train_test(&records).is_err());
        let split = split_into_bins(&records[..22], 2).unwrap();
        assert_eq!(split.test_ids, vec![5, 16]);
    }

    #[test]
    fn split_round_trips_through_json() {
        let records = records_with_targets((0..440).map(|i| ((i * 37) % 440) as f64 / 1000.0));
        let split = split_train_test(&records).unwrap();
        assert_eq!(Split::from_json(&split.to_json().unwrap()).unwrap(), split);
        assert_eq!(split.test_set_difference(&split), (vec![], vec![]));
    }
}
