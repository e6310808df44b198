//! Design matrices from scheme features and leading-epoch metrics, and the
//! train-fitted standardisation applied to them.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{ArchitectureRecord, Split};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Scheme columns, declared in their fixed column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeFeature {
    Depth,
    NumStages,
    FirstLayerWidth,
    LastLayerWidth,
    LogNumParams,
    NumMacs,
    /// Raw parameter count; not part of the full set.
    NumParams,
}

impl SchemeFeature {
    /// The six columns of the full set.
    pub const FULL: [SchemeFeature; 6] = [
        SchemeFeature::Depth,
        SchemeFeature::NumStages,
        SchemeFeature::FirstLayerWidth,
        SchemeFeature::LastLayerWidth,
        SchemeFeature::LogNumParams,
        SchemeFeature::NumMacs,
    ];

    pub const LIMITED: [SchemeFeature; 2] = [SchemeFeature::NumStages, SchemeFeature::LogNumParams];

    pub fn name(self) -> &'static str {
        match self {
            SchemeFeature::Depth => "depth",
            SchemeFeature::NumStages => "num_stages",
            SchemeFeature::FirstLayerWidth => "first_layer_width",
            SchemeFeature::LastLayerWidth => "last_layer_width",
            SchemeFeature::LogNumParams => "log_num_params",
            SchemeFeature::NumMacs => "num_macs",
            SchemeFeature::NumParams => "num_params",
        }
    }

    fn value(self, r: &ArchitectureRecord) -> f64 {
        let f = r.features();
        match self {
            SchemeFeature::Depth => f64::from(f.depth),
            SchemeFeature::NumStages => f64::from(f.num_stages),
            SchemeFeature::FirstLayerWidth => f64::from(f.first_layer_width),
            SchemeFeature::LastLayerWidth => f64::from(f.last_layer_width),
            SchemeFeature::LogNumParams => f.log_num_params,
            SchemeFeature::NumMacs => f.num_macs as f64,
            SchemeFeature::NumParams => f.num_params as f64,
        }
    }
}

impl FromStr for SchemeFeature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let all = SchemeFeature::FULL.into_iter().chain([SchemeFeature::NumParams]);
        for f in all {
            if f.name() == s {
                return Ok(f);
            }
        }
        Err(Error::config("features", format!("unknown scheme feature `{s}`")))
    }
}

impl fmt::Display for SchemeFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SchemeSubset {
    /// `log_num_params` and `num_stages`.
    Limited,
    /// All six published scheme columns.
    Full,
    /// Any subset; column order is still the fixed canonical order.
    Custom(Vec<SchemeFeature>),
}

impl SchemeSubset {
    pub fn none() -> Self {
        SchemeSubset::Custom(Vec::new())
    }

    pub fn leave_one_out(excluded: SchemeFeature) -> Self {
        SchemeSubset::Custom(SchemeFeature::FULL.into_iter().filter(|&f| f != excluded).collect())
    }

    /// Features in column order, deduplicated.
    pub fn columns(&self) -> Vec<SchemeFeature> {
        let mut v = match self {
            SchemeSubset::Limited => SchemeFeature::LIMITED.to_vec(),
            SchemeSubset::Full => SchemeFeature::FULL.to_vec(),
            SchemeSubset::Custom(list) => list.clone(),
        };
        v.sort_unstable();
        v.dedup();
        v
    }
}

impl FromStr for SchemeSubset {
    type Err = Error;

    /// `limited`, `full`, `none`, `leave-one-out:<feature>` or
    /// `custom:<feature>,<feature>,...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "limited" => return Ok(SchemeSubset::Limited),
            "full" => return Ok(SchemeSubset::Full),
            "none" => return Ok(SchemeSubset::none()),
            _ => {}
        }
        if let Some(name) = s.strip_prefix("leave-one-out:") {
            return Ok(SchemeSubset::leave_one_out(name.trim().parse()?));
        }
        if let Some(list) = s.strip_prefix("custom:") {
            let features = list
                .split(',')
                .map(str::trim)
                .filter(|n| !n.is_empty())
                .map(str::parse)
                .collect::<Result<Vec<_>>>()?;
            return Ok(SchemeSubset::Custom(features));
        }
        Err(Error::config("scheme_features", format!("unknown preset `{s}`")))
    }
}

impl fmt::Display for SchemeSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeSubset::Limited => f.write_str("limited"),
            SchemeSubset::Full => f.write_str("full"),
            SchemeSubset::Custom(list) if list.is_empty() => f.write_str("none"),
            SchemeSubset::Custom(_) => {
                let names: Vec<_> = self.columns().iter().map(|c| c.name()).collect();
                write!(f, "custom:{}", names.join(","))
            }
        }
    }
}

impl Serialize for SchemeSubset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SchemeSubset {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureSetConfig {
    pub scheme: SchemeSubset,
    /// Leading epochs whose three metrics are appended.
    pub num_epochs: usize,
}

impl FeatureSetConfig {
    pub fn new(scheme: SchemeSubset, num_epochs: usize) -> Self {
        Self { scheme, num_epochs }
    }

    pub fn dimension(&self) -> usize {
        self.scheme.columns().len() + 3 * self.num_epochs
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.scheme.columns().iter().map(|c| c.name().to_string()).collect();
        for e in 1..=self.num_epochs {
            names.push(format!("test_acc_{e}"));
            names.push(format!("train_loss_mean_{e}"));
            names.push(format!("train_loss_median_{e}"));
        }
        names
    }

    pub fn label(&self) -> String {
        format!("{}+{}ep", self.scheme, self.num_epochs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrices<T> {
    pub train_x: Matrix<T>,
    pub train_y: Vec<T>,
    pub test_x: Matrix<T>,
    pub test_y: Vec<T>,
    pub columns: Vec<String>,
}

fn feature_row(r: &ArchitectureRecord, scheme: &[SchemeFeature], num_epochs: usize) -> Vec<f64> {
    let mut row: Vec<f64> = scheme.iter().map(|f| f.value(r)).collect();
    for m in &r.epochs()[..num_epochs] {
        row.extend([m.test_accuracy, m.mean_train_loss, m.median_train_loss]);
    }
    row
}

/// Rows follow the split's id lists; columns are scheme features first, then
/// (accuracy, mean loss, median loss) for epochs 1..=k.
pub fn assemble_features<T: Scalar>(
    records: &[ArchitectureRecord],
    split: &Split,
    config: &FeatureSetConfig,
) -> Result<DesignMatrices<T>> {
    let available = records.iter().map(|r| r.epochs().len()).min().unwrap_or(0);
    if config.num_epochs > available {
        return Err(Error::config(
            "num_epochs",
            format!("{} epochs requested, records hold {available}", config.num_epochs),
        ));
    }
    if config.dimension() == 0 {
        return Err(Error::config("features", "feature set is empty"));
    }
    let by_id: HashMap<usize, &ArchitectureRecord> = records.iter().map(|r| (r.id(), r)).collect();
    let scheme = config.scheme.columns();
    let build = |ids: &[usize]| -> Result<(Matrix<T>, Vec<T>)> {
        let mut rows = Vec::with_capacity(ids.len());
        let mut y = Vec::with_capacity(ids.len());
        for id in ids {
            let r = by_id
                .get(id)
                .ok_or_else(|| Error::data(format!("split references unknown id {id}")))?;
            rows.push(
                feature_row(r, &scheme, config.num_epochs)
                    .into_iter()
                    .map(T::of)
                    .collect(),
            );
            y.push(T::of(r.target()));
        }
        let m = if rows.is_empty() {
            Matrix::zeros(0, config.dimension())
        } else {
            Matrix::from_rows(&rows)?
        };
        Ok((m, y))
    };
    let (train_x, train_y) = build(&split.train_ids)?;
    let (test_x, test_y) = build(&split.test_ids)?;
    Ok(DesignMatrices {
        train_x,
        train_y,
        test_x,
        test_y,
        columns: config.column_names(),
    })
}

/// Per-column z-score: `(x - shift) / scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer<T> {
    shift: Vec<T>,
    scale: Vec<T>,
}

impl<T: Scalar> Normalizer<T> {
    pub fn identity(dim: usize) -> Self {
        Self {
            shift: vec![T::zero(); dim],
            scale: vec![T::one(); dim],
        }
    }

    pub fn from_parts(shift: Vec<T>, scale: Vec<T>) -> Result<Self> {
        if shift.len() != scale.len() {
            return Err(Error::DimensionMismatch {
                expected: shift.len(),
                found: scale.len(),
            });
        }
        if scale.iter().any(|s| !(*s > T::zero())) {
            return Err(Error::InvalidInput("normalizer scales must be positive".into()));
        }
        Ok(Self { shift, scale })
    }

    /// Column mean and population standard deviation; constant columns get
    /// scale 1.
    pub fn fit(x: &Matrix<T>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::InvalidInput("cannot fit a normalizer on zero rows".into()));
        }
        let n = T::from_usize_lossy(x.nrows());
        let mut shift = Vec::with_capacity(x.ncols());
        let mut scale = Vec::with_capacity(x.ncols());
        for c in 0..x.ncols() {
            let col = x.column(c);
            let mean = col.iter().copied().sum::<T>() / n;
            let var = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
            let sd = var.sqrt();
            shift.push(mean);
            scale.push(if sd > T::zero() { sd } else { T::one() });
        }
        Ok(Self { shift, scale })
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn shift(&self) -> &[T] {
        &self.shift
    }

    pub fn scale(&self) -> &[T] {
        &self.scale
    }

    pub fn apply(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        self.check(x)?;
        let mut out = x.clone();
        for r in 0..out.nrows() {
            for ((v, &s), &k) in out.row_mut(r).iter_mut().zip(&self.shift).zip(&self.scale) {
                *v = (*v - s) / k;
            }
        }
        Ok(out)
    }

    pub fn invert(&self, z: &Matrix<T>) -> Result<Matrix<T>> {
        self.check(z)?;
        let mut out = z.clone();
        for r in 0..out.nrows() {
            for ((v, &s), &k) in out.row_mut(r).iter_mut().zip(&self.shift).zip(&self.scale) {
                *v = *v * k + s;
            }
        }
        Ok(out)
    }

    fn check(&self, x: &Matrix<T>) -> Result<()> {
        if x.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.ncols(),
            });
        }
        Ok(())
    }
}

pub fn fit_normalizer<T: Scalar>(x: &Matrix<T>) -> Result<Normalizer<T>> {
    Normalizer::fit(x)
}

pub fn apply_normalizer<T: Scalar>(normalizer: &Normalizer<T>, x: &Matrix<T>) -> Result<Matrix<T>> {
    normalizer.apply(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_dimensions() {
        assert_eq!(FeatureSetConfig::new(SchemeSubset::Full, 9).dimension(), 33);
        assert_eq!(FeatureSetConfig::new(SchemeSubset::Limited, 0).dimension(), 2);
        let depth_only = SchemeSubset::Custom(vec![SchemeFeature::Depth]);
        assert_eq!(FeatureSetConfig::new(depth_only, 1).dimension(), 4);
        for f in SchemeFeature::FULL {
            assert_eq!(SchemeSubset::leave_one_out(f).columns().len(), 5);
        }
    }

    #[test]
    fn presets_parse_and_print() {
        for text in [
            "limited",
            "full",
            "none",
            "leave-one-out:num_macs",
            "custom:depth,num_params",
        ] {
            let s: SchemeSubset = text.parse().unwrap();
            let again: SchemeSubset = s.to_string().parse().unwrap();
            assert_eq!(s.columns(), again.columns());
        }
        assert!("leave-one-out:bogus".parse::<SchemeSubset>().is_err());
        assert!("everything".parse::<SchemeSubset>().is_err());
    }

    #[test]
    fn constant_and_two_point_columns() {
        let x = Matrix::from_rows(&[vec![5.0, 0.0], vec![5.0, 2.0]]).unwrap();
        let n = Normalizer::fit(&x).unwrap();
        assert_eq!(n.shift(), &[5.0, 1.0]);
        assert_eq!(n.scale(), &[1.0, 1.0]);
    }

    #[test]
    fn identity_normalizer_and_shift_point() {
        let x = Matrix::from_rows(&[vec![1.5, -2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(Normalizer::identity(2).apply(&x).unwrap(), x);
        let n = Normalizer::fit(&x).unwrap();
        let at_shift = Matrix::from_rows(&[n.shift().to_vec()]).unwrap();
        assert!(n.apply(&at_shift).unwrap().as_slice().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let n = Normalizer::<f64>::identity(3);
        let x = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert!(matches!(
            n.apply(&x),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn works_in_single_precision() {
        let x = Matrix::<f32>::from_rows(&[vec![1.0], vec![3.0]]).unwrap();
        let z = Normalizer::fit(&x).unwrap().apply(&x).unwrap();
        assert_eq!(z.as_slice(), &[-1.0f32, 1.0]);
    }
}
