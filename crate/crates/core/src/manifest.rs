//! Machine-readable training manifest: the fixed recipe plus one entry per
//! architecture, enough for an external trainer to regenerate the per-epoch
//! metrics. Written as JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cost::{CostModel, SchemeFeatures};
use crate::error::{Error, Result};
use crate::space::{LayerSpec, Scheme};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecipe {
    pub dataset: String,
    pub epochs: u32,
    /// Epochs per warm-restart cycle.
    pub cycle_epochs: u32,
    pub cycles: u32,
    pub optimizer: String,
    pub loss: String,
    pub batch_size: u32,
    pub momentum: f64,
    pub weight_decay: f64,
    pub base_learning_rate: f64,
    /// Multiplied into the learning rate after every epoch of a cycle.
    pub epoch_decay: f64,
    /// Set before weight initialisation and before building the shuffled loader.
    pub seed: u64,
    pub deterministic: bool,
    /// Every convolution is followed by these, in order.
    pub post_conv: Vec<String>,
    pub conv_bias: bool,
}

impl Default for TrainingRecipe {
    fn default() -> Self {
        Self {
            dataset: "CIFAR10".into(),
            epochs: 90,
            cycle_epochs: 3,
            cycles: 30,
            optimizer: "sgd_warm_restarts".into(),
            loss: "cross_entropy".into(),
            batch_size: 256,
            momentum: 0.9,
            weight_decay: 0.0001,
            base_learning_rate: 0.1,
            epoch_decay: 0.1,
            seed: 0,
            deterministic: true,
            post_conv: vec!["batch_norm".into(), "relu".into()],
            conv_bias: false,
        }
    }
}

impl TrainingRecipe {
    /// Learning rate in effect during each epoch (0-based).
    pub fn learning_rate_schedule(&self) -> Vec<f64> {
        (0..self.epochs)
            .map(|e| {
                let within = e % self.cycle_epochs.max(1);
                self.base_learning_rate * self.epoch_decay.powi(within as i32)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: usize,
    pub layers: Vec<LayerSpec>,
    pub padding: Vec<u32>,
    pub features: SchemeFeatures,
    pub learning_rate_schedule: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingManifest {
    pub recipe: TrainingRecipe,
    pub architectures: Vec<ManifestEntry>,
}

impl TrainingManifest {
    /// Entries are numbered by position, which is the enumeration order.
    pub fn new(schemes: &[Scheme], cost: &CostModel, recipe: TrainingRecipe) -> Self {
        let schedule = recipe.learning_rate_schedule();
        let architectures = schemes
            .iter()
            .enumerate()
            .map(|(id, s)| ManifestEntry {
                id,
                layers: s.layers().to_vec(),
                padding: s.layers().iter().map(LayerSpec::padding).collect(),
                features: cost.features(s),
                learning_rate_schedule: schedule.clone(),
            })
            .collect();
        Self { recipe, architectures }
    }

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
}

/// Writes the manifest for `schemes` with the default recipe.
pub fn export_training_manifest(
    schemes: &[Scheme],
    cost: &CostModel,
    destination: impl AsRef<Path>,
) -> Result<TrainingManifest> {
    let manifest = TrainingManifest::new(schemes, cost, TrainingRecipe::default());
    manifest.write(destination)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{enumerate_schemes, ConstraintSpec};

    #[test]
    fn schedule_restarts_every_three_epochs() {
        let lr = TrainingRecipe::default().learning_rate_schedule();
        assert_eq!(lr.len(), 90);
        for cycle in lr.chunks(3) {
            assert_eq!(cycle[0], 0.1);
            assert!((cycle[1] - 0.01).abs() < 1e-15);
            assert!((cycle[2] - 0.001).abs() < 1e-15);
        }
    }

    #[test]
    fn manifest_covers_every_scheme_and_round_trips() {
        let spec = ConstraintSpec::naap440();
        let schemes = enumerate_schemes(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        let written = export_training_manifest(&schemes, &spec.cost, &path).unwrap();
        assert_eq!(written.architectures.len(), 440);
        assert!(written
            .architectures
            .iter()
            .all(|a| a.learning_rate_schedule.len() == 90));
        assert_eq!(TrainingManifest::read(&path).unwrap(), written);
    }

    #[test]
    fn empty_scheme_list_gives_empty_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let m = export_training_manifest(&[], &CostModel::default(), dir.path().join("m.json")).unwrap();
        assert!(m.architectures.is_empty());
    }

    #[test]
    fn unwritable_destination_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let err =
            export_training_manifest(&[], &CostModel::default(), dir.path().join("no/such/dir/m.json")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
