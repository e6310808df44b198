//! Synthetic stand-in for the training-curve table, generated from an
//! enumerated search space. Targets grow with log parameter count and stage
//! count plus Gaussian noise, and curves follow a saturating rise with a dip
//! after each 3-epoch warm restart. Useful for exercising the pipeline; the
//! numbers carry no information about real networks.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{ArchitectureRecord, Dataset, EpochMetrics, NUM_EPOCHS};
use crate::error::{Error, Result};
use crate::regressors::rng::stream_rng;
use crate::space::{enumerate_schemes, ConstraintSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticOptions {
    pub seed: u64,
    pub num_epochs: usize,
    /// Standard deviation of the per-architecture target noise.
    pub target_noise: f64,
    /// Standard deviation of the per-epoch accuracy noise.
    pub epoch_noise: f64,
}

impl Default for SyntheticOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            num_epochs: NUM_EPOCHS,
            target_noise: 0.01,
            epoch_noise: 0.004,
        }
    }
}

pub fn synthetic_dataset(spec: &ConstraintSpec, options: &SyntheticOptions) -> Result<Dataset> {
    if options.num_epochs == 0 {
        return Err(Error::config("num_epochs", "must be at least 1"));
    }
    let noise = |sd: f64, name: &str| Normal::new(0.0, sd).map_err(|e| Error::config(name, e.to_string()));
    let target_noise = noise(options.target_noise, "target_noise")?;
    let epoch_noise = noise(options.epoch_noise, "epoch_noise")?;

    let schemes = enumerate_schemes(spec)?;
    let features: Vec<_> = schemes.iter().map(|s| spec.cost.features(s)).collect();
    let n = features.len() as f64;
    let mean = features.iter().map(|f| f.log_num_params).sum::<f64>() / n;
    let sd = (features.iter().map(|f| (f.log_num_params - mean).powi(2)).sum::<f64>() / n)
        .sqrt()
        .max(f64::MIN_POSITIVE);

    let mut rng = stream_rng(options.seed, 0);
    let mut records = Vec::with_capacity(features.len());
    for (id, f) in features.into_iter().enumerate() {
        let z = (f.log_num_params - mean) / sd;
        let quality = 0.62 + 0.06 * z.tanh() - 0.015 * (f64::from(f.num_stages) - 2.5) + target_noise.sample(&mut rng);
        let target = quality.clamp(0.3, 0.9);
        let tau = 4.0 + 3.0 * (1.0 - z.tanh());

        let mut acc: Vec<f64> = (1..=options.num_epochs)
            .map(|e| {
                let rise = 1.0 - (-(e as f64) / tau).exp();
                let dip = [0.012, 0.004, 0.0][(e - 1) % 3];
                target * (0.5 + 0.5 * rise) - dip + epoch_noise.sample(&mut rng)
            })
            .collect();
        let peak = acc.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for a in &mut acc {
            *a = (*a * target / peak).clamp(0.0, 1.0);
        }

        let floor = 0.3 * (1.0 - target);
        let epochs = acc
            .iter()
            .enumerate()
            .map(|(e, &a)| {
                let decay = (-(e as f64 + 1.0) / 20.0).exp();
                let mean_loss =
                    (1.8 * (1.0 - target) + 0.2) * decay + floor + (target - a) * 0.5 + 0.01 * rng.random::<f64>();
                EpochMetrics {
                    test_accuracy: a,
                    mean_train_loss: mean_loss,
                    median_train_loss: 0.9 * mean_loss,
                }
            })
            .collect();
        records.push(ArchitectureRecord::new(id, f, epochs)?);
    }
    Ok(Dataset {
        records,
        accuracy_was_percent: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_space_gives_a_full_table() {
        let d = synthetic_dataset(&ConstraintSpec::naap440(), &SyntheticOptions::default()).unwrap();
        assert_eq!(d.records.len(), 440);
        for r in &d.records {
            assert_eq!(r.epochs().len(), NUM_EPOCHS);
            assert!(r.target() > 0.0 && r.target() < 1.0);
        }
    }

    #[test]
    fn generation_is_seeded() {
        let spec = ConstraintSpec::naap440();
        let a = synthetic_dataset(&spec, &SyntheticOptions::default()).unwrap();
        let b = synthetic_dataset(&spec, &SyntheticOptions::default()).unwrap();
        assert_eq!(a, b);
        let c = synthetic_dataset(
            &spec,
            &SyntheticOptions {
                seed: 1,
                ..SyntheticOptions::default()
            },
        )
        .unwrap();
        assert_ne!(a, c);
    }
}
