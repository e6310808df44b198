//! Checks an enumerated search space against the scheme columns of a loaded
//! dataset. Rows carry no layer details, so schemes and rows are matched as
//! multisets of (depth, stages, first width, last width, params, MACs).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::cost::{Accounting, CostModel, SchemeFeatures};
use crate::dataset::ArchitectureRecord;
use crate::error::Result;
use crate::space::{enumerate_schemes, ConstraintSpec};

type Key = (u32, u32, u32, u32, u64, u64);

fn key(f: &SchemeFeatures) -> Key {
    (
        f.depth,
        f.num_stages,
        f.first_layer_width,
        f.last_layer_width,
        f.num_params,
        f.num_macs,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccountingFit {
    pub accounting: Accounting,
    /// Rows whose scheme columns equal those of a distinct enumerated scheme.
    pub matched_rows: usize,
    /// Rows matched on the four structural columns alone.
    pub structural_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceCheck {
    pub scheme_count: usize,
    pub record_count: usize,
    /// One entry per accounting flag combination, in
    /// [`Accounting::all_combinations`] order.
    pub fits: Vec<AccountingFit>,
}

impl SpaceCheck {
    /// The combination matching the most rows; earlier entries win ties.
    pub fn best(&self) -> Option<&AccountingFit> {
        self.fits
            .iter()
            .reduce(|best, f| if f.matched_rows > best.matched_rows { f } else { best })
    }

    /// Every row is matched and the counts agree.
    pub fn exact(&self) -> bool {
        self.scheme_count == self.record_count && self.best().is_some_and(|b| b.matched_rows == self.record_count)
    }
}

fn count_matches<K: std::hash::Hash + Eq>(pool: impl Iterator<Item = K>, wanted: impl Iterator<Item = K>) -> usize {
    let mut available: HashMap<K, usize> = HashMap::new();
    for k in pool {
        *available.entry(k).or_default() += 1;
    }
    wanted
        .filter(|k| match available.get_mut(k) {
            Some(c) if *c > 0 => {
                *c -= 1;
                true
            }
            _ => false,
        })
        .count()
}

/// Matches the space's schemes against `records` under every accounting
/// flag combination.
pub fn check_space(spec: &ConstraintSpec, records: &[ArchitectureRecord]) -> Result<SpaceCheck> {
    let schemes = enumerate_schemes(spec)?;
    let fits = Accounting::all_combinations(spec.cost.accounting.num_classes)
        .into_iter()
        .map(|accounting| {
            let model = CostModel {
                input: spec.cost.input,
                accounting,
            };
            let features: Vec<SchemeFeatures> = schemes.iter().map(|s| model.features(s)).collect();
            let matched_rows = count_matches(features.iter().map(key), records.iter().map(|r| key(r.features())));
            let structural = |k: Key| (k.0, k.1, k.2, k.3);
            let structural_rows = count_matches(
                features.iter().map(|f| structural(key(f))),
                records.iter().map(|r| structural(key(r.features()))),
            );
            AccountingFit {
                accounting,
                matched_rows,
                structural_rows,
            }
        })
        .collect();
    Ok(SpaceCheck {
        scheme_count: schemes.len(),
        record_count: records.len(),
        fits,
    })
}
