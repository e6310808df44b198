use std::collections::BTreeSet;

use naap_core::cost::CostModel;
use naap_core::space::{enumerate_schemes, ConstraintSpec, LayerCandidates, LayerSpec, Scheme, SkipRule, StageBounds};
use proptest::prelude::*;

/// Every combination of per-layer choices, kept when it forms a valid scheme
/// inside the bounds.
fn brute_force(spec: &ConstraintSpec) -> BTreeSet<Scheme> {
    let mut out = BTreeSet::new();
    for &depth in &spec.depth_options {
        let mut partial: Vec<Vec<LayerSpec>> = vec![Vec::new()];
        for cand in &spec.layers[..depth] {
            let mut next = Vec::new();
            for p in &partial {
                for &k in &cand.kernel_sizes {
                    for &w in &cand.widths {
                        for &s in &cand.strides {
                            for skip in [false, true] {
                                let mut v = p.clone();
                                v.push(LayerSpec::new(k, w, s, skip));
                                next.push(v);
                            }
                        }
                    }
                }
            }
            partial = next;
        }
        for layers in partial {
            if !spec.skip.allowed && layers.iter().any(|l| l.skip) {
                continue;
            }
            if let Ok(s) = Scheme::new(layers) {
                if (spec.stages.min..=spec.stages.max).contains(&s.num_stages()) {
                    out.insert(s);
                }
            }
        }
    }
    out
}

fn subset<T: Clone + std::fmt::Debug + 'static>(pool: Vec<T>) -> impl Strategy<Value = Vec<T>> {
    let n = pool.len();
    proptest::sample::subsequence(pool, 1..=n)
}

fn small_spec() -> impl Strategy<Value = ConstraintSpec> {
    let layer = (
        subset(vec![1u32, 3, 5]),
        subset(vec![4u32, 8, 16]),
        subset(vec![1u32, 2]),
    )
        .prop_map(|(kernel_sizes, widths, strides)| LayerCandidates {
            kernel_sizes,
            widths,
            strides,
        });
    (
        subset(vec![1usize, 2, 3]),
        proptest::collection::vec(layer, 3),
        0usize..=3,
        0usize..=3,
        any::<bool>(),
    )
        .prop_map(|(depth_options, layers, a, b, allowed)| ConstraintSpec {
            depth_options,
            stages: StageBounds {
                min: a.min(b),
                max: a.max(b),
            },
            skip: SkipRule { allowed },
            layers,
            cost: CostModel::default(),
        })
}

proptest! {
    #[test]
    fn enumeration_matches_brute_force(spec in small_spec()) {
        prop_assume!(spec.validate().is_ok());
        let schemes = enumerate_schemes(&spec).unwrap();
        let unique: BTreeSet<Scheme> = schemes.iter().cloned().collect();
        prop_assert_eq!(unique.len(), schemes.len(), "duplicates emitted");
        prop_assert_eq!(unique, brute_force(&spec));
    }

    #[test]
    fn every_scheme_is_admitted_and_valid(spec in small_spec()) {
        prop_assume!(spec.validate().is_ok());
        for s in enumerate_schemes(&spec).unwrap() {
            prop_assert!(spec.admits(&s));
            prop_assert!(Scheme::new(s.layers().to_vec()).is_ok());
        }
    }

    #[test]
    fn enumeration_is_deterministic(spec in small_spec()) {
        prop_assume!(spec.validate().is_ok());
        prop_assert_eq!(enumerate_schemes(&spec).unwrap(), enumerate_schemes(&spec).unwrap());
    }
}

#[test]
fn default_space_matches_brute_force() {
    let spec = ConstraintSpec::naap440();
    let schemes = enumerate_schemes(&spec).unwrap();
    assert_eq!(schemes.len(), 440);
    let unique: BTreeSet<Scheme> = schemes.into_iter().collect();
    assert_eq!(unique, brute_force(&spec));
}

#[test]
fn stage_bounds_are_inclusive() {
    let mut spec = ConstraintSpec::naap440();
    spec.stages = StageBounds { min: 2, max: 2 };
    let two = enumerate_schemes(&spec).unwrap();
    spec.stages = StageBounds { min: 3, max: 3 };
    let three = enumerate_schemes(&spec).unwrap();
    assert!(two.iter().all(|s| s.num_stages() == 2));
    assert!(three.iter().all(|s| s.num_stages() == 3));
    assert_eq!(two.len() + three.len(), 440);
}

#[test]
fn disallowing_skips_removes_only_skip_schemes() {
    let mut spec = ConstraintSpec::naap440();
    let with = enumerate_schemes(&spec).unwrap();
    spec.skip.allowed = false;
    let without = enumerate_schemes(&spec).unwrap();
    let expected: Vec<Scheme> = with
        .into_iter()
        .filter(|s| s.layers().iter().all(|l| !l.skip))
        .collect();
    assert_eq!(without, expected);
}
