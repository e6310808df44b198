//! Declarative description of the architecture search space and its
//! depth-first enumeration.
//!
//! A space is data: per-layer candidate lists for kernel size, width and
//! stride, the admissible depths, and bounds on the number of stages. The
//! enumerator walks layers from the input side, iterating candidates in
//! ascending order (kernel, then width, then stride, then skip off/on), so
//! the position of a scheme in the output is a stable identifier.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cost::CostModel;
use crate::error::{Error, Result};

/// One convolution (followed by batch norm and ReLU). Padding is implied as
/// `kernel_size / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LayerSpec {
    pub kernel_size: u32,
    pub width: u32,
    pub stride: u32,
    pub skip: bool,
}

impl LayerSpec {
    pub fn new(kernel_size: u32, width: u32, stride: u32, skip: bool) -> Self {
        Self {
            kernel_size,
            width,
            stride,
            skip,
        }
    }

    #[inline]
    pub fn padding(&self) -> u32 {
        self.kernel_size / 2
    }
}

/// An ordered stack of convolution layers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<LayerSpec>", into = "Vec<LayerSpec>")]
pub struct Scheme {
    layers: Vec<LayerSpec>,
}

impl Scheme {
    /// Checks the per-layer invariants: odd positive kernels, positive
    /// widths, strides in {1, 2}, and skips only where the input and output
    /// shapes agree.
    pub fn new(layers: Vec<LayerSpec>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidInput("a scheme needs at least one layer".into()));
        }
        for (i, layer) in layers.iter().enumerate() {
            if layer.kernel_size == 0 || layer.kernel_size % 2 == 0 {
                return Err(Error::InvalidInput(format!(
                    "layer {i}: kernel size {} is not odd and positive",
                    layer.kernel_size
                )));
            }
            if layer.width == 0 {
                return Err(Error::InvalidInput(format!("layer {i}: width must be positive")));
            }
            if !matches!(layer.stride, 1 | 2) {
                return Err(Error::InvalidInput(format!(
                    "layer {i}: stride {} not in {{1, 2}}",
                    layer.stride
                )));
            }
            if layer.skip {
                let shape_kept = i > 0 && layer.stride == 1 && layers[i - 1].width == layer.width;
                if !shape_kept {
                    return Err(Error::InvalidInput(format!(
                        "layer {i}: skip connection requires stride 1 and the previous layer's width"
                    )));
                }
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Number of resolution levels, counted as stride-2 convolutions.
    pub fn num_stages(&self) -> usize {
        self.layers.iter().filter(|l| l.stride == 2).count()
    }

    pub fn first_width(&self) -> u32 {
        self.layers[0].width
    }

    pub fn last_width(&self) -> u32 {
        self.layers[self.layers.len() - 1].width
    }
}

impl TryFrom<Vec<LayerSpec>> for Scheme {
    type Error = Error;

    fn try_from(layers: Vec<LayerSpec>) -> Result<Self> {
        Scheme::new(layers)
    }
}

impl From<Scheme> for Vec<LayerSpec> {
    fn from(s: Scheme) -> Self {
        s.layers
    }
}

impl fmt::Display for Scheme {
    /// Compact form, e.g. `k3w16s2|k5w32s2|k3w32s1+`; `+` marks a skip.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.layers.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            write!(f, "k{}w{}s{}", l.kernel_size, l.width, l.stride)?;
            if l.skip {
                f.write_str("+")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerCandidates {
    pub kernel_sizes: Vec<u32>,
    pub widths: Vec<u32>,
    pub strides: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageBounds {
    pub min: usize,
    pub max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipRule {
    /// Generate skip variants where the shapes allow it.
    pub allowed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub depth_options: Vec<usize>,
    pub stages: StageBounds,
    pub skip: SkipRule,
    pub layers: Vec<LayerCandidates>,
    #[serde(flatten)]
    pub cost: CostModel,
}

const NAAP440_SPACE: &str = include_str!("../config/naap440_space.toml");

impl ConstraintSpec {
    /// The shipped default space (440 schemes).
    pub fn naap440() -> Self {
        Self::from_toml_str(NAAP440_SPACE).expect("shipped search space parses")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config("search space", e.to_string()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// Rejects empty candidate sets, impossible values and unsatisfiable
    /// stage bounds, naming the offending key.
    pub fn validate(&self) -> Result<()> {
        if self.depth_options.is_empty() {
            return Err(Error::config("depth_options", "empty candidate set"));
        }
        if self.layers.is_empty() {
            return Err(Error::config("layers", "no layer candidates declared"));
        }
        for &d in &self.depth_options {
            if d == 0 || d > self.layers.len() {
                return Err(Error::config(
                    "depth_options",
                    format!("depth {d} needs between 1 and {} layer entries", self.layers.len()),
                ));
            }
        }
        for (i, layer) in self.layers.iter().enumerate() {
            let field = |name: &str| format!("layers[{i}].{name}");
            if layer.kernel_sizes.is_empty() {
                return Err(Error::config(field("kernel_sizes"), "empty candidate set"));
            }
            if let Some(k) = layer.kernel_sizes.iter().find(|&&k| k == 0 || k % 2 == 0) {
                return Err(Error::config(
                    field("kernel_sizes"),
                    format!("{k} is not odd and positive"),
                ));
            }
            if layer.widths.is_empty() {
                return Err(Error::config(field("widths"), "empty candidate set"));
            }
            if layer.widths.contains(&0) {
                return Err(Error::config(field("widths"), "widths must be positive"));
            }
            if layer.strides.is_empty() {
                return Err(Error::config(field("strides"), "empty candidate set"));
            }
            if let Some(s) = layer.strides.iter().find(|&&s| s != 1 && s != 2) {
                return Err(Error::config(field("strides"), format!("stride {s} not in {{1, 2}}")));
            }
        }
        if self.stages.min > self.stages.max {
            return Err(Error::config(
                "stages",
                format!("min {} exceeds max {}", self.stages.min, self.stages.max),
            ));
        }
        let satisfiable = self.depth_options.iter().any(|&d| {
            let layers = &self.layers[..d];
            let forced = layers.iter().filter(|l| !l.strides.contains(&1)).count();
            let possible = layers.iter().filter(|l| l.strides.contains(&2)).count();
            forced <= self.stages.max && possible >= self.stages.min
        });
        if !satisfiable {
            return Err(Error::config(
                "stages",
                "no depth option can reach a stage count within the bounds",
            ));
        }
        if self.cost.input.height == 0 || self.cost.input.width == 0 || self.cost.input.channels == 0 {
            return Err(Error::config("input", "input dimensions must be positive"));
        }
        if self.cost.accounting.num_classes == 0 {
            return Err(Error::config("accounting.num_classes", "must be positive"));
        }
        Ok(())
    }

    /// True when `scheme` lies inside this space.
    pub fn admits(&self, scheme: &Scheme) -> bool {
        let d = scheme.depth();
        if !self.depth_options.contains(&d) || d > self.layers.len() {
            return false;
        }
        let in_sets = scheme.layers().iter().zip(&self.layers).all(|(l, c)| {
            c.kernel_sizes.contains(&l.kernel_size) && c.widths.contains(&l.width) && c.strides.contains(&l.stride)
        });
        let stages = scheme.num_stages();
        let skips_ok = self.skip.allowed || scheme.layers().iter().all(|l| !l.skip);
        in_sets && skips_ok && stages >= self.stages.min && stages <= self.stages.max
    }
}

/// Every scheme in the space, exactly once, in depth-first order. Depths are
/// visited in ascending order.
pub fn enumerate_schemes(spec: &ConstraintSpec) -> Result<Vec<Scheme>> {
    spec.validate()?;
    let sorted: Vec<LayerCandidates> = spec
        .layers
        .iter()
        .map(|c| LayerCandidates {
            kernel_sizes: sorted_unique(&c.kernel_sizes),
            widths: sorted_unique(&c.widths),
            strides: sorted_unique(&c.strides),
        })
        .collect();
    let mut depths = spec.depth_options.clone();
    depths.sort_unstable();
    depths.dedup();

    let mut out = Vec::new();
    let mut stack = Vec::with_capacity(sorted.len());
    for depth in depths {
        let walker = Walker {
            candidates: &sorted[..depth],
            stages: spec.stages,
            skip_allowed: spec.skip.allowed,
        };
        walker.descend(&mut stack, 0, &mut out);
    }
    Ok(out)
}

fn sorted_unique(values: &[u32]) -> Vec<u32> {
    let mut v = values.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

struct Walker<'a> {
    candidates: &'a [LayerCandidates],
    stages: StageBounds,
    skip_allowed: bool,
}

impl Walker<'_> {
    fn descend(&self, stack: &mut Vec<LayerSpec>, stride2: usize, out: &mut Vec<Scheme>) {
        let i = stack.len();
        if i == self.candidates.len() {
            if stride2 >= self.stages.min {
                out.push(Scheme { layers: stack.clone() });
            }
            return;
        }
        let c = &self.candidates[i];
        let prev_width = stack.last().map(|l| l.width);
        for &kernel_size in &c.kernel_sizes {
            for &width in &c.widths {
                for &stride in &c.strides {
                    let stages = stride2 + usize::from(stride == 2);
                    if stages > self.stages.max {
                        continue;
                    }
                    let skip_options: &[bool] = if self.skip_allowed && stride == 1 && prev_width == Some(width) {
                        &[false, true]
                    } else {
                        &[false]
                    };
                    for &skip in skip_options {
                        stack.push(LayerSpec {
                            kernel_size,
                            width,
                            stride,
                            skip,
                        });
                        self.descend(stack, stages, out);
                        stack.pop();
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    fn tiny_spec() -> ConstraintSpec {
        let mut spec = ConstraintSpec::naap440();
        spec.depth_options = vec![3];
        spec.skip.allowed = false;
        spec.layers = vec![
            LayerCandidates {
                kernel_sizes: vec![3],
                widths: vec![16],
                strides: vec![2],
            };
            3
        ];
        spec.layers[2].strides = vec![1];
        spec
    }

    #[test]
    fn default_space_has_440_distinct_schemes() {
        let schemes = enumerate_schemes(&ConstraintSpec::naap440()).unwrap();
        assert_eq!(schemes.len(), 440);
        let unique: HashSet<String> = schemes.iter().map(ToString::to_string).collect();
        assert_eq!(unique.len(), 440);
    }

    #[test]
    fn fully_constrained_space_has_one_scheme() {
        let schemes = enumerate_schemes(&tiny_spec()).unwrap();
        assert_eq!(schemes.len(), 1);
        assert_eq!(schemes[0].to_string(), "k3w16s2|k3w16s2|k3w16s1");
    }

    #[test]
    fn enumeration_is_deterministic() {
        let a = enumerate_schemes(&ConstraintSpec::naap440()).unwrap();
        let b = enumerate_schemes(&ConstraintSpec::naap440()).unwrap();
        assert_eq!(a, b);
        // depth 3 first, skip=false before skip=true
        assert_eq!(a[0].depth(), 3);
        assert_eq!(a[439].depth(), 4);
    }

    #[test]
    fn every_default_scheme_is_valid() {
        let spec = ConstraintSpec::naap440();
        for s in enumerate_schemes(&spec).unwrap() {
            assert!(spec.admits(&s));
            assert!(matches!(s.depth(), 3 | 4));
            assert_eq!(s.layers()[0].stride, 2);
            assert_eq!(s.layers()[1].stride, 2);
            assert!(matches!(s.num_stages(), 2 | 3));
            assert!(!s.layers()[0].skip);
            Scheme::new(s.layers().to_vec()).unwrap();
        }
    }

    #[test]
    fn empty_candidate_set_names_the_field() {
        let mut spec = ConstraintSpec::naap440();
        spec.layers[2].widths.clear();
        let err = enumerate_schemes(&spec).unwrap_err();
        assert!(
            matches!(&err, Error::Config { field, .. } if field == "layers[2].widths"),
            "{err}"
        );
    }

    #[test]
    fn contradictory_stage_bounds_are_rejected() {
        let mut spec = ConstraintSpec::naap440();
        spec.stages = StageBounds { min: 3, max: 2 };
        assert!(matches!(spec.validate(), Err(Error::Config { field, .. }) if field == "stages"));

        let mut spec = ConstraintSpec::naap440();
        spec.stages = StageBounds { min: 5, max: 6 };
        assert!(matches!(spec.validate(), Err(Error::Config { field, .. }) if field == "stages"));
    }

    #[test]
    fn scheme_rejects_illegal_skip() {
        let layers = vec![LayerSpec::new(3, 16, 2, false), LayerSpec::new(3, 16, 2, true)];
        assert!(Scheme::new(layers).is_err());
        let layers = vec![LayerSpec::new(3, 16, 2, true)];
        assert!(Scheme::new(layers).is_err());
        let layers = vec![LayerSpec::new(3, 16, 2, false), LayerSpec::new(3, 32, 1, true)];
        assert!(Scheme::new(layers).is_err());
    }

    #[test]
    fn spec_round_trips_through_toml() {
        let spec = ConstraintSpec::naap440();
        let text = spec.to_toml_string().unwrap();
        assert_eq!(ConstraintSpec::from_toml_str(&text).unwrap(), spec);
    }
}
