//! Parameter and multiply-accumulate counts for a scheme.
//!
//! Convolutions carry no bias. Batch norm and the classifier head are
//! counted according to [`Accounting`], whose flags are part of the search
//! space file so they can be matched to a dataset's published columns.

use serde::{Deserialize, Serialize};

use crate::space::Scheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputShape {
    pub height: u32,
    pub width: u32,
    pub channels: u32,
}

impl Default for InputShape {
    /// CIFAR10 images.
    fn default() -> Self {
        Self {
            height: 32,
            width: 32,
            channels: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Accounting {
    pub num_classes: u32,
    /// Two parameters (scale, shift) per channel; no MACs.
    pub batch_norm: bool,
    /// Global average pooling then a fully connected layer to `num_classes`.
    pub classifier_head: bool,
    pub head_bias: bool,
}

impl Default for Accounting {
    fn default() -> Self {
        Self {
            num_classes: 10,
            batch_norm: true,
            classifier_head: true,
            head_bias: true,
        }
    }
}

impl Accounting {
    /// Convolutions only.
    pub fn conv_only(num_classes: u32) -> Self {
        Self {
            num_classes,
            batch_norm: false,
            classifier_head: false,
            head_bias: false,
        }
    }

    /// Every distinct flag combination (six: the bias flag only matters
    /// with a head), in a fixed order, for calibration.
    pub fn all_combinations(num_classes: u32) -> Vec<Self> {
        let mut out = Vec::with_capacity(6);
        for batch_norm in [true, false] {
            for classifier_head in [true, false] {
                for head_bias in [true, false] {
                    if head_bias && !classifier_head {
                        continue;
                    }
                    out.push(Self {
                        num_classes,
                        batch_norm,
                        classifier_head,
                        head_bias,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CostModel {
    pub input: InputShape,
    pub accounting: Accounting,
}

/// The six published scheme columns plus the raw parameter count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeFeatures {
    pub depth: u32,
    pub num_stages: u32,
    pub first_layer_width: u32,
    pub last_layer_width: u32,
    pub num_params: u64,
    /// Natural logarithm of `num_params`.
    pub log_num_params: f64,
    pub num_macs: u64,
}

impl CostModel {
    pub fn count_params(&self, scheme: &Scheme) -> u64 {
        let acc = &self.accounting;
        let mut in_ch = u64::from(self.input.channels);
        let mut total = 0u64;
        for layer in scheme.layers() {
            let k = u64::from(layer.kernel_size);
            let out_ch = u64::from(layer.width);
            total += k * k * in_ch * out_ch;
            if acc.batch_norm {
                total += 2 * out_ch;
            }
            in_ch = out_ch;
        }
        if acc.classifier_head {
            let classes = u64::from(acc.num_classes);
            total += in_ch * classes;
            if acc.head_bias {
                total += classes;
            }
        }
        total
    }

    pub fn count_macs(&self, scheme: &Scheme) -> u64 {
        let mut h = u64::from(self.input.height);
        let mut w = u64::from(self.input.width);
        let mut in_ch = u64::from(self.input.channels);
        let mut total = 0u64;
        for layer in scheme.layers() {
            let s = u64::from(layer.stride);
            // with padding k/2 on an odd kernel the output is ceil(in / stride)
            h = h.div_ceil(s);
            w = w.div_ceil(s);
            let k = u64::from(layer.kernel_size);
            let out_ch = u64::from(layer.width);
            total += k * k * in_ch * out_ch * h * w;
            in_ch = out_ch;
        }
        if self.accounting.classifier_head {
            total += in_ch * u64::from(self.accounting.num_classes);
        }
        total
    }

    pub fn features(&self, scheme: &Scheme) -> SchemeFeatures {
        let num_params = self.count_params(scheme);
        SchemeFeatures {
            depth: scheme.depth() as u32,
            num_stages: scheme.num_stages() as u32,
            first_layer_width: scheme.first_width(),
            last_layer_width: scheme.last_width(),
            num_params,
            log_num_params: (num_params as f64).ln(),
            num_macs: self.count_macs(scheme),
        }
    }
}

/// Parameter count with the default batch-norm and head accounting.
pub fn count_params(scheme: &Scheme, input_channels: u32, num_classes: u32) -> u64 {
    CostModel {
        input: InputShape {
            channels: input_channels,
            ..InputShape::default()
        },
        accounting: Accounting {
            num_classes,
            ..Accounting::default()
        },
    }
    .count_params(scheme)
}

/// MAC count with the default head accounting.
pub fn count_macs(scheme: &Scheme, input_height: u32, input_width: u32, input_channels: u32) -> u64 {
    CostModel {
        input: InputShape {
            height: input_height,
            width: input_width,
            channels: input_channels,
        },
        accounting: Accounting::default(),
    }
    .count_macs(scheme)
}

/// Features under the default CIFAR10 cost model.
pub fn scheme_features(scheme: &Scheme) -> SchemeFeatures {
    CostModel::default().features(scheme)
}
