//! Darknet-style network definitions: parsing, static shape propagation and
//! consistency checks for the detection head.

mod parse;
mod shape;
mod validate;

use std::fmt;

pub use parse::{parse_cfg, serialize_cfg, ParsedCfg};
pub use shape::{grid_size, propagate_shapes};
pub use validate::{validate_net, Diagnostic, Severity};

/// Spatial size and depth of a feature map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TensorShape {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
}

impl TensorShape {
    pub fn new(width: usize, height: usize, channels: usize) -> Self {
        Self {
            width,
            height,
            channels,
        }
    }
}

impl fmt::Display for TensorShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} x {} x {}", self.width, self.height, self.channels)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionParams {
    pub num_anchors: usize,
    pub classes: usize,
    pub coords: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerSpec {
    Input,
    Convolutional {
        filters: usize,
        kernel: usize,
        stride: usize,
    },
    Maxpool {
        kernel: usize,
        stride: usize,
    },
    /// `sources` are indices into [`NetConfig::layers`], all strictly earlier.
    Route {
        sources: Vec<usize>,
    },
    Reorg {
        stride: usize,
    },
    Region {
        params: RegionParams,
        /// `(w, h)` pairs in grid-cell units.
        anchors: Vec<(f64, f64)>,
    },
}

impl LayerSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            LayerSpec::Input => "input",
            LayerSpec::Convolutional { .. } => "convolutional",
            LayerSpec::Maxpool { .. } => "maxpool",
            LayerSpec::Route { .. } => "route",
            LayerSpec::Reorg { .. } => "reorg",
            LayerSpec::Region { .. } => "region",
        }
    }
}

/// A parsed network. `layers[0]` is always [`LayerSpec::Input`]; a region
/// layer, if present, is last.
#[derive(Debug, Clone, PartialEq)]
pub struct NetConfig {
    pub input_shape: TensorShape,
    pub layers: Vec<LayerSpec>,
}

impl NetConfig {
    /// Same network with a different input resolution.
    pub fn with_input_size(&self, width: usize, height: usize) -> Self {
        let mut net = self.clone();
        net.input_shape.width = width;
        net.input_shape.height = height;
        net
    }

    pub fn region(&self) -> Option<(&RegionParams, &[(f64, f64)])> {
        match self.layers.last() {
            Some(LayerSpec::Region { params, anchors }) => Some((params, anchors)),
            _ => None,
        }
    }

    pub fn maxpool_count(&self) -> usize {
        self.layers
            .iter()
            .filter(|l| matches!(l, LayerSpec::Maxpool { .. }))
            .count()
    }

    /// Product of the maxpool and convolution strides: how much the input is
    /// downsampled on its way to the detection head.
    pub fn total_stride(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l {
                LayerSpec::Convolutional { stride, .. } | LayerSpec::Maxpool { stride, .. } => *stride,
                _ => 1,
            })
            .product()
    }

    /// Filters of the last convolutional layer.
    pub fn head_filters(&self) -> Option<usize> {
        self.layers.iter().rev().find_map(|l| match l {
            LayerSpec::Convolutional { filters, .. } => Some(*filters),
            _ => None,
        })
    }
}

/// Number of filters the final convolution needs to feed a region layer.
pub fn required_head_filters(num_anchors: usize, classes: usize, coords: usize) -> usize {
    num_anchors * (classes + coords + 1)
}
