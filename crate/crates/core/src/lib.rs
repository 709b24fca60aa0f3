//! Non-neural machinery for YOLOv2-style aerial vehicle detection.
//!
//! - [`netcfg`]: darknet cfg parsing, static shape propagation, head checks
//! - [`decoder`]: head tensor decoding and non-maximum suppression
//! - [`anchors`]: k-means anchor estimation with IoU distance
//! - [`dataset`]: annotation I/O, dataset statistics, sequence-aware splits
//! - [`eval`]: matching, per-image AP/AR, false alarm rate, size strata
//!
//! Box and metric math is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common choices.

pub mod anchors;
pub mod dataset;
pub mod decoder;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod netcfg;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type BoundingBoxF32 = geometry::BoundingBox<f32>;
pub type BoundingBoxF64 = geometry::BoundingBox<f64>;
pub type AnchorBoxF32 = decoder::AnchorBox<f32>;
pub type AnchorBoxF64 = decoder::AnchorBox<f64>;
pub type HeadTensorF32 = decoder::HeadTensor<f32>;
pub type HeadTensorF64 = decoder::HeadTensor<f64>;
pub type ImageRecordF64 = dataset::ImageRecord<f64>;
pub type EvalReportF64 = eval::EvalReport<f64>;
