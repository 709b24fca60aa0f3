//! Turns a raw YOLO head tensor into scored boxes.
//!
//! Per cell `(gx, gy)` and anchor `a`, the channels are
//! `tx, ty, tw, th, to, class logits...` and decode as
//!
//! ```text
//! cx   = (sigmoid(tx) + gx) / grid_w * image_w
//! cy   = (sigmoid(ty) + gy) / grid_h * image_h
//! w    = anchor.w * exp(tw) / grid_w * image_w
//! h    = anchor.h * exp(th) / grid_h * image_h
//! conf = sigmoid(to) * max(softmax(logits))
//! ```

mod nms;
mod tensor_file;

pub use nms::nms;
pub(crate) use nms::rank_order;
pub use tensor_file::{read_tensor, read_tensor_file, write_tensor, write_tensor_file, TENSOR_MAGIC};

use crate::error::{Error, Result};
use crate::geometry::BoundingBox;
use crate::scalar::{sigmoid, Scalar};

/// Box coordinates per prediction; fixed for the YOLOv2 head.
pub const COORDS: usize = 4;

pub const DEFAULT_CONF_THRESHOLD: f64 = 0.25;
pub const DEFAULT_NMS_THRESHOLD: f64 = 0.45;

/// Anchor prior in grid-cell units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnchorBox<T> {
    pub w: T,
    pub h: T,
}

impl<T: Scalar> AnchorBox<T> {
    pub fn new(w: T, h: T) -> Result<Self> {
        if !(w.is_finite() && h.is_finite() && w > T::zero() && h > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "anchor dims must be positive, got {w} x {h}"
            )));
        }
        Ok(Self { w, h })
    }

    pub fn area(&self) -> T {
        self.w * self.h
    }
}

/// Head output laid out as `[grid_h][grid_w][anchors][coords + 1 + classes]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadTensor<T> {
    grid_w: usize,
    grid_h: usize,
    num_anchors: usize,
    classes: usize,
    data: Vec<T>,
}

impl<T: Scalar> HeadTensor<T> {
    pub fn new(
        grid_w: usize,
        grid_h: usize,
        num_anchors: usize,
        classes: usize,
        data: Vec<T>,
    ) -> Result<Self> {
        if grid_w == 0 || grid_h == 0 || num_anchors == 0 || classes == 0 {
            return Err(Error::Tensor(format!(
                "dimensions must be positive: grid {grid_w}x{grid_h}, {num_anchors} anchors, {classes} classes"
            )));
        }
        let expected = grid_w
            .checked_mul(grid_h)
            .and_then(|n| n.checked_mul(num_anchors))
            .and_then(|n| n.checked_mul(COORDS + 1 + classes))
            .ok_or_else(|| Error::Tensor("tensor size overflows".into()))?;
        if data.len() != expected {
            return Err(Error::Tensor(format!(
                "expected {expected} values, got {}",
                data.len()
            )));
        }
        Ok(Self {
            grid_w,
            grid_h,
            num_anchors,
            classes,
            data,
        })
    }

    pub fn zeros(grid_w: usize, grid_h: usize, num_anchors: usize, classes: usize) -> Result<Self> {
        let len = grid_w * grid_h * num_anchors * (COORDS + 1 + classes);
        Self::new(grid_w, grid_h, num_anchors, classes, vec![T::zero(); len])
    }

    pub fn grid_w(&self) -> usize {
        self.grid_w
    }

    pub fn grid_h(&self) -> usize {
        self.grid_h
    }

    pub fn num_anchors(&self) -> usize {
        self.num_anchors
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn channels_per_anchor(&self) -> usize {
        COORDS + 1 + self.classes
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    /// Raw channels of one anchor in one cell.
    pub fn prediction(&self, gx: usize, gy: usize, anchor: usize) -> &[T] {
        let c = self.channels_per_anchor();
        let start = ((gy * self.grid_w + gx) * self.num_anchors + anchor) * c;
        &self.data[start..start + c]
    }

    pub fn cast<U: Scalar>(&self) -> HeadTensor<U> {
        HeadTensor {
            grid_w: self.grid_w,
            grid_h: self.grid_h,
            num_anchors: self.num_anchors,
            classes: self.classes,
            data: self
                .data
                .iter()
                .map(|v| U::from(*v).unwrap_or_else(U::nan))
                .collect(),
        }
    }
}

/// Index and probability of the most likely class.
fn best_class<T: Scalar>(logits: &[T]) -> (usize, T) {
    let (best, max) =
        logits.iter().copied().enumerate().fold(
            (0, T::neg_infinity()),
            |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
        );
    let denom: T = logits.iter().map(|&v| (v - max).exp()).sum();
    (best, T::one() / denom)
}

/// Decodes every prediction, drops those below `conf_threshold` and clips the
/// rest to the image.
pub fn decode<T: Scalar>(
    tensor: &HeadTensor<T>,
    anchors: &[AnchorBox<T>],
    image_w: T,
    image_h: T,
    conf_threshold: T,
) -> Result<Vec<BoundingBox<T>>> {
    if anchors.len() != tensor.num_anchors {
        return Err(Error::AnchorCount {
            expected: tensor.num_anchors,
            actual: anchors.len(),
        });
    }
    if !(conf_threshold >= T::zero() && conf_threshold <= T::one()) {
        return Err(Error::InvalidArgument(format!(
            "confidence threshold {conf_threshold} outside [0, 1]"
        )));
    }
    if !(image_w > T::zero() && image_h > T::zero()) {
        return Err(Error::InvalidImageSize {
            width: image_w.as_f64(),
            height: image_h.as_f64(),
        });
    }
    if let Some(pos) = tensor.data.iter().position(|v| !v.is_finite()) {
        return Err(Error::Tensor(format!("non-finite value at flat index {pos}")));
    }

    let grid_w = T::from_count(tensor.grid_w);
    let grid_h = T::from_count(tensor.grid_h);
    let mut boxes = Vec::new();
    for gy in 0..tensor.grid_h {
        for gx in 0..tensor.grid_w {
            for (a, anchor) in anchors.iter().enumerate() {
                let p = tensor.prediction(gx, gy, a);
                let (class_id, class_prob) = best_class(&p[COORDS + 1..]);
                let confidence = sigmoid(p[4]) * class_prob;
                if confidence < conf_threshold {
                    continue;
                }
                let cx = (sigmoid(p[0]) + T::from_count(gx)) / grid_w * image_w;
                let cy = (sigmoid(p[1]) + T::from_count(gy)) / grid_h * image_h;
                let w = anchor.w * p[2].exp() / grid_w * image_w;
                let h = anchor.h * p[3].exp() / grid_h * image_h;
                let Ok(raw) = BoundingBox::new(cx, cy, w, h, class_id as u32) else {
                    continue; // size underflowed to zero
                };
                let Some(clipped) = raw.clamped(image_w, image_h) else {
                    continue;
                };
                boxes.push(clipped.with_confidence(confidence.min(T::one()))?);
            }
        }
    }
    Ok(boxes)
}
