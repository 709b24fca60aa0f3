use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::geometry::{iou, BoundingBox};
use crate::scalar::{cmp_scalar, Scalar};

/// Orders by confidence descending, then `(cx, cy, w, h)` ascending.
pub(crate) fn rank_order<T: Scalar>(a: &BoundingBox<T>, b: &BoundingBox<T>) -> Ordering {
    let conf = |bx: &BoundingBox<T>| bx.confidence.unwrap_or_else(T::zero);
    cmp_scalar(conf(b), conf(a))
        .then_with(|| cmp_scalar(a.cx, b.cx))
        .then_with(|| cmp_scalar(a.cy, b.cy))
        .then_with(|| cmp_scalar(a.w, b.w))
        .then_with(|| cmp_scalar(a.h, b.h))
}

/// Greedy per-class non-maximum suppression.
///
/// Keeps the best remaining box and drops every same-class box with
/// `iou >= iou_threshold` against it. Output is in rank order.
pub fn nms<T: Scalar>(boxes: &[BoundingBox<T>], iou_threshold: T) -> Result<Vec<BoundingBox<T>>> {
    if let Some(missing) = boxes.iter().position(|b| b.confidence.is_none()) {
        return Err(Error::MissingConfidence(missing));
    }
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by(|&i, &j| rank_order(&boxes[i], &boxes[j]).then(i.cmp(&j)));

    let mut kept: Vec<BoundingBox<T>> = Vec::new();
    for idx in order {
        let candidate = &boxes[idx];
        let suppressed = kept
            .iter()
            .any(|k| k.class_id == candidate.class_id && iou(k, candidate) >= iou_threshold);
        if !suppressed {
            kept.push(*candidate);
        }
    }
    Ok(kept)
}
