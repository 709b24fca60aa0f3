//! Axis-aligned, center-based boxes and the overlap arithmetic built on them.
//!
//! Coordinates are continuous pixel values. No pixel-grid convention is
//! applied, so a box spanning `[0, 10)` has width exactly 10 and two boxes
//! that only share an edge do not intersect.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox<T> {
    pub cx: T,
    pub cy: T,
    pub w: T,
    pub h: T,
    pub class_id: u32,
    pub confidence: Option<T>,
}

impl<T: Scalar> BoundingBox<T> {
    pub fn new(cx: T, cy: T, w: T, h: T, class_id: u32) -> Result<Self> {
        if !(cx.is_finite() && cy.is_finite()) {
            return Err(Error::InvalidBox(format!("non-finite center ({cx}, {cy})")));
        }
        if !(w.is_finite() && h.is_finite() && w > T::zero() && h > T::zero()) {
            return Err(Error::InvalidBox(format!("size must be positive, got {w} x {h}")));
        }
        Ok(Self {
            cx,
            cy,
            w,
            h,
            class_id,
            confidence: None,
        })
    }

    pub fn with_confidence(mut self, confidence: T) -> Result<Self> {
        if !(confidence >= T::zero() && confidence <= T::one()) {
            return Err(Error::InvalidBox(format!(
                "confidence {confidence} outside [0, 1]"
            )));
        }
        self.confidence = Some(confidence);
        Ok(self)
    }

    pub fn from_corners(x0: T, y0: T, x1: T, y1: T, class_id: u32) -> Result<Self> {
        let two = T::lit(2.0);
        Self::new((x0 + x1) / two, (y0 + y1) / two, x1 - x0, y1 - y0, class_id)
    }

    /// `(x0, y0, x1, y1)`
    pub fn corners(&self) -> (T, T, T, T) {
        let half_w = self.w / T::lit(2.0);
        let half_h = self.h / T::lit(2.0);
        (
            self.cx - half_w,
            self.cy - half_h,
            self.cx + half_w,
            self.cy + half_h,
        )
    }

    pub fn area(&self) -> T {
        self.w * self.h
    }

    pub fn translated(&self, dx: T, dy: T) -> Self {
        Self {
            cx: self.cx + dx,
            cy: self.cy + dy,
            ..*self
        }
    }

    /// Clips the box to `[0, width] x [0, height]`. Returns `None` when nothing
    /// of the box is left inside the image.
    pub fn clamped(&self, width: T, height: T) -> Option<Self> {
        let (x0, y0, x1, y1) = self.corners();
        let zero = T::zero();
        let x0 = x0.max(zero).min(width);
        let x1 = x1.max(zero).min(width);
        let y0 = y0.max(zero).min(height);
        let y1 = y1.max(zero).min(height);
        let mut clipped = Self::from_corners(x0, y0, x1, y1, self.class_id).ok()?;
        clipped.confidence = self.confidence;
        Some(clipped)
    }

    pub fn is_within(&self, width: T, height: T) -> bool {
        let (x0, y0, x1, y1) = self.corners();
        x0 >= T::zero() && y0 >= T::zero() && x1 <= width && y1 <= height
    }
}

/// Width and height of the overlap between the two boxes, clipped at zero.
fn overlap_extent<T: Scalar>(a: &BoundingBox<T>, b: &BoundingBox<T>) -> (T, T) {
    let (ax0, ay0, ax1, ay1) = a.corners();
    let (bx0, by0, bx1, by1) = b.corners();
    let w = ax1.min(bx1) - ax0.max(bx0);
    let h = ay1.min(by1) - ay0.max(by0);
    (w.max(T::zero()), h.max(T::zero()))
}

pub fn intersection_area<T: Scalar>(a: &BoundingBox<T>, b: &BoundingBox<T>) -> T {
    let (w, h) = overlap_extent(a, b);
    w * h
}

pub fn iou<T: Scalar>(a: &BoundingBox<T>, b: &BoundingBox<T>) -> T {
    // Areas come from the same corner arithmetic as the intersection so that
    // iou(a, a) is exactly one.
    let corner_area = |bx: &BoundingBox<T>| {
        let (x0, y0, x1, y1) = bx.corners();
        (x1 - x0) * (y1 - y0)
    };
    let inter = intersection_area(a, b);
    if inter <= T::zero() {
        return T::zero();
    }
    let union = corner_area(a) + corner_area(b) - inter;
    (inter / union).min(T::one())
}

/// True iff the boxes share a region of strictly positive area.
pub fn intersects<T: Scalar>(a: &BoundingBox<T>, b: &BoundingBox<T>) -> bool {
    intersection_area(a, b) > T::zero()
}

/// Box area as a fraction of the image area.
pub fn relative_area<T: Scalar>(bx: &BoundingBox<T>, image_w: T, image_h: T) -> Result<T> {
    if !(image_w > T::zero() && image_h > T::zero()) {
        return Err(Error::InvalidImageSize {
            width: image_w.as_f64(),
            height: image_h.as_f64(),
        });
    }
    Ok(bx.area() / (image_w * image_h))
}
