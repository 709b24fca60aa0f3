use std::fmt;

use super::{confident, match_detections, precision, recall, sorted_truths};
use crate::dataset::{DetectionsByImage, ImageRecord};
use crate::error::Result;
use crate::geometry::relative_area;
use crate::scalar::Scalar;

/// Upper relative-area bound of the small bucket (inclusive).
pub const SMALL_MAX: f64 = 0.001;
/// Upper relative-area bound of the medium bucket (inclusive).
pub const MEDIUM_MAX: f64 = 0.003;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SizeBucket {
    Small,
    Medium,
    Large,
}

impl SizeBucket {
    pub const ALL: [SizeBucket; 3] = [SizeBucket::Small, SizeBucket::Medium, SizeBucket::Large];

    pub fn name(self) -> &'static str {
        match self {
            SizeBucket::Small => "small",
            SizeBucket::Medium => "medium",
            SizeBucket::Large => "large",
        }
    }
}

impl fmt::Display for SizeBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `<= 0.1%` small, `<= 0.3%` medium, larger is large.
pub fn size_bucket<T: Scalar>(relative_area: T) -> SizeBucket {
    if relative_area <= T::lit(SMALL_MAX) {
        SizeBucket::Small
    } else if relative_area <= T::lit(MEDIUM_MAX) {
        SizeBucket::Medium
    } else {
        SizeBucket::Large
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StratumScore<T> {
    pub ap: T,
    pub ar: T,
    /// Truth boxes that fell into this bucket.
    pub truths: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeStrata<T> {
    pub small: StratumScore<T>,
    pub medium: StratumScore<T>,
    pub large: StratumScore<T>,
}

impl<T: Copy> SizeStrata<T> {
    pub fn get(&self, bucket: SizeBucket) -> StratumScore<T> {
        match bucket {
            SizeBucket::Small => self.small,
            SizeBucket::Medium => self.medium,
            SizeBucket::Large => self.large,
        }
    }
}

/// Per-bucket AP/AR, averaged over every truth image.
///
/// Within an image, a bucket only sees its own truths. Detections that the
/// unrestricted matching paired with a truth from another bucket are left out
/// of that bucket entirely; unmatched detections count against every bucket.
pub fn size_stratified<T: Scalar>(
    detections: &DetectionsByImage<T>,
    truths: &[ImageRecord<T>],
    iou_threshold: T,
    conf_threshold: T,
) -> Result<SizeStrata<T>> {
    let images = sorted_truths(truths)?;
    let mut sums = [(T::zero(), T::zero(), 0usize); 3];

    for record in &images {
        let dets = confident(detections.get(&record.image_id), conf_threshold)?;
        let buckets = record
            .boxes
            .iter()
            .map(|b| relative_area(b, record.width, record.height).map(size_bucket))
            .collect::<Result<Vec<_>>>()?;
        let full = match_detections(&dets, &record.boxes, iou_threshold)?;

        for (slot, bucket) in SizeBucket::ALL.into_iter().enumerate() {
            let kept_dets: Vec<_> = dets
                .iter()
                .enumerate()
                .filter(|(i, _)| {
                    !full
                        .matched_pairs
                        .iter()
                        .any(|p| p.detection == *i && buckets[p.truth] != bucket)
                })
                .map(|(_, d)| *d)
                .collect();
            let bucket_truths: Vec<_> = record
                .boxes
                .iter()
                .zip(&buckets)
                .filter(|(_, b)| **b == bucket)
                .map(|(t, _)| *t)
                .collect();
            let m = match_detections(&kept_dets, &bucket_truths, iou_threshold)?;
            let entry = &mut sums[slot];
            entry.0 = entry.0 + precision(&m);
            entry.1 = entry.1 + recall(&m);
            entry.2 += bucket_truths.len();
        }
    }

    let n = images.len();
    let score = |(p, r, truths): (T, T, usize)| {
        if n == 0 {
            StratumScore {
                ap: T::one(),
                ar: T::one(),
                truths,
            }
        } else {
            StratumScore {
                ap: p / T::from_count(n),
                ar: r / T::from_count(n),
                truths,
            }
        }
    };
    Ok(SizeStrata {
        small: score(sums[0]),
        medium: score(sums[1]),
        large: score(sums[2]),
    })
}
