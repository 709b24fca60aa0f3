//! Detection scoring: greedy matching, per-image precision/recall averaged
//! over the test images, false alarm rate and size-stratified scores.

mod matching;
mod report;
mod strata;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

pub use matching::{far, match_detections, precision, recall, MatchResult, MatchedPair};
pub use report::{EvalReport, ImageScore};
pub use strata::{size_bucket, size_stratified, SizeBucket, SizeStrata, StratumScore};

use crate::dataset::{DetectionsByImage, ImageRecord};
use crate::decoder::rank_order;
use crate::error::{Error, Result};
use crate::geometry::BoundingBox;
use crate::scalar::Scalar;

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

/// How `ap` in the report is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ApMode {
    /// Mean over images of per-image precision.
    #[default]
    PerImage,
    /// All-point interpolated area under the pooled precision/recall curve.
    Voc,
}

impl FromStr for ApMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-image" => Ok(Self::PerImage),
            "voc" => Ok(Self::Voc),
            other => Err(Error::InvalidArgument(format!("unknown AP mode `{other}`"))),
        }
    }
}

impl fmt::Display for ApMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PerImage => "per-image",
            Self::Voc => "voc",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig<T> {
    pub iou_threshold: T,
    pub conf_threshold: T,
    pub ap_mode: ApMode,
    pub size_strata: bool,
}

impl<T: Scalar> Default for EvalConfig<T> {
    fn default() -> Self {
        Self {
            iou_threshold: T::lit(DEFAULT_IOU_THRESHOLD),
            conf_threshold: T::lit(crate::decoder::DEFAULT_CONF_THRESHOLD),
            ap_mode: ApMode::PerImage,
            size_strata: false,
        }
    }
}

/// Truth records sorted by image id, rejecting duplicates.
pub(crate) fn sorted_truths<T>(truths: &[ImageRecord<T>]) -> Result<Vec<&ImageRecord<T>>> {
    let mut sorted: Vec<&ImageRecord<T>> = truths.iter().collect();
    sorted.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    if let Some(pair) = sorted.windows(2).find(|w| w[0].image_id == w[1].image_id) {
        return Err(Error::Dataset(format!(
            "duplicate image id `{}`",
            pair[0].image_id
        )));
    }
    Ok(sorted)
}

pub(crate) fn confident<T: Scalar>(
    dets: Option<&Vec<BoundingBox<T>>>,
    conf_threshold: T,
) -> Result<Vec<BoundingBox<T>>> {
    let Some(dets) = dets else {
        return Ok(Vec::new());
    };
    let mut kept = Vec::with_capacity(dets.len());
    for (i, d) in dets.iter().enumerate() {
        let conf = d.confidence.ok_or(Error::MissingConfidence(i))?;
        if conf >= conf_threshold {
            kept.push(*d);
        }
    }
    Ok(kept)
}

fn mean<T: Scalar>(values: impl Iterator<Item = T>) -> T {
    let (sum, n) = values.fold((T::zero(), 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        T::one()
    } else {
        sum / T::from_count(n)
    }
}

/// Detections of one image flagged with whether they matched.
type Ranked<T> = Vec<(BoundingBox<T>, bool)>;

/// All-point interpolated AP over detections pooled across images.
fn voc_average_precision<T: Scalar>(ranked: &mut [(BoundingBox<T>, bool)], total_truths: usize) -> T {
    if total_truths == 0 {
        return if ranked.is_empty() { T::one() } else { T::zero() };
    }
    ranked.sort_by(|a, b| rank_order(&a.0, &b.0));
    let mut curve = Vec::with_capacity(ranked.len());
    let mut tp = 0usize;
    for (i, (_, hit)) in ranked.iter().enumerate() {
        if *hit {
            tp += 1;
        }
        curve.push((
            T::from_count(tp) / T::from_count(total_truths),
            T::from_count(tp) / T::from_count(i + 1),
        ));
    }
    // Precision envelope, right to left.
    for i in (0..curve.len().saturating_sub(1)).rev() {
        curve[i].1 = curve[i].1.max(curve[i + 1].1);
    }
    let mut ap = T::zero();
    let mut prev_recall = T::zero();
    for (r, p) in curve {
        ap = ap + (r - prev_recall) * p;
        prev_recall = r;
    }
    ap
}

/// Scores detections against every truth image.
///
/// Detections below `conf_threshold` are discarded first. Images are
/// processed in image-id order, so the result does not depend on input order.
/// Detections for images without a truth record are counted in
/// [`EvalReport::unknown_images`] and otherwise ignored.
pub fn evaluate<T: Scalar>(
    detections: &DetectionsByImage<T>,
    truths: &[ImageRecord<T>],
    config: &EvalConfig<T>,
) -> Result<EvalReport<T>> {
    let images = sorted_truths(truths)?;
    let known: BTreeSet<&str> = images.iter().map(|r| r.image_id.as_str()).collect();
    let unknown_images: Vec<String> = detections
        .keys()
        .filter(|id| !known.contains(id.as_str()))
        .cloned()
        .collect();

    let scored: Vec<(ImageScore<T>, Ranked<T>)> = images
        .par_iter()
        .map(|record| {
            let dets = confident(detections.get(&record.image_id), config.conf_threshold)?;
            let m = match_detections(&dets, &record.boxes, config.iou_threshold)?;
            let mut hits = vec![false; dets.len()];
            for pair in &m.matched_pairs {
                hits[pair.detection] = true;
            }
            let ranked = dets.into_iter().zip(hits).collect();
            Ok((ImageScore::new(record.image_id.clone(), &m), ranked))
        })
        .collect::<Result<_>>()?;

    let per_image: Vec<ImageScore<T>> = scored.iter().map(|(s, _)| s.clone()).collect();
    let (ap, ar) = match config.ap_mode {
        ApMode::PerImage => (
            mean(per_image.iter().map(|s| s.precision)),
            mean(per_image.iter().map(|s| s.recall)),
        ),
        ApMode::Voc => {
            let mut pooled: Vec<(BoundingBox<T>, bool)> = scored.into_iter().flat_map(|(_, r)| r).collect();
            let total_truths: usize = per_image
                .iter()
                .map(|s| s.true_positives + s.false_negatives)
                .sum();
            let total_tp: usize = per_image.iter().map(|s| s.true_positives).sum();
            let ar = if total_truths == 0 {
                T::one()
            } else {
                T::from_count(total_tp) / T::from_count(total_truths)
            };
            (voc_average_precision(&mut pooled, total_truths), ar)
        }
    };

    let strata = if config.size_strata {
        Some(size_stratified(
            detections,
            truths,
            config.iou_threshold,
            config.conf_threshold,
        )?)
    } else {
        None
    };

    Ok(EvalReport {
        per_image,
        ap,
        ar,
        far: far(ap),
        ap_mode: config.ap_mode,
        unknown_images,
        strata,
    })
}
