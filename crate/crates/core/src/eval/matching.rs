use crate::decoder::rank_order;
use crate::error::{Error, Result};
use crate::geometry::{iou, BoundingBox};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedPair<T> {
    pub detection: usize,
    pub truth: usize,
    pub iou: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult<T> {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// Indices refer to the slices passed to [`match_detections`].
    pub matched_pairs: Vec<MatchedPair<T>>,
}

impl<T> MatchResult<T> {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        Self {
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
            matched_pairs: Vec::new(),
        }
    }

    pub fn detections(&self) -> usize {
        self.true_positives + self.false_positives
    }

    pub fn truths(&self) -> usize {
        self.true_positives + self.false_negatives
    }
}

/// Greedy one-to-one matching in descending confidence order.
///
/// Each detection takes the unmatched truth of its class with the highest
/// IoU, provided that IoU reaches `iou_threshold`. Equal IoUs go to the
/// lower truth index.
pub fn match_detections<T: Scalar>(
    detections: &[BoundingBox<T>],
    truths: &[BoundingBox<T>],
    iou_threshold: T,
) -> Result<MatchResult<T>> {
    if !(iou_threshold > T::zero() && iou_threshold <= T::one()) {
        return Err(Error::InvalidArgument(format!(
            "IoU threshold {iou_threshold} outside (0, 1]"
        )));
    }
    if let Some(missing) = detections.iter().position(|d| d.confidence.is_none()) {
        return Err(Error::MissingConfidence(missing));
    }

    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&i, &j| {
        rank_order(&detections[i], &detections[j])
            .then(detections[i].class_id.cmp(&detections[j].class_id))
            .then(i.cmp(&j))
    });

    let mut taken = vec![false; truths.len()];
    let mut pairs = Vec::new();
    for det_idx in order {
        let det = &detections[det_idx];
        let mut best: Option<(usize, T)> = None;
        for (truth_idx, truth) in truths.iter().enumerate() {
            if taken[truth_idx] || truth.class_id != det.class_id {
                continue;
            }
            let overlap = iou(det, truth);
            if overlap >= iou_threshold && best.is_none_or(|(_, b)| overlap > b) {
                best = Some((truth_idx, overlap));
            }
        }
        if let Some((truth_idx, overlap)) = best {
            taken[truth_idx] = true;
            pairs.push(MatchedPair {
                detection: det_idx,
                truth: truth_idx,
                iou: overlap,
            });
        }
    }

    let tp = pairs.len();
    Ok(MatchResult {
        true_positives: tp,
        false_positives: detections.len() - tp,
        false_negatives: truths.len() - tp,
        matched_pairs: pairs,
    })
}

/// `tp / (tp + fp)`, and 1 when there are no detections.
pub fn precision<T: Scalar>(m: &MatchResult<T>) -> T {
    match m.detections() {
        0 => T::one(),
        n => T::from_count(m.true_positives) / T::from_count(n),
    }
}

/// `tp / (tp + fn)`, and 1 when there is nothing to find.
pub fn recall<T: Scalar>(m: &MatchResult<T>) -> T {
    match m.truths() {
        0 => T::one(),
        n => T::from_count(m.true_positives) / T::from_count(n),
    }
}

/// False alarm rate, `1 - precision`.
pub fn far<T: Scalar>(precision: T) -> T {
    T::one() - precision
}
