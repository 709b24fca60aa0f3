use std::fmt::Write as _;

use super::{precision, recall, ApMode, MatchResult, SizeBucket, SizeStrata};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct ImageScore<T> {
    pub image_id: String,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: T,
    pub recall: T,
}

impl<T: Scalar> ImageScore<T> {
    pub fn new(image_id: String, m: &MatchResult<T>) -> Self {
        Self {
            image_id,
            true_positives: m.true_positives,
            false_positives: m.false_positives,
            false_negatives: m.false_negatives,
            precision: precision(m),
            recall: recall(m),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport<T> {
    /// Sorted by image id.
    pub per_image: Vec<ImageScore<T>>,
    pub ap: T,
    pub ar: T,
    /// Always `1 - ap`.
    pub far: T,
    pub ap_mode: ApMode,
    /// Detection image ids with no truth record.
    pub unknown_images: Vec<String>,
    pub strata: Option<SizeStrata<T>>,
}

impl<T: Scalar> EvalReport<T> {
    /// Machine-readable `key=value` lines with a fixed key order.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let (tp, fp, fn_) = self.per_image.iter().fold((0, 0, 0), |acc, s| {
            (
                acc.0 + s.true_positives,
                acc.1 + s.false_positives,
                acc.2 + s.false_negatives,
            )
        });
        let _ = writeln!(out, "ap_mode={}", self.ap_mode);
        let _ = writeln!(out, "images={}", self.per_image.len());
        let _ = writeln!(out, "tp={tp}\nfp={fp}\nfn={fn_}");
        let _ = writeln!(out, "ap={:.6}", self.ap);
        let _ = writeln!(out, "ar={:.6}", self.ar);
        let _ = writeln!(out, "far={:.6}", self.far);
        if let Some(strata) = &self.strata {
            for bucket in SizeBucket::ALL {
                let s = strata.get(bucket);
                let _ = writeln!(out, "map_{bucket}={:.6}", s.ap);
                let _ = writeln!(out, "mar_{bucket}={:.6}", s.ar);
                let _ = writeln!(out, "truths_{bucket}={}", s.truths);
            }
        }
        let _ = writeln!(out, "unknown_images={}", self.unknown_images.len());
        out
    }

    /// Human-readable per-image table followed by the totals.
    pub fn to_table(&self) -> String {
        let width = self
            .per_image
            .iter()
            .map(|s| s.image_id.len())
            .max()
            .unwrap_or(0)
            .max("image".len());
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>5}  {:>5}  {:>5}  {:>9}  {:>9}",
            "image", "tp", "fp", "fn", "precision", "recall"
        );
        for s in &self.per_image {
            let _ = writeln!(
                out,
                "{:<width$}  {:>5}  {:>5}  {:>5}  {:>9.4}  {:>9.4}",
                s.image_id, s.true_positives, s.false_positives, s.false_negatives, s.precision, s.recall
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "AP  {:.4}  ({})", self.ap, self.ap_mode);
        let _ = writeln!(out, "AR  {:.4}", self.ar);
        let _ = writeln!(out, "FAR {:.4}", self.far);
        if let Some(strata) = &self.strata {
            let _ = writeln!(out);
            let _ = writeln!(out, "{:<6}  {:>6}  {:>6}  {:>6}", "size", "truths", "mAP", "mAR");
            for bucket in SizeBucket::ALL {
                let s = strata.get(bucket);
                let _ = writeln!(
                    out,
                    "{:<6}  {:>6}  {:>6.4}  {:>6.4}",
                    bucket.name(),
                    s.truths,
                    s.ap,
                    s.ar
                );
            }
        }
        out
    }
}
