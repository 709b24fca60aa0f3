use std::fmt;
use std::str::FromStr;

use super::ImageRecord;
use crate::error::{Error, Result};
use crate::geometry::{intersects, relative_area};
use crate::scalar::Scalar;

/// How the target-to-image area ratio is aggregated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RatioMode {
    /// Mean over boxes of `box area / image area`.
    #[default]
    MeanOfRatios,
    /// `mean_w * mean_h / mean image area`.
    RatioOfMeans,
}

impl FromStr for RatioMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean-of-ratios" => Ok(Self::MeanOfRatios),
            "ratio-of-means" => Ok(Self::RatioOfMeans),
            other => Err(Error::InvalidArgument(format!("unknown ratio mode `{other}`"))),
        }
    }
}

impl fmt::Display for RatioMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::MeanOfRatios => "mean-of-ratios",
            Self::RatioOfMeans => "ratio-of-means",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats<T> {
    pub num_images: usize,
    pub num_boxes: usize,
    pub mean_box_w: T,
    pub mean_box_h: T,
    pub area_ratio: T,
    /// Percentage of boxes that intersect at least one other box in the same image.
    pub pct_overlapping: T,
}

pub fn compute_stats<T: Scalar>(records: &[ImageRecord<T>], mode: RatioMode) -> Result<DatasetStats<T>> {
    let num_boxes: usize = records.iter().map(|r| r.boxes.len()).sum();
    if num_boxes == 0 {
        return Err(Error::Dataset("no boxes to summarise".into()));
    }
    let n = T::from_count(num_boxes);
    let boxes = || records.iter().flat_map(|r| r.boxes.iter().map(move |b| (r, b)));

    let mean_box_w = boxes().map(|(_, b)| b.w).sum::<T>() / n;
    let mean_box_h = boxes().map(|(_, b)| b.h).sum::<T>() / n;
    let area_ratio = match mode {
        RatioMode::MeanOfRatios => {
            let mut total = T::zero();
            for (r, b) in boxes() {
                total = total + relative_area(b, r.width, r.height)?;
            }
            total / n
        }
        RatioMode::RatioOfMeans => {
            let image_area = boxes().map(|(r, _)| r.width * r.height).sum::<T>() / n;
            mean_box_w * mean_box_h / image_area
        }
    };

    let overlapping: usize = records
        .iter()
        .map(|r| {
            (0..r.boxes.len())
                .filter(|&i| {
                    r.boxes
                        .iter()
                        .enumerate()
                        .any(|(j, other)| j != i && intersects(&r.boxes[i], other))
                })
                .count()
        })
        .sum();

    Ok(DatasetStats {
        num_images: records.len(),
        num_boxes,
        mean_box_w,
        mean_box_h,
        area_ratio,
        pct_overlapping: T::lit(100.0) * T::from_count(overlapping) / n,
    })
}
