//! Annotation and detection files, dataset statistics and sequence-aware splits.
//!
//! Annotation lines: `image_id sequence_id image_w image_h class_id cx cy w h`.
//! A line holding only the first four columns declares an image without
//! boxes. Detection lines: `image_id class_id confidence cx cy w h`. All
//! coordinates are center-based pixels.

mod split;
mod stats;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

pub use split::{split, Split, SplitConfig};
pub use stats::{compute_stats, DatasetStats, RatioMode};

use crate::error::{Error, Result};
use crate::geometry::BoundingBox;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct ImageRecord<T> {
    pub image_id: String,
    pub sequence_id: String,
    pub width: T,
    pub height: T,
    pub boxes: Vec<BoundingBox<T>>,
}

#[derive(Debug, Clone)]
pub struct Annotations<T> {
    /// In order of first appearance.
    pub records: Vec<ImageRecord<T>>,
    pub warnings: Vec<String>,
}

impl<T> Annotations<T> {
    pub fn clamped_boxes(&self) -> usize {
        self.warnings.len()
    }
}

/// Detections keyed by image id.
pub type DetectionsByImage<T> = BTreeMap<String, Vec<BoundingBox<T>>>;

struct LineCursor<'a> {
    source: &'a str,
    line: usize,
    fields: Vec<&'a str>,
}

impl<'a> LineCursor<'a> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Annotation {
            path: self.source.to_string(),
            line: self.line,
            message: message.into(),
        }
    }

    fn number<T: Scalar>(&self, idx: usize, name: &str) -> Result<T> {
        let raw = self.fields[idx];
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(T::lit)
            .ok_or_else(|| self.error(format!("{name} `{raw}` is not a finite number")))
    }

    fn class_id(&self, idx: usize) -> Result<u32> {
        let raw = self.fields[idx];
        raw.parse()
            .map_err(|_| self.error(format!("class id `{raw}` is not a non-negative integer")))
    }

    fn bbox<T: Scalar>(&self, class_idx: usize, first_coord: usize) -> Result<BoundingBox<T>> {
        let class_id = self.class_id(class_idx)?;
        BoundingBox::new(
            self.number(first_coord, "cx")?,
            self.number(first_coord + 1, "cy")?,
            self.number(first_coord + 2, "w")?,
            self.number(first_coord + 3, "h")?,
            class_id,
        )
        .map_err(|e| self.error(e.to_string()))
    }
}

fn lines<'a>(text: &'a str, source: &'a str) -> impl Iterator<Item = LineCursor<'a>> {
    text.lines().enumerate().filter_map(move |(i, raw)| {
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            return None;
        }
        Some(LineCursor {
            source,
            line: i + 1,
            fields: trimmed.split_whitespace().collect(),
        })
    })
}

/// Parses annotation text. `source` names the input in error messages.
pub fn parse_annotations<T: Scalar>(text: &str, source: &str) -> Result<Annotations<T>> {
    let mut records: Vec<ImageRecord<T>> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut warnings = Vec::new();

    for cursor in lines(text, source) {
        let n = cursor.fields.len();
        if n != 9 && n != 4 {
            return Err(cursor.error(format!("expected 9 columns (or 4 for an empty image), got {n}")));
        }
        let image_id = cursor.fields[0];
        let sequence_id = cursor.fields[1];
        let width: T = cursor.number(2, "image width")?;
        let height: T = cursor.number(3, "image height")?;
        if !(width > T::zero() && height > T::zero()) {
            return Err(cursor.error(format!("image size must be positive, got {width} x {height}")));
        }

        let slot = match index.get(image_id) {
            Some(&slot) => {
                let rec = &records[slot];
                if rec.sequence_id != sequence_id || rec.width != width || rec.height != height {
                    return Err(cursor.error(format!(
                        "image `{image_id}` redeclared with a different sequence or size"
                    )));
                }
                slot
            }
            None => {
                index.insert(image_id.to_string(), records.len());
                records.push(ImageRecord {
                    image_id: image_id.to_string(),
                    sequence_id: sequence_id.to_string(),
                    width,
                    height,
                    boxes: Vec::new(),
                });
                records.len() - 1
            }
        };
        if n == 4 {
            continue;
        }

        let bx = cursor.bbox::<T>(4, 5)?;
        if bx.is_within(width, height) {
            records[slot].boxes.push(bx);
            continue;
        }
        match bx.clamped(width, height) {
            Some(clipped) => {
                warnings.push(format!(
                    "{source}:{}: box clamped to the image bounds of `{image_id}`",
                    cursor.line
                ));
                records[slot].boxes.push(clipped);
            }
            None => warnings.push(format!(
                "{source}:{}: box lies entirely outside `{image_id}`, dropped",
                cursor.line
            )),
        }
    }
    Ok(Annotations { records, warnings })
}

pub fn load_annotations<T: Scalar>(path: impl AsRef<Path>) -> Result<Annotations<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_annotations(&text, &path.display().to_string())
}

pub fn parse_detections<T: Scalar>(text: &str, source: &str) -> Result<DetectionsByImage<T>> {
    let mut out: DetectionsByImage<T> = BTreeMap::new();
    for cursor in lines(text, source) {
        if cursor.fields.len() != 7 {
            return Err(cursor.error(format!("expected 7 columns, got {}", cursor.fields.len())));
        }
        let confidence: T = cursor.number(2, "confidence")?;
        let bx = cursor
            .bbox::<T>(1, 3)?
            .with_confidence(confidence)
            .map_err(|e| cursor.error(e.to_string()))?;
        out.entry(cursor.fields[0].to_string()).or_default().push(bx);
    }
    Ok(out)
}

pub fn load_detections<T: Scalar>(path: impl AsRef<Path>) -> Result<DetectionsByImage<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_detections(&text, &path.display().to_string())
}

/// One detection line, coordinates to four decimals, confidence to six.
pub fn format_detection<T: Scalar>(image_id: &str, bx: &BoundingBox<T>) -> String {
    format!(
        "{image_id} {} {:.6} {:.4} {:.4} {:.4} {:.4}",
        bx.class_id,
        bx.confidence.unwrap_or_else(T::one),
        bx.cx,
        bx.cy,
        bx.w,
        bx.h
    )
}

pub fn format_annotations<T: Scalar>(records: &[ImageRecord<T>]) -> String {
    let mut out = String::new();
    for rec in records {
        if rec.boxes.is_empty() {
            let _ = writeln!(
                out,
                "{} {} {} {}",
                rec.image_id, rec.sequence_id, rec.width, rec.height
            );
        }
        for b in &rec.boxes {
            let _ = writeln!(
                out,
                "{} {} {} {} {} {} {} {} {}",
                rec.image_id, rec.sequence_id, rec.width, rec.height, b.class_id, b.cx, b.cy, b.w, b.h
            );
        }
    }
    out
}
