#![allow(dead_code)]

pub mod tables;

use std::path::PathBuf;

use aerodet_core::dataset::ImageRecord;
use aerodet_core::geometry::BoundingBox;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Geometry oracle: corner arithmetic written out longhand.

pub fn oracle_iou(a: &BoundingBox<f64>, b: &BoundingBox<f64>) -> f64 {
    let (ax0, ax1) = (a.cx - a.w / 2.0, a.cx + a.w / 2.0);
    let (ay0, ay1) = (a.cy - a.h / 2.0, a.cy + a.h / 2.0);
    let (bx0, bx1) = (b.cx - b.w / 2.0, b.cx + b.w / 2.0);
    let (by0, by1) = (b.cy - b.h / 2.0, b.cy + b.h / 2.0);
    let iw = (ax1.min(bx1) - ax0.max(bx0)).max(0.0);
    let ih = (ay1.min(by1) - ay0.max(by0)).max(0.0);
    let inter = iw * ih;
    if inter == 0.0 {
        return 0.0;
    }
    inter / (a.w * a.h + b.w * b.h - inter)
}

// ---------------------------------------------------------------------------
// Matching oracles.

/// Candidate truths per detection: same class, IoU at or above threshold.
fn candidates(dets: &[BoundingBox<f64>], truths: &[BoundingBox<f64>], thr: f64) -> Vec<Vec<usize>> {
    dets.iter()
        .map(|d| {
            (0..truths.len())
                .filter(|&t| truths[t].class_id == d.class_id && oracle_iou(d, &truths[t]) >= thr)
                .collect()
        })
        .collect()
}

/// Maximum one-to-one assignment size, by exhaustive search.
pub fn optimal_tp(dets: &[BoundingBox<f64>], truths: &[BoundingBox<f64>], thr: f64) -> usize {
    fn search(cands: &[Vec<usize>], det: usize, used: &mut Vec<bool>) -> usize {
        if det == cands.len() {
            return 0;
        }
        let mut best = search(cands, det + 1, used);
        for &t in &cands[det] {
            if !used[t] {
                used[t] = true;
                best = best.max(1 + search(cands, det + 1, used));
                used[t] = false;
            }
        }
        best
    }
    let cands = candidates(dets, truths, thr);
    search(&cands, 0, &mut vec![false; truths.len()])
}

/// True when some detection could match two or more truths; the only
/// situation in which confidence-ordered greedy matching can lose a match.
pub fn has_ambiguous_detection(dets: &[BoundingBox<f64>], truths: &[BoundingBox<f64>], thr: f64) -> bool {
    candidates(dets, truths, thr).iter().any(|c| c.len() >= 2)
}

/// Greedy trace written independently: repeatedly pick the highest-ranked
/// unprocessed detection and give it its best free candidate.
pub fn reference_greedy_tp(dets: &[BoundingBox<f64>], truths: &[BoundingBox<f64>], thr: f64) -> usize {
    let mut remaining: Vec<usize> = (0..dets.len()).collect();
    let mut free = vec![true; truths.len()];
    let mut tp = 0;
    while !remaining.is_empty() {
        let mut pick = 0;
        for k in 1..remaining.len() {
            let (a, b) = (&dets[remaining[k]], &dets[remaining[pick]]);
            let key =
                |d: &BoundingBox<f64>| (-d.confidence.unwrap(), d.cx, d.cy, d.w, d.h, d.class_id as f64);
            if key(a) < key(b) {
                pick = k;
            }
        }
        let d = &dets[remaining.remove(pick)];
        let mut best: Option<(usize, f64)> = None;
        for t in 0..truths.len() {
            if !free[t] || truths[t].class_id != d.class_id {
                continue;
            }
            let v = oracle_iou(d, &truths[t]);
            if v >= thr && best.is_none_or(|(_, bv)| v > bv) {
                best = Some((t, v));
            }
        }
        if let Some((t, _)) = best {
            free[t] = false;
            tp += 1;
        }
    }
    tp
}

// ---------------------------------------------------------------------------
// Decode oracle: one scalar at a time, in f64.

#[derive(Debug, Clone, Copy)]
pub struct OracleBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    pub conf: f64,
    pub class_id: u32,
}

#[allow(clippy::too_many_arguments)]
pub fn oracle_decode(
    data: &[f32],
    grid_w: usize,
    grid_h: usize,
    anchors: &[(f64, f64)],
    classes: usize,
    image_w: f64,
    image_h: f64,
    threshold: f64,
) -> Vec<OracleBox> {
    let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
    let per = 5 + classes;
    let mut out = Vec::new();
    for row in 0..grid_h {
        for col in 0..grid_w {
            for (a, &(aw, ah)) in anchors.iter().enumerate() {
                let base = ((row * grid_w + col) * anchors.len() + a) * per;
                let v = |k: usize| data[base + k] as f64;
                let logits: Vec<f64> = (0..classes).map(|c| v(5 + c)).collect();
                let top = logits.iter().cloned().fold(f64::MIN, f64::max);
                let z: f64 = logits.iter().map(|l| (l - top).exp()).sum();
                let class_id = logits.iter().position(|&l| l == top).unwrap();
                let conf = sig(v(4)) * (1.0 / z);
                if conf < threshold {
                    continue;
                }
                let cx = (sig(v(0)) + col as f64) / grid_w as f64 * image_w;
                let cy = (sig(v(1)) + row as f64) / grid_h as f64 * image_h;
                let w = aw * v(2).exp() / grid_w as f64 * image_w;
                let h = ah * v(3).exp() / grid_h as f64 * image_h;
                let x0 = (cx - w / 2.0).clamp(0.0, image_w);
                let x1 = (cx + w / 2.0).clamp(0.0, image_w);
                let y0 = (cy - h / 2.0).clamp(0.0, image_h);
                let y1 = (cy + h / 2.0).clamp(0.0, image_h);
                out.push(OracleBox {
                    cx: (x0 + x1) / 2.0,
                    cy: (y0 + y1) / 2.0,
                    w: x1 - x0,
                    h: y1 - y0,
                    conf,
                    class_id: class_id as u32,
                });
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Anchor oracle: best 2-partition by enumeration.

fn cocentered(a: (f64, f64), b: (f64, f64)) -> f64 {
    let inter = a.0.min(b.0) * a.1.min(b.1);
    inter / (a.0 * a.1 + b.0 * b.1 - inter)
}

pub fn oracle_mean_best_iou(boxes: &[(f64, f64)], centroids: &[(f64, f64)]) -> f64 {
    boxes
        .iter()
        .map(|&b| centroids.iter().map(|&c| cocentered(b, c)).fold(0.0, f64::max))
        .sum::<f64>()
        / boxes.len() as f64
}

/// Centroids of the 2-partition whose member means give the highest mean IoU.
pub fn best_two_partition(boxes: &[(f64, f64)]) -> (Vec<(f64, f64)>, f64) {
    let n = boxes.len();
    let mean = |idx: &[usize]| {
        let k = idx.len() as f64;
        (
            idx.iter().map(|&i| boxes[i].0).sum::<f64>() / k,
            idx.iter().map(|&i| boxes[i].1).sum::<f64>() / k,
        )
    };
    let mut best = (Vec::new(), f64::MIN);
    // Mask bit 0 fixed to the first group to skip mirrored partitions.
    for mask in 0u32..(1 << (n - 1)) {
        let mask = mask << 1 | 1;
        let (a, b): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| mask & (1 << i) != 0);
        if b.is_empty() {
            continue;
        }
        let cents = vec![mean(&a), mean(&b)];
        let score = oracle_mean_best_iou(boxes, &cents);
        if score > best.1 {
            best = (cents, score);
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Synthetic data.

/// Boxes with the given mean size whose sizes alternate between
/// `1 + spread` and `1 - spread` times the mean, laid out on a grid across
/// `images` images of the given size.
pub fn synthetic_corpus(
    image_w: f64,
    image_h: f64,
    mean_w: f64,
    mean_h: f64,
    spread: f64,
    images: usize,
    boxes_per_image: usize,
) -> Vec<ImageRecord<f64>> {
    let cols = (boxes_per_image as f64).sqrt().ceil() as usize;
    let step_x = image_w / (cols as f64 + 1.0);
    let step_y = image_h / (cols as f64 + 1.0);
    (0..images)
        .map(|img| ImageRecord {
            image_id: format!("img{img:03}"),
            sequence_id: format!("img{img:03}"),
            width: image_w,
            height: image_h,
            boxes: (0..boxes_per_image)
                .map(|i| {
                    let scale = if i % 2 == 0 { 1.0 + spread } else { 1.0 - spread };
                    BoundingBox::new(
                        step_x * ((i % cols) as f64 + 1.0),
                        step_y * ((i / cols) as f64 + 1.0),
                        mean_w * scale,
                        mean_h * scale,
                        0,
                    )
                    .unwrap()
                })
                .collect(),
        })
        .collect()
}

/// Boxes clustered around a few centers so that overlaps and ambiguous
/// matches are common.
pub fn clustered_boxes(rng: &mut ChaCha8Rng, count: usize, classes: u32) -> Vec<BoundingBox<f64>> {
    let centers: Vec<(f64, f64)> = (0..2)
        .map(|_| (rng.gen_range(20.0..80.0), rng.gen_range(20.0..80.0)))
        .collect();
    (0..count)
        .map(|_| {
            let (x, y) = centers[rng.gen_range(0..centers.len())];
            BoundingBox::new(
                x + rng.gen_range(-4.0..4.0),
                y + rng.gen_range(-4.0..4.0),
                rng.gen_range(12.0..20.0),
                rng.gen_range(12.0..20.0),
                rng.gen_range(0..classes),
            )
            .unwrap()
        })
        .collect()
}

pub fn with_random_confidence(rng: &mut ChaCha8Rng, boxes: Vec<BoundingBox<f64>>) -> Vec<BoundingBox<f64>> {
    boxes
        .into_iter()
        .map(|b| b.with_confidence(rng.gen_range(0.0..=1.0)).unwrap())
        .collect()
}

/// Single-class boxes piled around one point: most detections can match
/// several truths, which is where greedy and optimal matching can part.
pub fn stacked_boxes(rng: &mut ChaCha8Rng, count: usize) -> Vec<BoundingBox<f64>> {
    (0..count)
        .map(|_| {
            BoundingBox::new(
                50.0 + rng.gen_range(-3.0..3.0),
                50.0 + rng.gen_range(-3.0..3.0),
                rng.gen_range(14.0..18.0),
                rng.gen_range(14.0..18.0),
                0,
            )
            .unwrap()
        })
        .collect()
}
