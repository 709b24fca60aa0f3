//! Anchor estimation by k-means over box dimensions with `1 - IoU` distance.
//!
//! Boxes and centroids are compared co-centered, so only `(w, h)` matter and
//! the distance is invariant to a common rescaling of all dimensions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::decoder::AnchorBox;
use crate::error::{Error, Result};
use crate::scalar::{cmp_scalar, Scalar};

pub const DEFAULT_K: usize = 5;
pub const DEFAULT_MAX_ITERS: usize = 300;

/// IoU of two boxes sharing the same center.
pub fn cocentered_iou<T: Scalar>(a: &AnchorBox<T>, b: &AnchorBox<T>) -> T {
    let inter = a.w.min(b.w) * a.h.min(b.h);
    inter / (a.area() + b.area() - inter)
}

fn best_match<T: Scalar>(bx: &AnchorBox<T>, anchors: &[AnchorBox<T>]) -> (usize, T) {
    anchors
        .iter()
        .map(|a| cocentered_iou(bx, a))
        .enumerate()
        .fold(
            (0, T::neg_infinity()),
            |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
        )
}

/// Mean over `boxes` of the best co-centered IoU against any anchor.
pub fn mean_best_iou<T: Scalar>(boxes: &[AnchorBox<T>], anchors: &[AnchorBox<T>]) -> Result<T> {
    if boxes.is_empty() || anchors.is_empty() {
        return Err(Error::InvalidArgument(
            "mean_best_iou needs at least one box and one anchor".into(),
        ));
    }
    let total: T = boxes.iter().map(|b| best_match(b, anchors).1).sum();
    Ok(total / T::from_count(boxes.len()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansOutcome<T> {
    /// Centroids sorted by area, smallest first.
    pub anchors: Vec<AnchorBox<T>>,
    /// `mean_best_iou` after seeding and after every update step.
    pub mean_iou_history: Vec<T>,
    pub iterations: usize,
    /// Whether the assignments stabilised before `max_iters`.
    pub converged: bool,
}

fn distinct_count<T: Scalar>(boxes: &[AnchorBox<T>]) -> usize {
    let mut sorted: Vec<(T, T)> = boxes.iter().map(|b| (b.w, b.h)).collect();
    sorted.sort_by(|a, b| cmp_scalar(a.0, b.0).then(cmp_scalar(a.1, b.1)));
    sorted.dedup();
    sorted.len()
}

/// k-means++ seeding with probability proportional to squared distance.
fn seed_centroids<T: Scalar>(boxes: &[AnchorBox<T>], k: usize, rng: &mut ChaCha8Rng) -> Vec<AnchorBox<T>> {
    let mut centroids = vec![boxes[rng.gen_range(0..boxes.len())]];
    let mut nearest: Vec<T> = boxes
        .iter()
        .map(|b| T::one() - cocentered_iou(b, &centroids[0]))
        .collect();
    while centroids.len() < k {
        let weights: Vec<T> = nearest.iter().map(|d| *d * *d).collect();
        let total: T = weights.iter().copied().sum();
        let pick = if total > T::zero() {
            let target = T::lit(rng.gen::<f64>()) * total;
            let mut acc = T::zero();
            let mut chosen = None;
            for (i, w) in weights.iter().enumerate() {
                acc = acc + *w;
                if *w > T::zero() && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            // Rounding can leave the target past the last partial sum.
            chosen.unwrap_or_else(|| weights.iter().rposition(|w| *w > T::zero()).unwrap())
        } else {
            boxes
                .iter()
                .position(|b| !centroids.contains(b))
                .expect("fewer centroids than distinct boxes")
        };
        let chosen = boxes[pick];
        centroids.push(chosen);
        for (d, b) in nearest.iter_mut().zip(boxes) {
            *d = d.min(T::one() - cocentered_iou(b, &chosen));
        }
    }
    centroids
}

fn mean_box<T: Scalar>(boxes: &[AnchorBox<T>], members: &[usize]) -> AnchorBox<T> {
    let n = T::from_count(members.len());
    let w: T = members.iter().map(|&i| boxes[i].w).sum();
    let h: T = members.iter().map(|&i| boxes[i].h).sum();
    AnchorBox { w: w / n, h: h / n }
}

fn cluster_fit<T: Scalar>(boxes: &[AnchorBox<T>], members: &[usize], c: &AnchorBox<T>) -> T {
    members.iter().map(|&i| cocentered_iou(&boxes[i], c)).sum()
}

/// Lloyd iteration with `1 - IoU` distance.
///
/// Each update moves a centroid to the mean `(w, h)` of its members unless
/// that would lower the members' total IoU, in which case the centroid stays.
/// Empty clusters are reseeded to the box farthest from its own centroid.
/// Stops when assignments repeat or after `max_iters` updates.
pub fn kmeans_anchors<T: Scalar>(
    boxes: &[AnchorBox<T>],
    k: usize,
    seed: u64,
    max_iters: usize,
) -> Result<KMeansOutcome<T>> {
    if boxes.is_empty() {
        return Err(Error::InvalidArgument("no boxes to cluster".into()));
    }
    if let Some(bad) = boxes
        .iter()
        .find(|b| !(b.w.is_finite() && b.h.is_finite() && b.w > T::zero() && b.h > T::zero()))
    {
        return Err(Error::InvalidArgument(format!(
            "box dims must be positive, got {} x {}",
            bad.w, bad.h
        )));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let distinct = distinct_count(boxes);
    if k > distinct {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds the {distinct} distinct boxes"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(boxes, k, &mut rng);
    let mut history = vec![mean_best_iou(boxes, &centroids)?];
    let mut previous: Option<Vec<usize>> = None;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iters {
        let assignment: Vec<(usize, T)> = boxes.par_iter().map(|b| best_match(b, &centroids)).collect();
        let labels: Vec<usize> = assignment.iter().map(|(c, _)| *c).collect();
        if previous.as_ref() == Some(&labels) {
            converged = true;
            break;
        }

        let mut members = vec![Vec::new(); k];
        for (i, &c) in labels.iter().enumerate() {
            members[c].push(i);
        }
        let mut next = centroids.clone();
        for (c, m) in members.iter().enumerate() {
            if m.is_empty() {
                continue;
            }
            let candidate = mean_box(boxes, m);
            if cluster_fit(boxes, m, &candidate) >= cluster_fit(boxes, m, &centroids[c]) {
                next[c] = candidate;
            }
        }
        let mut distance: Vec<T> = assignment.iter().map(|(_, v)| T::one() - *v).collect();
        for (c, m) in members.iter().enumerate() {
            if !m.is_empty() {
                continue;
            }
            let far = distance
                .iter()
                .enumerate()
                .fold(0, |best, (i, d)| if *d > distance[best] { i } else { best });
            next[c] = boxes[far];
            distance[far] = T::zero();
        }

        let score = mean_best_iou(boxes, &next)?;
        iterations += 1;
        if score < *history.last().unwrap() {
            // Only reachable through summation-order rounding.
            converged = true;
            break;
        }
        centroids = next;
        history.push(score);
        previous = Some(labels);
    }

    centroids.sort_by(|a, b| cmp_scalar(a.area(), b.area()).then(cmp_scalar(a.w, b.w)));
    Ok(KMeansOutcome {
        anchors: centroids,
        mean_iou_history: history,
        iterations,
        converged,
    })
}

/// Drops the `n` largest anchors by area, keeping the survivors' order.
/// Among equal areas the later anchor goes first.
pub fn prune_largest<T: Scalar>(anchors: &[AnchorBox<T>], n: usize) -> Result<Vec<AnchorBox<T>>> {
    if n >= anchors.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot prune {n} of {} anchors",
            anchors.len()
        )));
    }
    let mut by_size: Vec<usize> = (0..anchors.len()).collect();
    by_size.sort_by(|&i, &j| cmp_scalar(anchors[j].area(), anchors[i].area()).then(j.cmp(&i)));
    let removed = &by_size[..n];
    Ok(anchors
        .iter()
        .enumerate()
        .filter(|(i, _)| !removed.contains(i))
        .map(|(_, a)| *a)
        .collect())
}

/// `w,h, w,h, ...` as used by the cfg `anchors=` key.
pub fn format_anchor_pairs<T: Scalar>(anchors: &[AnchorBox<T>]) -> String {
    anchors
        .iter()
        .map(|a| format!("{},{}", a.w, a.h))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn parse_anchor_pairs<T: Scalar>(text: &str) -> Result<Vec<AnchorBox<T>>> {
    let values = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map(T::lit)
                .map_err(|_| Error::InvalidArgument(format!("anchor value `{s}` is not a number")))
        })
        .collect::<Result<Vec<T>>>()?;
    if values.len() % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "anchors need an even number of values, got {}",
            values.len()
        )));
    }
    values
        .chunks_exact(2)
        .map(|p| AnchorBox::new(p[0], p[1]))
        .collect()
}
