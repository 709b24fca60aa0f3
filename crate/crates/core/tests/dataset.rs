mod common;

use std::collections::BTreeSet;

use aerodet_core::dataset::{
    compute_stats, format_annotations, parse_annotations, split, ImageRecord, RatioMode, SplitConfig,
};
use aerodet_core::geometry::{intersects, BoundingBox};
use common::{rng, synthetic_corpus};
use rand::seq::SliceRandom;
use rand::Rng;

// Shared size spread for the published-ratio corpora: boxes alternate between
// (1 + s) and (1 - s) times the published mean, so E[scale^2] = 1 + s^2.
const SPREAD: f64 = 0.141_421_356_237_309_5;

#[test]
fn published_area_ratios_from_synthetic_corpora() {
    // (image w, image h, mean box w, mean box h, published ratio)
    let rows = [
        ("VEDAI", 1024.0, 1024.0, 41.2, 40.8, 0.0016),
        ("DLR3k", 5616.0, 3744.0, 30.4, 30.0, 0.00004),
        ("AFVID 2", 1600.0, 1200.0, 55.6, 63.7, 0.0019),
    ];
    for (name, iw, ih, bw, bh, published) in rows {
        let corpus = synthetic_corpus(iw, ih, bw, bh, SPREAD, 4, 8);
        let s = compute_stats(&corpus, RatioMode::MeanOfRatios).unwrap();
        assert!((s.mean_box_w - bw).abs() < 1e-9, "{name}");
        assert!((s.mean_box_h - bh).abs() < 1e-9, "{name}");
        assert!(
            (s.area_ratio - published).abs() <= 5e-5,
            "{name}: {}",
            s.area_ratio
        );
        // Straight recomputation of the mean of ratios.
        let expected = bw * bh * (1.0 + SPREAD * SPREAD) / (iw * ih);
        assert!(
            (s.area_ratio - expected).abs() < 1e-12 * expected.max(1.0),
            "{name}"
        );
    }
}

#[test]
fn ratio_of_means_ignores_spread() {
    let corpus = synthetic_corpus(1024.0, 1024.0, 41.2, 40.8, SPREAD, 3, 6);
    let s = compute_stats(&corpus, RatioMode::RatioOfMeans).unwrap();
    assert!((s.area_ratio - 41.2 * 40.8 / (1024.0 * 1024.0)).abs() < 1e-15);
}

#[test]
fn overlap_percentage_matches_pairwise_count() {
    let mut r = rng(11);
    for _ in 0..50 {
        let boxes: Vec<BoundingBox<f64>> = (0..r.gen_range(1..8))
            .map(|_| {
                BoundingBox::new(
                    r.gen_range(10.0..90.0),
                    r.gen_range(10.0..90.0),
                    r.gen_range(2.0..20.0),
                    r.gen_range(2.0..20.0),
                    0,
                )
                .unwrap()
            })
            .collect();
        let mut overlapping = 0;
        for i in 0..boxes.len() {
            if (0..boxes.len()).any(|j| j != i && intersects(&boxes[i], &boxes[j])) {
                overlapping += 1;
            }
        }
        let rec = ImageRecord {
            image_id: "a".into(),
            sequence_id: "a".into(),
            width: 100.0,
            height: 100.0,
            boxes: boxes.clone(),
        };
        let s = compute_stats(&[rec], RatioMode::MeanOfRatios).unwrap();
        assert!((s.pct_overlapping - 100.0 * overlapping as f64 / boxes.len() as f64).abs() < 1e-12);
    }
}

#[test]
fn annotations_round_trip() {
    let corpus = synthetic_corpus(640.0, 480.0, 20.0, 10.0, 0.25, 3, 5);
    let text = format_annotations(&corpus);
    let parsed = parse_annotations::<f64>(&text, "mem").unwrap();
    assert!(parsed.warnings.is_empty());
    assert_eq!(parsed.records, corpus);
}

#[test]
fn clamped_annotation_is_counted() {
    let a =
        parse_annotations::<f64>("i s 100 100 0 98 50 10 10\ni s 100 100 0 500 50 10 10\n", "mem").unwrap();
    assert_eq!(a.warnings.len(), 2);
    let b = a.records[0].boxes[0];
    assert_eq!((b.cx, b.w), (96.5, 7.0));
    assert_eq!(a.records[0].boxes.len(), 1);
}

fn sequences(sizes: &[usize]) -> Vec<ImageRecord<f64>> {
    let mut out = Vec::new();
    for (s, &n) in sizes.iter().enumerate() {
        for i in 0..n {
            out.push(ImageRecord {
                image_id: format!("s{s:02}_f{i:03}"),
                sequence_id: format!("s{s:02}"),
                width: 64.0,
                height: 64.0,
                boxes: Vec::new(),
            });
        }
    }
    out
}

#[test]
fn ten_equal_sequences_split_six_two_two() {
    let recs = sequences(&[5; 10]);
    for seed in [0, 7, 42] {
        let s = split(
            &recs,
            SplitConfig {
                seed,
                ..SplitConfig::default()
            },
        )
        .unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (6, 2, 2));
    }
}

#[test]
fn three_sequences_hold_out_one_each() {
    let s = split(&sequences(&[40, 3, 2]), SplitConfig::default()).unwrap();
    assert_eq!((s.train.len(), s.val.len(), s.test.len()), (1, 1, 1));
    assert_eq!(s.train, vec!["s00".to_string()]);
}

#[test]
fn independent_stills_split_by_image_count() {
    let s = split(&sequences(&[1; 50]), SplitConfig::default()).unwrap();
    assert_eq!(s.image_counts(&sequences(&[1; 50])), (30, 10, 10));
}

#[test]
fn random_fixtures_never_straddle() {
    for seed in 0..200u64 {
        let mut r = rng(seed);
        let sizes: Vec<usize> = (0..r.gen_range(3..15)).map(|_| r.gen_range(1..30)).collect();
        let mut recs = sequences(&sizes);
        let s = split(
            &recs,
            SplitConfig {
                seed,
                ..SplitConfig::default()
            },
        )
        .unwrap();
        assert!(
            !s.train.is_empty() && !s.val.is_empty() && !s.test.is_empty(),
            "seed {seed}"
        );

        let parts = [&s.train, &s.val, &s.test];
        let all: BTreeSet<&String> = parts.iter().flat_map(|p| p.iter()).collect();
        assert_eq!(all.len(), sizes.len(), "seed {seed}: overlap or loss");
        for rec in &recs {
            let homes = parts.iter().filter(|p| p.contains(&rec.sequence_id)).count();
            assert_eq!(homes, 1);
        }

        recs.shuffle(&mut r);
        assert_eq!(
            split(
                &recs,
                SplitConfig {
                    seed,
                    ..SplitConfig::default()
                }
            )
            .unwrap(),
            s,
            "seed {seed}"
        );
    }
}

#[test]
fn split_rejects_bad_inputs() {
    assert!(split(&sequences(&[3, 3]), SplitConfig::default()).is_err());
    let bad = SplitConfig {
        train_frac: 0.9,
        val_frac: 0.2,
        seed: 0,
    };
    assert!(split(&sequences(&[1; 5]), bad).is_err());
    let zero = SplitConfig {
        train_frac: 0.6,
        val_frac: 0.0,
        seed: 0,
    };
    assert!(split(&sequences(&[1; 5]), zero).is_err());
}
