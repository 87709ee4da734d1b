mod common;

use clustermap_core::hclust::ward_dendrogram;
use clustermap_core::knn::{knn_preservation, DendrogramOracle, DistanceOracle, EuclideanOracle};
use clustermap_core::metrics::class_table;
use clustermap_core::{Embeddings, LabelSet};
use common::rng;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

/// Ranks images by their distance in a random shuffle.
struct ShuffleOracle(Vec<usize>);

impl DistanceOracle for ShuffleOracle {
    fn len(&self) -> usize {
        self.0.len()
    }
    fn distance(&self, i: usize, j: usize) -> f64 {
        self.0[i].abs_diff(self.0[j]) as f64
    }
}

fn two_clusters(r: &mut impl Rng) -> Embeddings {
    let rows: Vec<[f64; 3]> = (0..20)
        .map(|i| {
            let c = if i < 10 { 0.0 } else { 100.0 };
            [c + r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)]
        })
        .collect();
    Embeddings::from_rows(&rows).unwrap()
}

#[test]
fn dendrogram_beats_random_on_separated_clusters() {
    let (mut dendro_total, mut random_total) = (0.0, 0.0);
    for seed in 0..100 {
        let mut r = rng(seed);
        let e = two_clusters(&mut r);
        let d = ward_dendrogram(&e).unwrap();
        let mut perm: Vec<usize> = (0..20).collect();
        perm.shuffle(&mut r);
        let shuffle = ShuffleOracle(perm);
        let dendro = DendrogramOracle::new(&d);
        let report = knn_preservation(
            &EuclideanOracle::new(&e),
            &[("dendrogram", &dendro), ("random", &shuffle)],
            &[5],
        )
        .unwrap();
        dendro_total += report.series[0].mean_overlap[0];
        random_total += report.series[1].mean_overlap[0];
    }
    assert!(dendro_total > random_total, "{dendro_total} vs {random_total}");
}

#[test]
fn full_lists_always_overlap_completely() {
    let mut r = rng(4);
    let e = two_clusters(&mut r);
    let d = ward_dendrogram(&e).unwrap();
    let mut perm: Vec<usize> = (0..20).collect();
    perm.shuffle(&mut r);
    let report = knn_preservation(
        &EuclideanOracle::new(&e),
        &[("dendrogram", &DendrogramOracle::new(&d)), ("random", &ShuffleOracle(perm))],
        &[19, 40],
    )
    .unwrap();
    assert_eq!(report.k_values, vec![19]);
    assert!(report.series.iter().all(|s| s.mean_overlap == vec![19.0]));
}

proptest! {
    #[test]
    fn overlap_bounded_by_k(seed in any::<u64>(), n in 3usize..40) {
        let mut r = rng(seed);
        let rows: Vec<[f64; 2]> = (0..n).map(|_| [r.random_range(0.0..1.0), r.random_range(0.0..1.0)]).collect();
        let e = Embeddings::from_rows(&rows).unwrap();
        let d = ward_dendrogram(&e).unwrap();
        let ks: Vec<usize> = (1..n).collect();
        let rep = knn_preservation(&EuclideanOracle::new(&e), &[("d", &DendrogramOracle::new(&d))], &ks).unwrap();
        for (k, m) in rep.k_values.iter().zip(&rep.series[0].mean_overlap) {
            prop_assert!(*m >= 0.0 && *m <= *k as f64);
        }
        prop_assert_eq!(*rep.series[0].mean_overlap.last().unwrap(), (n - 1) as f64);
    }

    #[test]
    fn class_table_identities(seed in any::<u64>(), n in 1usize..300, classes in 1usize..12) {
        let mut r = rng(seed);
        let truth: Vec<u32> = (0..n).map(|_| r.random_range(0..classes as u32)).collect();
        let pred: Vec<u32> = (0..n).map(|_| r.random_range(0..classes as u32)).collect();
        let labels = LabelSet::new(classes, truth, Some(pred)).unwrap();
        let subset: Vec<usize> = (0..n).filter(|_| r.random_bool(0.7)).collect();
        prop_assume!(!subset.is_empty());
        let rows = class_table(&labels, &subset).unwrap();
        prop_assert_eq!(rows.iter().map(|c| c.true_count).sum::<usize>(), subset.len());
        prop_assert_eq!(rows.iter().map(|c| c.predicted_count).sum::<usize>(), subset.len());
        for c in rows {
            if c.true_count > 0 {
                prop_assert_eq!(c.accuracy.unwrap() + c.false_negative_rate.unwrap(), 1.0);
            } else {
                prop_assert!(c.accuracy.is_none() && c.false_negative_rate.is_none());
            }
            for rate in [c.accuracy, c.false_negative_rate, c.false_positive_rate].into_iter().flatten() {
                prop_assert!((0.0..=1.0).contains(&rate));
            }
        }
    }
}
