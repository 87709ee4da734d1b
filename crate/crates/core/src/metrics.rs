//! Per-class error statistics and high-dimensional similar-image lookup.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::knn::{DistanceOracle, EuclideanOracle};
use crate::{Embeddings, Error, LabelSet, Result};

/// One row of the class table. Rates are absent when their denominator is
/// zero.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ClassStats {
    pub class_id: u32,
    pub true_count: usize,
    pub predicted_count: usize,
    pub accuracy: Option<f64>,
    pub false_negative_rate: Option<f64>,
    pub false_positive_rate: Option<f64>,
}

/// Class table over the images in `subset`, one row per class.
pub fn class_table(labels: &LabelSet, subset: &[usize]) -> Result<Vec<ClassStats>> {
    let predicted = labels.predicted().ok_or(Error::NoPredictions)?;
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let n = labels.n_classes();
    let mut truth_n = vec![0usize; n];
    let mut pred_n = vec![0usize; n];
    let mut hits = vec![0usize; n];
    for &i in subset {
        if i >= labels.len() {
            return Err(Error::UnknownImage(i));
        }
        let (t, p) = (labels.truth()[i] as usize, predicted[i] as usize);
        truth_n[t] += 1;
        pred_n[p] += 1;
        if t == p {
            hits[t] += 1;
        }
    }
    let frac = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    Ok((0..n)
        .map(|c| ClassStats {
            class_id: c as u32,
            true_count: truth_n[c],
            predicted_count: pred_n[c],
            accuracy: frac(hits[c], truth_n[c]),
            false_negative_rate: frac(truth_n[c] - hits[c], truth_n[c]),
            false_positive_rate: frac(pred_n[c] - hits[c], pred_n[c]),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Neighbor {
    pub id: usize,
    pub distance: f64,
}

/// The `n` images closest to `query` in embedding space, nearest first,
/// ties by ascending id. The query itself is excluded.
pub fn similar_images(embeddings: &Embeddings, query: usize, n: usize) -> Result<Vec<Neighbor>> {
    let rows = embeddings.rows();
    if query >= rows {
        return Err(Error::UnknownImage(query));
    }
    if n == 0 || n >= rows {
        return Err(Error::Range {
            what: "n",
            value: n,
            min: 1,
            max: rows.saturating_sub(1),
        });
    }
    let oracle = EuclideanOracle::new(embeddings);
    Ok(oracle
        .ranked_neighbors(query, n)
        .into_iter()
        .map(|id| Neighbor {
            id,
            distance: embeddings.dist(query, id),
        })
        .collect())
}
