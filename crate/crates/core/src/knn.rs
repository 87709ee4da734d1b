//! Neighbor-preservation evaluation.
//!
//! Each method is a [`DistanceOracle`] that ranks every other image by
//! closeness to a query. The report counts, per query and per `k`, how many
//! of the method's top-`k` images also appear in the top-`k` of the
//! reference (embedding-space) ranking, averaged over all queries.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::gridify::GridAssignment;
use crate::{Dendrogram, Embeddings, Error, Projection, Result};

pub const DEFAULT_K_VALUES: [usize; 8] = [1, 5, 10, 25, 50, 100, 200, 300];

/// Distance between images as some method sees it. Rankings order by
/// `distance`, then `tie_rank`, then ascending id.
pub trait DistanceOracle {
    fn len(&self) -> usize;

    fn distance(&self, i: usize, j: usize) -> f64;

    /// Secondary key among equal distances.
    fn tie_rank(&self, _i: usize, _j: usize) -> usize {
        0
    }

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `k` images ranked closest to `i`, excluding `i`.
    fn ranked_neighbors(&self, i: usize, k: usize) -> Vec<usize> {
        rank_by_sort(self, i, k)
    }
}

/// Reference ranking: sort every candidate by the oracle's full key.
pub fn rank_by_sort<O: DistanceOracle + ?Sized>(oracle: &O, i: usize, k: usize) -> Vec<usize> {
    let n = oracle.len();
    let k = k.min(n.saturating_sub(1));
    let mut keyed: Vec<(f64, usize, usize)> = (0..n)
        .filter(|&j| j != i)
        .map(|j| (oracle.distance(i, j), oracle.tie_rank(i, j), j))
        .collect();
    let cmp = |a: &(f64, usize, usize), b: &(f64, usize, usize)| -> Ordering {
        a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
    };
    if k == 0 {
        return Vec::new();
    }
    if k < keyed.len() {
        keyed.select_nth_unstable_by(k - 1, cmp);
        keyed.truncate(k);
    }
    keyed.sort_unstable_by(cmp);
    keyed.into_iter().map(|t| t.2).collect()
}

/// Euclidean distance between embedding rows.
pub struct EuclideanOracle<'a> {
    embeddings: &'a Embeddings,
}

impl<'a> EuclideanOracle<'a> {
    pub fn new(embeddings: &'a Embeddings) -> Self {
        EuclideanOracle { embeddings }
    }
}

impl DistanceOracle for EuclideanOracle<'_> {
    fn len(&self) -> usize {
        self.embeddings.rows()
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        self.embeddings.dist(i, j)
    }
}

/// Euclidean distance between projected 2-D points.
pub struct ProjectionOracle<'a> {
    projection: &'a Projection,
}

impl<'a> ProjectionOracle<'a> {
    pub fn new(projection: &'a Projection) -> Self {
        ProjectionOracle { projection }
    }
}

impl DistanceOracle for ProjectionOracle<'_> {
    fn len(&self) -> usize {
        self.projection.len()
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        let (p, q) = (self.projection.points()[i], self.projection.points()[j]);
        libm::hypot(p[0] - q[0], p[1] - q[1])
    }
}

/// Euclidean distance between the cell centers two images occupy.
pub struct GridOracle {
    centers: Vec<[f64; 2]>,
}

impl GridOracle {
    /// Every image in `0..n_images` must occupy a cell.
    pub fn new(grid: &GridAssignment, n_images: usize) -> Result<Self> {
        let centers = grid
            .positions(n_images)
            .into_iter()
            .enumerate()
            .map(|(id, pos)| {
                pos.map(|(c, r)| grid.cell_center(c, r))
                    .ok_or(Error::UnknownImage(id))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GridOracle { centers })
    }
}

impl DistanceOracle for GridOracle {
    fn len(&self) -> usize {
        self.centers.len()
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        let (p, q) = (self.centers[i], self.centers[j]);
        libm::hypot(p[0] - q[0], p[1] - q[1])
    }
}

/// Zoom-out count from `i` to the smallest cluster holding both images.
/// Equal counts are ordered by distance in leaf order.
pub struct DendrogramOracle<'a> {
    dendrogram: &'a Dendrogram,
}

impl<'a> DendrogramOracle<'a> {
    pub fn new(dendrogram: &'a Dendrogram) -> Self {
        DendrogramOracle { dendrogram }
    }
}

impl DistanceOracle for DendrogramOracle<'_> {
    fn len(&self) -> usize {
        self.dendrogram.n_leaves()
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        self.dendrogram.lca_hops(i, j).expect("leaf ids in range") as f64
    }

    fn tie_rank(&self, i: usize, j: usize) -> usize {
        let d = self.dendrogram;
        d.leaf_position(i).unwrap().abs_diff(d.leaf_position(j).unwrap())
    }

    /// Walks up from the leaf; each step adds the sibling subtree, which is
    /// one contiguous run of leaf order on one side of `i`.
    fn ranked_neighbors(&self, i: usize, k: usize) -> Vec<usize> {
        let d = self.dendrogram;
        let k = k.min(d.n_leaves().saturating_sub(1));
        let order = d.leaf_order();
        let nodes = d.nodes();
        let mut out = Vec::with_capacity(k);
        let mut node = &nodes[i];
        while out.len() < k {
            let parent = &nodes[node.parent.expect("k < n leaves").index()];
            let (s, e) = (node.leaf_start, node.leaf_start + node.leaf_count);
            let need = k - out.len();
            if parent.leaf_start < s {
                // Sibling sits to the left: walk outward from i.
                out.extend(order[parent.leaf_start..s].iter().rev().take(need));
            } else {
                out.extend(order[e..parent.leaf_start + parent.leaf_count].iter().take(need));
            }
            node = parent;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MethodSeries {
    pub method: String,
    /// Mean overlap per entry of the report's `k_values`.
    pub mean_overlap: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct NeighborReport {
    pub n_points: usize,
    pub k_values: Vec<usize>,
    pub series: Vec<MethodSeries>,
}

/// Sorted, deduplicated `k` values in `1..n_points`.
pub fn usable_k_values(k_values: &[usize], n_points: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = k_values
        .iter()
        .copied()
        .filter(|&k| k >= 1 && k < n_points)
        .collect();
    ks.sort_unstable();
    ks.dedup();
    ks
}

/// `|prefix_k(reference) ∩ prefix_k(method)|` for each `k` in ascending
/// `ks`. Both lists must be at least `max(ks)` long and free of repeats.
pub fn prefix_overlaps(reference: &[usize], method: &[usize], ks: &[usize], n_points: usize) -> Vec<usize> {
    let mut in_ref = vec![false; n_points];
    let mut in_method = vec![false; n_points];
    let mut common = 0;
    let mut out = Vec::with_capacity(ks.len());
    let mut next = ks.iter().peekable();
    let k_max = ks.last().copied().unwrap_or(0);
    for t in 0..k_max {
        let (a, b) = (reference[t], method[t]);
        in_ref[a] = true;
        if in_method[a] {
            common += 1;
        }
        in_method[b] = true;
        if in_ref[b] {
            common += 1;
        }
        while next.peek().is_some_and(|&&k| k == t + 1) {
            out.push(common);
            next.next();
        }
    }
    out
}

/// Overlap counts of every method against the reference for one query.
pub fn point_overlaps(
    reference: &dyn DistanceOracle,
    methods: &[&dyn DistanceOracle],
    i: usize,
    ks: &[usize],
) -> Vec<Vec<usize>> {
    let n = reference.len();
    let k_max = ks.last().copied().unwrap_or(0);
    let base = reference.ranked_neighbors(i, k_max);
    methods
        .iter()
        .map(|m| prefix_overlaps(&base, &m.ranked_neighbors(i, k_max), ks, n))
        .collect()
}

/// Averages per-query overlap counts into a report.
pub fn summarize(
    names: &[&str],
    n_points: usize,
    ks: Vec<usize>,
    totals: &[Vec<usize>],
) -> NeighborReport {
    let series = names
        .iter()
        .zip(totals)
        .map(|(name, sums)| MethodSeries {
            method: String::from(*name),
            mean_overlap: sums.iter().map(|&s| s as f64 / n_points as f64).collect(),
        })
        .collect();
    NeighborReport {
        n_points,
        k_values: ks,
        series,
    }
}

/// Sequential neighbor-preservation report. Every oracle must cover the same
/// images as `reference`.
pub fn knn_preservation(
    reference: &dyn DistanceOracle,
    methods: &[(&str, &dyn DistanceOracle)],
    k_values: &[usize],
) -> Result<NeighborReport> {
    let n = reference.len();
    if let Some((_, m)) = methods.iter().find(|(_, m)| m.len() != n) {
        return Err(Error::Shape {
            expected: n,
            found: m.len(),
        });
    }
    let ks = usable_k_values(k_values, n);
    let oracles: Vec<&dyn DistanceOracle> = methods.iter().map(|(_, m)| *m).collect();
    let mut totals = vec![vec![0usize; ks.len()]; methods.len()];
    for i in 0..n {
        for (acc, counts) in totals.iter_mut().zip(point_overlaps(reference, &oracles, i, &ks)) {
            for (a, c) in acc.iter_mut().zip(counts) {
                *a += c;
            }
        }
    }
    let names: Vec<&str> = methods.iter().map(|(name, _)| *name).collect();
    Ok(summarize(&names, n, ks, &totals))
}
