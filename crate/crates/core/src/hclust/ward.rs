//! Exact Ward agglomeration by nearest-neighbor chains.
//!
//! Heights are Ward distances: two singletons merge at their Euclidean
//! distance, and for clusters `a`, `b` merging into `ab` the squared distance
//! to any other cluster `c` follows the Lance-Williams update
//!
//! ```text
//! d²(ab, c) = ((|a|+|c|) d²(a, c) + (|b|+|c|) d²(b, c) - |c| d²(a, b)) / (|a|+|b|+|c|)
//! ```
//!
//! The matrix route stores all squared pairwise distances (`n(n-1)/2`
//! floats). The centroid route evaluates the equivalent closed form
//! `2|a||b|/(|a|+|b|) * |c_a - c_b|²` from running centroids and needs only
//! `O(n d)` memory, at `O(d)` per distance.

use alloc::vec::Vec;

use super::{Dendrogram, Merge, NodeId};
use crate::data::sq_dist;
use crate::{Embeddings, Error, Result};

/// Largest input the `Auto` strategy clusters with a full distance matrix
/// (about 1 GiB of `f64`).
pub const MATRIX_LIMIT: usize = 16_384;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WardStrategy {
    /// Matrix up to [`MATRIX_LIMIT`] points, centroids above.
    #[default]
    Auto,
    Matrix,
    Centroid,
}

pub fn ward_dendrogram(embeddings: &Embeddings) -> Result<Dendrogram> {
    ward_dendrogram_with(embeddings, WardStrategy::Auto)
}

pub fn ward_dendrogram_with(embeddings: &Embeddings, strategy: WardStrategy) -> Result<Dendrogram> {
    let n = embeddings.rows();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let use_matrix = match strategy {
        WardStrategy::Auto => n <= MATRIX_LIMIT,
        WardStrategy::Matrix => true,
        WardStrategy::Centroid => false,
    };
    let steps = if use_matrix {
        nn_chain(&mut MatrixSpace::new(embeddings))
    } else {
        nn_chain(&mut CentroidSpace::new(embeddings))
    };
    Dendrogram::from_merges(n, &label_merges(n, steps))
}

/// Clusters live in slots named after their smallest member, so slot `s`
/// always contains image `s`.
trait WardSpace {
    fn len(&self) -> usize;
    /// Squared Ward distance between the clusters in two active slots.
    fn dist2(&self, a: usize, b: usize) -> f64;
    /// Folds slot `drop` into slot `keep` (`keep < drop`).
    fn merge(&mut self, keep: usize, drop: usize, d2: f64, active: &[usize]);
}

/// A merge recorded by slot, in the order the chain found it.
struct Step {
    a: usize,
    b: usize,
    height: f64,
}

fn nn_chain<S: WardSpace>(space: &mut S) -> Vec<Step> {
    let n = space.len();
    let mut active: Vec<usize> = (0..n).collect();
    let mut chain: Vec<usize> = Vec::with_capacity(n);
    let mut steps = Vec::with_capacity(n.saturating_sub(1));

    while active.len() > 1 {
        if chain.is_empty() {
            chain.push(active[0]);
        }
        loop {
            let a = chain[chain.len() - 1];
            let prev = chain.len().checked_sub(2).map(|i| chain[i]);
            // Seeding with the predecessor keeps it on ties, which is what
            // guarantees the chain terminates.
            let (mut best, mut best_d) = match prev {
                Some(p) => (p, space.dist2(a, p)),
                None => (usize::MAX, f64::INFINITY),
            };
            for &b in &active {
                if b != a {
                    let d = space.dist2(a, b);
                    if d < best_d {
                        best = b;
                        best_d = d;
                    }
                }
            }
            if Some(best) == prev {
                chain.truncate(chain.len() - 2);
                let (keep, drop) = if a < best { (a, best) } else { (best, a) };
                let d2 = best_d.max(0.0);
                space.merge(keep, drop, d2, &active);
                let pos = active.binary_search(&drop).expect("merged slot is active");
                active.remove(pos);
                steps.push(Step {
                    a: keep,
                    b: drop,
                    height: libm::sqrt(d2),
                });
                break;
            }
            chain.push(best);
        }
    }
    steps
}

/// Orders chain merges by height and assigns node ids.
fn label_merges(n: usize, mut steps: Vec<Step>) -> Vec<Merge> {
    // Ward is monotone, but rounding can leave a merge a hair below the one
    // that formed its operand; lift it so sorting never reorders the two.
    let mut slot_height = alloc::vec![0.0f64; n];
    for s in &mut steps {
        s.height = s.height.max(slot_height[s.a]).max(slot_height[s.b]);
        slot_height[s.a] = s.height;
    }
    // Stable: equal heights keep discovery order.
    steps.sort_by(|x, y| x.height.total_cmp(&y.height));

    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    let find = |parent: &mut Vec<usize>, mut x: usize| {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        while parent[x] != root {
            let next = parent[x];
            parent[x] = root;
            x = next;
        }
        root
    };
    steps
        .iter()
        .enumerate()
        .map(|(t, s)| {
            let x = find(&mut parent, s.a);
            let y = find(&mut parent, s.b);
            parent[x] = n + t;
            parent[y] = n + t;
            Merge {
                left: NodeId(x),
                right: NodeId(y),
                height: s.height,
            }
        })
        .collect()
}

struct MatrixSpace {
    n: usize,
    d2: Vec<f64>,
    size: Vec<usize>,
}

impl MatrixSpace {
    fn new(e: &Embeddings) -> Self {
        let n = e.rows();
        let mut d2 = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                d2.push(e.sq_dist(i, j));
            }
        }
        MatrixSpace {
            n,
            d2,
            size: alloc::vec![1; n],
        }
    }

    #[inline]
    fn index(&self, a: usize, b: usize) -> usize {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        self.n * i - i * (i + 1) / 2 + j - i - 1
    }
}

impl WardSpace for MatrixSpace {
    fn len(&self) -> usize {
        self.n
    }

    fn dist2(&self, a: usize, b: usize) -> f64 {
        self.d2[self.index(a, b)]
    }

    fn merge(&mut self, keep: usize, drop: usize, d2: f64, active: &[usize]) {
        let (sa, sb) = (self.size[keep] as f64, self.size[drop] as f64);
        for &c in active {
            if c == keep || c == drop {
                continue;
            }
            let sc = self.size[c] as f64;
            let dac = self.d2[self.index(keep, c)];
            let dbc = self.d2[self.index(drop, c)];
            let updated = ((sa + sc) * dac + (sb + sc) * dbc - sc * d2) / (sa + sb + sc);
            let idx = self.index(keep, c);
            self.d2[idx] = updated.max(0.0);
        }
        self.size[keep] += self.size[drop];
    }
}

struct CentroidSpace {
    dims: usize,
    centroid: Vec<f64>,
    size: Vec<usize>,
}

impl CentroidSpace {
    fn new(e: &Embeddings) -> Self {
        CentroidSpace {
            dims: e.dims(),
            centroid: e.values().to_vec(),
            size: alloc::vec![1; e.rows()],
        }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.centroid[i * self.dims..(i + 1) * self.dims]
    }
}

impl WardSpace for CentroidSpace {
    fn len(&self) -> usize {
        self.size.len()
    }

    fn dist2(&self, a: usize, b: usize) -> f64 {
        let (sa, sb) = (self.size[a] as f64, self.size[b] as f64);
        2.0 * sa * sb / (sa + sb) * sq_dist(self.row(a), self.row(b))
    }

    fn merge(&mut self, keep: usize, drop: usize, _d2: f64, _active: &[usize]) {
        let (sa, sb) = (self.size[keep] as f64, self.size[drop] as f64);
        let total = sa + sb;
        let (k0, d0) = (keep * self.dims, drop * self.dims);
        for t in 0..self.dims {
            let merged = (sa * self.centroid[k0 + t] + sb * self.centroid[d0 + t]) / total;
            self.centroid[k0 + t] = merged;
        }
        self.size[keep] += self.size[drop];
    }
}
