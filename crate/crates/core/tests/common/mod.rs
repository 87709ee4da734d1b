#![allow(dead_code)]

use clustermap_core::hclust::Merge;
use clustermap_core::layout::{LayoutConfig, LayoutNode, LayoutTree};
use clustermap_core::{Dendrogram, NodeId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_points(rng: &mut impl Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-10.0..10.0)).collect())
        .collect()
}

/// Arbitrary binary tree: merge two random live clusters until one is left.
pub fn random_tree(rng: &mut impl Rng, n: usize) -> Dendrogram {
    let mut live: Vec<usize> = (0..n).collect();
    let mut merges = Vec::new();
    for t in 0..n.saturating_sub(1) {
        live.shuffle(rng);
        let a = live.pop().unwrap();
        let b = live.pop().unwrap();
        merges.push(Merge {
            left: NodeId(a),
            right: NodeId(b),
            height: t as f64,
        });
        live.push(n + t);
    }
    Dendrogram::from_merges(n, &merges).unwrap()
}

/// Textbook agglomeration: every step scans all live pairs and merges the
/// one whose union adds the least within-cluster variance. Distances come
/// straight from member coordinates, independent of any update formula.
/// Returns `(sorted members, height)` per merge, in merge order.
pub fn naive_ward(points: &[Vec<f64>]) -> Vec<(Vec<usize>, f64)> {
    let d = points[0].len();
    let mut clusters: Vec<Vec<usize>> = (0..points.len()).map(|i| vec![i]).collect();
    let centroid = |members: &[usize]| -> Vec<f64> {
        let mut c = vec![0.0; d];
        for &m in members {
            for (acc, x) in c.iter_mut().zip(&points[m]) {
                *acc += x;
            }
        }
        c.iter().map(|x| x / members.len() as f64).collect()
    };
    let mut out = Vec::new();
    while clusters.len() > 1 {
        let cents: Vec<Vec<f64>> = clusters.iter().map(|c| centroid(c)).collect();
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let (na, nb) = (clusters[a].len() as f64, clusters[b].len() as f64);
                let sq: f64 = cents[a].iter().zip(&cents[b]).map(|(x, y)| (x - y) * (x - y)).sum();
                // Increase in error sum of squares from merging a and b.
                let delta_sse = na * nb / (na + nb) * sq;
                if delta_sse < best.0 {
                    best = (delta_sse, a, b);
                }
            }
        }
        let (delta, a, b) = best;
        let mut merged = clusters[a].clone();
        merged.extend(&clusters[b]);
        merged.sort_unstable();
        clusters.remove(b);
        clusters.remove(a);
        out.push((merged.clone(), (2.0 * delta).sqrt()));
        clusters.push(merged);
    }
    out
}

/// `(sorted members, height)` of every internal node, sorted by members.
pub fn clusters_of(d: &Dendrogram) -> Vec<(Vec<usize>, f64)> {
    let mut out: Vec<_> = d.nodes()[d.n_leaves()..]
        .iter()
        .map(|n| {
            let mut leaves = d.leaves(n.id).unwrap().to_vec();
            leaves.sort_unstable();
            (leaves, n.height)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

pub fn brute_force_lap(costs: &[Vec<f64>]) -> f64 {
    fn go(costs: &[Vec<f64>], row: usize, used: &mut [bool], acc: f64, best: &mut f64) {
        if row == costs.len() {
            *best = best.min(acc);
            return;
        }
        for j in 0..costs.len() {
            if !used[j] {
                used[j] = true;
                go(costs, row + 1, used, acc + costs[row][j], best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(costs, 0, &mut vec![false; costs.len()], 0.0, &mut best);
    best
}

/// Each row in turn takes its cheapest free column.
pub fn greedy_lap(costs: &[Vec<f64>]) -> f64 {
    let n = costs.len();
    let mut used = vec![false; n];
    let mut total = 0.0;
    for row in costs {
        let j = (0..n)
            .filter(|&j| !used[j])
            .min_by(|&a, &b| row[a].total_cmp(&row[b]))
            .unwrap();
        used[j] = true;
        total += row[j];
    }
    total
}

/// Classic O(n³) Hungarian method with row/column potentials, used as a
/// second exact solver at sizes where enumeration is hopeless.
pub fn hungarian(costs: &[Vec<f64>]) -> f64 {
    let n = costs.len();
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = costs[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| costs[p[j] - 1][j - 1]).sum()
}

/// Every structural rule a layout must satisfy; returns human-readable
/// violations.
pub fn audit_layout(tree: &LayoutTree, d: &Dendrogram) -> Vec<String> {
    let cfg = &tree.config;
    let mut bad = Vec::new();
    if tree.root.rect != cfg.viewport.rect() {
        bad.push(format!("root rect {:?} is not the viewport", tree.root.rect));
    }
    let mut covered = 0;
    for node in tree.iter() {
        if node.is_cut_leaf {
            covered += d.node(node.node_id).unwrap().leaf_count;
            audit_cut_leaf(node, d, cfg, &mut bad);
            continue;
        }
        let [a, b] = &node.children[..] else {
            bad.push(format!("node {} has {} children", node.node_id, node.children.len()));
            continue;
        };
        let frame = node.rect.inset(cfg.padding);
        for c in [a, b] {
            if !frame.contains(&c.rect) {
                bad.push(format!("child {} escapes padded parent {}", c.node_id, node.node_id));
            }
        }
        if a.rect.overlaps(&b.rect) {
            bad.push(format!("siblings {} and {} overlap", a.node_id, b.node_id));
        }
        let (na, nb) = (
            d.node(a.node_id).unwrap().leaf_count,
            d.node(b.node_id).unwrap().leaf_count,
        );
        match expected_split(node.rect, na, nb, cfg) {
            Some((outer_a, outer_b, cells, fit)) => {
                for (child, outer) in [(a, outer_a), (b, outer_b)] {
                    let padded = outer.inset(cfg.padding);
                    let ok = if padded.is_empty() {
                        child.rect.is_empty()
                    } else {
                        child.rect == padded
                    };
                    if !ok {
                        bad.push(format!("child {} is not its padded share", child.node_id));
                    }
                }
                // Quantization: cells given to the first child vs. the exact share.
                let exact = fit as f64 * na as f64 / (na + nb) as f64;
                if (cells as f64 - exact).abs() >= 1.0 {
                    bad.push(format!("split of {} off by a cell or more", node.node_id));
                }
            }
            None => {
                let frame = node.rect.inset(cfg.padding);
                let empty = clustermap_core::Rect::new(frame.x, frame.y, 0, 0);
                if a.rect != empty || b.rect != empty {
                    bad.push(format!("unsplittable node {} did not collapse", node.node_id));
                }
            }
        }
        if d.node(node.node_id).unwrap().depth_remaining != node.depth_remaining {
            bad.push(format!("depth_remaining wrong at {}", node.node_id));
        }
    }
    let zoom_count = d.node(tree.zoom_root).unwrap().leaf_count;
    if covered != zoom_count {
        bad.push(format!("cut leaves cover {covered} of {zoom_count} images"));
    }
    if tree.cut_leaves().count() != tree.k {
        bad.push(format!("expected {} cut leaves", tree.k));
    }
    bad
}

/// Outer child rects, cells given to the first child, and cells along the
/// split axis; `None` when the rect cannot host two clusters.
fn expected_split(
    r: clustermap_core::Rect,
    na: usize,
    nb: usize,
    cfg: &LayoutConfig,
) -> Option<(clustermap_core::Rect, clustermap_core::Rect, u32, u32)> {
    use clustermap_core::Rect;
    let (iw, ih) = (cfg.image.width, cfg.image.height);
    if r.w < iw || r.h < ih {
        return None;
    }
    let dice = r.w >= r.h;
    let (len, cell) = if dice { (r.w, iw) } else { (r.h, ih) };
    let fit = len / cell;
    if fit < 2 {
        return None;
    }
    let cells = ((fit as usize * na) / (na + nb)).clamp(1, fit as usize - 1) as u32;
    let cut = cells * cell;
    Some(if dice {
        (Rect::new(r.x, r.y, cut, r.h), Rect::new(r.x + cut, r.y, r.w - cut, r.h), cells, fit)
    } else {
        (Rect::new(r.x, r.y, r.w, cut), Rect::new(r.x, r.y + cut, r.w, r.h - cut), cells, fit)
    })
}

fn audit_cut_leaf(node: &LayoutNode, d: &Dendrogram, cfg: &LayoutConfig, bad: &mut Vec<String>) {
    let leaves = d.leaves(node.node_id).unwrap();
    let cols = node.rect.w / cfg.image.width;
    let rows = node.rect.h.saturating_sub(cfg.header_h) / cfg.image.height;
    let expected = leaves.len().min((cols * rows) as usize);
    if node.placements.len() != expected {
        bad.push(format!("cluster {} shows {} of {expected} images", node.node_id, node.placements.len()));
    }
    let mut seen = std::collections::HashSet::new();
    let mut last_pos = None;
    for p in &node.placements {
        if p.cell[0] >= cols || p.cell[1] >= rows {
            bad.push(format!("placement {:?} outside grid in {}", p.cell, node.node_id));
        }
        let r = node.cell_rect(p, cfg);
        if !node.rect.contains(&r) || r.y < node.rect.y + cfg.header_h {
            bad.push(format!("placement {:?} crosses its rect in {}", p.cell, node.node_id));
        }
        if (r.x - node.rect.x) % cfg.image.width != 0 || (r.y - node.rect.y - cfg.header_h) % cfg.image.height != 0 {
            bad.push(format!("placement {:?} off grid", p.cell));
        }
        if !seen.insert(p.cell) {
            bad.push(format!("two placements share cell {:?}", p.cell));
        }
        match leaves.iter().position(|&l| l == p.image_id) {
            Some(pos) => {
                if last_pos.is_some_and(|lp| lp >= pos) {
                    bad.push(format!("sample in {} breaks leaf order", node.node_id));
                }
                last_pos = Some(pos);
            }
            None => bad.push(format!("image {} not in cluster {}", p.image_id, node.node_id)),
        }
    }
}
