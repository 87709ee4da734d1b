//! Binary merge trees over image embeddings.
//!
//! Node ids follow the usual agglomerative convention: leaves are `0..n`
//! (leaf `i` is image `i`) and the `t`-th merge creates node `n + t`, so the
//! root is always the last node. Children are oriented so that the child
//! holding the smallest image index is on the left; `leaf_order` is the
//! resulting left-to-right leaf sequence and every subtree occupies a
//! contiguous range of it.

mod ward;

use alloc::collections::{BTreeSet, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use ward::{ward_dendrogram, ward_dendrogram_with, WardStrategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(transparent))]
pub struct NodeId(pub usize);

impl NodeId {
    pub const fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One merge step: `left` and `right` become children of a new node.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Merge {
    pub left: NodeId,
    pub right: NodeId,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub left: Option<NodeId>,
    pub right: Option<NodeId>,
    pub parent: Option<NodeId>,
    pub leaf_count: usize,
    /// Ward distance of the merge that created this node; 0 for leaves.
    pub height: f64,
    /// Edges between the root and this node.
    pub depth: usize,
    /// Longest path from this node down to a leaf.
    pub depth_remaining: usize,
    /// Offset of this subtree's first leaf in `leaf_order`.
    pub leaf_start: usize,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.left.is_none()
    }

    pub fn children(&self) -> Option<(NodeId, NodeId)> {
        Some((self.left?, self.right?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    n_leaves: usize,
    nodes: Vec<Node>,
    leaf_order: Vec<usize>,
    leaf_pos: Vec<usize>,
}

/// `k` dendrogram nodes whose leaf sets partition a subtree, listed in leaf
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ClusterCut {
    pub k: usize,
    pub node_ids: Vec<NodeId>,
}

impl Dendrogram {
    /// Assembles a dendrogram from its merge list. Merge `t` creates node
    /// `n_leaves + t` and may only reference nodes created before it; each
    /// node except the root must be used exactly once. Child orientation in
    /// the input is ignored and recomputed.
    pub fn from_merges(n_leaves: usize, merges: &[Merge]) -> Result<Self> {
        if n_leaves == 0 {
            return Err(Error::EmptyInput);
        }
        if merges.len() != n_leaves - 1 {
            return Err(Error::MalformedTree("expected n_leaves - 1 merges"));
        }
        let total = 2 * n_leaves - 1;
        let mut nodes: Vec<Node> = (0..total)
            .map(|i| Node {
                id: NodeId(i),
                left: None,
                right: None,
                parent: None,
                leaf_count: 1,
                height: 0.0,
                depth: 0,
                depth_remaining: 0,
                leaf_start: 0,
            })
            .collect();
        let mut min_leaf: Vec<usize> = (0..total).collect();

        for (t, m) in merges.iter().enumerate() {
            let id = n_leaves + t;
            let (a, b) = (m.left.0, m.right.0);
            if a >= id || b >= id || a == b {
                return Err(Error::MalformedTree("merge references a later node"));
            }
            if nodes[a].parent.is_some() || nodes[b].parent.is_some() {
                return Err(Error::MalformedTree("node merged twice"));
            }
            if !m.height.is_finite() || m.height < 0.0 {
                return Err(Error::MalformedTree("merge height must be finite and nonnegative"));
            }
            let (l, r) = if min_leaf[a] < min_leaf[b] { (a, b) } else { (b, a) };
            nodes[a].parent = Some(NodeId(id));
            nodes[b].parent = Some(NodeId(id));
            min_leaf[id] = min_leaf[l];
            let node = &mut nodes[id];
            node.left = Some(NodeId(l));
            node.right = Some(NodeId(r));
            node.height = m.height;
            node.leaf_count = 0;
        }
        for id in n_leaves..total {
            let (l, r) = (nodes[id].left.unwrap().0, nodes[id].right.unwrap().0);
            nodes[id].leaf_count = nodes[l].leaf_count + nodes[r].leaf_count;
            nodes[id].depth_remaining = 1 + nodes[l].depth_remaining.max(nodes[r].depth_remaining);
        }
        // Parents always have larger ids, so a reverse sweep sees them first.
        for id in (n_leaves..total).rev() {
            let (l, r) = (nodes[id].left.unwrap().0, nodes[id].right.unwrap().0);
            let (depth, start) = (nodes[id].depth + 1, nodes[id].leaf_start);
            nodes[l].depth = depth;
            nodes[l].leaf_start = start;
            nodes[r].depth = depth;
            nodes[r].leaf_start = start + nodes[l].leaf_count;
        }
        let mut leaf_order = vec![0; n_leaves];
        let mut leaf_pos = vec![0; n_leaves];
        for leaf in 0..n_leaves {
            leaf_order[nodes[leaf].leaf_start] = leaf;
            leaf_pos[leaf] = nodes[leaf].leaf_start;
        }
        Ok(Dendrogram {
            n_leaves,
            nodes,
            leaf_order,
            leaf_pos,
        })
    }

    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    /// Total node count, `2n - 1`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> NodeId {
        NodeId(self.nodes.len() - 1)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Result<&Node> {
        self.nodes.get(id.0).ok_or(Error::UnknownNode(id.0))
    }

    pub fn leaf_order(&self) -> &[usize] {
        &self.leaf_order
    }

    /// Position of image `leaf` within `leaf_order`.
    pub fn leaf_position(&self, leaf: usize) -> Result<usize> {
        self.leaf_pos.get(leaf).copied().ok_or(Error::UnknownLeaf(leaf))
    }

    /// Images under `id`, in leaf order.
    pub fn leaves(&self, id: NodeId) -> Result<&[usize]> {
        let node = self.node(id)?;
        Ok(&self.leaf_order[node.leaf_start..node.leaf_start + node.leaf_count])
    }

    /// Internal nodes as merges in id order, with canonical orientation.
    pub fn merges(&self) -> Vec<Merge> {
        self.nodes[self.n_leaves..]
            .iter()
            .map(|n| Merge {
                left: n.left.unwrap(),
                right: n.right.unwrap(),
                height: n.height,
            })
            .collect()
    }

    /// True when `ancestor` is `node` or lies on its path to the root.
    pub fn is_ancestor(&self, ancestor: NodeId, node: NodeId) -> bool {
        let (Some(a), Some(d)) = (self.nodes.get(ancestor.0), self.nodes.get(node.0)) else {
            return false;
        };
        a.leaf_start <= d.leaf_start
            && d.leaf_start + d.leaf_count <= a.leaf_start + a.leaf_count
            && a.depth <= d.depth
    }

    /// Breadth-first cut of the whole tree into `k` clusters.
    pub fn cut_k(&self, k: usize) -> Result<ClusterCut> {
        self.subtree_cut(self.root(), k)
    }

    /// Starting from `{root}`, repeatedly replaces one node by its two
    /// children until `k` nodes remain. Shallower nodes are expanded first;
    /// among equal depths the larger cluster goes first, then the smaller id.
    pub fn subtree_cut(&self, root: NodeId, k: usize) -> Result<ClusterCut> {
        let top = self.node(root)?;
        if k == 0 || k > top.leaf_count {
            return Err(Error::Range {
                what: "k",
                value: k,
                min: 1,
                max: top.leaf_count,
            });
        }
        // Ordered by leaf_start, which is unique among an antichain.
        let mut cut: BTreeSet<(usize, NodeId)> = BTreeSet::new();
        cut.insert((top.leaf_start, root));
        let mut frontier = BinaryHeap::new();
        let push = |heap: &mut BinaryHeap<_>, n: &Node| {
            if !n.is_leaf() {
                heap.push(Reverse((n.depth, Reverse(n.leaf_count), n.id)));
            }
        };
        push(&mut frontier, top);
        while cut.len() < k {
            let Reverse((_, _, id)) = frontier
                .pop()
                .expect("k <= leaf_count leaves an expandable node");
            let node = &self.nodes[id.0];
            cut.remove(&(node.leaf_start, id));
            for child in [node.left.unwrap(), node.right.unwrap()] {
                let c = &self.nodes[child.0];
                cut.insert((c.leaf_start, child));
                push(&mut frontier, c);
            }
        }
        Ok(ClusterCut {
            k,
            node_ids: cut.into_iter().map(|(_, id)| id).collect(),
        })
    }

    /// Checks that `cut` is an antichain partitioning the leaves of `root`.
    pub fn validate_cut(&self, root: NodeId, cut: &ClusterCut) -> Result<()> {
        let top = self.node(root)?;
        if cut.k != cut.node_ids.len() || cut.k == 0 {
            return Err(Error::InvalidCut("k does not match node count"));
        }
        let mut spans = Vec::with_capacity(cut.k);
        for &id in &cut.node_ids {
            let n = self.node(id)?;
            if !self.is_ancestor(root, id) {
                return Err(Error::InvalidCut("node outside the zoomed subtree"));
            }
            spans.push((n.leaf_start, n.leaf_count));
        }
        spans.sort_unstable();
        let mut next = top.leaf_start;
        for (start, count) in spans {
            if start != next {
                return Err(Error::InvalidCut("cut nodes overlap or leave gaps"));
            }
            next = start + count;
        }
        if next != top.leaf_start + top.leaf_count {
            return Err(Error::InvalidCut("cut does not cover the subtree"));
        }
        Ok(())
    }

    /// Lowest common ancestor of two leaves.
    pub fn lca(&self, i: usize, j: usize) -> Result<NodeId> {
        for leaf in [i, j] {
            if leaf >= self.n_leaves {
                return Err(Error::UnknownLeaf(leaf));
            }
        }
        let (mut a, mut b) = (i, j);
        while self.nodes[a].depth > self.nodes[b].depth {
            a = self.nodes[a].parent.unwrap().0;
        }
        while self.nodes[b].depth > self.nodes[a].depth {
            b = self.nodes[b].parent.unwrap().0;
        }
        while a != b {
            a = self.nodes[a].parent.unwrap().0;
            b = self.nodes[b].parent.unwrap().0;
        }
        Ok(NodeId(a))
    }

    /// Parent edges from leaf `i` up to its lowest common ancestor with `j`:
    /// how many times a viewer zoomed in on `i` must zoom out to see both.
    /// Not symmetric.
    pub fn lca_hops(&self, i: usize, j: usize) -> Result<usize> {
        let lca = self.lca(i, j)?;
        Ok(self.nodes[i].depth - self.nodes[lca.0].depth)
    }
}
