//! Image-quantized slice-dice treemap over a dendrogram cut.
//!
//! Each internal node splits its rectangle in two, along the longer side,
//! in proportion to the children's image counts. The split is snapped to
//! whole image cells so that every cluster shows uncropped thumbnails, and
//! both halves are then inset by a fixed padding so the parent shows
//! through as a frame. Cut nodes stop the recursion and receive a header
//! band plus a grid of images sampled evenly from their leaf order.
//!
//! When a node is too small to split, its subtree collapses to zero-size
//! rects instead of failing, and a cluster without room for one image keeps
//! its header but shows no thumbnails.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::hclust::{ClusterCut, Dendrogram, NodeId};
use crate::{Error, ImageSize, LabelSet, Rect, Result, Viewport};

pub const DEFAULT_PADDING: u32 = 10;
pub const DEFAULT_HEADER_HEIGHT: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LayoutConfig {
    pub viewport: Viewport,
    pub image: ImageSize,
    pub padding: u32,
    pub header_h: u32,
}

impl LayoutConfig {
    pub fn new(viewport: Viewport, image: ImageSize) -> Self {
        LayoutConfig {
            viewport,
            image,
            padding: DEFAULT_PADDING,
            header_h: DEFAULT_HEADER_HEIGHT,
        }
    }

    pub fn with_padding(mut self, padding: u32) -> Self {
        self.padding = padding;
        self
    }

    pub fn with_header(mut self, header_h: u32) -> Self {
        self.header_h = header_h;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let Viewport { width, height } = self.viewport;
        if width == 0 || height == 0 || self.image.width == 0 || self.image.height == 0 {
            return Err(Error::InvalidConfig("viewport and image sizes must be positive"));
        }
        if self.image.width > width || self.image.height > height {
            return Err(Error::DegenerateSpace {
                width,
                height,
                image_w: self.image.width,
                image_h: self.image.height,
            });
        }
        Ok(())
    }

    fn degenerate(&self, r: Rect) -> Error {
        Error::DegenerateSpace {
            width: r.w,
            height: r.h,
            image_w: self.image.width,
            image_h: self.image.height,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "lowercase"))]
pub enum SplitAxis {
    /// Side by side: the width is divided.
    Dice,
    /// Stacked: the height is divided.
    Slice,
}

/// One binary split of a parent rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partition {
    pub axis: SplitAxis,
    /// `n_left / (n_left + n_right)`.
    pub ratio: f64,
    /// Whole images that fit along the split axis.
    pub fit: u32,
    /// Image cells given to the left (or top) child along the split axis.
    pub left_cells: u32,
    /// Child rects before padding.
    pub left_outer: Rect,
    pub right_outer: Rect,
    /// Child rects after padding.
    pub left: Rect,
    pub right: Rect,
}

pub fn partition(parent: Rect, n_left: usize, n_right: usize, config: &LayoutConfig) -> Result<Partition> {
    let total = n_left + n_right;
    if total == 0 {
        return Err(Error::EmptyInput);
    }
    let ImageSize { width: iw, height: ih } = config.image;
    if iw == 0 || ih == 0 {
        return Err(Error::InvalidConfig("image size must be positive"));
    }
    if parent.w < iw || parent.h < ih {
        return Err(config.degenerate(parent));
    }
    let axis = if parent.w >= parent.h {
        SplitAxis::Dice
    } else {
        SplitAxis::Slice
    };
    let (length, cell) = match axis {
        SplitAxis::Dice => (parent.w, iw),
        SplitAxis::Slice => (parent.h, ih),
    };
    let fit = length / cell;
    let ratio = n_left as f64 / total as f64;

    let left_cells = if n_left == 0 {
        0
    } else if n_right == 0 {
        fit
    } else {
        if fit < 2 {
            return Err(config.degenerate(parent));
        }
        // floor(fit * n_left / total) in exact integer arithmetic.
        let cells = (fit as u64 * n_left as u64 / total as u64) as u32;
        cells.clamp(1, fit - 1)
    };
    // A side without images takes no space; the other keeps everything.
    let left_len = match (n_left, n_right) {
        (0, _) => 0,
        (_, 0) => length,
        _ => left_cells * cell,
    };
    let (left_outer, right_outer) = match axis {
        SplitAxis::Dice => (
            Rect::new(parent.x, parent.y, left_len, parent.h),
            Rect::new(parent.x + left_len, parent.y, parent.w - left_len, parent.h),
        ),
        SplitAxis::Slice => (
            Rect::new(parent.x, parent.y, parent.w, left_len),
            Rect::new(parent.x, parent.y + left_len, parent.w, parent.h - left_len),
        ),
    };
    let (left, right) = if n_left == 0 || n_right == 0 {
        (left_outer, right_outer)
    } else {
        // A child thinner than twice the padding collapses; keep it inside
        // the parent's frame.
        let frame = parent.inset(config.padding);
        (
            left_outer.inset(config.padding).clamp_into(frame),
            right_outer.inset(config.padding).clamp_into(frame),
        )
    };
    Ok(Partition {
        axis,
        ratio,
        fit,
        left_cells,
        left_outer,
        right_outer,
        left,
        right,
    })
}

/// Image cells available in `rect` below its header band.
pub fn capacity(rect: Rect, config: &LayoutConfig) -> usize {
    let cols = rect.w / config.image.width.max(1);
    let rows = rect.h.saturating_sub(config.header_h) / config.image.height.max(1);
    cols as usize * rows as usize
}

/// Evenly spaced, order-preserving sample of at most `capacity` ids.
pub fn sample_images(ordered_ids: &[usize], capacity: usize) -> Vec<usize> {
    let len = ordered_ids.len();
    if capacity >= len {
        return ordered_ids.to_vec();
    }
    (0..capacity).map(|i| ordered_ids[i * len / capacity]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ClusterHeader {
    pub image_count: usize,
    /// Fraction of the cluster's images predicted correctly; absent when the
    /// dataset has no predictions.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ImagePlacement {
    pub image_id: usize,
    /// `[column, row]` in the cluster's image grid.
    pub cell: [u32; 2],
    pub misclassified: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LayoutNode {
    pub node_id: NodeId,
    pub rect: Rect,
    pub depth_remaining: usize,
    pub is_cut_leaf: bool,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none", default))]
    pub header: Option<ClusterHeader>,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Vec::is_empty", default))]
    pub placements: Vec<ImagePlacement>,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Vec::is_empty", default))]
    pub children: Vec<LayoutNode>,
}

impl LayoutNode {
    /// Pixel rect of a placement's cell.
    pub fn cell_rect(&self, p: &ImagePlacement, config: &LayoutConfig) -> Rect {
        Rect::new(
            self.rect.x + p.cell[0] * config.image.width,
            self.rect.y + config.header_h + p.cell[1] * config.image.height,
            config.image.width,
            config.image.height,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LayoutTree {
    pub config: LayoutConfig,
    pub zoom_root: NodeId,
    pub k: usize,
    pub root: LayoutNode,
}

impl LayoutTree {
    /// Pre-order walk over all nodes.
    pub fn iter(&self) -> impl Iterator<Item = &LayoutNode> {
        let mut stack = alloc::vec![&self.root];
        core::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }

    pub fn cut_leaves(&self) -> impl Iterator<Item = &LayoutNode> {
        self.iter().filter(|n| n.is_cut_leaf)
    }
}

/// Lays out `cut` inside the viewport, starting the recursion at
/// `zoom_root` (the tree root when `None`).
pub fn layout(
    dendrogram: &Dendrogram,
    cut: &ClusterCut,
    config: &LayoutConfig,
    zoom_root: Option<NodeId>,
    labels: Option<&LabelSet>,
) -> Result<LayoutTree> {
    config.validate()?;
    let root = zoom_root.unwrap_or_else(|| dendrogram.root());
    dendrogram.validate_cut(root, cut)?;
    if let Some(l) = labels {
        if l.len() != dendrogram.n_leaves() {
            return Err(Error::Shape {
                expected: dendrogram.n_leaves(),
                found: l.len(),
            });
        }
    }
    let builder = Builder {
        dendrogram,
        config,
        labels,
        cut: cut.node_ids.iter().copied().collect(),
    };
    Ok(LayoutTree {
        config: *config,
        zoom_root: root,
        k: cut.k,
        root: builder.build(root, config.viewport.rect())?,
    })
}

/// Enlarges `node` to the whole viewport and splits it into up to `k`
/// subclusters.
pub fn zoom(
    dendrogram: &Dendrogram,
    node: NodeId,
    k: usize,
    config: &LayoutConfig,
    labels: Option<&LabelSet>,
) -> Result<LayoutTree> {
    let leaf_count = dendrogram.node(node)?.leaf_count;
    let cut = dendrogram.subtree_cut(node, k.min(leaf_count))?;
    layout(dendrogram, &cut, config, Some(node), labels)
}

struct Builder<'a> {
    dendrogram: &'a Dendrogram,
    config: &'a LayoutConfig,
    labels: Option<&'a LabelSet>,
    cut: BTreeSet<NodeId>,
}

impl Builder<'_> {
    fn build(&self, id: NodeId, rect: Rect) -> Result<LayoutNode> {
        let node = &self.dendrogram.nodes()[id.index()];
        let mut out = LayoutNode {
            node_id: id,
            rect,
            depth_remaining: node.depth_remaining,
            is_cut_leaf: false,
            header: None,
            placements: Vec::new(),
            children: Vec::new(),
        };
        if self.cut.contains(&id) {
            self.fill(&mut out)?;
            return Ok(out);
        }
        let (l, r) = node.children().ok_or(Error::InvalidCut("cut stops below a leaf"))?;
        let nodes = self.dendrogram.nodes();
        let (left, right) = match partition(
            rect,
            nodes[l.index()].leaf_count,
            nodes[r.index()].leaf_count,
            self.config,
        ) {
            Ok(split) => (split.left, split.right),
            // No room to split: the whole subtree collapses to an empty rect
            // at the top-left of the parent's frame.
            Err(Error::DegenerateSpace { .. }) => {
                let frame = rect.inset(self.config.padding);
                let empty = Rect::new(frame.x, frame.y, 0, 0);
                (empty, empty)
            }
            Err(e) => return Err(e),
        };
        out.children = alloc::vec![self.build(l, left)?, self.build(r, right)?];
        Ok(out)
    }

    fn fill(&self, out: &mut LayoutNode) -> Result<()> {
        // A rect too small for one image still gets its header.
        let cap = capacity(out.rect, self.config);
        let leaves = self.dendrogram.leaves(out.node_id)?;
        let accuracy = self.labels.filter(|l| l.has_predictions()).map(|l| {
            let correct = leaves.iter().filter(|&&i| l.is_correct(i) == Some(true)).count();
            correct as f64 / leaves.len() as f64
        });
        out.is_cut_leaf = true;
        out.header = Some(ClusterHeader {
            image_count: leaves.len(),
            accuracy,
        });
        let cols = (out.rect.w / self.config.image.width) as usize;
        out.placements = sample_images(leaves, cap)
            .into_iter()
            .enumerate()
            .map(|(t, image_id)| ImagePlacement {
                image_id,
                cell: [(t % cols) as u32, (t / cols) as u32],
                misclassified: self.labels.and_then(|l| l.is_correct(image_id)).map(|ok| !ok),
            })
            .collect();
        Ok(())
    }
}
