//! Allocation-only algorithms behind the cluster treemap explorer.
//!
//! Everything in this crate is pure: no IO, no clocks, no randomness. The
//! companion `clustermap` crate handles files, JSON, the CLI and the query
//! service.
//!
//! * [`hclust`] builds the exact Ward dendrogram and answers cut / ancestor
//!   queries over it.
//! * [`layout`] turns a cut into nested, image-quantized slice-dice rectangles.
//! * [`lap`] and [`gridify`] snap a 2-D projection onto an even grid.
//! * [`metrics`] and [`knn`] compute class tables, similar images and the
//!   neighbor-preservation report.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;

pub mod data;
pub mod geometry;
pub mod gridify;
pub mod hclust;
pub mod knn;
pub mod lap;
pub mod layout;
pub mod metrics;

pub use data::{Embeddings, LabelSet, Projection};
pub use error::{Error, Result};
pub use geometry::{ImageSize, Rect, Viewport};
pub use hclust::{ClusterCut, Dendrogram, Node, NodeId, WardStrategy};
