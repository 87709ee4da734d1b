//! Files, command line and query service around [`clustermap_core`].
//!
//! * [`ingest`] reads manifests, embedding matrices and 2-D projections.
//! * [`artifact`] clusters a dataset once and writes a reusable artifact
//!   directory; [`artifact::Dataset`] loads it back.
//! * [`baseline`] and [`eval`] produce grid baselines and
//!   neighbor-preservation reports.
//! * [`service`] answers the explorer's HTTP queries.
//! * [`cli`] ties it together as the `clustermap` binary.

pub mod artifact;
pub mod baseline;
pub mod cli;
mod error;
pub mod eval;
pub mod ingest;
pub mod service;

pub use error::{Error, Result};
