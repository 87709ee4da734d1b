use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input is empty")]
    EmptyInput,

    #[error("{what} = {value} is outside [{min}, {max}]")]
    Range {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },

    #[error("unknown dendrogram node {0}")]
    UnknownNode(usize),

    #[error("unknown leaf {0}")]
    UnknownLeaf(usize),

    #[error("unknown image {0}")]
    UnknownImage(usize),

    #[error("{width}x{height} px cannot hold one {image_w}x{image_h} px image")]
    DegenerateSpace {
        width: u32,
        height: u32,
        image_w: u32,
        image_h: u32,
    },

    #[error("invalid cluster cut: {0}")]
    InvalidCut(&'static str),

    #[error("malformed dendrogram: {0}")]
    MalformedTree(&'static str),

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("value at index {index} is not finite")]
    NonFinite { index: usize },

    #[error("cost at index {index} is negative or not finite")]
    InvalidCost { index: usize },

    #[error("class index {class} at item {item} exceeds class count {n_classes}")]
    ClassOutOfRange {
        item: usize,
        class: u32,
        n_classes: usize,
    },

    #[error("dataset has no predictions")]
    NoPredictions,

    #[error("subset is empty")]
    EmptySubset,

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}
