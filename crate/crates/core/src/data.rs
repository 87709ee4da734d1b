//! Validated in-memory inputs: embeddings, 2-D projections and labels.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Row-major `rows x dims` matrix of finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct Embeddings {
    rows: usize,
    dims: usize,
    values: Vec<f64>,
}

impl Embeddings {
    pub fn new(rows: usize, dims: usize, values: Vec<f64>) -> Result<Self> {
        if dims == 0 {
            return Err(Error::InvalidConfig("embedding dimension must be at least 1"));
        }
        let expected = rows.checked_mul(dims).ok_or(Error::Shape {
            expected: usize::MAX,
            found: values.len(),
        })?;
        if values.len() != expected {
            return Err(Error::Shape {
                expected,
                found: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Embeddings { rows, dims, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dims = rows.first().map_or(1, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * dims);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dims {
                return Err(Error::Shape {
                    expected: dims,
                    found: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Embeddings::new(rows.len(), dims, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dims..(i + 1) * self.dims]
    }

    pub fn sq_dist(&self, i: usize, j: usize) -> f64 {
        sq_dist(self.row(i), self.row(j))
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        libm::sqrt(self.sq_dist(i, j))
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// A 2-D projection (t-SNE, UMAP, ...) computed upstream.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    points: Vec<[f64; 2]>,
}

impl Projection {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if let Some(i) = points
            .iter()
            .position(|p| !p[0].is_finite() || !p[1].is_finite())
        {
            return Err(Error::NonFinite { index: i });
        }
        Ok(Projection { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    /// `(min, max)` corners, or `None` when empty.
    pub fn bounds(&self) -> Option<([f64; 2], [f64; 2])> {
        let first = *self.points.first()?;
        Some(self.points.iter().fold((first, first), |(lo, hi), p| {
            (
                [lo[0].min(p[0]), lo[1].min(p[1])],
                [hi[0].max(p[0]), hi[1].max(p[1])],
            )
        }))
    }
}

/// Class labels for every image: ground truth and, optionally, model
/// predictions. Classes are indices into a string table kept by the caller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    n_classes: usize,
    truth: Vec<u32>,
    predicted: Option<Vec<u32>>,
}

impl LabelSet {
    pub fn new(n_classes: usize, truth: Vec<u32>, predicted: Option<Vec<u32>>) -> Result<Self> {
        if let Some(p) = &predicted {
            if p.len() != truth.len() {
                return Err(Error::Shape {
                    expected: truth.len(),
                    found: p.len(),
                });
            }
        }
        for column in core::iter::once(&truth).chain(predicted.as_ref()) {
            if let Some(item) = column.iter().position(|&c| c as usize >= n_classes) {
                return Err(Error::ClassOutOfRange {
                    item,
                    class: column[item],
                    n_classes,
                });
            }
        }
        Ok(LabelSet {
            n_classes,
            truth,
            predicted,
        })
    }

    pub fn len(&self) -> usize {
        self.truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truth.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn truth(&self) -> &[u32] {
        &self.truth
    }

    pub fn predicted(&self) -> Option<&[u32]> {
        self.predicted.as_deref()
    }

    pub fn has_predictions(&self) -> bool {
        self.predicted.is_some()
    }

    /// `Some(true)` when image `i` is predicted as its true class.
    pub fn is_correct(&self, i: usize) -> Option<bool> {
        self.predicted.as_ref().map(|p| p[i] == self.truth[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embeddings_reject_bad_input() {
        assert!(matches!(
            Embeddings::new(2, 2, alloc::vec![0.0; 3]),
            Err(Error::Shape { expected: 4, found: 3 })
        ));
        assert!(matches!(
            Embeddings::new(1, 2, alloc::vec![0.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        ));
        assert!(Embeddings::new(0, 0, alloc::vec![]).is_err());
        let e = Embeddings::from_rows(&[[0.0, 0.0], [3.0, 4.0]]).unwrap();
        assert_eq!(e.dist(0, 1), 5.0);
    }

    #[test]
    fn projection_bounds() {
        let p = Projection::new(alloc::vec![[1.0, -2.0], [-3.0, 5.0]]).unwrap();
        assert_eq!(p.bounds(), Some(([-3.0, -2.0], [1.0, 5.0])));
        assert!(Projection::new(alloc::vec![[f64::INFINITY, 0.0]]).is_err());
    }

    #[test]
    fn labels_validate_class_range() {
        assert!(LabelSet::new(2, alloc::vec![0, 1], Some(alloc::vec![1, 2])).is_err());
        let l = LabelSet::new(2, alloc::vec![0, 1], Some(alloc::vec![1, 1])).unwrap();
        assert_eq!(l.is_correct(0), Some(false));
        assert_eq!(l.is_correct(1), Some(true));
    }
}
