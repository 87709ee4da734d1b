//! Dataset manifests and embedding / projection matrices.
//!
//! Manifest (JSON):
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "classes": ["cat", "dog"],
//!   "items": [
//!     {"id": 0, "image_uri": "img/0.png", "true_class": 0, "predicted_class": 1}
//!   ]
//! }
//! ```
//!
//! Ids must be unique but need not be dense; items are sorted by id and
//! renumbered `0..N`, and matrix rows are matched to items in that order.
//!
//! Matrices are either whitespace-delimited text (one row per line, blank
//! lines and `#` comments skipped) or binary: `u32` rows and `u32` columns,
//! little-endian, followed by `rows * cols` little-endian `f32` values.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use clustermap_core::{Embeddings, LabelSet, Projection};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageRecord {
    pub id: u64,
    pub image_uri: String,
    pub true_class: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_class: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    schema_version: u32,
    classes: Vec<String>,
    items: Vec<ImageRecord>,
}

/// A validated manifest. Item `i` has id `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub classes: Vec<String>,
    pub items: Vec<ImageRecord>,
    pub has_predictions: bool,
}

impl DatasetManifest {
    /// Validates and normalizes `classes` and `items`.
    pub fn new(classes: Vec<String>, mut items: Vec<ImageRecord>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::Validation("manifest has no items".into()));
        }
        let mut names = HashSet::new();
        if let Some(dup) = classes.iter().find(|c| !names.insert(c.as_str())) {
            return Err(Error::Validation(format!("duplicate class name {dup:?}")));
        }
        items.sort_by_key(|r| r.id);
        if let Some(w) = items.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::Validation(format!("duplicate image id {}", w[0].id)));
        }
        let n_classes = classes.len();
        for r in &items {
            for (field, class) in [("true_class", Some(r.true_class)), ("predicted_class", r.predicted_class)] {
                if let Some(c) = class.filter(|&c| c as usize >= n_classes) {
                    return Err(Error::Validation(format!(
                        "image {}: {field} {c} is not below the class count {n_classes}",
                        r.id
                    )));
                }
            }
        }
        let with_pred = items.iter().filter(|r| r.predicted_class.is_some()).count();
        if with_pred != 0 && with_pred != items.len() {
            let missing = items.iter().find(|r| r.predicted_class.is_none()).unwrap();
            return Err(Error::Validation(format!(
                "predicted_class is set on {with_pred} of {} items (image {} has none); \
                 give it for every item or for none",
                items.len(),
                missing.id
            )));
        }
        for (i, r) in items.iter_mut().enumerate() {
            r.id = i as u64;
        }
        Ok(DatasetManifest {
            classes,
            has_predictions: with_pred > 0,
            items,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn labels(&self) -> LabelSet {
        let truth = self.items.iter().map(|r| r.true_class).collect();
        let predicted = self
            .has_predictions
            .then(|| self.items.iter().map(|r| r.predicted_class.unwrap_or_default()).collect());
        LabelSet::new(self.classes.len(), truth, predicted).expect("manifest already validated")
    }

    pub fn to_json(&self) -> String {
        let file = ManifestFile {
            schema_version: MANIFEST_SCHEMA_VERSION,
            classes: self.classes.clone(),
            items: self.items.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, self.to_json().as_bytes())
    }
}

pub fn parse_manifest(text: &str, path: &Path) -> Result<DatasetManifest> {
    let file: ManifestFile = serde_json::from_str(text).map_err(|e| Error::parse(path, e.to_string()))?;
    if file.schema_version != MANIFEST_SCHEMA_VERSION {
        return Err(Error::Validation(format!(
            "{}: unsupported schema_version {} (expected {MANIFEST_SCHEMA_VERSION})",
            path.display(),
            file.schema_version
        )));
    }
    DatasetManifest::new(file.classes, file.items)
}

pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    parse_manifest(&read_text(path)?, path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixFormat {
    /// Binary for `.bin` and `.f32` files, text otherwise.
    #[default]
    Auto,
    Text,
    Binary,
}

impl MatrixFormat {
    pub fn resolve(self, path: &Path) -> MatrixFormat {
        match self {
            MatrixFormat::Auto => match path.extension().and_then(|e| e.to_str()) {
                Some("bin" | "f32") => MatrixFormat::Binary,
                _ => MatrixFormat::Text,
            },
            f => f,
        }
    }
}

/// Dense row-major matrix as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

pub fn read_matrix(path: &Path, format: MatrixFormat) -> Result<Matrix> {
    let m = match format.resolve(path) {
        MatrixFormat::Binary => {
            let bytes = fs::read(path).map_err(|source| Error::Read {
                path: path.into(),
                source,
            })?;
            parse_binary(&bytes, path)?
        }
        _ => parse_text(&read_text(path)?, path)?,
    };
    if let Some(idx) = m.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            path: path.into(),
            row: idx / m.cols,
            col: idx % m.cols,
        });
    }
    Ok(m)
}

fn parse_text(text: &str, path: &Path) -> Result<Matrix> {
    let mut values = Vec::new();
    let mut rows = 0;
    let mut cols = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let before = values.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::parse(path, format!("line {}: {tok:?} is not a number", lineno + 1)))?;
            values.push(v);
        }
        let width = values.len() - before;
        if rows == 0 {
            cols = width;
        } else if width != cols {
            return Err(Error::parse(
                path,
                format!("line {}: {width} values, earlier rows have {cols}", lineno + 1),
            ));
        }
        rows += 1;
    }
    Ok(Matrix { rows, cols, values })
}

fn parse_binary(bytes: &[u8], path: &Path) -> Result<Matrix> {
    let header = bytes
        .get(..8)
        .ok_or_else(|| Error::parse(path, "shorter than the 8-byte header"))?;
    let rows = u32::from_le_bytes(header[..4].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(header[4..].try_into().unwrap()) as usize;
    if cols == 0 && rows > 0 {
        return Err(Error::parse(path, "header declares zero columns"));
    }
    let body = &bytes[8..];
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::parse(path, "header size overflows"))?;
    if body.len() != expected {
        return Err(Error::parse(
            path,
            format!("header declares {rows}x{cols} f32 values ({expected} bytes), body has {} bytes", body.len()),
        ));
    }
    let values = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    Ok(Matrix { rows, cols, values })
}

/// Writes `m` in the given format (`Auto` resolves by extension). Binary
/// output stores `f32`, so values lose precision.
pub fn write_matrix(path: &Path, m: &Matrix, format: MatrixFormat) -> Result<()> {
    let bytes = match format.resolve(path) {
        MatrixFormat::Binary => {
            let mut out = Vec::with_capacity(8 + m.values.len() * 4);
            out.extend((m.rows as u32).to_le_bytes());
            out.extend((m.cols as u32).to_le_bytes());
            for v in &m.values {
                out.extend((*v as f32).to_le_bytes());
            }
            out
        }
        _ => {
            let mut s = String::new();
            for row in m.values.chunks(m.cols.max(1)) {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
                s.push_str(&cells.join(" "));
                s.push('\n');
            }
            s.into_bytes()
        }
    };
    write_file(path, &bytes)
}

fn expect_rows(m: &Matrix, what: &'static str, expected_rows: usize) -> Result<()> {
    if m.rows != expected_rows {
        return Err(Error::Shape {
            what,
            expected: expected_rows,
            found: m.rows,
        });
    }
    Ok(())
}

pub fn load_embeddings(path: &Path, expected_rows: usize) -> Result<Embeddings> {
    load_embeddings_as(path, MatrixFormat::Auto, expected_rows)
}

pub fn load_embeddings_as(path: &Path, format: MatrixFormat, expected_rows: usize) -> Result<Embeddings> {
    let m = read_matrix(path, format)?;
    expect_rows(&m, "embedding rows", expected_rows)?;
    if m.cols == 0 {
        return Err(Error::Validation(format!("{}: embeddings need at least one column", path.display())));
    }
    Ok(Embeddings::new(m.rows, m.cols, m.values)?)
}

pub fn load_projection(path: &Path, expected_rows: usize) -> Result<Projection> {
    load_projection_as(path, MatrixFormat::Auto, Some(expected_rows))
}

/// As [`load_projection`]; `None` accepts any row count.
pub fn load_projection_as(path: &Path, format: MatrixFormat, expected_rows: Option<usize>) -> Result<Projection> {
    let m = read_matrix(path, format)?;
    if let Some(n) = expected_rows {
        expect_rows(&m, "projection rows", n)?;
    }
    if m.rows == 0 {
        return Err(Error::Validation(format!("{}: projection is empty", path.display())));
    }
    if m.cols != 2 {
        return Err(Error::Shape {
            what: "projection columns",
            expected: 2,
            found: m.cols,
        });
    }
    let points = m.values.chunks_exact(2).map(|p| [p[0], p[1]]).collect();
    Ok(Projection::new(points)?)
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.into(),
        source,
    })
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Write {
        path: PathBuf::from(path),
        source,
    })
}
