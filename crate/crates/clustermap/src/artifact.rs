//! Build artifact directory:
//!
//! * `artifact.json`: parameters, input references with SHA-256 digests,
//!   and the merge list the dendrogram is rebuilt from.
//! * `manifest.json`: the normalized manifest.
//! * `dendrogram.json`: the tree as nested JSON, for clients.
//!
//! Nothing time- or host-dependent is written unless `SOURCE_DATE_EPOCH`
//! is set, so rebuilding from the same inputs gives identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clustermap_core::hclust::{ward_dendrogram_with, Merge};
use clustermap_core::{Dendrogram, Embeddings, LabelSet, NodeId, Projection, WardStrategy};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ingest::{self, DatasetManifest, MatrixFormat};

pub const ARTIFACT_SCHEMA_VERSION: u32 = 1;
pub const ARTIFACT_FILE: &str = "artifact.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const DENDROGRAM_FILE: &str = "dendrogram.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputRef {
    /// Absolute path at build time.
    pub path: PathBuf,
    pub sha256: String,
    pub format: MatrixFormat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildParameters {
    pub linkage: String,
    pub metric: String,
    pub strategy: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactMeta {
    pub schema_version: u32,
    pub tool_version: String,
    /// Seconds since the epoch, from `SOURCE_DATE_EPOCH`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created: Option<u64>,
    pub parameters: BuildParameters,
    pub n_items: usize,
    pub n_dims: usize,
    pub manifest_sha256: String,
    /// Relative `image_uri`s resolve against this directory.
    pub image_root: PathBuf,
    pub embeddings: InputRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection: Option<InputRef>,
    pub merges: Vec<Merge>,
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub manifest: PathBuf,
    pub embeddings: PathBuf,
    pub projection: Option<PathBuf>,
    pub format: MatrixFormat,
    pub strategy: WardStrategy,
    pub out_dir: PathBuf,
}

impl BuildOptions {
    pub fn new(manifest: impl Into<PathBuf>, embeddings: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        BuildOptions {
            manifest: manifest.into(),
            embeddings: embeddings.into(),
            projection: None,
            format: MatrixFormat::Auto,
            strategy: WardStrategy::Auto,
            out_dir: out_dir.into(),
        }
    }
}

fn strategy_name(s: WardStrategy) -> &'static str {
    match s {
        WardStrategy::Auto => "auto",
        WardStrategy::Matrix => "matrix",
        WardStrategy::Centroid => "centroid",
    }
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|source| Error::Read {
        path: path.into(),
        source,
    })?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

fn absolute(path: &Path) -> Result<PathBuf> {
    fs::canonicalize(path).map_err(|source| Error::Read {
        path: path.into(),
        source,
    })
}

fn input_ref(path: &Path, format: MatrixFormat) -> Result<InputRef> {
    Ok(InputRef {
        path: absolute(path)?,
        sha256: sha256_file(path)?,
        format: format.resolve(path),
    })
}

fn source_date_epoch() -> Option<u64> {
    std::env::var("SOURCE_DATE_EPOCH").ok()?.trim().parse().ok()
}

/// Loads and validates the inputs, clusters, and writes the artifact
/// directory. Nothing is written if any input is invalid.
pub fn build(opts: &BuildOptions) -> Result<ArtifactMeta> {
    let manifest = ingest::load_manifest(&opts.manifest)?;
    let embeddings = ingest::load_embeddings_as(&opts.embeddings, opts.format, manifest.len())?;
    if let Some(p) = &opts.projection {
        ingest::load_projection_as(p, opts.format, Some(manifest.len()))?;
    }
    let dendrogram = ward_dendrogram_with(&embeddings, opts.strategy)?;

    let manifest_path = absolute(&opts.manifest)?;
    let meta = ArtifactMeta {
        schema_version: ARTIFACT_SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        created: source_date_epoch(),
        parameters: BuildParameters {
            linkage: "ward".into(),
            metric: "euclidean".into(),
            strategy: strategy_name(opts.strategy).into(),
        },
        n_items: manifest.len(),
        n_dims: embeddings.dims(),
        manifest_sha256: sha256_file(&opts.manifest)?,
        image_root: manifest_path.parent().map(Path::to_path_buf).unwrap_or_default(),
        embeddings: input_ref(&opts.embeddings, opts.format)?,
        projection: opts.projection.as_deref().map(|p| input_ref(p, opts.format)).transpose()?,
        merges: dendrogram.merges(),
    };

    let out = &opts.out_dir;
    fs::create_dir_all(out).map_err(|source| Error::Write {
        path: out.clone(),
        source,
    })?;
    let mut meta_json = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    meta_json.push('\n');
    ingest::write_file(&out.join(ARTIFACT_FILE), meta_json.as_bytes())?;
    manifest.save(&out.join(MANIFEST_FILE))?;
    ingest::write_file(&out.join(DENDROGRAM_FILE), dendrogram_json(&dendrogram).as_bytes())?;
    Ok(meta)
}

/// Nested JSON for the whole tree, built without recursion so deep trees
/// are safe. Internal nodes carry `children`; leaves carry `image_id`.
pub fn dendrogram_json(d: &Dendrogram) -> String {
    let mut s = String::with_capacity(d.len() * 64);
    write!(
        s,
        "{{\"schema_version\":{ARTIFACT_SCHEMA_VERSION},\"n_leaves\":{},\"root\":",
        d.n_leaves()
    )
    .unwrap();
    enum Step {
        Open(NodeId),
        Between,
        Close,
    }
    let mut stack = vec![Step::Open(d.root())];
    while let Some(step) = stack.pop() {
        match step {
            Step::Between => s.push(','),
            Step::Close => s.push_str("]}"),
            Step::Open(id) => {
                let n = &d.nodes()[id.index()];
                let height = serde_json::to_string(&n.height).expect("finite height");
                write!(s, "{{\"id\":{id},\"leaf_count\":{},\"merge_height\":{height}", n.leaf_count).unwrap();
                match n.children() {
                    None => write!(s, ",\"image_id\":{id}}}").unwrap(),
                    Some((l, r)) => {
                        s.push_str(",\"children\":[");
                        stack.extend([Step::Close, Step::Open(r), Step::Between, Step::Open(l)]);
                    }
                }
            }
        }
    }
    s.push_str("}\n");
    s
}

/// Everything the query service and evaluation need, loaded from an
/// artifact directory.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub meta: ArtifactMeta,
    pub manifest: DatasetManifest,
    pub labels: LabelSet,
    pub dendrogram: Dendrogram,
    pub embeddings: Embeddings,
    pub projection: Option<Projection>,
}

impl Dataset {
    pub fn open(dir: &Path) -> Result<Self> {
        let meta_path = dir.join(ARTIFACT_FILE);
        let meta: ArtifactMeta = serde_json::from_str(&ingest::read_text(&meta_path)?)
            .map_err(|e| Error::parse(&meta_path, e.to_string()))?;
        if meta.schema_version != ARTIFACT_SCHEMA_VERSION {
            return Err(Error::Validation(format!(
                "{}: unsupported schema_version {}",
                meta_path.display(),
                meta.schema_version
            )));
        }
        let manifest = ingest::load_manifest(&dir.join(MANIFEST_FILE))?;
        if manifest.len() != meta.n_items {
            return Err(Error::Shape {
                what: "manifest items",
                expected: meta.n_items,
                found: manifest.len(),
            });
        }
        let dendrogram = Dendrogram::from_merges(meta.n_items, &meta.merges)?;
        let embeddings = load_checked(&meta.embeddings, |p, f| ingest::load_embeddings_as(p, f, meta.n_items))?;
        if embeddings.dims() != meta.n_dims {
            return Err(Error::Shape {
                what: "embedding columns",
                expected: meta.n_dims,
                found: embeddings.dims(),
            });
        }
        let projection = meta
            .projection
            .as_ref()
            .map(|r| load_checked(r, |p, f| ingest::load_projection_as(p, f, Some(meta.n_items))))
            .transpose()?;
        Ok(Dataset {
            labels: manifest.labels(),
            meta,
            manifest,
            dendrogram,
            embeddings,
            projection,
        })
    }

    pub fn len(&self) -> usize {
        self.meta.n_items
    }

    pub fn is_empty(&self) -> bool {
        self.meta.n_items == 0
    }

    /// Where an item's image lives: a URL, or a path under the image root.
    pub fn image_location(&self, id: usize) -> Option<ImageLocation> {
        let uri = &self.manifest.items.get(id)?.image_uri;
        Some(if uri.starts_with("http://") || uri.starts_with("https://") {
            ImageLocation::Url(uri.clone())
        } else {
            let path = uri.strip_prefix("file://").unwrap_or(uri);
            ImageLocation::File(self.meta.image_root.join(path))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImageLocation {
    Url(String),
    File(PathBuf),
}

fn load_checked<T>(r: &InputRef, load: impl FnOnce(&Path, MatrixFormat) -> Result<T>) -> Result<T> {
    let digest = sha256_file(&r.path)?;
    if digest != r.sha256 {
        return Err(Error::Validation(format!(
            "{} changed since the artifact was built (sha256 {digest}, expected {})",
            r.path.display(),
            r.sha256
        )));
    }
    load(&r.path, r.format)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clustermap_core::hclust::ward_dendrogram;

    #[test]
    fn nested_json_matches_tree() {
        let e = Embeddings::from_rows(&[[0.0], [1.0], [10.0]]).unwrap();
        let d = ward_dendrogram(&e).unwrap();
        let v: serde_json::Value = serde_json::from_str(&dendrogram_json(&d)).unwrap();
        assert_eq!(v["n_leaves"], 3);
        let root = &v["root"];
        assert_eq!(root["id"], 4);
        assert_eq!(root["leaf_count"], 3);
        let left = &root["children"][0];
        assert_eq!(left["leaf_count"], 2);
        assert_eq!(left["merge_height"], 1.0);
        assert_eq!(left["children"][0]["image_id"], 0);
        assert_eq!(left["children"][1]["image_id"], 1);
        assert_eq!(root["children"][1]["image_id"], 2);
        assert_eq!(root["children"][1]["merge_height"], 0.0);
    }

    #[test]
    fn single_image_tree() {
        let e = Embeddings::from_rows(&[[3.0, 4.0]]).unwrap();
        let d = ward_dendrogram(&e).unwrap();
        let v: serde_json::Value = serde_json::from_str(&dendrogram_json(&d)).unwrap();
        assert_eq!(v["root"]["image_id"], 0);
    }

    #[test]
    fn deep_chain_is_written_iteratively() {
        let n = 5000;
        let mut merges = vec![Merge { left: NodeId(0), right: NodeId(1), height: 1.0 }];
        for i in 2..n {
            merges.push(Merge { left: NodeId(n + i - 2), right: NodeId(i), height: i as f64 });
        }
        let d = Dendrogram::from_merges(n, &merges).unwrap();
        let s = dendrogram_json(&d);
        assert_eq!(s.matches("\"image_id\"").count(), n);
        assert_eq!(s.matches('[').count(), s.matches(']').count());
    }
}
