//! Read-only HTTP query service over a loaded artifact.
//!
//! | endpoint | parameters |
//! |---|---|
//! | `GET /dataset` | |
//! | `GET /layout` | `node`, `k` (8), `w` (1280), `h` (800), `img` (48) |
//! | `GET /class-table` | `node` |
//! | `GET /similar` | `id`, `n` (10) |
//! | `GET /image/{id}` | |
//!
//! `node` defaults to the root and also accepts the literal `root`.
//! Failures return `{"error": {"code": ..., "message": ...}}` with status
//! 400 for bad parameters and 404 for unknown nodes, images and paths.
//!
//! All routing lives in [`Service::handle`], a pure function of the request
//! path and query, so identical requests always get identical bytes.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Body;
use axum::extract::State;
use axum::http::{header, Method, Request, StatusCode};
use axum::response::Response;
use axum::Router;
use clustermap_core::layout::{zoom, LayoutConfig, LayoutTree};
use clustermap_core::metrics::{class_table, similar_images, Neighbor};
use clustermap_core::{ImageSize, NodeId, Viewport};
use serde::Serialize;

use crate::artifact::{Dataset, ImageLocation};

pub const API_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_K: usize = 8;
pub const DEFAULT_WIDTH: u32 = 1280;
pub const DEFAULT_HEIGHT: u32 = 800;
/// Medium thumbnails.
pub const DEFAULT_IMAGE: u32 = 48;
pub const DEFAULT_SIMILAR: usize = 10;
/// Upper bound on `w`, `h` and `img`.
pub const MAX_PIXELS: u32 = 16_384;

/// A finished HTTP reply, independent of the server framework.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reply {
    pub status: u16,
    pub content_type: &'static str,
    pub location: Option<String>,
    pub body: Vec<u8>,
}

impl Reply {
    fn json<T: Serialize>(value: &T) -> Reply {
        Reply {
            status: 200,
            content_type: "application/json",
            location: None,
            body: serde_json::to_vec(value).expect("response serializes"),
        }
    }

    fn error(status: u16, code: &str, message: impl Into<String>) -> Reply {
        let body = serde_json::json!({ "error": { "code": code, "message": message.into() } });
        Reply {
            status,
            ..Reply::json(&body)
        }
    }

    pub fn json_body(&self) -> serde_json::Value {
        serde_json::from_slice(&self.body).expect("reply body is JSON")
    }
}

type Handled = Result<Reply, Reply>;

fn bad_request(message: impl Into<String>) -> Reply {
    Reply::error(400, "bad_request", message)
}

/// Query string as a map; repeated or unexpected keys are rejected.
struct Params(BTreeMap<String, String>);

impl Params {
    fn parse(query: &str, allowed: &[&str]) -> Result<Params, Reply> {
        let mut map = BTreeMap::new();
        for (k, v) in form_urlencoded::parse(query.as_bytes()) {
            if !allowed.contains(&k.as_ref()) {
                return Err(bad_request(format!(
                    "unknown parameter {k:?}; expected one of {}",
                    allowed.join(", ")
                )));
            }
            if map.insert(k.to_string(), v.to_string()).is_some() {
                return Err(bad_request(format!("parameter {k:?} given twice")));
            }
        }
        Ok(Params(map))
    }

    fn number<T: std::str::FromStr + PartialOrd + std::fmt::Display>(
        &self,
        key: &str,
        default: T,
        min: T,
        max: T,
    ) -> Result<T, Reply> {
        let Some(raw) = self.0.get(key) else { return Ok(default) };
        let v: T = raw
            .parse()
            .map_err(|_| bad_request(format!("{key}={raw:?} is not a nonnegative integer")))?;
        if v < min || v > max {
            return Err(bad_request(format!("{key}={v} is outside [{min}, {max}]")));
        }
        Ok(v)
    }
}

pub struct Service {
    data: Dataset,
}

#[derive(Serialize)]
struct DatasetSummary<'a> {
    schema_version: u32,
    n_images: usize,
    n_dims: usize,
    n_nodes: usize,
    root: NodeId,
    classes: &'a [String],
    has_predictions: bool,
    has_projection: bool,
    defaults: LayoutDefaults,
}

#[derive(Serialize)]
struct LayoutDefaults {
    k: usize,
    w: u32,
    h: u32,
    img: u32,
}

#[derive(Serialize)]
struct LayoutReply<'a> {
    schema_version: u32,
    /// Zoom-out target; absent at the root.
    #[serde(skip_serializing_if = "Option::is_none")]
    parent: Option<NodeId>,
    #[serde(flatten)]
    layout: &'a LayoutTree,
}

#[derive(Serialize)]
struct ClassRow<'a> {
    class_id: u32,
    class_name: &'a str,
    true_count: usize,
    predicted_count: usize,
    accuracy: Option<f64>,
    false_negative_rate: Option<f64>,
    false_positive_rate: Option<f64>,
}

#[derive(Serialize)]
struct ClassTableReply<'a> {
    schema_version: u32,
    node: NodeId,
    image_count: usize,
    rows: Vec<ClassRow<'a>>,
}

#[derive(Serialize)]
struct SimilarReply {
    schema_version: u32,
    query: usize,
    neighbors: Vec<Neighbor>,
}

impl Service {
    pub fn new(data: Dataset) -> Self {
        Service { data }
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    /// Answers `GET path?query`.
    pub fn handle(&self, path: &str, query: &str) -> Reply {
        let result = match path {
            "/dataset" => self.summary(query),
            "/layout" => self.layout(query),
            "/class-table" => self.class_table(query),
            "/similar" => self.similar(query),
            p => match p.strip_prefix("/image/") {
                Some(id) => self.image(id, query),
                None => Err(Reply::error(404, "not_found", format!("no endpoint at {p}"))),
            },
        };
        result.unwrap_or_else(|e| e)
    }

    fn node_param(&self, params: &Params) -> Result<NodeId, Reply> {
        let d = &self.data.dendrogram;
        match params.0.get("node").map(String::as_str) {
            None | Some("root") => Ok(d.root()),
            Some(raw) => {
                let id: usize = raw
                    .parse()
                    .map_err(|_| bad_request(format!("node={raw:?} is not a node id")))?;
                if id >= d.len() {
                    return Err(Reply::error(404, "unknown_node", format!("no node {id}")));
                }
                Ok(NodeId(id))
            }
        }
    }

    fn summary(&self, query: &str) -> Handled {
        Params::parse(query, &[])?;
        let d = &self.data;
        Ok(Reply::json(&DatasetSummary {
            schema_version: API_SCHEMA_VERSION,
            n_images: d.len(),
            n_dims: d.meta.n_dims,
            n_nodes: d.dendrogram.len(),
            root: d.dendrogram.root(),
            classes: &d.manifest.classes,
            has_predictions: d.manifest.has_predictions,
            has_projection: d.projection.is_some(),
            defaults: LayoutDefaults {
                k: DEFAULT_K,
                w: DEFAULT_WIDTH,
                h: DEFAULT_HEIGHT,
                img: DEFAULT_IMAGE,
            },
        }))
    }

    fn layout(&self, query: &str) -> Handled {
        let p = Params::parse(query, &["node", "k", "w", "h", "img"])?;
        let node = self.node_param(&p)?;
        let k = p.number("k", DEFAULT_K, 1, usize::MAX)?;
        let w = p.number("w", DEFAULT_WIDTH, 1, MAX_PIXELS)?;
        let h = p.number("h", DEFAULT_HEIGHT, 1, MAX_PIXELS)?;
        let img = p.number("img", DEFAULT_IMAGE, 1, w.min(h))?;
        let cfg = LayoutConfig::new(Viewport::new(w, h), ImageSize::square(img));
        let d = &self.data;
        // k beyond the subtree's size shows every image on its own.
        let tree = zoom(&d.dendrogram, node, k, &cfg, Some(&d.labels)).map_err(|e| bad_request(e.to_string()))?;
        let parent = d.dendrogram.node(node).ok().and_then(|n| n.parent);
        Ok(Reply::json(&LayoutReply {
            schema_version: API_SCHEMA_VERSION,
            parent,
            layout: &tree,
        }))
    }

    fn class_table(&self, query: &str) -> Handled {
        let p = Params::parse(query, &["node"])?;
        let node = self.node_param(&p)?;
        let d = &self.data;
        if !d.manifest.has_predictions {
            return Err(Reply::error(400, "no_predictions", "the dataset has no predicted classes"));
        }
        let leaves = d.dendrogram.leaves(node).expect("node checked");
        let stats = class_table(&d.labels, leaves).map_err(|e| bad_request(e.to_string()))?;
        let rows = stats
            .iter()
            .map(|s| ClassRow {
                class_id: s.class_id,
                class_name: &d.manifest.classes[s.class_id as usize],
                true_count: s.true_count,
                predicted_count: s.predicted_count,
                accuracy: s.accuracy,
                false_negative_rate: s.false_negative_rate,
                false_positive_rate: s.false_positive_rate,
            })
            .collect();
        Ok(Reply::json(&ClassTableReply {
            schema_version: API_SCHEMA_VERSION,
            node,
            image_count: leaves.len(),
            rows,
        }))
    }

    fn similar(&self, query: &str) -> Handled {
        let p = Params::parse(query, &["id", "n"])?;
        let n_images = self.data.len();
        let raw = p.0.get("id").ok_or_else(|| bad_request("missing parameter id"))?;
        let id: usize = raw
            .parse()
            .map_err(|_| bad_request(format!("id={raw:?} is not an image id")))?;
        if id >= n_images {
            return Err(Reply::error(404, "unknown_image", format!("no image {id}")));
        }
        if n_images < 2 {
            return Err(bad_request("the dataset has a single image"));
        }
        let n = p.number("n", DEFAULT_SIMILAR.min(n_images - 1), 1, n_images - 1)?;
        let neighbors = similar_images(&self.data.embeddings, id, n).map_err(|e| bad_request(e.to_string()))?;
        Ok(Reply::json(&SimilarReply {
            schema_version: API_SCHEMA_VERSION,
            query: id,
            neighbors,
        }))
    }

    fn image(&self, raw: &str, query: &str) -> Handled {
        Params::parse(query, &[])?;
        let unknown = || Reply::error(404, "unknown_image", format!("no image {raw:?}"));
        let id: usize = raw.parse().map_err(|_| unknown())?;
        match self.data.image_location(id).ok_or_else(unknown)? {
            ImageLocation::Url(url) => Ok(Reply {
                status: 302,
                content_type: "text/plain",
                location: Some(url),
                body: Vec::new(),
            }),
            ImageLocation::File(path) => {
                let body = std::fs::read(&path).map_err(|e| {
                    Reply::error(404, "image_unavailable", format!("image {id} at {}: {e}", path.display()))
                })?;
                Ok(Reply {
                    status: 200,
                    content_type: content_type(&path),
                    location: None,
                    body,
                })
            }
        }
    }
}

fn content_type(path: &std::path::Path) -> &'static str {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("png") => "image/png",
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("gif") => "image/gif",
        Some("webp") => "image/webp",
        Some("svg") => "image/svg+xml",
        Some("bmp") => "image/bmp",
        _ => "application/octet-stream",
    }
}

async fn dispatch(State(service): State<Arc<Service>>, req: Request<Body>) -> Response {
    let reply = if req.method() == Method::GET || req.method() == Method::HEAD {
        let uri = req.uri();
        service.handle(uri.path(), uri.query().unwrap_or(""))
    } else {
        Reply::error(405, "method_not_allowed", "the service is read-only")
    };
    let mut builder = Response::builder()
        .status(StatusCode::from_u16(reply.status).expect("valid status"))
        .header(header::CONTENT_TYPE, reply.content_type)
        .header(header::ACCESS_CONTROL_ALLOW_ORIGIN, "*");
    if let Some(loc) = reply.location {
        builder = builder.header(header::LOCATION, loc);
    }
    builder.body(Body::from(reply.body)).expect("valid response")
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new().fallback(dispatch).with_state(service)
}

/// Serves until the process is stopped.
pub async fn serve(service: Arc<Service>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(service)).await
}
