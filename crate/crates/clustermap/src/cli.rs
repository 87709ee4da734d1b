//! `clustermap` subcommands.
//!
//! Exit codes: 0 success, 1 other failure, 2 usage, 3 unreadable or
//! malformed input, 4 invalid content, 5 shape mismatch, 6 non-finite
//! value, 7 clustering or layout failure, 8 cannot write output.

use std::io::Write as _;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use clustermap_core::{ImageSize, Viewport, WardStrategy};

use crate::artifact::{build, BuildOptions, Dataset};
use crate::baseline::{gridify_projection, load_grid, save_grid, GridOptions, ZoomSpec};
use crate::error::{Error, Result};
use crate::eval::{evaluate, write_report, CSV_FILE, JSON_FILE};
use crate::ingest::{self, MatrixFormat};
use crate::service::{self, Service};

#[derive(Debug, Parser)]
#[command(name = "clustermap", version, about = "Dendrogram treemaps for image embedding datasets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster a dataset and write an artifact directory.
    Build(BuildArgs),
    /// Snap a 2-D projection onto an even grid.
    Gridify(GridifyArgs),
    /// Write a neighbor-preservation report for an artifact.
    Eval(EvalArgs),
    /// Print the treemap layout for one view as JSON.
    Layout(LayoutArgs),
    /// Print the class table for a cluster as JSON.
    ClassTable(ClassTableArgs),
    /// Serve the read-only query API.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Auto,
    Text,
    Binary,
}

impl From<FormatArg> for MatrixFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Auto => MatrixFormat::Auto,
            FormatArg::Text => MatrixFormat::Text,
            FormatArg::Binary => MatrixFormat::Binary,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    Auto,
    Matrix,
    Centroid,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Optional 2-D projection, kept for the baseline and evaluation.
    #[arg(long)]
    pub projection: Option<PathBuf>,
    /// Matrix file format; `auto` picks binary for .bin and .f32 files.
    #[arg(long, value_enum, default_value = "auto")]
    pub format: FormatArg,
    /// Ward implementation: full distance matrix or centroid updates.
    #[arg(long, value_enum, default_value = "auto")]
    pub strategy: StrategyArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ViewportArgs {
    #[arg(long, default_value_t = service::DEFAULT_WIDTH)]
    pub width: u32,
    #[arg(long, default_value_t = service::DEFAULT_HEIGHT)]
    pub height: u32,
    /// Square thumbnail side in pixels.
    #[arg(long, default_value_t = service::DEFAULT_IMAGE)]
    pub image: u32,
}

#[derive(Debug, Args)]
pub struct GridifyArgs {
    #[arg(long)]
    pub projection: PathBuf,
    /// Check the projection's row count against this manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "auto")]
    pub format: FormatArg,
    #[command(flatten)]
    pub view: ViewportArgs,
    /// Regrid only the points nearest this `x,y` (projection coordinates).
    #[arg(long, value_parser = parse_point, requires = "k")]
    pub click: Option<[f64; 2]>,
    /// Number of points to regrid around `--click`.
    #[arg(long, requires = "click")]
    pub k: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub artifact: PathBuf,
    /// Grid baseline from `gridify` (full, not zoomed).
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// Comma-separated neighbor counts; values of N or more are dropped.
    #[arg(long, value_delimiter = ',', default_values_t = clustermap_core::knn::DEFAULT_K_VALUES)]
    pub k: Vec<usize>,
    /// Directory for neighbors.csv and neighbors.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LayoutArgs {
    #[arg(long)]
    pub artifact: PathBuf,
    /// Zoom root; the dendrogram root by default.
    #[arg(long)]
    pub node: Option<usize>,
    #[arg(long, default_value_t = service::DEFAULT_K)]
    pub k: usize,
    #[command(flatten)]
    pub view: ViewportArgs,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassTableArgs {
    #[arg(long)]
    pub artifact: PathBuf,
    #[arg(long)]
    pub node: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub artifact: PathBuf,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
}

fn parse_point(s: &str) -> std::result::Result<[f64; 2], String> {
    let (x, y) = s.split_once(',').ok_or("expected x,y")?;
    let parse = |v: &str| {
        v.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or(format!("{v:?} is not a finite number"))
    };
    Ok([parse(x)?, parse(y)?])
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Gridify(a) => cmd_gridify(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Layout(a) => cmd_query(&a.artifact, a.out.as_deref(), |s| {
            let q = view_query(a.node, a.k, &a.view);
            s.handle("/layout", &q)
        }),
        Command::ClassTable(a) => cmd_query(&a.artifact, a.out.as_deref(), |s| {
            let q = a.node.map(|n| format!("node={n}")).unwrap_or_default();
            s.handle("/class-table", &q)
        }),
        Command::Serve(a) => cmd_serve(a),
    }
}

fn cmd_build(a: BuildArgs) -> Result<()> {
    let opts = BuildOptions {
        manifest: a.manifest,
        embeddings: a.embeddings,
        projection: a.projection,
        format: a.format.into(),
        strategy: match a.strategy {
            StrategyArg::Auto => WardStrategy::Auto,
            StrategyArg::Matrix => WardStrategy::Matrix,
            StrategyArg::Centroid => WardStrategy::Centroid,
        },
        out_dir: a.out,
    };
    let meta = build(&opts)?;
    eprintln!(
        "clustered {} images ({} dims) into {} nodes; wrote {}",
        meta.n_items,
        meta.n_dims,
        2 * meta.n_items - 1,
        opts.out_dir.display()
    );
    Ok(())
}

fn cmd_gridify(a: GridifyArgs) -> Result<()> {
    let expected_rows = a
        .manifest
        .as_deref()
        .map(ingest::load_manifest)
        .transpose()?
        .map(|m| m.len());
    let zoom = match (a.click, a.k) {
        (Some(click), Some(k)) => Some(ZoomSpec { click, k }),
        _ => None,
    };
    let grid = gridify_projection(&GridOptions {
        projection: a.projection,
        format: a.format.into(),
        expected_rows,
        viewport: Viewport::new(a.view.width, a.view.height),
        image: ImageSize::square(a.view.image),
        zoom,
    })?;
    save_grid(&a.out, &grid)?;
    eprintln!(
        "placed {} images on a {}x{} grid (cost {}); wrote {}",
        grid.grid.image_count(),
        grid.grid.grid_cols,
        grid.grid.grid_rows,
        grid.grid.total_cost,
        a.out.display()
    );
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let data = Dataset::open(&a.artifact)?;
    let grid = a.grid.as_deref().map(load_grid).transpose()?;
    let report = evaluate(&data, grid.as_ref(), &a.k)?;
    write_report(&a.out, &report)?;
    eprintln!(
        "{} methods x {} k values; wrote {} and {} in {}",
        report.series.len(),
        report.k_values.len(),
        CSV_FILE,
        JSON_FILE,
        a.out.display()
    );
    Ok(())
}

fn view_query(node: Option<usize>, k: usize, view: &ViewportArgs) -> String {
    let mut q = format!("k={k}&w={}&h={}&img={}", view.width, view.height, view.image);
    if let Some(n) = node {
        q.push_str(&format!("&node={n}"));
    }
    q
}

/// Runs one service query offline and prints its body.
fn cmd_query(artifact: &Path, out: Option<&Path>, query: impl FnOnce(&Service) -> service::Reply) -> Result<()> {
    let service = Service::new(Dataset::open(artifact)?);
    let reply = query(&service);
    if reply.status != 200 {
        let body = reply.json_body();
        let message = body["error"]["message"].as_str().unwrap_or("query failed").to_string();
        return Err(Error::Query {
            status: reply.status,
            message,
        });
    }
    let mut body = reply.body;
    body.push(b'\n');
    match out {
        Some(path) => ingest::write_file(path, &body),
        None => std::io::stdout().write_all(&body).map_err(|source| Error::Write {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn cmd_serve(a: ServeArgs) -> Result<()> {
    let service = Arc::new(Service::new(Dataset::open(&a.artifact)?));
    let addr = SocketAddr::new(a.host, a.port);
    let runtime = tokio::runtime::Runtime::new().map_err(Error::Service)?;
    eprintln!("serving {} on http://{addr}", a.artifact.display());
    runtime.block_on(service::serve(service, addr)).map_err(Error::Service)
}
