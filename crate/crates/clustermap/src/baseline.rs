//! Grid baseline files: a projection snapped onto an even grid, optionally
//! restricted to the points nearest a click.

use std::path::{Path, PathBuf};

use clustermap_core::gridify::{gridify, zoom_regrid, GridAssignment};
use clustermap_core::{ImageSize, Viewport};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{self, MatrixFormat};

pub const GRID_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoomSpec {
    /// Click position in projection coordinates.
    pub click: [f64; 2],
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFile {
    pub schema_version: u32,
    pub viewport: Viewport,
    pub image: ImageSize,
    /// Points in the source projection.
    pub n_points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zoom: Option<ZoomSpec>,
    pub grid: GridAssignment,
}

#[derive(Debug, Clone)]
pub struct GridOptions {
    pub projection: PathBuf,
    pub format: MatrixFormat,
    pub expected_rows: Option<usize>,
    pub viewport: Viewport,
    pub image: ImageSize,
    pub zoom: Option<ZoomSpec>,
}

pub fn gridify_projection(opts: &GridOptions) -> Result<GridFile> {
    let projection = ingest::load_projection_as(&opts.projection, opts.format, opts.expected_rows)?;
    let grid = match opts.zoom {
        None => gridify(&projection, opts.viewport, opts.image)?,
        Some(z) => zoom_regrid(&projection, z.click, z.k, opts.viewport, opts.image)?,
    };
    Ok(GridFile {
        schema_version: GRID_SCHEMA_VERSION,
        viewport: opts.viewport,
        image: opts.image,
        n_points: projection.len(),
        zoom: opts.zoom,
        grid,
    })
}

pub fn save_grid(path: &Path, grid: &GridFile) -> Result<()> {
    let mut s = serde_json::to_string(grid).expect("grid serializes");
    s.push('\n');
    ingest::write_file(path, s.as_bytes())
}

pub fn load_grid(path: &Path) -> Result<GridFile> {
    let grid: GridFile =
        serde_json::from_str(&ingest::read_text(path)?).map_err(|e| Error::parse(path, e.to_string()))?;
    if grid.schema_version != GRID_SCHEMA_VERSION {
        return Err(Error::Validation(format!(
            "{}: unsupported schema_version {}",
            path.display(),
            grid.schema_version
        )));
    }
    let g = &grid.grid;
    if g.cells.len() != g.grid_cols * g.grid_rows {
        return Err(Error::Shape {
            what: "grid cells",
            expected: g.grid_cols * g.grid_rows,
            found: g.cells.len(),
        });
    }
    Ok(grid)
}
