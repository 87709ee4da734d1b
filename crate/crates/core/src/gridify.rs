//! Grid baseline: snap a 2-D projection onto evenly spaced grid points with
//! an optimal assignment, so every image gets its own cell while staying as
//! close as possible to where the projection put it.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::lap::{solve_lap, CostMatrix};
use crate::{Error, ImageSize, Projection, Result, Viewport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridShape {
    pub cols: usize,
    pub rows: usize,
}

impl GridShape {
    pub fn cells(&self) -> usize {
        self.cols * self.rows
    }
}

/// Picks a grid for `n_points` images. Columns follow the viewport's aspect
/// (in image cells) but never exceed what fits across it; rows are whatever
/// is needed to hold every point.
pub fn grid_shape(n_points: usize, viewport: Viewport, image: ImageSize) -> Result<GridShape> {
    if n_points == 0 {
        return Err(Error::EmptyInput);
    }
    if image.width == 0 || image.height == 0 {
        return Err(Error::InvalidConfig("image size must be positive"));
    }
    let max_cols = (viewport.width / image.width) as usize;
    let max_rows = (viewport.height / image.height) as usize;
    if max_cols == 0 || max_rows == 0 {
        return Err(Error::DegenerateSpace {
            width: viewport.width,
            height: viewport.height,
            image_w: image.width,
            image_h: image.height,
        });
    }
    // Smallest c with c / ceil(n / c) >= max_cols / max_rows, i.e.
    // c² * max_rows >= n * max_cols.
    let target = n_points as u128 * max_cols as u128;
    let mut cols = libm::sqrt(target as f64 / max_rows as f64) as usize;
    while cols > 1 && (cols as u128 - 1).pow(2) * max_rows as u128 >= target {
        cols -= 1;
    }
    while (cols as u128).pow(2) * (max_rows as u128) < target {
        cols += 1;
    }
    let cols = cols.clamp(1, max_cols).min(n_points);
    Ok(GridShape {
        cols,
        rows: n_points.div_ceil(cols),
    })
}

/// Grid points spread evenly over the bounding box `lo..=hi`, row-major;
/// the outermost points sit on the box edges.
pub fn grid_points(shape: GridShape, lo: [f64; 2], hi: [f64; 2]) -> Vec<[f64; 2]> {
    let axis = |count: usize, a: f64, b: f64, t: usize| {
        if count == 1 {
            (a + b) / 2.0
        } else {
            a + (b - a) * t as f64 / (count - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(shape.cells());
    for r in 0..shape.rows {
        for c in 0..shape.cols {
            out.push([axis(shape.cols, lo[0], hi[0], c), axis(shape.rows, lo[1], hi[1], r)]);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct GridAssignment {
    pub grid_cols: usize,
    pub grid_rows: usize,
    /// Display size of one cell in pixels.
    pub cell_w: u32,
    pub cell_h: u32,
    /// Row-major; `None` marks a padding cell with no image.
    pub cells: Vec<Option<usize>>,
    /// Sum of squared distances between each image's projected point and
    /// its grid point.
    pub total_cost: f64,
}

impl GridAssignment {
    pub fn image_count(&self) -> usize {
        self.cells.iter().flatten().count()
    }

    /// `(col, row)` for each image id present, indexed by id.
    pub fn positions(&self, n_images: usize) -> Vec<Option<(usize, usize)>> {
        let mut pos = vec![None; n_images];
        for (idx, cell) in self.cells.iter().enumerate() {
            if let Some(id) = *cell {
                if id < n_images {
                    pos[id] = Some((idx % self.grid_cols, idx / self.grid_cols));
                }
            }
        }
        pos
    }

    /// Pixel center of a cell.
    pub fn cell_center(&self, col: usize, row: usize) -> [f64; 2] {
        [
            (col as f64 + 0.5) * self.cell_w as f64,
            (row as f64 + 0.5) * self.cell_h as f64,
        ]
    }
}

/// Snaps the whole projection onto a grid.
pub fn gridify(projection: &Projection, viewport: Viewport, image: ImageSize) -> Result<GridAssignment> {
    let ids: Vec<usize> = (0..projection.len()).collect();
    gridify_subset(projection, &ids, viewport, image)
}

/// Snaps the listed images onto a grid fitted to their own bounding box.
pub fn gridify_subset(
    projection: &Projection,
    ids: &[usize],
    viewport: Viewport,
    image: ImageSize,
) -> Result<GridAssignment> {
    let points = projection.points();
    if let Some(&bad) = ids.iter().find(|&&i| i >= points.len()) {
        return Err(Error::UnknownImage(bad));
    }
    let shape = grid_shape(ids.len(), viewport, image)?;
    let first = points[ids[0]];
    let (lo, hi) = ids.iter().fold((first, first), |(lo, hi), &i| {
        let p = points[i];
        ([lo[0].min(p[0]), lo[1].min(p[1])], [hi[0].max(p[0]), hi[1].max(p[1])])
    });
    let grid = grid_points(shape, lo, hi);
    let m = shape.cells();
    // Rows past the real points are dummies that cost nothing anywhere.
    let costs = CostMatrix::from_fn(m, |r, g| match ids.get(r) {
        Some(&id) => {
            let (p, q) = (points[id], grid[g]);
            (p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1])
        }
        None => 0.0,
    })?;
    let solution = solve_lap(&costs);
    let mut cells = vec![None; m];
    for (r, &id) in ids.iter().enumerate() {
        cells[solution.row_to_col[r]] = Some(id);
    }
    Ok(GridAssignment {
        grid_cols: shape.cols,
        grid_rows: shape.rows,
        cell_w: image.width,
        cell_h: image.height,
        cells,
        total_cost: solution.total_cost,
    })
}

/// Ids of the `k` projected points nearest `click`, ties by ascending id.
pub fn nearest_points(projection: &Projection, click: [f64; 2], k: usize) -> Result<Vec<usize>> {
    let n = projection.len();
    if k == 0 || k > n {
        return Err(Error::Range {
            what: "k",
            value: k,
            min: 1,
            max: n,
        });
    }
    let mut keyed: Vec<(f64, usize)> = projection
        .points()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let (dx, dy) = (p[0] - click[0], p[1] - click[1]);
            (dx * dx + dy * dy, i)
        })
        .collect();
    keyed.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keyed.truncate(k);
    Ok(keyed.into_iter().map(|(_, i)| i).collect())
}

/// One-level zoom: regrid only the `k` points nearest the click (given in
/// projection coordinates).
pub fn zoom_regrid(
    projection: &Projection,
    click: [f64; 2],
    k: usize,
    viewport: Viewport,
    image: ImageSize,
) -> Result<GridAssignment> {
    let ids = nearest_points(projection, click, k)?;
    gridify_subset(projection, &ids, viewport, image)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn proj(points: &[[f64; 2]]) -> Projection {
        Projection::new(points.to_vec()).unwrap()
    }

    #[test]
    fn grid_shapes() {
        let square = Viewport::new(800, 800);
        let img = ImageSize::square(40);
        assert_eq!(grid_shape(100, square, img).unwrap(), GridShape { cols: 10, rows: 10 });
        assert_eq!(grid_shape(25, square, img).unwrap(), GridShape { cols: 5, rows: 5 });
        assert_eq!(grid_shape(1, square, img).unwrap(), GridShape { cols: 1, rows: 1 });
        let narrow = Viewport::new(40, 40);
        let g = grid_shape(10, narrow, ImageSize::square(10)).unwrap();
        assert_eq!((g.cols, g.rows, g.cells() - 10), (4, 3, 2));
        // Wide viewports get wide grids.
        let wide = grid_shape(32, Viewport::new(800, 200), img).unwrap();
        assert_eq!((wide.cols, wide.rows), (12, 3));
        assert!(matches!(
            grid_shape(3, Viewport::new(30, 30), img),
            Err(Error::DegenerateSpace { .. })
        ));
        assert_eq!(grid_shape(0, square, img), Err(Error::EmptyInput));
    }

    #[test]
    fn points_on_grid_snap_with_zero_cost() {
        let p = proj(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]);
        let g = gridify(&p, Viewport::new(100, 100), ImageSize::square(10)).unwrap();
        assert_eq!((g.grid_cols, g.grid_rows), (2, 2));
        assert_eq!(g.cells, vec![Some(0), Some(1), Some(2), Some(3)]);
        assert_eq!(g.total_cost, 0.0);
    }

    #[test]
    fn two_points_keep_their_order() {
        let p = proj(&[[5.0, 0.0], [1.0, 0.0]]);
        let g = gridify(&p, Viewport::new(20, 10), ImageSize::square(10)).unwrap();
        assert_eq!((g.grid_cols, g.grid_rows), (2, 1));
        assert_eq!(g.cells, vec![Some(1), Some(0)]);
    }

    #[test]
    fn dummy_cells_stay_empty() {
        let pts: Vec<[f64; 2]> = (0..10).map(|i| [i as f64, (i * 7 % 10) as f64]).collect();
        let g = gridify(&proj(&pts), Viewport::new(40, 40), ImageSize::square(10)).unwrap();
        assert_eq!(g.cells.len(), 12);
        assert_eq!(g.image_count(), 10);
        assert_eq!(g.cells.iter().filter(|c| c.is_none()).count(), 2);
    }

    #[test]
    fn zoom_selects_nearest_points() {
        let pts: Vec<[f64; 2]> = (0..100).map(|i| [(i % 10) as f64, (i / 10) as f64]).collect();
        let p = proj(&pts);
        let vp = Viewport::new(400, 400);
        let img = ImageSize::square(40);
        let one = zoom_regrid(&p, [3.2, 4.1], 1, vp, img).unwrap();
        assert_eq!(one.cells, vec![Some(43)]);
        let g = zoom_regrid(&p, [4.5, 4.5], 25, vp, img).unwrap();
        assert_eq!((g.grid_cols, g.grid_rows), (5, 5));
        assert!(matches!(zoom_regrid(&p, [0.0, 0.0], 0, vp, img), Err(Error::Range { .. })));
        assert!(matches!(zoom_regrid(&p, [0.0, 0.0], 101, vp, img), Err(Error::Range { .. })));
    }

    #[test]
    fn nearest_ties_break_by_id() {
        let p = proj(&[[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [5.0, 5.0]]);
        assert_eq!(nearest_points(&p, [0.0, 0.0], 2).unwrap(), vec![0, 1]);
    }
}
