//! Neighbor-preservation evaluation: how many of each image's `k` nearest
//! neighbors in embedding space a display method also ranks in its top `k`.

use std::path::Path;

use clustermap_core::knn::{
    point_overlaps, summarize, usable_k_values, DendrogramOracle, DistanceOracle, EuclideanOracle, GridOracle,
    NeighborReport, ProjectionOracle,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::artifact::Dataset;
use crate::baseline::GridFile;
use crate::error::{Error, Result};
use crate::ingest;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const CSV_FILE: &str = "neighbors.csv";
pub const JSON_FILE: &str = "neighbors.json";

/// What each method's distance means; copied into the JSON report.
const METHOD_NOTES: [(&str, &str); 3] = [
    (
        "dendrogram",
        "zoom-out hops from the query's leaf to the smallest cluster holding both images; \
         equal hops ordered by leaf-order distance, then image id",
    ),
    ("grid", "Euclidean distance between grid cell centers"),
    ("projection", "Euclidean distance between projected 2-D points"),
];

pub type SyncOracle<'a> = &'a (dyn DistanceOracle + Sync);

/// Mean top-`k` overlap of every method against `reference`, computed in
/// parallel over query points. Counts are summed as integers, so the result
/// does not depend on scheduling.
pub fn neighbor_report(
    reference: SyncOracle<'_>,
    methods: &[(&str, SyncOracle<'_>)],
    k_values: &[usize],
) -> Result<NeighborReport> {
    let n = reference.len();
    if let Some((name, m)) = methods.iter().find(|(_, m)| m.len() != n) {
        return Err(Error::Validation(format!(
            "method {name} covers {} images, reference covers {n}",
            m.len()
        )));
    }
    let ks = usable_k_values(k_values, n);
    let zero = || vec![vec![0usize; ks.len()]; methods.len()];
    let totals = (0..n)
        .into_par_iter()
        .fold(zero, |mut acc, i| {
            let oracles: Vec<&dyn DistanceOracle> = methods.iter().map(|(_, m)| *m as &dyn DistanceOracle).collect();
            let counts = point_overlaps(reference, &oracles, i, &ks);
            add_into(&mut acc, &counts);
            acc
        })
        .reduce(zero, |mut a, b| {
            add_into(&mut a, &b);
            a
        });
    let names: Vec<&str> = methods.iter().map(|(name, _)| *name).collect();
    Ok(summarize(&names, n, ks, &totals))
}

fn add_into(acc: &mut [Vec<usize>], counts: &[Vec<usize>]) {
    for (a, c) in acc.iter_mut().zip(counts) {
        for (x, y) in a.iter_mut().zip(c) {
            *x += y;
        }
    }
}

/// Report for an artifact: the dendrogram always, plus the grid baseline
/// and the raw projection when available.
pub fn evaluate(dataset: &Dataset, grid: Option<&GridFile>, k_values: &[usize]) -> Result<NeighborReport> {
    let reference = EuclideanOracle::new(&dataset.embeddings);
    let dendro = DendrogramOracle::new(&dataset.dendrogram);
    let grid_oracle = grid
        .map(|g| {
            if g.n_points != dataset.len() || g.zoom.is_some() {
                return Err(Error::Validation(format!(
                    "grid must cover all {} images without zoom (it has {} of {})",
                    dataset.len(),
                    g.grid.image_count(),
                    g.n_points
                )));
            }
            Ok(GridOracle::new(&g.grid, dataset.len())?)
        })
        .transpose()?;
    let proj = dataset.projection.as_ref().map(ProjectionOracle::new);

    let mut methods: Vec<(&str, SyncOracle<'_>)> = vec![("dendrogram", &dendro)];
    if let Some(g) = &grid_oracle {
        methods.push(("grid", g));
    }
    if let Some(p) = &proj {
        methods.push(("projection", p));
    }
    neighbor_report(&reference, &methods, k_values)
}

pub fn report_csv(report: &NeighborReport) -> String {
    let mut s = String::from("method,k,mean_overlap\n");
    for series in &report.series {
        for (k, m) in report.k_values.iter().zip(&series.mean_overlap) {
            s.push_str(&format!("{},{k},{m}\n", series.method));
        }
    }
    s
}

#[derive(Serialize)]
struct ReportJson<'a> {
    schema_version: u32,
    reference: &'static str,
    methods: Vec<MethodNote<'a>>,
    #[serde(flatten)]
    report: &'a NeighborReport,
}

#[derive(Serialize)]
struct MethodNote<'a> {
    method: &'a str,
    distance: &'static str,
}

pub fn report_json(report: &NeighborReport) -> String {
    let methods = report
        .series
        .iter()
        .map(|s| MethodNote {
            method: &s.method,
            distance: METHOD_NOTES
                .iter()
                .find(|(m, _)| *m == s.method)
                .map_or("", |(_, note)| note),
        })
        .collect();
    let doc = ReportJson {
        schema_version: REPORT_SCHEMA_VERSION,
        reference: "euclidean distance between embeddings; ties by image id",
        methods,
        report,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

pub fn write_report(out_dir: &Path, report: &NeighborReport) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|source| Error::Write {
        path: out_dir.into(),
        source,
    })?;
    ingest::write_file(&out_dir.join(CSV_FILE), report_csv(report).as_bytes())?;
    ingest::write_file(&out_dir.join(JSON_FILE), report_json(report).as_bytes())
}
