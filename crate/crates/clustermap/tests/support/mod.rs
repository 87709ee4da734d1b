#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use clustermap::artifact::{build, BuildOptions, Dataset};
use clustermap::ingest::{write_matrix, ImageRecord, Matrix, MatrixFormat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use tempfile::TempDir;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` points around `k` random centers (spread 1), round-robin, plus the
/// center index of each point.
pub fn gaussian_clusters(rng: &mut impl Rng, n: usize, d: usize, k: usize, separation: f64) -> (Vec<Vec<f64>>, Vec<u32>) {
    let unit = Normal::new(0.0, 1.0).unwrap();
    let centers: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..d).map(|_| unit.sample(rng) * separation).collect())
        .collect();
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % k;
        points.push(centers[c].iter().map(|x| x + unit.sample(rng)).collect());
        labels.push(c as u32);
    }
    (points, labels)
}

pub fn matrix(rows: &[Vec<f64>]) -> Matrix {
    Matrix {
        rows: rows.len(),
        cols: rows[0].len(),
        values: rows.concat(),
    }
}

pub struct Fixture {
    pub dir: TempDir,
    pub manifest: PathBuf,
    pub embeddings: PathBuf,
    pub projection: PathBuf,
    pub n: usize,
}

impl Fixture {
    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn build_options(&self, out: &str) -> BuildOptions {
        let mut o = BuildOptions::new(&self.manifest, &self.embeddings, self.path(out));
        o.projection = Some(self.projection.clone());
        o
    }

    /// Builds into `out` and loads the result.
    pub fn dataset(&self, out: &str) -> Dataset {
        build(&self.build_options(out)).unwrap();
        Dataset::open(&self.path(out)).unwrap()
    }
}

/// A small labelled dataset on disk: 4 classes of Gaussian blobs, a
/// classifier that errs on every seventh image, a 2-D projection made from
/// the first two embedding dims, and image files (every tenth image is a
/// remote URL instead).
pub fn fixture(seed: u64, n: usize, d: usize) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(seed);
    let (points, truth) = gaussian_clusters(&mut r, n, d, 4, 8.0);
    fs::create_dir_all(dir.path().join("images")).unwrap();
    let items: Vec<ImageRecord> = (0..n)
        .map(|i| {
            let image_uri = if i % 10 == 9 {
                format!("https://images.example.org/{i}.jpg")
            } else {
                let rel = format!("images/{i}.png");
                fs::write(dir.path().join(&rel), format!("png bytes {i}")).unwrap();
                rel
            };
            let predicted = if i % 7 == 3 { (truth[i] + 1) % 4 } else { truth[i] };
            ImageRecord {
                // Sparse ids exercise renumbering.
                id: 10 * i as u64 + 5,
                image_uri,
                true_class: truth[i],
                predicted_class: Some(predicted),
            }
        })
        .collect();
    // Written by hand so the sparse ids reach the loader.
    let doc = serde_json::json!({
        "schema_version": 1,
        "classes": ["airplane", "bird", "cat", "ship"],
        "items": items,
    });
    let manifest_path = dir.path().join("manifest.json");
    fs::write(&manifest_path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    let embeddings = dir.path().join("embeddings.txt");
    write_matrix(&embeddings, &matrix(&points), MatrixFormat::Text).unwrap();
    let proj: Vec<Vec<f64>> = points.iter().map(|p| vec![p[0], p[1]]).collect();
    let projection = dir.path().join("projection.txt");
    write_matrix(&projection, &matrix(&proj), MatrixFormat::Text).unwrap();
    Fixture {
        dir,
        manifest: manifest_path,
        embeddings,
        projection,
        n,
    }
}

pub fn read(path: &Path) -> Vec<u8> {
    fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
