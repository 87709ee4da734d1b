mod support;

use std::fs;
use std::path::Path;

use clustermap::ingest::{
    load_embeddings, load_embeddings_as, load_manifest, load_projection, read_matrix, write_matrix, DatasetManifest,
    ImageRecord, Matrix, MatrixFormat,
};
use clustermap::Error;
use proptest::prelude::*;

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn three_items_without_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "m.json",
        r#"{"schema_version":1,"classes":["a","b"],"items":[
            {"id":0,"image_uri":"0.png","true_class":0},
            {"id":1,"image_uri":"1.png","true_class":1},
            {"id":2,"image_uri":"2.png","true_class":1}]}"#,
    );
    let m = load_manifest(&p).unwrap();
    assert_eq!(m.len(), 3);
    assert!(!m.has_predictions);
}

#[test]
fn partial_predictions_fail_validation() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "m.json",
        r#"{"schema_version":1,"classes":["a","b"],"items":[
            {"id":1,"image_uri":"1.png","true_class":0},
            {"id":2,"image_uri":"2.png","true_class":1,"predicted_class":0}]}"#,
    );
    assert!(matches!(load_manifest(&p), Err(Error::Validation(_))));
}

#[test]
fn hundred_classes_of_six_hundred() {
    let classes: Vec<String> = (0..100).map(|c| format!("class{c}")).collect();
    let items: Vec<ImageRecord> = (0..60_000u64)
        .map(|i| ImageRecord {
            id: i,
            image_uri: format!("train/{i}.png"),
            true_class: (i / 600) as u32,
            predicted_class: Some(((i * 7) % 100) as u32),
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.json");
    DatasetManifest::new(classes, items).unwrap().save(&p).unwrap();
    let m = load_manifest(&p).unwrap();
    assert_eq!(m.len(), 60_000);
    assert!(m.has_predictions);
    assert_eq!(m.labels().truth().iter().filter(|&&c| c == 42).count(), 600);
}

#[test]
fn manifest_errors_from_files() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_manifest(&dir.path().join("absent.json")), Err(Error::Read { .. })));
    let bad = write(dir.path(), "bad.json", "{\"schema_version\":1,");
    assert!(matches!(load_manifest(&bad), Err(Error::Parse { .. })));
}

#[test]
fn embedding_examples() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "e.txt", "1 2\n3 4\n5 6\n7 8\n");
    let e = load_embeddings(&p, 4).unwrap();
    assert_eq!((e.rows(), e.dims()), (4, 2));
    assert!(matches!(
        load_embeddings(&p, 5),
        Err(Error::Shape { expected: 5, found: 4, .. })
    ));
    let nan = write(dir.path(), "nan.txt", "1 2\n3 NaN\n");
    assert!(matches!(
        load_embeddings(&nan, 2),
        Err(Error::NonFinite { row: 1, col: 1, .. })
    ));
    assert!(matches!(load_embeddings(&dir.path().join("none.txt"), 2), Err(Error::Read { .. })));
}

#[test]
fn projection_examples() {
    let dir = tempfile::tempdir().unwrap();
    let rows: String = (0..10).map(|i| format!("{i} {}\n", i * 2)).collect();
    let ok = write(dir.path(), "p.txt", &rows);
    assert_eq!(load_projection(&ok, 10).unwrap().len(), 10);
    let wide: String = (0..10).map(|i| format!("{i} 0 1\n")).collect();
    let wide = write(dir.path(), "p3.txt", &wide);
    assert!(matches!(
        load_projection(&wide, 10),
        Err(Error::Shape { expected: 2, found: 3, .. })
    ));
    let inf = write(dir.path(), "inf.txt", "0 0\n1 inf\n");
    assert!(matches!(load_projection(&inf, 2), Err(Error::NonFinite { .. })));
}

#[test]
fn binary_and_text_agree() {
    let dir = tempfile::tempdir().unwrap();
    let m = Matrix {
        rows: 3,
        cols: 2,
        values: vec![0.5, -1.25, 3.0, 4.0, 1e-3, 7.5],
    };
    let bin = dir.path().join("e.bin");
    let txt = dir.path().join("e.txt");
    write_matrix(&bin, &m, MatrixFormat::Auto).unwrap();
    write_matrix(&txt, &m, MatrixFormat::Auto).unwrap();
    assert_eq!(fs::metadata(&bin).unwrap().len(), 8 + 6 * 4);
    let b = load_embeddings(&bin, 3).unwrap();
    let t = load_embeddings(&txt, 3).unwrap();
    for (x, y) in b.values().iter().zip(t.values()) {
        assert_eq!(*x, *y as f32 as f64);
    }
    // Forcing text on a binary file is a parse error, not garbage.
    assert!(matches!(
        load_embeddings_as(&bin, MatrixFormat::Text, 3),
        Err(Error::Parse { .. }) | Err(Error::Read { .. })
    ));
}

#[test]
fn truncated_binary_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("e.bin");
    let mut bytes = Vec::new();
    bytes.extend(4u32.to_le_bytes());
    bytes.extend(2u32.to_le_bytes());
    bytes.extend([0u8; 20]);
    fs::write(&p, bytes).unwrap();
    assert!(matches!(read_matrix(&p, MatrixFormat::Auto), Err(Error::Parse { .. })));
}

fn record() -> impl Strategy<Value = (u64, u32, u32)> {
    (0u64..10_000, 0u32..5, 0u32..5)
}

proptest! {
    #[test]
    fn manifest_file_round_trip(recs in prop::collection::vec(record(), 1..40), preds in any::<bool>()) {
        let mut seen = std::collections::HashSet::new();
        let items: Vec<ImageRecord> = recs
            .into_iter()
            .filter(|(id, _, _)| seen.insert(*id))
            .map(|(id, t, p)| ImageRecord {
                id,
                image_uri: format!("img/{id}.jpg"),
                true_class: t,
                predicted_class: preds.then_some(p),
            })
            .collect();
        let classes: Vec<String> = (0..5).map(|c| format!("c{c}")).collect();
        let m = DatasetManifest::new(classes, items).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        m.save(&p).unwrap();
        let back = load_manifest(&p).unwrap();
        prop_assert_eq!(&back, &m);
        // Saving again is byte-stable.
        let q = dir.path().join("m2.json");
        back.save(&q).unwrap();
        prop_assert_eq!(fs::read(&p).unwrap(), fs::read(&q).unwrap());
    }

    #[test]
    fn text_matrix_round_trip(rows in 1usize..20, cols in 1usize..6, seed in any::<u64>()) {
        use rand::Rng;
        let mut r = support::rng(seed);
        let values: Vec<f64> = (0..rows * cols).map(|_| r.random_range(-1e6..1e6)).collect();
        let m = Matrix { rows, cols, values };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.txt");
        write_matrix(&p, &m, MatrixFormat::Text).unwrap();
        prop_assert_eq!(read_matrix(&p, MatrixFormat::Auto).unwrap(), m);
    }
}
