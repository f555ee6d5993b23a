use lexitopic::embed_store::{write_embeddings, EmbeddingMatrix};
use lexitopic::gen_eval::{batch_report, bertscore, read_manifest, BatchReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, dims: usize) -> EmbeddingMatrix<f64> {
    let r: Vec<Vec<f64>> = (0..rows)
        .map(|_| {
            let mut v: Vec<f64> = (0..dims).map(|_| rng.random_range(-1.0..1.0)).collect();
            v[0] += 0.01; // keep norms away from zero
            v
        })
        .collect();
    EmbeddingMatrix::from_rows(&r).unwrap()
}

#[test]
fn precision_and_recall_swap_with_arguments() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..1000 {
        let d = rng.random_range(1..8);
        let (m, n) = (rng.random_range(1..6), rng.random_range(1..6));
        let a = random_matrix(&mut rng, m, d);
        let b = random_matrix(&mut rng, n, d);
        let ab = bertscore(&a, &b).unwrap();
        let ba = bertscore(&b, &a).unwrap();
        assert!((ab.precision - ba.recall).abs() < 1e-12);
        assert!((ab.recall - ba.precision).abs() < 1e-12);
        assert!((ab.f1 - ba.f1).abs() < 1e-12);
    }
}

#[test]
fn identity_orthogonal_and_worked_example() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let a = random_matrix(&mut rng, 4, 6);
    let s = bertscore(&a, &a).unwrap();
    for v in [s.precision, s.recall, s.f1] {
        assert!((v - 1.0).abs() < 1e-12);
    }
    let x = EmbeddingMatrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
    let y = EmbeddingMatrix::from_rows(&[vec![0.0, 1.0]]).unwrap();
    let s = bertscore(&x, &y).unwrap();
    assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
    // candidate tokens with cosines 1.0 and 0.5 against a single reference token
    let c = EmbeddingMatrix::from_rows(&[vec![1.0, 0.0], vec![0.5, 0.75f64.sqrt()]]).unwrap();
    let r = EmbeddingMatrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
    let s = bertscore(&c, &r).unwrap();
    assert!((s.precision - 0.75).abs() < 1e-12);
    assert!((s.recall - 1.0).abs() < 1e-12);
    assert!((s.f1 - 1.5 / 1.75).abs() < 1e-12);
}

#[test]
fn dimension_mismatch_and_zero_vectors_error() {
    let a = EmbeddingMatrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
    let b = EmbeddingMatrix::from_rows(&[vec![1.0, 0.0, 0.0]]).unwrap();
    assert!(bertscore(&a, &b).is_err());
    let z = EmbeddingMatrix::from_rows(&[vec![0.0, 0.0]]).unwrap();
    assert!(bertscore(&a, &z).is_err());
}

fn write(dir: &std::path::Path, name: &str, rows: &[Vec<f32>]) {
    write_embeddings(&EmbeddingMatrix::from_rows(rows).unwrap(), &dir.join(name)).unwrap();
}

#[test]
fn batch_means_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "ref.emb1", &[vec![1.0, 0.0]]);
    write(d, "same.emb1", &[vec![1.0, 0.0]]);
    write(d, "half.emb1", &[vec![1.0, 0.0], vec![0.5, 0.75f32.sqrt()]]);
    write(d, "orth.emb1", &[vec![0.0, 1.0]]);
    std::fs::write(
        d.join("manifest.csv"),
        "system,topic_id,candidate_emb_path,reference_emb_path\n\
         a,0,same.emb1,ref.emb1\n\
         a,1,half.emb1,ref.emb1\n\
         b,0,orth.emb1,ref.emb1\n",
    )
    .unwrap();
    let rows = read_manifest(&d.join("manifest.csv")).unwrap();
    assert_eq!(rows[0].candidate_emb_path, d.join("same.emb1"));
    let rep = batch_report(&rows).unwrap();
    assert_eq!(rep.pairs.len(), 3);
    let a = rep.systems["a"];
    assert!((a.precision - (1.0 + 0.75) / 2.0).abs() < 1e-6);
    assert!((a.recall - 1.0).abs() < 1e-6);
    assert!((a.f1 - (1.0 + 1.5 / 1.75) / 2.0).abs() < 1e-6);
    assert_eq!(rep.systems["b"].f1, 0.0);

    let json = serde_json::to_string(&rep).unwrap();
    let back: BatchReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, rep);
    let m = rep.to_metric_report();
    assert_eq!(m.get("a.f1"), Some(a.f1));
}

#[test]
fn missing_file_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "ref.emb1", &[vec![1.0, 0.0]]);
    std::fs::write(
        d.join("m.csv"),
        "system,topic_id,candidate_emb_path,reference_emb_path\ns,0,gone.emb1,ref.emb1\n",
    )
    .unwrap();
    let err = batch_report(&read_manifest(&d.join("m.csv")).unwrap()).unwrap_err();
    assert!(err.is_io());
    assert!(err.to_string().contains("gone.emb1"), "{err}");
}
