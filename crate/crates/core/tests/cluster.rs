use lexitopic::cluster::{
    build_hierarchy, condense, core_distances, extract, hdbscan, mst, mutual_reachability, prim_mst, ClusterConfig, NOISE,
};
use lexitopic::embed_store::EmbeddingMatrix;
use lexitopic::scalar::euclidean;
use lexitopic::synthetic::gaussian_blobs;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_points(n: usize, dims: usize, seed: u64) -> EmbeddingMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..dims).map(|_| rng.random::<f64>()).collect()).collect();
    EmbeddingMatrix::from_rows(&rows).unwrap()
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    let mut joins = 0;
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            joins += 1;
        }
    }
    joins == n - 1
}

/// Minimum over every (n-1)-subset of the complete graph's edges that spans.
fn brute_force_mst_weight(n: usize, w: &dyn Fn(usize, usize) -> f64) -> f64 {
    let all: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let m = all.len();
    let mut best = f64::INFINITY;
    let mut idx: Vec<usize> = (0..n - 1).collect();
    loop {
        let pick: Vec<(usize, usize)> = idx.iter().map(|&i| all[i]).collect();
        if connected(n, &pick) {
            best = best.min(pick.iter().map(|&(a, b)| w(a, b)).sum());
        }
        let r = n - 1;
        let mut i = r;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] != i + m - r {
                break;
            }
            if i == 0 {
                return best;
            }
        }
        if idx[i] == i + m - r {
            return best;
        }
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[test]
fn mst_matches_enumeration_for_small_n() {
    for n in 2..=7 {
        for seed in 0..4 {
            let z = random_points(n, 3, seed * 100 + n as u64);
            let core = core_distances(&z, 1).unwrap();
            let w = |i: usize, j: usize| mutual_reachability(euclidean(z.row(i), z.row(j)), core[i], core[j]);
            let total: f64 = mst(&z, &core).iter().map(|e| e.weight).sum();
            let brute = brute_force_mst_weight(n, &w);
            assert!((total - brute).abs() < 1e-12, "n={n} seed={seed}: {total} vs {brute}");
        }
    }
}

#[test]
fn mst_at_eight_points() {
    let z = random_points(8, 2, 99);
    let w = |i: usize, j: usize| euclidean(z.row(i), z.row(j));
    let total: f64 = prim_mst(8, w).iter().map(|e| e.weight).sum();
    let brute = brute_force_mst_weight(8, &w);
    assert!((total - brute).abs() < 1e-12);
}

#[test]
fn core_distances_match_sorted_oracle() {
    let z = random_points(10, 4, 5);
    for ms in 1..9 {
        let got = core_distances(&z, ms).unwrap();
        for i in 0..10 {
            let mut d: Vec<f64> = (0..10).filter(|&j| j != i).map(|j| euclidean(z.row(i), z.row(j))).collect();
            d.sort_by(f64::total_cmp);
            assert_eq!(got[i], d[ms - 1]);
        }
    }
}

#[test]
fn reachability_matches_max_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let (d, a, b): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
        assert_eq!(mutual_reachability(d, a, b), d.max(a).max(b));
    }
}

#[test]
fn two_separated_blobs() {
    let (z, truth) = gaussian_blobs(2, 50, 5, 10.0, 21).unwrap();
    let r = hdbscan(&z, &ClusterConfig::default()).unwrap();
    assert_eq!(r.n_clusters, 2, "sizes {:?}", r.sizes());
    assert!(r.noise_count() <= 5, "noise {}", r.noise_count());
    for (i, &l) in r.labels.iter().enumerate() {
        if l != NOISE {
            assert_eq!(l as usize, truth[i]);
        }
    }
}

#[test]
fn two_blobs_condense_to_root_with_two_children() {
    let (z, _) = gaussian_blobs(2, 50, 5, 10.0, 21).unwrap();
    let core = core_distances(&z, 5).unwrap();
    let merges = build_hierarchy(100, &mst(&z, &core));
    let tree = condense(100, &merges, 50);
    assert_eq!(tree.cluster_children(tree.root()).len(), 2);
}

#[test]
fn tight_blob_is_single_root() {
    let (z, _) = gaussian_blobs(1, 12, 3, 0.0, 4).unwrap();
    let core = core_distances(&z, 3).unwrap();
    let merges = build_hierarchy(12, &mst(&z, &core));
    let tree = condense(12, &merges, 12);
    assert_eq!(tree.n_clusters(), 1);
    let ex = extract(&tree, false);
    assert!(ex.labels.iter().all(|&l| l == 0));
}

#[test]
fn undersized_blob_is_absorbed() {
    let mut rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 * 0.1, 0.0]).collect();
    rows.extend((0..4).map(|i| vec![50.0 + i as f64 * 0.1, 0.0]));
    let z = EmbeddingMatrix::from_rows(&rows).unwrap();
    let core = core_distances(&z, 1).unwrap();
    let merges = build_hierarchy(14, &mst(&z, &core));
    let tree = condense(14, &merges, 5);
    assert_eq!(tree.cluster_children(tree.root()), Vec::<usize>::new());
}

#[test]
fn uniform_points_respect_min_size() {
    let z = random_points(20, 2, 8);
    let cfg = ClusterConfig {
        min_cluster_size: 15,
        ..Default::default()
    };
    let r = hdbscan(&z, &cfg).unwrap();
    assert!(r.n_clusters <= 1);
    assert!(r.sizes().iter().all(|&s| s >= 15));
}

#[test]
fn single_blob_is_one_cluster() {
    let (z, _) = gaussian_blobs(1, 60, 5, 0.0, 13).unwrap();
    let r = hdbscan(&z, &ClusterConfig::default()).unwrap();
    assert_eq!(r.n_clusters, 1, "sizes {:?}", r.sizes());
}

fn partition(labels: &[i64]) -> Vec<Vec<usize>> {
    let k = labels.iter().copied().max().unwrap_or(-1) + 1;
    let mut groups = vec![Vec::new(); k as usize];
    for (i, &l) in labels.iter().enumerate() {
        if l >= 0 {
            groups[l as usize].push(i);
        }
    }
    groups.sort();
    groups
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn labels_meet_min_size(seed in 0u64..1000, n in 10usize..60, mcs in 2usize..8) {
        let z = random_points(n, 2, seed);
        let cfg = ClusterConfig { min_cluster_size: mcs, min_samples: 3, allow_single_cluster: false };
        let r = hdbscan(&z, &cfg).unwrap();
        prop_assert!(r.sizes().iter().all(|&s| s >= mcs));
        let mut seen = Vec::new();
        for &l in &r.labels {
            if l >= 0 && !seen.contains(&l) {
                prop_assert_eq!(l as usize, seen.len());
                seen.push(l);
            }
        }
    }

    #[test]
    fn permutation_preserves_partition(seed in 0u64..1000, n in 10usize..40) {
        let z = random_points(n, 2, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let zp = z.select(&perm).unwrap();
        let cfg = ClusterConfig { min_cluster_size: 4, min_samples: 3, allow_single_cluster: false };
        let a = hdbscan(&z, &cfg).unwrap();
        let b = hdbscan(&zp, &cfg).unwrap();
        let mut back = vec![0i64; n];
        for (pos, &orig) in perm.iter().enumerate() {
            back[orig] = b.labels[pos];
        }
        prop_assert_eq!(partition(&a.labels), partition(&back));
    }
}
