//! Layout initialization from the normalized graph Laplacian.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::fuzzy::FuzzyGraph;
use crate::scalar::Scalar;

/// Components larger than this are initialized randomly; the dense eigensolve is O(n³).
pub const SPECTRAL_MAX_ROWS: usize = 2500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    Spectral,
    Random,
}

/// Connected components, labelled in order of their lowest row index.
pub fn components<T: Scalar>(graph: &FuzzyGraph<T>) -> Vec<usize> {
    let mut comp = vec![usize::MAX; graph.n];
    let mut next = 0;
    let mut stack = Vec::new();
    for s in 0..graph.n {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = next;
        stack.push(s);
        while let Some(u) = stack.pop() {
            for &(v, _) in &graph.rows[u] {
                if comp[v] == usize::MAX {
                    comp[v] = next;
                    stack.push(v);
                }
            }
        }
        next += 1;
    }
    comp
}

/// Eigenvectors 1..=dim (ascending eigenvalue) of `I - D^-1/2 W D^-1/2` on a member subset.
fn laplacian_eigenmap<T: Scalar>(graph: &FuzzyGraph<T>, members: &[usize], dim: usize) -> Option<Vec<Vec<f64>>> {
    let m = members.len();
    let mut local = vec![usize::MAX; graph.n];
    for (k, &u) in members.iter().enumerate() {
        local[u] = k;
    }
    let mut w = DMatrix::<f64>::zeros(m, m);
    for (k, &u) in members.iter().enumerate() {
        for &(v, x) in &graph.rows[u] {
            if local[v] != usize::MAX {
                w[(k, local[v])] = x.to_f64_lossy();
            }
        }
    }
    let deg: Vec<f64> = (0..m).map(|i| w.row(i).sum()).collect();
    if deg.iter().any(|&d| d <= 0.0) {
        return None;
    }
    let mut lap = DMatrix::<f64>::identity(m, m);
    for i in 0..m {
        for j in 0..m {
            if w[(i, j)] != 0.0 {
                lap[(i, j)] -= w[(i, j)] / (deg[i] * deg[j]).sqrt();
            }
        }
    }
    let eig = SymmetricEigen::try_new(lap, 1e-12, 10_000)?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let cols = &order[1..=dim];
    let coords: Vec<Vec<f64>> = (0..m)
        .map(|i| cols.iter().map(|&c| eig.eigenvectors[(i, c)]).collect())
        .collect();
    if coords.iter().flatten().any(|v| !v.is_finite()) {
        return None;
    }
    Some(coords)
}

fn uniform_layout(n: usize, dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect())
        .collect()
}

fn component_center(c: usize, dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    if c < 2 * dim {
        v[c / 2] = if c % 2 == 0 { 1.0 } else { -1.0 };
    } else {
        for x in &mut v {
            *x = rng.random_range(-1.0..1.0);
        }
    }
    v
}

/// Initial coordinates (row-major `n × dim`), scaled so the largest |coord| is 10.
///
/// Each connected component gets its own spectral layout, shifted to a
/// distinct center. If any eigensolve fails the whole layout falls back to
/// seeded uniform noise in [-10, 10].
pub fn initial_layout<T: Scalar>(graph: &FuzzyGraph<T>, dim: usize, rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, InitKind) {
    let n = graph.n;
    let comp = components(graph);
    let n_comp = comp.iter().max().map_or(0, |m| m + 1);
    let mut layout = vec![vec![0.0; dim]; n];
    let offset_scale = if n_comp > 1 { 3.0 } else { 0.0 };

    for c in 0..n_comp {
        let members: Vec<usize> = (0..n).filter(|&i| comp[i] == c).collect();
        let center = component_center(c, dim, rng);
        let local = if members.len() > dim + 1 && members.len() <= SPECTRAL_MAX_ROWS {
            match laplacian_eigenmap(graph, &members, dim) {
                Some(v) => v,
                None => return (uniform_layout(n, dim, rng), InitKind::Random),
            }
        } else if members.len() > SPECTRAL_MAX_ROWS {
            return (uniform_layout(n, dim, rng), InitKind::Random);
        } else {
            uniform_layout(members.len(), dim, rng)
        };
        let scale = local.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let scale = if scale > 0.0 { 1.0 / scale } else { 1.0 };
        for (k, &u) in members.iter().enumerate() {
            for d in 0..dim {
                layout[u][d] = local[k][d] * scale + offset_scale * center[d];
            }
        }
    }

    let max_abs = layout.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_abs > 0.0 {
        let expansion = 10.0 / max_abs;
        layout.iter_mut().flatten().for_each(|v| *v *= expansion);
    }
    (layout, InitKind::Spectral)
}
