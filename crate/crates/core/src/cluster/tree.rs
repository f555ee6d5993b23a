//! Single-linkage hierarchy, condensed tree and excess-of-mass extraction.

use std::collections::VecDeque;

use super::{Edge, NOISE};
use crate::scalar::Scalar;

/// One union step. Leaves are `0..n`; merge `i` creates node `n + i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub weight: f64,
    pub size: usize,
}

struct UnionFind {
    parent: Vec<usize>,
    node: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            node: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

/// Merges in ascending weight, ties by edge distance and then `(a, b)`.
pub fn build_hierarchy<T: Scalar>(n: usize, edges: &[Edge<T>]) -> Vec<Merge> {
    let mut sorted: Vec<(f64, f64, usize, usize)> = edges
        .iter()
        .map(|e| (e.weight.to_f64_lossy(), e.distance.to_f64_lossy(), e.a.min(e.b), e.a.max(e.b)))
        .collect();
    sorted.sort_by(|x, y| {
        x.0.total_cmp(&y.0)
            .then(x.1.total_cmp(&y.1))
            .then(x.2.cmp(&y.2))
            .then(x.3.cmp(&y.3))
    });
    let mut uf = UnionFind::new(n);
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for (w, _, a, b) in sorted {
        let (ra, rb) = (uf.find(a), uf.find(b));
        if ra == rb {
            continue;
        }
        let size = uf.size[ra] + uf.size[rb];
        merges.push(Merge {
            left: uf.node[ra],
            right: uf.node[rb],
            weight: w,
            size,
        });
        uf.parent[rb] = ra;
        uf.size[ra] = size;
        uf.node[ra] = n + merges.len() - 1;
    }
    merges
}

/// `child` is a point (`< n_points`) or a cluster id (`>= n_points`, root = `n_points`).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CondensedRow {
    pub parent: usize,
    pub child: usize,
    pub lambda: f64,
    pub child_size: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CondensedTree {
    pub n_points: usize,
    pub min_cluster_size: usize,
    pub rows: Vec<CondensedRow>,
}

impl CondensedTree {
    pub fn root(&self) -> usize {
        self.n_points
    }

    pub fn n_clusters(&self) -> usize {
        1 + self.rows.iter().filter(|r| r.child >= self.n_points).count()
    }

    pub fn cluster_children(&self, c: usize) -> Vec<usize> {
        self.rows
            .iter()
            .filter(|r| r.parent == c && r.child >= self.n_points)
            .map(|r| r.child)
            .collect()
    }
}

fn lambda_of(weight: f64) -> f64 {
    1.0 / weight.max(f64::MIN_POSITIVE.sqrt())
}

fn leaves(n: usize, merges: &[Merge], node: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut stack = vec![node];
    while let Some(x) = stack.pop() {
        if x < n {
            out.push(x);
        } else {
            let m = &merges[x - n];
            stack.push(m.right);
            stack.push(m.left);
        }
    }
    out
}

/// Condenses the dendrogram: a split side smaller than `min_cluster_size`
/// sheds its points from the parent cluster at that split's lambda.
pub fn condense(n: usize, merges: &[Merge], min_cluster_size: usize) -> CondensedTree {
    let mut tree = CondensedTree {
        n_points: n,
        min_cluster_size,
        rows: Vec::new(),
    };
    if n < 2 || merges.is_empty() {
        return tree;
    }
    let size = |x: usize| if x < n { 1 } else { merges[x - n].size };
    let root = n + merges.len() - 1;
    let mut next_label = n + 1;
    let mut queue = VecDeque::from([(root, n)]);
    while let Some((node, label)) = queue.pop_front() {
        let m = merges[node - n];
        let lambda = lambda_of(m.weight);
        let (l, r) = (m.left, m.right);
        let (big_l, big_r) = (size(l) >= min_cluster_size, size(r) >= min_cluster_size);
        let shed = |side: usize, rows: &mut Vec<CondensedRow>| {
            for p in leaves(n, merges, side) {
                rows.push(CondensedRow {
                    parent: label,
                    child: p,
                    lambda,
                    child_size: 1,
                });
            }
        };
        match (big_l, big_r) {
            (true, true) => {
                for side in [l, r] {
                    tree.rows.push(CondensedRow {
                        parent: label,
                        child: next_label,
                        lambda,
                        child_size: size(side),
                    });
                    if side >= n {
                        queue.push_back((side, next_label));
                    }
                    next_label += 1;
                }
            }
            (false, false) => {
                shed(l, &mut tree.rows);
                shed(r, &mut tree.rows);
            }
            (true, false) | (false, true) => {
                let (keep, drop) = if big_l { (l, r) } else { (r, l) };
                shed(drop, &mut tree.rows);
                if keep >= n {
                    queue.push_back((keep, label));
                } else {
                    shed(keep, &mut tree.rows);
                }
            }
        }
    }
    tree
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub labels: Vec<i64>,
    /// Indexed by output label.
    pub stabilities: Vec<f64>,
    /// Selected condensed-tree cluster ids, indexed by output label.
    pub selected: Vec<usize>,
}

/// Per-cluster stability `Σ (lambda_child − lambda_birth) · child_size`.
pub fn stabilities(tree: &CondensedTree) -> Vec<f64> {
    let n = tree.n_points;
    let k = tree.n_clusters();
    let mut birth = vec![0.0; k];
    for r in &tree.rows {
        if r.child >= n {
            birth[r.child - n] = r.lambda;
        }
    }
    let mut stab = vec![0.0; k];
    for r in &tree.rows {
        stab[r.parent - n] += (r.lambda - birth[r.parent - n]) * r.child_size as f64;
    }
    stab
}

/// Excess-of-mass selection and point labelling.
pub fn extract(tree: &CondensedTree, allow_single_cluster: bool) -> Extraction {
    let n = tree.n_points;
    let k = tree.n_clusters();
    let mut labels = vec![NOISE; n];
    if tree.rows.is_empty() {
        return Extraction {
            labels,
            stabilities: Vec::new(),
            selected: Vec::new(),
        };
    }
    let own = stabilities(tree);
    let mut stab = own.clone();
    let mut parent_of = vec![usize::MAX; k];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut point_parent = vec![usize::MAX; n];
    for r in &tree.rows {
        if r.child >= n {
            parent_of[r.child - n] = r.parent - n;
            children[r.parent - n].push(r.child - n);
        } else {
            point_parent[r.child] = r.parent - n;
        }
    }

    let mut selected = vec![false; k];
    for c in (0..k).rev() {
        let is_root = c == 0;
        if children[c].is_empty() {
            selected[c] = !is_root || n >= tree.min_cluster_size;
            continue;
        }
        if is_root && !allow_single_cluster {
            continue;
        }
        let sub: f64 = children[c].iter().map(|&ch| stab[ch]).sum();
        if sub > stab[c] {
            stab[c] = sub;
        } else {
            selected[c] = true;
            let mut stack = children[c].clone();
            while let Some(d) = stack.pop() {
                selected[d] = false;
                stack.extend(children[d].iter().copied());
            }
        }
    }

    let mut label_of_cluster = vec![NOISE; k];
    let mut out_stab = Vec::new();
    let mut out_sel = Vec::new();
    for p in 0..n {
        let mut c = point_parent[p];
        while c != usize::MAX && !selected[c] {
            c = parent_of[c];
        }
        if c == usize::MAX {
            continue;
        }
        if label_of_cluster[c] == NOISE {
            label_of_cluster[c] = out_stab.len() as i64;
            out_stab.push(own[c]);
            out_sel.push(c + n);
        }
        labels[p] = label_of_cluster[c];
    }
    Extraction {
        labels,
        stabilities: out_stab,
        selected: out_sel,
    }
}
