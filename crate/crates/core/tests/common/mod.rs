//! Independent reference implementations shared by the integration suites.
//! Nothing here calls the code path it is used to check.

#![allow(dead_code)]

use treescan::rng::SeededRng;
use treescan::WeightedEdge;

/// Naive union-find without compression or ranking.
pub struct NaiveSets(Vec<usize>);

impl NaiveSets {
    pub fn new(n: usize) -> Self {
        NaiveSets((0..n).collect())
    }

    pub fn find(&self, mut x: usize) -> usize {
        while self.0[x] != x {
            x = self.0[x];
        }
        x
    }

    pub fn join(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[rb] = ra;
        true
    }
}

/// Kruskal with the same (weight, id) order.
pub fn kruskal(edges: &[WeightedEdge<f64>], n: usize) -> Vec<usize> {
    let mut sorted: Vec<&WeightedEdge<f64>> = edges.iter().collect();
    sorted.sort_by(|a, b| a.weight.partial_cmp(&b.weight).unwrap().then(a.id.cmp(&b.id)));
    let mut sets = NaiveSets::new(n);
    let mut ids: Vec<usize> = sorted.into_iter().filter(|e| sets.join(e.u, e.v)).map(|e| e.id).collect();
    ids.sort_unstable();
    ids
}

/// Minimum total weight over every `n - 1` edge subset that spans the graph.
pub fn exhaustive_min_spanning_weight(edges: &[WeightedEdge<f64>], n: usize) -> f64 {
    if n == 1 {
        return 0.0;
    }
    let m = edges.len();
    assert!(m <= 20, "enumeration limited to small graphs");
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize != n - 1 {
            continue;
        }
        let mut sets = NaiveSets::new(n);
        let mut ok = true;
        let mut total = 0.0;
        for (k, e) in edges.iter().enumerate() {
            if mask & (1 << k) != 0 {
                if !sets.join(e.u, e.v) {
                    ok = false;
                    break;
                }
                total += e.weight;
            }
        }
        if ok && total < best {
            best = total;
        }
    }
    best
}

/// 4-connected grid edges with weights drawn uniformly from `[0, 2)`.
pub fn random_grid_edges(h: usize, w: usize, rng: &mut SeededRng) -> Vec<WeightedEdge<f64>> {
    let mut edges = Vec::new();
    for r in 0..h {
        for c in 0..w {
            let u = r * w + c;
            if c + 1 < w {
                edges.push(WeightedEdge { u, v: u + 1, weight: rng.uniform_in(0.0, 2.0), id: edges.len() });
            }
            if r + 1 < h {
                edges.push(WeightedEdge { u, v: u + w, weight: rng.uniform_in(0.0, 2.0), id: edges.len() });
            }
        }
    }
    edges
}

/// Central finite difference of `f` at `x` along every coordinate.
pub fn central_differences(x: &[f64], step: f64, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + step;
            let up = f(&probe);
            probe[i] = x[i] - step;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * step)
        })
        .collect()
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Dense Gaussian elimination with partial pivoting; `a` is row-major n x n.
pub fn dense_solve(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Vec<f64> {
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i * n + col].abs().partial_cmp(&a[j * n + col].abs()).unwrap()).unwrap();
        assert!(a[pivot * n + col].abs() > 1e-300, "singular");
        for k in 0..n {
            a.swap(col * n + k, pivot * n + k);
        }
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row * n + col] / a[col * n + col];
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row * n + k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row * n + row];
    }
    x
}
