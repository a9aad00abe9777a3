//! Dense matrix-form reference for the tree scan.
//!
//! Builds the propagation systems explicitly and solves them with LU
//! factorisation (partial pivoting), independent of the traversal code.
//!
//! Upward: `(I - C A) H_lr = B X`, where `C[i][j] = 1` iff `j` is a child of
//! `i` and `A`, `B` are the diagonal gate and input-gain matrices. The child
//! gate multiplies the child state, so the gate diagonal sits to the right
//! of `C`.
//!
//! Downward (matrix-consistent): `(I - A' S) H = (I - A') H_lr`, where
//! `S[i][j] = 1` iff `j` is the parent of `i` and `A'` is `A` with the root
//! entry zeroed so that `h_root = h_lr_root`. The literal variant is the
//! explicit map `H = A' (S H_lr - H_lr) + H_lr`.

use nalgebra::DMatrix;

use super::forward::check_inputs;
use super::{ScanParams, ScanVariant};
use crate::error::{Error, Result};
use crate::feature::FeatureMap;
use crate::real::Real;
use crate::tree::SpanningTree;

pub const DEFAULT_ORACLE_NODE_CAP: usize = 4096;

/// Induced infinity norms of the gated incidence matrices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub max_abs_gate: f64,
    /// `|| A C ||_inf` with the gate diagonal on the left.
    pub gate_child_norm: f64,
    /// `|| C A ||_inf`, the matrix of the upward system.
    pub child_gate_norm: f64,
    /// `|| A S ||_inf`.
    pub gate_parent_norm: f64,
}

impl ConvergenceReport {
    /// The sufficient solvability condition: gates inside `(-1/4, 1/4)` and
    /// every gated incidence norm strictly below one.
    pub fn holds(&self) -> bool {
        self.max_abs_gate < 0.25
            && self.gate_child_norm < 1.0
            && self.child_gate_norm < 1.0
            && self.gate_parent_norm < 1.0
    }
}

fn gates_f64<T: Real>(params: &ScanParams<T>) -> Vec<f64> {
    params.a_bar.iter().map(|a| a.to_f64_lossy()).collect()
}

fn child_matrix(tree: &SpanningTree) -> DMatrix<f64> {
    let n = tree.node_count();
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        for &j in tree.children(i) {
            c[(i, j)] = 1.0;
        }
    }
    c
}

fn parent_matrix(tree: &SpanningTree) -> DMatrix<f64> {
    let n = tree.node_count();
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        if let Some(p) = tree.parent(i) {
            s[(i, p)] = 1.0;
        }
    }
    s
}

fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Computes the norms directly from dense matrices.
pub fn convergence_report<T: Real>(tree: &SpanningTree, params: &ScanParams<T>) -> Result<ConvergenceReport> {
    params.check_nodes(tree.node_count())?;
    let gates = DMatrix::from_diagonal(&gates_f64(params).into());
    let c = child_matrix(tree);
    let s = parent_matrix(tree);
    Ok(ConvergenceReport {
        max_abs_gate: params.max_abs_gate().to_f64_lossy(),
        gate_child_norm: inf_norm(&(&gates * &c)),
        child_gate_norm: inf_norm(&(&c * &gates)),
        gate_parent_norm: inf_norm(&(&gates * &s)),
    })
}

struct Systems {
    /// `I - C A`
    up: DMatrix<f64>,
    input_gain: Vec<f64>,
    output_gain: Vec<f64>,
    /// root-adjusted gates `A'`
    down_gates: Vec<f64>,
    parent: DMatrix<f64>,
}

impl Systems {
    fn build<T: Real>(tree: &SpanningTree, params: &ScanParams<T>) -> Self {
        let n = tree.node_count();
        let gates = gates_f64(params);
        let mut up = DMatrix::identity(n, n);
        for i in 0..n {
            for &j in tree.children(i) {
                up[(i, j)] -= gates[j];
            }
        }
        let mut down_gates = gates;
        down_gates[tree.root()] = 0.0;
        Self {
            up,
            input_gain: params.b_bar.iter().map(|v| v.to_f64_lossy()).collect(),
            output_gain: params.c_out.iter().map(|v| v.to_f64_lossy()).collect(),
            down_gates,
            parent: parent_matrix(tree),
        }
    }

    fn solve(m: &DMatrix<f64>, rhs: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
        m.clone().lu().solve(rhs).ok_or_else(|| Error::Solver(format!("{what} system is singular")))
    }

    /// Columns of `x` are channels; rows are nodes.
    fn apply(&self, x: &DMatrix<f64>, variant: ScanVariant) -> Result<DMatrix<f64>> {
        let n = self.up.nrows();
        let mut rhs = x.clone();
        for (i, mut row) in rhs.row_iter_mut().enumerate() {
            row *= self.input_gain[i];
        }
        let h_lr = Self::solve(&self.up, &rhs, "upward")?;
        let gated = |m: &DMatrix<f64>| {
            let mut out = m.clone();
            for (i, mut row) in out.row_iter_mut().enumerate() {
                row *= self.down_gates[i];
            }
            out
        };
        let mut h = match variant {
            ScanVariant::MatrixConsistent => {
                let lhs = DMatrix::identity(n, n) - gated(&self.parent);
                let rhs = &h_lr - gated(&h_lr);
                Self::solve(&lhs, &rhs, "downward")?
            }
            ScanVariant::LiteralEq9 => gated(&(&self.parent * &h_lr - &h_lr)) + &h_lr,
        };
        for (i, mut row) in h.row_iter_mut().enumerate() {
            row *= self.output_gain[i];
        }
        Ok(h)
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::Contract(format!("oracle limited to {cap} nodes, got {n}")));
    }
    Ok(())
}

/// Dense reference scan with the default node cap.
pub fn oracle_scan<T: Real>(
    map: &FeatureMap<T>,
    tree: &SpanningTree,
    params: &ScanParams<T>,
    variant: ScanVariant,
) -> Result<FeatureMap<T>> {
    oracle_scan_with_cap(map, tree, params, variant, DEFAULT_ORACLE_NODE_CAP)
}

pub fn oracle_scan_with_cap<T: Real>(
    map: &FeatureMap<T>,
    tree: &SpanningTree,
    params: &ScanParams<T>,
    variant: ScanVariant,
    cap: usize,
) -> Result<FeatureMap<T>> {
    check_inputs(map, tree, params)?;
    let (n, ch) = (map.node_count(), map.channels());
    check_cap(n, cap)?;
    let report = convergence_report(tree, params)?;
    if !report.holds() {
        return Err(Error::Contract(format!("solvability condition violated: {report:?}")));
    }
    let x = DMatrix::from_row_iterator(n, ch, map.data().iter().map(|v| v.to_f64_lossy()));
    let y = Systems::build(tree, params).apply(&x, variant)?;
    let data = (0..n).flat_map(|i| (0..ch).map(move |k| (i, k))).map(|(i, k)| T::lit(y[(i, k)])).collect();
    FeatureMap::new(map.height(), map.width(), ch, data)
}

/// The `n x n` matrix `T` with `y[:, k] = T x[:, k]` for every channel `k`.
pub fn oracle_operator<T: Real>(
    tree: &SpanningTree,
    params: &ScanParams<T>,
    variant: ScanVariant,
) -> Result<DMatrix<f64>> {
    let n = tree.node_count();
    params.check_nodes(n)?;
    check_cap(n, DEFAULT_ORACLE_NODE_CAP)?;
    Systems::build(tree, params).apply(&DMatrix::identity(n, n), variant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::root_and_order;

    #[test]
    fn path_matches_hand_values() {
        let map = FeatureMap::new(1, 3, 1, vec![1.0, 2.0, 3.0]).unwrap();
        let tree = root_and_order(3, [(0, 1), (1, 2)], 0).unwrap();
        let params = ScanParams::uniform(3, 0.1, 1.0, 1.0);
        let y = oracle_scan(&map, &tree, &params, ScanVariant::MatrixConsistent).unwrap();
        for (got, want) in y.data().iter().zip([1.23f64, 2.193, 2.9193]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn gate_off_is_diagonal() {
        let map = crate::rng::random_feature_map::<f64>(3, 3, 2, 4);
        let tree = crate::tree::minimum_spanning_tree(&map, 4).unwrap();
        let mut params = ScanParams::uniform(9, 0.0, 1.0, 1.0);
        params.b_bar = (0..9).map(|i| i as f64 - 3.0).collect();
        let y = oracle_scan(&map, &tree, &params, ScanVariant::MatrixConsistent).unwrap();
        for i in 0..9 {
            for k in 0..2 {
                assert!((y.node(i)[k] - params.b_bar[i] * map.node(i)[k]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn cap_enforced() {
        let map = crate::rng::random_feature_map::<f64>(3, 3, 1, 4);
        let tree = crate::tree::minimum_spanning_tree(&map, 0).unwrap();
        let params = ScanParams::uniform(9, 0.1, 1.0, 1.0);
        assert!(matches!(
            oracle_scan_with_cap(&map, &tree, &params, ScanVariant::MatrixConsistent, 8),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn norms_on_star() {
        // root 0 with four children, every gate 0.2
        let tree = root_and_order(5, [(0, 1), (0, 2), (0, 3), (0, 4)], 0).unwrap();
        let params = ScanParams::uniform(5, 0.2, 1.0, 1.0);
        let r = convergence_report(&tree, &params).unwrap();
        assert!((r.gate_child_norm - 0.8).abs() < 1e-15);
        assert!((r.child_gate_norm - 0.8).abs() < 1e-15);
        assert!((r.gate_parent_norm - 0.2).abs() < 1e-15);
        assert!(r.holds());
    }
}
