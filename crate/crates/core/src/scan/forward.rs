use super::{ScanParams, ScanVariant};
use crate::error::{Error, Result};
use crate::feature::FeatureMap;
use crate::real::Real;
use crate::tree::SpanningTree;

/// Latent states of one scan, stored node-major like `FeatureMap`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanState<T = f64> {
    height: usize,
    width: usize,
    channels: usize,
    /// Upward-pass state.
    pub h_lr: Vec<T>,
    /// Final state; empty until `scan_down` has run.
    pub h: Vec<T>,
}

impl<T: Real> ScanState<T> {
    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn node_count(&self) -> usize {
        self.height * self.width
    }

    pub fn is_complete(&self) -> bool {
        !self.h.is_empty()
    }
}

pub(crate) fn check_inputs<T: Real>(map: &FeatureMap<T>, tree: &SpanningTree, params: &ScanParams<T>) -> Result<()> {
    let n = map.node_count();
    if tree.node_count() != n {
        return Err(Error::Dimension(format!("tree spans {} nodes, grid has {n}", tree.node_count())));
    }
    params.check_nodes(n)?;
    if !params.normalized {
        return Err(Error::Contract("scan requires normalised gates".into()));
    }
    Ok(())
}

/// Leaf-to-root pass: `h_lr_i = sum_{j in children(i)} a_j h_lr_j + b_i x_i`.
pub fn scan_up<T: Real>(map: &FeatureMap<T>, tree: &SpanningTree, params: &ScanParams<T>) -> Result<ScanState<T>> {
    check_inputs(map, tree, params)?;
    let ch = map.channels();
    let mut h_lr: Vec<T> =
        map.data().chunks_exact(ch).zip(&params.b_bar).flat_map(|(x, &b)| x.iter().map(move |&v| b * v)).collect();
    for &i in tree.bfs_order().iter().rev() {
        if let Some(p) = tree.parent(i) {
            let a = params.a_bar[i];
            for k in 0..ch {
                let child = h_lr[i * ch + k];
                h_lr[p * ch + k] += a * child;
            }
        }
    }
    Ok(ScanState { height: map.height(), width: map.width(), channels: ch, h_lr, h: Vec::new() })
}

/// Root-to-leaf pass. The root keeps its upward state.
pub fn scan_down<T: Real>(
    mut state: ScanState<T>,
    tree: &SpanningTree,
    params: &ScanParams<T>,
    variant: ScanVariant,
) -> Result<ScanState<T>> {
    let n = state.node_count();
    if tree.node_count() != n || state.h_lr.len() != n * state.channels {
        return Err(Error::Dimension("state does not match tree".into()));
    }
    params.check_nodes(n)?;
    if !params.normalized {
        return Err(Error::Contract("scan requires normalised gates".into()));
    }
    let ch = state.channels;
    let h_lr = &state.h_lr;
    let mut h = vec![T::zero(); h_lr.len()];
    let root = tree.root();
    h[root * ch..(root + 1) * ch].copy_from_slice(&h_lr[root * ch..(root + 1) * ch]);
    for &i in &tree.bfs_order()[1..] {
        let p = tree.parent(i).expect("non-root node has a parent");
        let a = params.a_bar[i];
        for k in 0..ch {
            let own = h_lr[i * ch + k];
            h[i * ch + k] = match variant {
                ScanVariant::MatrixConsistent => a * h[p * ch + k] + (T::one() - a) * own,
                ScanVariant::LiteralEq9 => a * (h_lr[p * ch + k] - own) + own,
            };
        }
    }
    state.h = h;
    Ok(state)
}

/// `y_i = c_i h_i`, reshaped onto the input grid.
pub fn project_output<T: Real>(state: &ScanState<T>, params: &ScanParams<T>) -> Result<FeatureMap<T>> {
    if !state.is_complete() {
        return Err(Error::Contract("downward pass has not run".into()));
    }
    params.check_nodes(state.node_count())?;
    let ch = state.channels;
    let y = state.h.chunks_exact(ch).zip(&params.c_out).flat_map(|(h, &c)| h.iter().map(move |&v| c * v)).collect();
    FeatureMap::new(state.height, state.width, ch, y)
}

/// Upward pass, downward pass, then output projection.
pub fn tree_scan<T: Real>(
    map: &FeatureMap<T>,
    tree: &SpanningTree,
    params: &ScanParams<T>,
    variant: ScanVariant,
) -> Result<FeatureMap<T>> {
    let state = scan_up(map, tree, params)?;
    let state = scan_down(state, tree, params, variant)?;
    project_output(&state, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::root_and_order;
    use approx::assert_abs_diff_eq;

    fn path_example() -> (FeatureMap<f64>, SpanningTree, ScanParams<f64>) {
        let map = FeatureMap::new(1, 3, 1, vec![1.0, 2.0, 3.0]).unwrap();
        let tree = root_and_order(3, [(0, 1), (1, 2)], 0).unwrap();
        (map, tree, ScanParams::uniform(3, 0.1, 1.0, 1.0))
    }

    #[test]
    fn path_upward() {
        let (map, tree, params) = path_example();
        let s = scan_up(&map, &tree, &params).unwrap();
        for (got, want) in s.h_lr.iter().zip([1.23, 2.3, 3.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn path_downward_matrix() {
        let (map, tree, params) = path_example();
        let s = scan_up(&map, &tree, &params).unwrap();
        let s = scan_down(s, &tree, &params, ScanVariant::MatrixConsistent).unwrap();
        for (got, want) in s.h.iter().zip([1.23, 2.193, 2.9193]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn path_downward_literal() {
        let (map, tree, params) = path_example();
        let s = scan_up(&map, &tree, &params).unwrap();
        let s = scan_down(s, &tree, &params, ScanVariant::LiteralEq9).unwrap();
        // h_1 = 0.1 (1.23 - 2.3) + 2.3, h_2 = 0.1 (2.3 - 3) + 3
        for (got, want) in s.h.iter().zip([1.23, 2.193, 2.93]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn gate_off_leaves_inputs() {
        let map = crate::rng::random_feature_map::<f64>(4, 5, 3, 11);
        let tree = crate::tree::minimum_spanning_tree(&map, 0).unwrap();
        let mut params = ScanParams::uniform(20, 0.0, 1.0, 1.0);
        params.b_bar = (0..20).map(|i| 0.5 + i as f64).collect();
        let s = scan_up(&map, &tree, &params).unwrap();
        for i in 0..20 {
            for k in 0..3 {
                assert_eq!(s.h_lr[i * 3 + k], params.b_bar[i] * map.node(i)[k]);
            }
        }
        for variant in [ScanVariant::MatrixConsistent, ScanVariant::LiteralEq9] {
            let d = scan_down(s.clone(), &tree, &params, variant).unwrap();
            assert_eq!(d.h, d.h_lr);
        }
    }

    #[test]
    fn projection_gains() {
        let (map, tree, mut params) = path_example();
        let state =
            scan_down(scan_up(&map, &tree, &params).unwrap(), &tree, &params, ScanVariant::MatrixConsistent).unwrap();
        assert_eq!(project_output(&state, &params).unwrap().data(), state.h.as_slice());
        params.c_out = vec![0.0; 3];
        assert!(project_output(&state, &params).unwrap().data().iter().all(|&v| v == 0.0));
        params.c_out = vec![2.0; 3];
        let y = project_output(&state, &params).unwrap();
        for (y, h) in y.data().iter().zip(&state.h) {
            assert_eq!(*y, 2.0 * h);
        }
    }

    #[test]
    fn unnormalised_params_rejected() {
        let (map, tree, mut params) = path_example();
        params.normalized = false;
        assert!(matches!(scan_up(&map, &tree, &params), Err(Error::Contract(_))));
    }

    #[test]
    fn projection_before_down_pass_rejected() {
        let (map, tree, params) = path_example();
        let s = scan_up(&map, &tree, &params).unwrap();
        assert!(matches!(project_output(&s, &params), Err(Error::Contract(_))));
    }

    #[test]
    fn mismatched_tree_rejected() {
        let (map, _, params) = path_example();
        let tree = root_and_order(2, [(0, 1)], 0).unwrap();
        assert!(matches!(scan_up(&map, &tree, &params), Err(Error::Dimension(_))));
    }
}
