use super::forward::{check_inputs, scan_down, scan_up};
use super::{ScanParams, ScanVariant};
use crate::error::{Error, Result};
use crate::feature::FeatureMap;
use crate::real::Real;
use crate::tree::SpanningTree;

/// Gradients of `sum(grad_y * y)` with respect to the scan inputs. Gate
/// gradients are taken with respect to the normalised gates.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanGradients<T = f64> {
    pub grad_x: FeatureMap<T>,
    pub grad_a: Vec<T>,
    pub grad_b: Vec<T>,
    pub grad_c: Vec<T>,
}

/// Reverse-mode pass through `tree_scan`. The forward pass is recomputed.
///
/// The adjoint of the downward pass runs leaf-to-root (each node hands its
/// adjoint to its parent once all of its children have), and the adjoint of
/// the upward pass runs root-to-leaf.
#[allow(clippy::needless_range_loop)]
pub fn scan_backward<T: Real>(
    map: &FeatureMap<T>,
    tree: &SpanningTree,
    params: &ScanParams<T>,
    variant: ScanVariant,
    grad_y: &FeatureMap<T>,
) -> Result<ScanGradients<T>> {
    check_inputs(map, tree, params)?;
    if !grad_y.same_shape(map) {
        return Err(Error::Dimension("output gradient shape differs from input".into()));
    }
    let n = map.node_count();
    let ch = map.channels();
    let state = scan_down(scan_up(map, tree, params)?, tree, params, variant)?;
    let (u, h) = (&state.h_lr, &state.h);
    let gy = grad_y.data();
    let a = &params.a_bar;

    let mut grad_c = vec![T::zero(); n];
    let mut gh = vec![T::zero(); n * ch];
    for i in 0..n {
        for k in 0..ch {
            let idx = i * ch + k;
            grad_c[i] += gy[idx] * h[idx];
            gh[idx] = params.c_out[i] * gy[idx];
        }
    }

    // downward-pass adjoint
    let mut grad_a = vec![T::zero(); n];
    let mut gu = vec![T::zero(); n * ch];
    for &i in tree.bfs_order().iter().rev() {
        let Some(p) = tree.parent(i) else {
            for k in 0..ch {
                gu[i * ch + k] += gh[i * ch + k];
            }
            continue;
        };
        for k in 0..ch {
            let (ii, pp) = (i * ch + k, p * ch + k);
            let g = gh[ii];
            match variant {
                ScanVariant::MatrixConsistent => {
                    grad_a[i] += g * (h[pp] - u[ii]);
                    gh[pp] += a[i] * g;
                }
                ScanVariant::LiteralEq9 => {
                    grad_a[i] += g * (u[pp] - u[ii]);
                    gu[pp] += a[i] * g;
                }
            }
            gu[ii] += (T::one() - a[i]) * g;
        }
    }

    // upward-pass adjoint
    for &i in tree.bfs_order() {
        if let Some(p) = tree.parent(i) {
            for k in 0..ch {
                let (ii, pp) = (i * ch + k, p * ch + k);
                let up = gu[pp];
                grad_a[i] += up * u[ii];
                gu[ii] += a[i] * up;
            }
        }
    }

    let x = map.data();
    let mut grad_b = vec![T::zero(); n];
    let mut grad_x = vec![T::zero(); n * ch];
    for i in 0..n {
        for k in 0..ch {
            let idx = i * ch + k;
            grad_b[i] += gu[idx] * x[idx];
            grad_x[idx] = params.b_bar[i] * gu[idx];
        }
    }
    Ok(ScanGradients { grad_x: FeatureMap::new(map.height(), map.width(), ch, grad_x)?, grad_a, grad_b, grad_c })
}
