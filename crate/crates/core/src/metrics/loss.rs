use super::check_shapes;
use super::ssim::{loss_ssim, loss_ssim_grad};
use crate::error::Result;
use crate::feature::DepthMap;
use crate::real::Real;

/// Mean absolute error.
pub fn loss_mae<T: Real>(pred: &DepthMap<T>, reference: &DepthMap<T>) -> Result<T> {
    check_shapes(pred, reference)?;
    let total: T = pred.data().iter().zip(reference.data()).map(|(&x, &y)| (y - x).abs()).sum();
    Ok(total / T::from_count(pred.len()))
}

/// Central-difference neighbours of `p` along an axis of length `len`,
/// replicating the border sample.
#[inline]
fn neighbours(p: usize, len: usize) -> (usize, usize) {
    (p.saturating_sub(1), (p + 1).min(len - 1))
}

/// Edge-aware gradient loss. For every pixel it compares the magnitude of
/// the horizontal and vertical central differences of the two maps and
/// averages `|dh| + |dv|` of the magnitude mismatch.
pub fn loss_grad<T: Real>(pred: &DepthMap<T>, reference: &DepthMap<T>) -> Result<T> {
    check_shapes(pred, reference)?;
    let (h, w) = (pred.height(), pred.width());
    let mut total = T::zero();
    for r in 0..h {
        let (up, down) = neighbours(r, h);
        for c in 0..w {
            let (left, right) = neighbours(c, w);
            let dh =
                (reference.at(r, right) - reference.at(r, left)).abs() - (pred.at(r, right) - pred.at(r, left)).abs();
            let dv = (reference.at(down, c) - reference.at(up, c)).abs() - (pred.at(down, c) - pred.at(up, c)).abs();
            total += dh.abs() + dv.abs();
        }
    }
    Ok(total / T::from_count(h * w))
}

/// `loss_mae + loss_grad + loss_ssim`.
pub fn loss_final<T: Real>(pred: &DepthMap<T>, reference: &DepthMap<T>) -> Result<T> {
    Ok(loss_mae(pred, reference)? + loss_grad(pred, reference)? + loss_ssim(pred, reference)?)
}

fn sign<T: Real>(v: T) -> T {
    if v > T::zero() {
        T::one()
    } else if v < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// Gradient of `loss_final` with respect to the prediction. Absolute values
/// use the subgradient 0 at their kinks.
pub fn loss_final_grad<T: Real>(pred: &DepthMap<T>, reference: &DepthMap<T>) -> Result<Vec<T>> {
    let mut grad = loss_ssim_grad(pred, reference)?;
    let (h, w) = (pred.height(), pred.width());
    let inv_n = T::one() / T::from_count(h * w);
    for (g, (&x, &y)) in grad.iter_mut().zip(pred.data().iter().zip(reference.data())) {
        *g += sign(x - y) * inv_n;
    }
    for r in 0..h {
        let (up, down) = neighbours(r, h);
        for c in 0..w {
            let (left, right) = neighbours(c, w);
            let pd = pred.at(r, right) - pred.at(r, left);
            let dh = (reference.at(r, right) - reference.at(r, left)).abs() - pd.abs();
            let s = -sign(dh) * sign(pd) * inv_n;
            grad[r * w + right] += s;
            grad[r * w + left] -= s;
            let pd = pred.at(down, c) - pred.at(up, c);
            let dv = (reference.at(down, c) - reference.at(up, c)).abs() - pd.abs();
            let s = -sign(dv) * sign(pd) * inv_n;
            grad[down * w + c] += s;
            grad[up * w + c] -= s;
        }
    }
    Ok(grad)
}
