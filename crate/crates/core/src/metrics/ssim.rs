//! Structural similarity with a Gaussian window.
//!
//! Local statistics use an 11x11 Gaussian (sigma 1.5). Near the border the
//! window is truncated to the image and renormalised, so every pixel has a
//! defined SSIM value whatever the image size.

use super::check_shapes;
use crate::error::Result;
use crate::feature::{min_max, DepthMap};
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SsimConfig {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
}

impl Default for SsimConfig {
    fn default() -> Self {
        Self { window: 11, sigma: 1.5, k1: 0.01, k2: 0.03 }
    }
}

/// Separable truncated Gaussian with per-position renormalisation.
struct Window<T> {
    taps: Vec<T>,
    radius: usize,
}

impl<T: Real> Window<T> {
    fn new(cfg: &SsimConfig) -> Self {
        let radius = cfg.window / 2;
        let taps: Vec<T> = (0..cfg.window)
            .map(|k| {
                let d = k as f64 - radius as f64;
                T::lit((-d * d / (2.0 * cfg.sigma * cfg.sigma)).exp())
            })
            .collect();
        Self { taps, radius }
    }

    fn span(&self, p: usize, len: usize) -> std::ops::Range<usize> {
        p.saturating_sub(self.radius)..(p + self.radius + 1).min(len)
    }

    fn tap(&self, p: usize, q: usize) -> T {
        self.taps[q + self.radius - p]
    }

    /// Sum of taps inside the image for each position.
    fn norms(&self, len: usize) -> Vec<T> {
        (0..len).map(|p| self.span(p, len).map(|q| self.tap(p, q)).sum()).collect()
    }

    /// Normalised 1D filtering of `src` along one axis. `stride` is the
    /// element step along the axis, `outer` iterates the other axis.
    fn filter_axis(&self, src: &[T], len: usize, stride: usize, outer: &[usize], transpose: bool) -> Vec<T> {
        let norms = self.norms(len);
        let mut out = vec![T::zero(); src.len()];
        for &base in outer {
            for p in 0..len {
                let mut acc = T::zero();
                for q in self.span(p, len) {
                    // the Gaussian is symmetric, so the transpose only moves
                    // the normaliser from the output position to the input one
                    let w = if transpose { self.tap(p, q) / norms[q] } else { self.tap(p, q) / norms[p] };
                    acc += w * src[base + q * stride];
                }
                out[base + p * stride] = acc;
            }
        }
        out
    }

    fn blur(&self, src: &[T], h: usize, w: usize, transpose: bool) -> Vec<T> {
        let rows: Vec<usize> = (0..h).map(|r| r * w).collect();
        let cols: Vec<usize> = (0..w).collect();
        let horizontal = self.filter_axis(src, w, 1, &rows, transpose);
        self.filter_axis(&horizontal, h, w, &cols, transpose)
    }
}

struct LocalStats<T> {
    mx: Vec<T>,
    my: Vec<T>,
    vx: Vec<T>,
    vy: Vec<T>,
    cxy: Vec<T>,
}

fn local_stats<T: Real>(win: &Window<T>, x: &[T], y: &[T], h: usize, w: usize) -> LocalStats<T> {
    let prod = |f: &dyn Fn(T, T) -> T| x.iter().zip(y).map(|(&a, &b)| f(a, b)).collect::<Vec<T>>();
    let mx = win.blur(x, h, w, false);
    let my = win.blur(y, h, w, false);
    let mxx = win.blur(&prod(&|a, _| a * a), h, w, false);
    let myy = win.blur(&prod(&|_, b| b * b), h, w, false);
    let mxy = win.blur(&prod(&|a, b| a * b), h, w, false);
    let n = x.len();
    let (mut vx, mut vy, mut cxy) = (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
    for p in 0..n {
        vx[p] = mxx[p] - mx[p] * mx[p];
        vy[p] = myy[p] - my[p] * my[p];
        cxy[p] = mxy[p] - mx[p] * my[p];
    }
    LocalStats { mx, my, vx, vy, cxy }
}

fn dynamic_range<T: Real>(reference: &DepthMap<T>) -> T {
    let (lo, hi) = min_max(reference.data());
    let range = hi - lo;
    if range > T::zero() {
        range
    } else {
        T::one()
    }
}

fn constants<T: Real>(cfg: &SsimConfig, range: T) -> (T, T) {
    let c1 = T::lit(cfg.k1) * range;
    let c2 = T::lit(cfg.k2) * range;
    (c1 * c1, c2 * c2)
}

/// Mean SSIM with an explicit dynamic range.
pub fn ssim<T: Real>(x: &DepthMap<T>, y: &DepthMap<T>, range: T, cfg: &SsimConfig) -> Result<T> {
    check_shapes(x, y)?;
    let (h, w) = (x.height(), x.width());
    let win = Window::new(cfg);
    let s = local_stats(&win, x.data(), y.data(), h, w);
    let (c1, c2) = constants(cfg, range);
    let two = T::lit(2.0);
    let total: T = (0..x.len())
        .map(|p| {
            let num = (two * s.mx[p] * s.my[p] + c1) * (two * s.cxy[p] + c2);
            let den = (s.mx[p] * s.mx[p] + s.my[p] * s.my[p] + c1) * (s.vx[p] + s.vy[p] + c2);
            num / den
        })
        .sum();
    Ok(total / T::from_count(x.len()))
}

/// `1 - SSIM(pred, ref)` with the dynamic range taken from the reference
/// (1 when the reference is constant).
pub fn loss_ssim<T: Real>(pred: &DepthMap<T>, reference: &DepthMap<T>) -> Result<T> {
    Ok(T::one() - ssim(pred, reference, dynamic_range(reference), &SsimConfig::default())?)
}

/// Gradient of `loss_ssim` with respect to the prediction.
pub(crate) fn loss_ssim_grad<T: Real>(pred: &DepthMap<T>, reference: &DepthMap<T>) -> Result<Vec<T>> {
    check_shapes(pred, reference)?;
    let cfg = SsimConfig::default();
    let (h, w) = (pred.height(), pred.width());
    let (x, y) = (pred.data(), reference.data());
    let win = Window::new(&cfg);
    let s = local_stats(&win, x, y, h, w);
    let (c1, c2) = constants(&cfg, dynamic_range(reference));
    let two = T::lit(2.0);
    let n = x.len();
    // derivatives of the per-pixel SSIM with respect to the raw local
    // moments E[x], E[x^2], E[xy]
    let (mut d_m, mut d_mm, mut d_my) = (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
    for p in 0..n {
        let (mx, my) = (s.mx[p], s.my[p]);
        let a1 = two * mx * my + c1;
        let a2 = two * s.cxy[p] + c2;
        let b1 = mx * mx + my * my + c1;
        let b2 = s.vx[p] + s.vy[p] + c2;
        let den = b1 * b2;
        let value = a1 * a2 / den;
        let d_mean = two * my * a2 / den - value * two * mx / b1;
        let d_var = -value / b2;
        let d_cov = two * a1 / den;
        d_m[p] = d_mean - two * mx * d_var - my * d_cov;
        d_mm[p] = d_var;
        d_my[p] = d_cov;
    }
    let g_m = win.blur(&d_m, h, w, true);
    let g_mm = win.blur(&d_mm, h, w, true);
    let g_my = win.blur(&d_my, h, w, true);
    let scale = -T::one() / T::from_count(n);
    Ok((0..n).map(|q| scale * (g_m[q] + two * x[q] * g_mm[q] + y[q] * g_my[q])).collect())
}
