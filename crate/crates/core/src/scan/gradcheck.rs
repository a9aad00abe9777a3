use super::{make_params, normalize_gates, scan_backward, tree_scan, ParamWeights, ScanParams, ScanVariant};
use crate::error::{Error, Result};
use crate::feature::FeatureMap;
use crate::rng::{random_feature_map, SeededRng};
use crate::tree::minimum_spanning_tree;

pub const DEFAULT_FD_STEP: f64 = 1e-5;
/// Floor on the relative-error denominator so near-zero entries compare
/// absolutely.
pub const REL_ERROR_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradCheckReport {
    pub grad_x: f64,
    pub grad_a: f64,
    pub grad_b: f64,
    pub grad_c: f64,
}

impl GradCheckReport {
    pub fn max(&self) -> f64 {
        self.grad_x.max(self.grad_a).max(self.grad_b).max(self.grad_c)
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERROR_FLOOR)
}

/// Compares `scan_backward` with central differences of `sum(grad_y * y)`
/// on a seeded random instance (grid, channels and root drawn from `seed`).
pub fn gradient_check(
    seed: u64,
    height: usize,
    width: usize,
    variant: ScanVariant,
    step: f64,
) -> Result<GradCheckReport> {
    if height == 0 || width == 0 {
        return Err(Error::Dimension(format!("empty {height}x{width} grid")));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Data(format!("finite-difference step {step} must be positive")));
    }
    let mut rng = SeededRng::new(seed);
    let channels = 1 + rng.below(3);
    let map = random_feature_map::<f64>(height, width, channels, rng.next_u64());
    let tree = minimum_spanning_tree(&map, rng.below(height * width))?;
    let params = normalize_gates(make_params(&map, &ParamWeights::random(channels, rng.next_u64()))?);
    let gy = FeatureMap::new(height, width, channels, rng.vec(map.data().len(), -1.0, 1.0))?;
    let g = scan_backward(&map, &tree, &params, variant, &gy)?;

    let objective = |m: &FeatureMap<f64>, p: &ScanParams<f64>| -> Result<f64> {
        let y = tree_scan(m, &tree, p, variant)?;
        Ok(y.data().iter().zip(gy.data()).map(|(a, b)| a * b).sum())
    };
    let probe = |values: &[f64], analytic: &[f64], eval: &dyn Fn(Vec<f64>) -> Result<f64>| -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (k, &an) in analytic.iter().enumerate() {
            let mut plus = values.to_vec();
            let mut minus = values.to_vec();
            plus[k] += step;
            minus[k] -= step;
            let fd = (eval(plus)? - eval(minus)?) / (2.0 * step);
            worst = worst.max(relative_error(an, fd));
        }
        Ok(worst)
    };
    let with = |f: fn(&mut ScanParams<f64>) -> &mut Vec<f64>| {
        let (params, objective, map) = (&params, &objective, &map);
        move |v: Vec<f64>| {
            let mut p = params.clone();
            *f(&mut p) = v;
            objective(map, &p)
        }
    };
    Ok(GradCheckReport {
        grad_x: probe(map.data(), g.grad_x.data(), &|v| {
            objective(&FeatureMap::new(height, width, channels, v)?, &params)
        })?,
        grad_a: probe(&params.a_bar, &g.grad_a, &with(|p| &mut p.a_bar))?,
        grad_b: probe(&params.b_bar, &g.grad_b, &with(|p| &mut p.b_bar))?,
        grad_c: probe(&params.c_out, &g.grad_c, &with(|p| &mut p.c_out))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passes_for_both_variants() {
        for variant in [ScanVariant::MatrixConsistent, ScanVariant::LiteralEq9] {
            let r = gradient_check(7, 4, 4, variant, DEFAULT_FD_STEP).unwrap();
            assert!(r.max() < 1e-5, "{variant:?}: {r:?}");
        }
    }

    #[test]
    fn relative_error_floor() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert!((relative_error(1e-9, 0.0) - 1e-3).abs() < 1e-15);
        assert!((relative_error(2.0, 1.0) - 0.5).abs() < 1e-15);
    }
}
