use super::check_shapes;
use crate::error::Result;
use crate::feature::DepthMap;
use crate::real::Real;

pub const DEFAULT_DEPTH_EPS: f64 = 1e-8;

/// Error and accuracy metrics of a predicted depth map against a reference.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricReport<T = f64> {
    pub rmse: T,
    pub rmse_log: T,
    pub a_rel: T,
    pub s_rel: T,
    pub log10_err: T,
    pub delta1: T,
    pub delta2: T,
    pub delta3: T,
}

impl<T: Real> MetricReport<T> {
    /// `(name, value)` pairs in reporting order.
    pub fn entries(&self) -> [(&'static str, T); 8] {
        [
            ("rmse", self.rmse),
            ("rmse_log", self.rmse_log),
            ("a_rel", self.a_rel),
            ("s_rel", self.s_rel),
            ("log10", self.log10_err),
            ("delta1", self.delta1),
            ("delta2", self.delta2),
            ("delta3", self.delta3),
        ]
    }
}

/// Zero depths are replaced by `eps` wherever a ratio or logarithm needs
/// them; RMSE uses the raw values.
pub fn depth_metrics<T: Real>(pred: &DepthMap<T>, reference: &DepthMap<T>, eps: T) -> Result<MetricReport<T>> {
    check_shapes(pred, reference)?;
    let guard = |v: T| if v == T::zero() { eps } else { v };
    let thresholds = [T::lit(1.25), T::lit(1.25 * 1.25), T::lit(1.25 * 1.25 * 1.25)];
    let mut sq = T::zero();
    let mut sq_log = T::zero();
    let mut abs_rel = T::zero();
    let mut sq_rel = T::zero();
    let mut log10 = T::zero();
    let mut inliers = [0usize; 3];
    for (&x, &y) in pred.data().iter().zip(reference.data()) {
        let diff = y - x;
        sq += diff * diff;
        let (gx, gy) = (guard(x), guard(y));
        let dl = gy.ln() - gx.ln();
        sq_log += dl * dl;
        abs_rel += diff.abs() / gy;
        sq_rel += diff * diff / gy;
        log10 += (gy.log10() - gx.log10()).abs();
        let ratio = (gx / gy).max(gy / gx);
        for (count, &t) in inliers.iter_mut().zip(&thresholds) {
            if ratio < t {
                *count += 1;
            }
        }
    }
    let n = T::from_count(pred.len());
    Ok(MetricReport {
        rmse: (sq / n).sqrt(),
        rmse_log: (sq_log / n).sqrt(),
        a_rel: abs_rel / n,
        s_rel: sq_rel / n,
        log10_err: log10 / n,
        delta1: T::from_count(inliers[0]) / n,
        delta2: T::from_count(inliers[1]) / n,
        delta3: T::from_count(inliers[2]) / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use proptest::prelude::*;

    fn random_depth(seed: u64, lo: f64, hi: f64) -> DepthMap<f64> {
        DepthMap::new(6, 5, SeededRng::new(seed).vec(30, lo, hi)).unwrap()
    }

    #[test]
    fn identical_maps() {
        let d = random_depth(1, 0.5, 10.0);
        let r = depth_metrics(&d, &d, 1e-8).unwrap();
        for (name, v) in r.entries() {
            let want = if name.starts_with("delta") { 1.0 } else { 0.0 };
            assert_eq!(v, want, "{name}");
        }
    }

    #[test]
    fn doubled_constant_prediction() {
        let reference = DepthMap::filled(4, 4, 1.0).unwrap();
        let pred = DepthMap::filled(4, 4, 2.0).unwrap();
        let r = depth_metrics(&pred, &reference, 1e-8).unwrap();
        assert_eq!(r.a_rel, 1.0);
        assert_eq!(r.s_rel, 1.0);
        assert!((r.log10_err - 2f64.log10()).abs() < 1e-12);
        assert_eq!((r.delta1, r.delta2, r.delta3), (0.0, 0.0, 0.0));
        assert_eq!(r.rmse, 1.0);
        assert!((r.rmse_log - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn ratio_below_first_threshold() {
        let reference = random_depth(3, 1.0, 5.0);
        let pred = reference.scaled(1.2).unwrap();
        assert_eq!(depth_metrics(&pred, &reference, 1e-8).unwrap().delta1, 1.0);
    }

    #[test]
    fn zero_reference_is_guarded() {
        let reference = DepthMap::new(1, 2, vec![0.0f64, 1.0]).unwrap();
        let pred = DepthMap::new(1, 2, vec![0.0, 1.0]).unwrap();
        let r = depth_metrics(&pred, &reference, 1e-8).unwrap();
        assert!(r.entries().iter().all(|(_, v)| v.is_finite()));
        assert_eq!(r.a_rel, 0.0);
    }

    #[test]
    fn shape_mismatch() {
        let a = DepthMap::filled(2, 2, 1.0).unwrap();
        let b = DepthMap::filled(2, 3, 1.0).unwrap();
        assert!(depth_metrics(&a, &b, 1e-8).is_err());
    }

    proptest! {
        #[test]
        fn deltas_nest_and_scale(seed in any::<u64>(), lambda in 0.1f64..10.0) {
            let pred = random_depth(seed, 0.1, 3.0);
            let reference = random_depth(seed ^ 0x9e37, 0.1, 3.0);
            let r = depth_metrics(&pred, &reference, 1e-8).unwrap();
            prop_assert!(r.delta1 <= r.delta2 && r.delta2 <= r.delta3);
            for (_, v) in r.entries() {
                prop_assert!(v >= 0.0);
            }
            let s = depth_metrics(&pred.scaled(lambda).unwrap(), &reference.scaled(lambda).unwrap(), 1e-8).unwrap();
            prop_assert!((s.a_rel - r.a_rel).abs() < 1e-9);
            prop_assert!((s.log10_err - r.log10_err).abs() < 1e-9);
            prop_assert!((s.rmse - lambda * r.rmse).abs() < 1e-9 * (1.0 + s.rmse));
            prop_assert_eq!((s.delta1, s.delta2, s.delta3), (r.delta1, r.delta2, r.delta3));
        }
    }
}
