use crate::error::{Error, Result};
use crate::real::Real;

/// Quality-score regression losses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IqaLosses<T = f64> {
    /// Mean squared error.
    pub mse: T,
    /// One minus the Pearson correlation.
    pub plcc: T,
    /// `mse + plcc`.
    pub total: T,
}

pub fn iqa_losses<T: Real>(pred: &[T], labels: &[T]) -> Result<IqaLosses<T>> {
    if pred.len() != labels.len() || pred.len() < 2 {
        return Err(Error::Dimension(format!(
            "need two equal-length score vectors of length >= 2, got {} and {}",
            pred.len(),
            labels.len()
        )));
    }
    let n = T::from_count(pred.len());
    let mse = pred.iter().zip(labels).map(|(&p, &l)| (p - l) * (p - l)).sum::<T>() / n;
    let mean_p = pred.iter().copied().sum::<T>() / n;
    let mean_l = labels.iter().copied().sum::<T>() / n;
    let (mut cov, mut var_p, mut var_l) = (T::zero(), T::zero(), T::zero());
    for (&p, &l) in pred.iter().zip(labels) {
        let (dp, dl) = (p - mean_p, l - mean_l);
        cov += dp * dl;
        var_p += dp * dp;
        var_l += dl * dl;
    }
    if var_p == T::zero() || var_l == T::zero() {
        return Err(Error::Undefined("correlation of a constant score vector".into()));
    }
    let r = (cov / (var_p.sqrt() * var_l.sqrt())).max(-T::one()).min(T::one());
    let plcc = T::one() - r;
    Ok(IqaLosses { mse, plcc, total: mse + plcc })
}
