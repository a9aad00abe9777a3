//! Depth-estimation evaluation metrics, depth training losses, and the
//! score-regression losses used to fit quality predictors.

mod depth;
mod iqa;
mod loss;
mod ssim;

pub use depth::{depth_metrics, MetricReport, DEFAULT_DEPTH_EPS};
pub use iqa::{iqa_losses, IqaLosses};
pub use loss::{loss_final, loss_final_grad, loss_grad, loss_mae};
pub use ssim::{loss_ssim, ssim, SsimConfig};

use crate::error::{Error, Result};
use crate::feature::DepthMap;
use crate::real::Real;

pub(crate) fn check_shapes<T: Real>(pred: &DepthMap<T>, reference: &DepthMap<T>) -> Result<()> {
    if !pred.same_shape(reference) {
        return Err(Error::Dimension(format!(
            "prediction is {}x{}, reference is {}x{}",
            pred.height(),
            pred.width(),
            reference.height(),
            reference.width()
        )));
    }
    Ok(())
}
