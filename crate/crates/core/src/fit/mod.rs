//! Differentiable fitting: the adjoint of color aggregation over recorded
//! rays, finite-difference verification, an Adam loop and image metrics.

mod backward;
mod gradcheck;
mod metrics;
mod optimize;

pub use backward::{backward_ray, composite_fixed_hits, GradientBuffer, SplatGradient, PARAMS_PER_SPLAT};
pub use gradcheck::{finite_diff_check, GradCheckReport, ParamGroup};
pub use metrics::{mse, psnr, psnr_from_mse, ssim, PSNR_CAP};
pub use optimize::{
    fit, loss_and_gradient, render_views, write_loss_csv, FitConfig, FitResult, LearningRates, LossRecord,
};
