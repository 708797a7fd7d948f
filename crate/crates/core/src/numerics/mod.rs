//! Scalar numerical primitives shared by the analytic and simulation layers.

mod binomial;
mod quadrature;
mod special;

pub use binomial::log_binomial_pmf;
pub(crate) use binomial::log_pmf_unchecked;
pub use quadrature::{
    circle_breakpoints, integrate, integrate_circle, integrate_circle_estimate, Estimate,
    QuadratureSpec,
};
pub(crate) use special::erfcx_unchecked;
pub use special::{erf, erfc, erfcx, normal_quantile, ERFCX_MIN_ARG};

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    use core::f64::consts::PI;
    let mut t = libm::remainder(theta, 2.0 * PI);
    if t <= -PI {
        t += 2.0 * PI;
    }
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}
