//! Numerical model of private remote phase sensing with a binary-phase
//! (BPSK) coherent-state alphabet over a pure-loss channel.
//!
//! Alice launches `±α` coherent states, Bob imprints an unknown phase `φ` and
//! heterodynes, and an eavesdropper holding the reflected `√(1-η)·α` mode has
//! to guess each sign with a Helstrom-optimal binary test before she can
//! average the public outcomes herself. The crate provides
//!
//! - [`numerics`]: erf/erfcx, binomial weights in log space, and adaptive
//!   Gauss–Kronrod quadrature on the circle;
//! - [`analytic`]: the angular posterior of the phase estimator, exact and
//!   large-`N` mean-square errors for both parties, and the privacy figure
//!   `1 - MSE_A / MSE_E`;
//! - [`estimators`]: maximum-likelihood phase, transmissivity and privacy
//!   estimators plus the CHECK-phase accept/abort rule;
//! - [`simulate`]: a seeded Monte Carlo of the whole protocol whose per-trial
//!   streams do not depend on execution order.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! the parallel runner live in the `prqs-lab` companion crate.

#![no_std]

extern crate alloc;

pub mod analytic;
mod error;
pub mod estimators;
pub mod numerics;
pub mod simulate;

pub use error::{Error, Result};

/// One complex heterodyne outcome, or an average of several.
pub type ComplexSample = num_complex::Complex64;
