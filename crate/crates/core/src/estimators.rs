//! Maximum-likelihood estimators on sign-corrected heterodyne data and the
//! CHECK-phase accept/abort rule.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::analytic::{privacy_exact, privacy_infinity, ChannelPoint};
use crate::numerics::{normal_quantile, QuadratureSpec};
use crate::{ComplexSample, Error, Result};

/// Sign-corrected outcomes `β_i·s_i` (or `β_i·ŝ_i`) and the launch amplitude
/// they are normalized against.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedDataset {
    samples: Vec<ComplexSample>,
    alpha: f64,
}

impl SignedDataset {
    pub fn new(samples: Vec<ComplexSample>, alpha: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("signed dataset must not be empty"));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::domain(format!(
                "alpha must be finite and >= 0, got {alpha}"
            )));
        }
        Ok(SignedDataset { samples, alpha })
    }

    pub fn samples(&self) -> &[ComplexSample] {
        &self.samples
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> ComplexSample {
        let sum = self
            .samples
            .iter()
            .fold(ComplexSample::new(0.0, 0.0), |acc, z| acc + z);
        sum / self.samples.len() as f64
    }

    fn require_alpha(&self) -> Result<f64> {
        if self.alpha > 0.0 {
            Ok(self.alpha)
        } else {
            Err(Error::domain("transmissivity estimation needs alpha > 0"))
        }
    }
}

/// Argument of a complex number in `(-π, π]`, with `arg 0 = 0`.
pub fn wrapped_arg(z: ComplexSample) -> f64 {
    if z.re == 0.0 && z.im == 0.0 {
        return 0.0;
    }
    let t = libm::atan2(z.im, z.re);
    if t == -PI {
        PI
    } else {
        t
    }
}

/// Phase estimate `arg((1/N) Σ z_i)`.
pub fn ml_phase(data: &SignedDataset) -> f64 {
    wrapped_arg(data.mean())
}

/// `|(1/(Nα)) Σ z_i|²`. Noise can push this above one; the raw value is
/// returned.
pub fn ml_transmissivity(data: &SignedDataset) -> Result<f64> {
    let alpha = data.require_alpha()?;
    Ok(data.mean().norm_sqr() / (alpha * alpha))
}

/// Plug-in privacy `P(α, clip(η̂), N)`.
pub fn ml_privacy(data: &SignedDataset, n_rounds: u64, spec: &QuadratureSpec) -> Result<f64> {
    let eta = ml_transmissivity(data)?.clamp(0.0, 1.0);
    let point = ChannelPoint::new(data.alpha, eta, n_rounds)?;
    Ok(privacy_exact(&point, spec)?.privacy)
}

/// Sign-free moment estimate `(mean |β_i|² - 1)/α²` from raw, uncorrected
/// outcomes. Experimental: it needs no knowledge of Alice's signs but has a
/// much larger variance than [`ml_transmissivity`].
pub fn moment_transmissivity(outcomes: &[ComplexSample], alpha: f64) -> Result<f64> {
    if outcomes.is_empty() {
        return Err(Error::domain("moment estimator needs at least one outcome"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain("transmissivity estimation needs alpha > 0"));
    }
    let power = outcomes.iter().map(|z| z.norm_sqr()).sum::<f64>() / outcomes.len() as f64;
    Ok((power - 1.0) / (alpha * alpha))
}

/// One-sided `(1-δ)` lower confidence bound on η.
///
/// Treats `|z̄|` as `Normal(√η·α, 1/(2N))`, subtracts `z_{1-δ}/√(2N)`
/// (a negative quantile is floored at zero, so the bound never exceeds the
/// point estimate) and squares, clipped to `[0, 1]`. The approximation
/// wants `N·η̂·α²` of order ten or more; see [`gaussian_regime_holds`].
pub fn eta_lower_bound(data: &SignedDataset, delta: f64) -> Result<f64> {
    let alpha = data.require_alpha()?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let z = normal_quantile(1.0 - delta)?.max(0.0);
    let n = data.len() as f64;
    let amplitude = (data.mean().norm() - z / libm::sqrt(2.0 * n)).max(0.0);
    let eta = (amplitude / alpha) * (amplitude / alpha);
    // keeps the bound below the point estimate despite rounding differences
    let eta_hat = ml_transmissivity(data)?.clamp(0.0, 1.0);
    Ok(eta.min(eta_hat))
}

/// Whether `N·η̂·α² ≥ 10`, where the Gaussian amplitude model behind
/// [`eta_lower_bound`] is trustworthy.
pub fn gaussian_regime_holds(data: &SignedDataset) -> bool {
    data.len() as f64 * data.mean().norm_sqr() >= 10.0
}

/// How the CHECK phase turns a transmissivity bound into a privacy bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "snake_case")
)]
pub enum CheckMode {
    /// Exact finite-`N` privacy at the bound.
    FiniteN,
    /// `exp(-4α²(1-η))`, the large-`N` limit.
    #[default]
    InfiniteN,
}

impl CheckMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckMode::FiniteN => "finite_n",
            CheckMode::InfiniteN => "infinite_n",
        }
    }
}

/// Outcome of the CHECK phase.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CheckDecision {
    /// Raw ML transmissivity, possibly above one.
    pub eta_hat: f64,
    pub eta_lower: f64,
    pub privacy_bound: f64,
    pub passed: bool,
    pub epsilon: f64,
    pub delta: f64,
    pub mode: CheckMode,
    /// `false` when the sample is too weak for the Gaussian bound.
    pub gaussian_regime: bool,
}

impl CheckDecision {
    pub fn eta_hat_clipped(&self) -> f64 {
        self.eta_hat.clamp(0.0, 1.0)
    }
}

/// Decides whether the data certify privacy `≥ 1 - ε` at confidence `1 - δ`.
///
/// `ε = 1` (threshold zero) is accepted and always passes.
pub fn run_check(
    data: &SignedDataset,
    n_rounds: u64,
    epsilon: f64,
    delta: f64,
    mode: CheckMode,
    spec: &QuadratureSpec,
) -> Result<CheckDecision> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::domain(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    let eta_hat = ml_transmissivity(data)?;
    let eta_lower = eta_lower_bound(data, delta)?;
    let privacy_bound = match mode {
        CheckMode::InfiniteN => privacy_infinity(data.alpha, eta_lower),
        CheckMode::FiniteN => {
            let point = ChannelPoint::new(data.alpha, eta_lower, n_rounds)?;
            privacy_exact(&point, spec)?.privacy
        }
    };
    Ok(CheckDecision {
        eta_hat,
        eta_lower,
        privacy_bound,
        passed: privacy_bound >= 1.0 - epsilon,
        epsilon,
        delta,
        mode,
        gaussian_regime: gaussian_regime_holds(data),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;

    fn c(re: f64, im: f64) -> ComplexSample {
        ComplexSample::new(re, im)
    }

    fn ds(samples: Vec<ComplexSample>, alpha: f64) -> SignedDataset {
        SignedDataset::new(samples, alpha).unwrap()
    }

    /// Sign-corrected data `√η·α + CN(0,1)` drawn straight from the model.
    fn synthetic(alpha: f64, eta: f64, n: usize, seed: u64) -> SignedDataset {
        let mut rng = StdRng::seed_from_u64(seed);
        let amp = libm::sqrt(eta) * alpha;
        let h = libm::sqrt(0.5);
        let samples = (0..n)
            .map(|_| {
                let x: f64 = rng.sample(StandardNormal);
                let y: f64 = rng.sample(StandardNormal);
                c(amp + h * x, h * y)
            })
            .collect();
        ds(samples, alpha)
    }

    #[test]
    fn dataset_validation() {
        assert!(SignedDataset::new(vec![], 1.0).is_err());
        assert!(SignedDataset::new(vec![c(1.0, 0.0)], -1.0).is_err());
        let zero_alpha = ds(vec![c(1.0, 0.0)], 0.0);
        assert!(ml_transmissivity(&zero_alpha).is_err());
        assert!(eta_lower_bound(&zero_alpha, 0.05).is_err());
    }

    #[test]
    fn phase_examples() {
        assert_eq!(ml_phase(&ds(vec![c(1.0, 0.0)], 1.0)), 0.0);
        assert_eq!(ml_phase(&ds(vec![c(0.0, 1.0)], 1.0)), PI / 2.0);
        assert_eq!(ml_phase(&ds(vec![c(1.0, 1.0), c(1.0, -1.0)], 1.0)), 0.0);
        assert_eq!(ml_phase(&ds(vec![c(0.0, 0.0)], 1.0)), 0.0);
        assert_eq!(ml_phase(&ds(vec![c(-1.0, -0.0)], 1.0)), PI);
    }

    #[test]
    fn transmissivity_examples() {
        let a = 1.7;
        assert_eq!(ml_transmissivity(&ds(vec![c(a, 0.0)], a)).unwrap(), 1.0);
        assert_eq!(
            ml_transmissivity(&ds(vec![c(a, 0.0), c(-a, 0.0)], a)).unwrap(),
            0.0
        );
        let half = ml_transmissivity(&ds(vec![c(0.5 * a, 0.5 * a)], a)).unwrap();
        assert!((half - 0.5).abs() < 1e-15);
        assert!(ml_transmissivity(&ds(vec![c(2.0 * a, 0.0)], a)).unwrap() > 1.0);
    }

    #[test]
    fn privacy_plug_in_clips_and_delegates() {
        let s = QuadratureSpec::default();
        let a = 0.9;
        let hot = ds(vec![c(1.3f64.sqrt() * a, 0.0)], a);
        let at_one = privacy_exact(&ChannelPoint::new(a, 1.0, 20).unwrap(), &s)
            .unwrap()
            .privacy;
        assert_eq!(ml_privacy(&hot, 20, &s).unwrap(), at_one);

        let dark = ds(vec![c(0.0, 0.0)], a);
        let at_zero = privacy_exact(&ChannelPoint::new(a, 0.0, 20).unwrap(), &s)
            .unwrap()
            .privacy;
        assert_eq!(ml_privacy(&dark, 20, &s).unwrap(), at_zero);
        assert_eq!(at_zero, 0.0);
    }

    #[test]
    fn plug_in_privacy_tracks_truth() {
        // Spread of the plug-in estimate from repeated draws around the
        // true value: mean within 3 standard errors.
        let s = QuadratureSpec::default();
        let truth = privacy_exact(&ChannelPoint::new(1.0, 0.8, 500).unwrap(), &s)
            .unwrap()
            .privacy;
        let reps = 40;
        let vals: Vec<f64> = (0..reps)
            .map(|i| ml_privacy(&synthetic(1.0, 0.8, 500, 1000 + i), 500, &s).unwrap())
            .collect();
        let mean = vals.iter().sum::<f64>() / reps as f64;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (reps - 1) as f64;
        let se = libm::sqrt(var / reps as f64);
        assert!(
            (mean - truth).abs() < 3.0 * se + 1e-3,
            "{mean} vs {truth} (se {se})"
        );
    }

    #[test]
    fn lower_bound_edges() {
        let a = 1.0;
        let data = synthetic(a, 0.8, 200, 7);
        let eta_hat = ml_transmissivity(&data).unwrap().clamp(0.0, 1.0);
        let loose = eta_lower_bound(&data, 1.0 - 1e-12).unwrap();
        assert_eq!(loose, eta_hat);
        let tight = eta_lower_bound(&data, 0.05).unwrap();
        assert!(tight < eta_hat);
        let dark = ds(vec![c(0.0, 0.0); 10], a);
        assert_eq!(eta_lower_bound(&dark, 0.05).unwrap(), 0.0);
        assert!(eta_lower_bound(&data, 0.0).is_err());
        assert!(eta_lower_bound(&data, 1.0).is_err());
    }

    #[test]
    fn check_lossless_weak_probe_passes() {
        let data = synthetic(0.1, 1.0, 10_000, 11);
        let s = QuadratureSpec::default();
        let d = run_check(&data, 10_000, 0.2, 0.05, CheckMode::InfiniteN, &s).unwrap();
        assert!(d.passed, "{d:?}");
        let d = run_check(&data, 10_000, 0.2, 0.05, CheckMode::FiniteN, &s).unwrap();
        assert!(d.passed, "{d:?}");
        assert!(d.eta_lower <= d.eta_hat_clipped());
    }

    #[test]
    fn check_heavy_loss_aborts() {
        let data = synthetic(2.0, 0.1, 10_000, 12);
        let d = run_check(
            &data,
            10_000,
            0.05,
            0.05,
            CheckMode::InfiniteN,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!(!d.passed);
        assert!(d.privacy_bound < 1e-5);
    }

    #[test]
    fn check_threshold_zero_always_passes() {
        let s = QuadratureSpec::default();
        let data = synthetic(2.0, 0.05, 100, 13);
        for mode in [CheckMode::InfiniteN, CheckMode::FiniteN] {
            assert!(run_check(&data, 100, 1.0, 0.05, mode, &s).unwrap().passed);
        }
        assert!(run_check(&data, 100, 0.0, 0.05, CheckMode::InfiniteN, &s).is_err());
    }

    #[test]
    fn moment_estimator_is_unbiased_in_the_mean() {
        let mut rng = StdRng::seed_from_u64(5);
        let (alpha, eta) = (1.5, 0.6);
        let amp = libm::sqrt(eta) * alpha;
        let h = libm::sqrt(0.5);
        let raw: Vec<ComplexSample> = (0..200_000)
            .map(|_| {
                let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let x: f64 = rng.sample(StandardNormal);
                let y: f64 = rng.sample(StandardNormal);
                c(s * amp + h * x, h * y)
            })
            .collect();
        let est = moment_transmissivity(&raw, alpha).unwrap();
        assert!((est - eta).abs() < 0.02, "{est}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn phase_is_rotation_equivariant(
            pts in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..20),
            psi in -3.0f64..3.0,
        ) {
            let base: Vec<ComplexSample> = pts.iter().map(|&(x, y)| c(x, y)).collect();
            let data = ds(base.clone(), 1.0);
            prop_assume!(data.mean().norm() > 1e-6);
            let rot = ComplexSample::from_polar(1.0, psi);
            let rotated = ds(base.iter().map(|z| z * rot).collect(), 1.0);
            let shift = crate::numerics::wrap_angle(ml_phase(&rotated) - ml_phase(&data) - psi);
            prop_assert!(shift.abs() < 1e-9);
            let t0 = ml_transmissivity(&data).unwrap();
            let t1 = ml_transmissivity(&rotated).unwrap();
            prop_assert!((t0 - t1).abs() <= 1e-12 * t0.max(1e-12));
        }

        #[test]
        fn lower_bound_never_exceeds_estimate(
            pts in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..50),
            alpha in 0.1f64..4.0,
            delta in 0.001f64..0.999,
        ) {
            let data = ds(pts.iter().map(|&(x, y)| c(x, y)).collect(), alpha);
            let lower = eta_lower_bound(&data, delta).unwrap();
            let hat = ml_transmissivity(&data).unwrap().clamp(0.0, 1.0);
            prop_assert!((0.0..=1.0).contains(&lower));
            prop_assert!(lower <= hat);
        }
    }
}
