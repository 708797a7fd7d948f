//! Closed-form and quadrature figures of merit.
//!
//! Alice's sign-corrected average is `CN(r, 1/N)` with `r = √η·α`; the
//! argument of that average has the angular density [`angular_pdf`], and
//! her MSE is its second moment on `(-π, π]`. Eve's sign guesses are wrong
//! with the Helstrom probability `p`, so her average is a binomial mixture
//! of the same Gaussians centred on `r_k = r(1 - 2k/N)` and her MSE is the
//! binomial expectation of Alice's MSE at `r_k`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::numerics::{
    erfcx_unchecked, integrate_circle_estimate, log_pmf_unchecked, Estimate, QuadratureSpec,
};
use crate::{Error, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Mixture components lighter than this fraction of the heaviest one are
/// dropped (subject to the tail bound staying inside the tolerance).
const MIXTURE_RELATIVE_CUTOFF: f64 = 1e-18;

/// Physical parameters of one protocol instance.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ChannelPoint {
    alpha: f64,
    eta: f64,
    n_rounds: u64,
}

impl ChannelPoint {
    pub fn new(alpha: f64, eta: f64, n_rounds: u64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::domain(format!(
                "alpha must be finite and >= 0, got {alpha}"
            )));
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::domain(format!("eta must lie in [0, 1], got {eta}")));
        }
        if n_rounds < 1 {
            return Err(Error::domain("n_rounds must be at least 1"));
        }
        Ok(ChannelPoint {
            alpha,
            eta,
            n_rounds,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn n_rounds(&self) -> u64 {
        self.n_rounds
    }

    /// Amplitude reaching Bob, `√η·α`.
    pub fn received_amplitude(&self) -> f64 {
        libm::sqrt(self.eta) * self.alpha
    }

    /// Amplitude diverted to the eavesdropper, `√(1-η)·α`.
    pub fn diverted_amplitude(&self) -> f64 {
        libm::sqrt(1.0 - self.eta) * self.alpha
    }
}

/// Which evaluation route produced an [`AnalyticPoint`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "snake_case")
)]
pub enum Method {
    Exact,
    Asymptotic,
    InfiniteN,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Asymptotic => "asymptotic",
            Method::InfiniteN => "infinite_n",
        }
    }
}

/// Figures of merit at one parameter point.
///
/// In the `N → ∞` limit both MSEs vanish and only their ratio survives, so
/// the MSE fields are `None` for [`Method::InfiniteN`]. A negative privacy
/// can only come out of [`Method::Exact`] and means Eve's computed MSE fell
/// below Alice's, which this channel model does not allow: treat it as a
/// numerical fault, not as physics.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AnalyticPoint {
    pub mse_alice: Option<f64>,
    pub mse_eve: Option<f64>,
    pub privacy: f64,
    pub method: Method,
}

/// Eve's single-round sign error probability, `½(1 - √(1 - e^{-4(1-η)α²}))`.
pub fn helstrom_error_prob(point: &ChannelPoint) -> f64 {
    helstrom_error_prob_for(point.alpha, point.eta)
}

pub(crate) fn helstrom_error_prob_for(alpha: f64, eta: f64) -> f64 {
    // overlap² = |<α'|-α'>|² with α' the diverted amplitude
    let overlap_sq = libm::exp(-4.0 * (1.0 - eta) * alpha * alpha);
    // ½(1 - √(1-u)) rewritten without the cancellation at small u
    0.5 * overlap_sq / (1.0 + libm::sqrt(1.0 - overlap_sq))
}

/// Density of `arg z̄` for `z̄ ~ CN(r, 1/N)`, at angle `theta`.
///
/// `r` may be negative; the density then peaks at `±π` and satisfies
/// `p(θ; -r) = p(π - θ; r)`.
pub fn angular_pdf(theta: f64, r: f64, n_rounds: u64) -> Result<f64> {
    if !theta.is_finite() || !r.is_finite() {
        return Err(Error::domain(format!(
            "angular_pdf: non-finite input (theta = {theta}, r = {r})"
        )));
    }
    if n_rounds < 1 {
        return Err(Error::domain("angular_pdf: n_rounds must be at least 1"));
    }
    Ok(angular_density(theta, r, n_rounds as f64))
}

pub(crate) fn angular_density(theta: f64, r: f64, n: f64) -> f64 {
    let kappa = n * r * r;
    let (sin, cos) = libm::sincos(theta);
    let c = libm::sqrt(n) * r * cos;
    let value = if c >= 0.0 {
        // 1 + erf(c) = 2 - erfc(c) lies in [1, 2]; nothing can overflow.
        libm::exp(-kappa) + SQRT_PI * c * libm::exp(-kappa * sin * sin) * (2.0 - libm::erfc(c))
    } else {
        // e^{-κ sin²θ}(1 + erf(c)) = e^{-κ}·erfcx(-c)
        libm::exp(-kappa) * (1.0 + SQRT_PI * c * erfcx_unchecked(-c))
    };
    value / (2.0 * PI)
}

fn check_amplitude(r: f64, n_rounds: u64) -> Result<()> {
    if !r.is_finite() {
        return Err(Error::domain(format!("amplitude must be finite, got {r}")));
    }
    if n_rounds < 1 {
        return Err(Error::domain("n_rounds must be at least 1"));
    }
    Ok(())
}

/// `∫ θ² p(θ; r, N) dθ` over `(-π, π]` with its quadrature error.
pub fn mse_alice_exact_estimate(r: f64, n_rounds: u64, spec: &QuadratureSpec) -> Result<Estimate> {
    check_amplitude(r, n_rounds)?;
    let n = n_rounds as f64;
    integrate_circle_estimate(|t| t * t * angular_density(t, r, n), spec)
}

/// Alice's mean-square phase error at received amplitude `r` after `N` rounds.
pub fn mse_alice_exact(r: f64, n_rounds: u64, spec: &QuadratureSpec) -> Result<f64> {
    mse_alice_exact_estimate(r, n_rounds, spec).map(|e| e.value)
}

/// Binomial mixture `Σ_k Bin(k | N, p) · MSE_A(r_k, N)`, `r_k = r(1 - 2k/N)`.
///
/// `p` is the per-round sign error probability. Components are evaluated
/// from the mode outwards down to [`MIXTURE_RELATIVE_CUTOFF`]; the mass left
/// out is bounded using the monotonicity of `MSE_A` in `r` (lower tail: the
/// MSE at the window edge; upper tail: `π²`), the window is widened while
/// that bound exceeds the tolerance, and the bound is folded into the
/// returned error.
pub fn mse_eve_mixture(r: f64, p: f64, n_rounds: u64, spec: &QuadratureSpec) -> Result<Estimate> {
    check_amplitude(r, n_rounds)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!(
            "error probability {p} outside [0, 1]"
        )));
    }
    if r == 0.0 {
        // every component is the same uniform density
        return mse_alice_exact_estimate(0.0, n_rounds, spec);
    }
    let n = n_rounds;
    let weights: Vec<f64> = (0..=n).map(|k| log_pmf_unchecked(k, n, p)).collect();
    let mode = weights
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .expect("at least one weight");
    let cutoff = weights[mode] + libm::log(MIXTURE_RELATIVE_CUTOFF);
    let mut lo = mode;
    while lo > 0 && weights[lo - 1] >= cutoff {
        lo -= 1;
    }
    let mut hi = mode;
    while hi < n as usize && weights[hi + 1] >= cutoff {
        hi += 1;
    }

    let nf = n as f64;
    let component = |k: usize| -> Result<Estimate> {
        let rk = r * (1.0 - 2.0 * k as f64 / nf);
        mse_alice_exact_estimate(rk, n, spec)
    };
    let mut terms: Vec<Estimate> = Vec::with_capacity(hi - lo + 1);
    for k in lo..=hi {
        terms.push(component(k)?);
    }

    let tail_mass = |range: core::ops::Range<usize>| -> f64 {
        range.map(|k| libm::exp(weights[k])).sum::<f64>()
    };
    loop {
        let (value, error) = mixture_sum(&weights[lo..=hi], &terms);
        let lower = tail_mass(0..lo) * terms[0].value;
        let upper = tail_mass(hi + 1..n as usize + 1) * PI * PI;
        let bound = lower + upper;
        if bound <= 0.5 * spec.tolerance_for(value) || (lo == 0 && hi == n as usize) {
            return Ok(Estimate {
                value,
                error: error + bound,
            });
        }
        if upper >= lower && hi < n as usize {
            hi += 1;
            terms.push(component(hi)?);
        } else if lo > 0 {
            lo -= 1;
            terms.insert(0, component(lo)?);
        } else {
            hi += 1;
            terms.push(component(hi)?);
        }
    }
}

fn mixture_sum(log_weights: &[f64], terms: &[Estimate]) -> (f64, f64) {
    log_weights
        .iter()
        .zip(terms)
        .fold((0.0, 0.0), |(v, e), (&lw, t)| {
            let w = libm::exp(lw);
            (v + w * t.value, e + w * t.error)
        })
}

/// Eve's mean-square phase error after Helstrom-limited sign correction.
pub fn mse_eve_exact(point: &ChannelPoint, spec: &QuadratureSpec) -> Result<f64> {
    let p = helstrom_error_prob(point);
    mse_eve_mixture(point.received_amplitude(), p, point.n_rounds, spec).map(|e| e.value)
}

/// Privacy `1 - MSE_A / MSE_E` from the two exact MSEs, unclipped.
pub fn privacy_exact(point: &ChannelPoint, spec: &QuadratureSpec) -> Result<AnalyticPoint> {
    let alice = mse_alice_exact(point.received_amplitude(), point.n_rounds, spec)?;
    let eve = mse_eve_exact(point, spec)?;
    if eve == 0.0 {
        return Err(Error::Internal(format!(
            "Eve's MSE evaluated to zero at {point:?}"
        )));
    }
    Ok(AnalyticPoint {
        mse_alice: Some(alice),
        mse_eve: Some(eve),
        privacy: 1.0 - alice / eve,
        method: Method::Exact,
    })
}

/// `1/(2Nr²) + 1/(4N²r⁴)`; the `p = 0` case of [`mse_eve_asymptotic`].
pub fn mse_alice_asymptotic(r: f64, n_rounds: u64) -> Result<f64> {
    mse_eve_asymptotic(r, 0.0, n_rounds)
}

/// Large-`N` expansion of Eve's MSE through `O(N⁻²)`:
/// `1/(2N r² d²) + (6r²p(1-p) + ¼)/(N² r⁴ d⁴)` with `d = 1 - 2p`.
///
/// Only meaningful when [`asymptotic_regime_parameter`] is well above 1;
/// the value is returned regardless and callers decide.
pub fn mse_eve_asymptotic(r: f64, p: f64, n_rounds: u64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!(
            "asymptotic MSE needs r > 0, got {r}"
        )));
    }
    if !(0.0..0.5).contains(&p) {
        return Err(Error::domain(format!(
            "asymptotic MSE needs 0 <= p < 1/2, got {p}"
        )));
    }
    check_amplitude(r, n_rounds)?;
    let n = n_rounds as f64;
    let d2 = (1.0 - 2.0 * p) * (1.0 - 2.0 * p);
    let r2 = r * r;
    let leading = 0.5 / (n * r2 * d2);
    let correction = (6.0 * r2 * p * (1.0 - p) + 0.25) / (n * n * r2 * r2 * d2 * d2);
    Ok(leading + correction)
}

/// `1 - MSE_A^asy / MSE_E^asy`.
pub fn privacy_asymptotic(r: f64, p: f64, n_rounds: u64) -> Result<f64> {
    let eve = mse_eve_asymptotic(r, p, n_rounds)?;
    let alice = mse_alice_asymptotic(r, n_rounds)?;
    Ok(1.0 - alice / eve)
}

/// `N(1-2p)²r²`, the effective signal-to-noise of Eve's average. The
/// large-`N` formulas need it (and `N r²`) well above one.
pub fn asymptotic_regime_parameter(r: f64, p: f64, n_rounds: u64) -> f64 {
    let d = 1.0 - 2.0 * p;
    n_rounds as f64 * d * d * r * r
}

/// Asymptotic MSEs and privacy at a channel point.
pub fn asymptotic_point(point: &ChannelPoint) -> Result<AnalyticPoint> {
    let r = point.received_amplitude();
    let p = helstrom_error_prob(point);
    let alice = mse_alice_asymptotic(r, point.n_rounds)?;
    let eve = mse_eve_asymptotic(r, p, point.n_rounds)?;
    Ok(AnalyticPoint {
        mse_alice: Some(alice),
        mse_eve: Some(eve),
        privacy: 1.0 - alice / eve,
        method: Method::Asymptotic,
    })
}

/// `N → ∞` privacy, `exp(-4α²(1-η))`.
pub fn privacy_infinity(alpha: f64, eta: f64) -> f64 {
    libm::exp(-4.0 * alpha * alpha * (1.0 - eta))
}

pub fn infinite_n_point(point: &ChannelPoint) -> AnalyticPoint {
    AnalyticPoint {
        mse_alice: None,
        mse_eve: None,
        privacy: privacy_infinity(point.alpha, point.eta),
        method: Method::InfiniteN,
    }
}

/// Second-order delta-method approximation of `E[W̄^{-k}]` for the mean
/// of `N` iid draws with mean `mu` and variance `sigma2`:
/// `μ^{-k}(1 + k(k+1)σ²/(2Nμ²))`. Third-cumulant and `σ⁴/N²` terms are not
/// included; they only enter the MSE at `O(N⁻³)`.
pub fn edgeworth_inverse_moment(mu: f64, sigma2: f64, n_rounds: u64, k: u32) -> Result<f64> {
    if mu == 0.0 || !mu.is_finite() {
        return Err(Error::domain(format!(
            "inverse moment needs finite mu != 0, got {mu}"
        )));
    }
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::domain(format!(
            "variance must be finite and >= 0, got {sigma2}"
        )));
    }
    if k != 2 && k != 4 {
        return Err(Error::domain(format!(
            "inverse moment order must be 2 or 4, got {k}"
        )));
    }
    if n_rounds < 1 {
        return Err(Error::domain("n_rounds must be at least 1"));
    }
    let kf = k as f64;
    let base = libm::pow(mu, -kf);
    Ok(base * (1.0 + kf * (kf + 1.0) * sigma2 / (2.0 * n_rounds as f64 * mu * mu)))
}
