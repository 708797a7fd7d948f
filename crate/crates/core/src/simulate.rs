//! Monte Carlo simulation of the full protocol.
//!
//! Each trial runs `N` rounds on its own ChaCha8 stream, keyed by the
//! experiment seed and selected by the trial index, so a trial's outcome
//! never depends on which thread ran it or in what order.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::analytic::{helstrom_error_prob_for, ChannelPoint};
use crate::estimators::{
    ml_phase, ml_transmissivity, run_check, wrapped_arg, CheckDecision, CheckMode, SignedDataset,
};
use crate::numerics::{wrap_angle, QuadratureSpec};
use crate::{ComplexSample, Error, Result};

/// All parameters of one simulated protocol instance.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProtocolConfig {
    pub alpha: f64,
    pub eta: f64,
    pub n_rounds: u64,
    pub phi_true: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    /// Independent protocol repetitions used for the MSE statistics.
    pub n_trials: u64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub check_mode: CheckMode,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            alpha: 1.0,
            eta: 0.9,
            n_rounds: 100,
            phi_true: 0.0,
            epsilon: 0.1,
            delta: 0.05,
            seed: 0,
            n_trials: 1000,
            check_mode: CheckMode::InfiniteN,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        ChannelPoint::new(self.alpha, self.eta, self.n_rounds)?;
        if !(self.phi_true > -PI && self.phi_true <= PI) {
            return Err(Error::domain(format!(
                "phi_true must lie in (-pi, pi], got {}",
                self.phi_true
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::domain(format!(
                "epsilon must lie in (0, 1], got {}",
                self.epsilon
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::domain(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if self.n_trials < 1 {
            return Err(Error::domain("n_trials must be at least 1"));
        }
        Ok(())
    }

    pub fn channel_point(&self) -> Result<ChannelPoint> {
        ChannelPoint::new(self.alpha, self.eta, self.n_rounds)
    }
}

/// Ground truth and observations of one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    /// Alice's sign `s_i ∈ {±1}`.
    pub alice_sign: i8,
    /// Bob's heterodyne outcome `β_i`.
    pub bob_outcome: ComplexSample,
    /// Eve's guess `ŝ_i ∈ {±1}`.
    pub eve_decision: i8,
}

impl RoundRecord {
    /// `D_i = ŝ_i·s_i`: `-1` when Eve guessed wrong.
    pub fn eve_agreement(&self) -> i8 {
        self.alice_sign * self.eve_decision
    }
}

/// Per-round sampling constants derived once from a config.
#[derive(Debug, Clone, Copy)]
pub struct RoundSampler {
    signal: ComplexSample,
    flip_prob: f64,
}

const HALF_SQRT: f64 = core::f64::consts::FRAC_1_SQRT_2;

impl RoundSampler {
    pub fn new(config: &ProtocolConfig) -> Self {
        RoundSampler {
            signal: ComplexSample::from_polar(
                libm::sqrt(config.eta) * config.alpha,
                config.phi_true,
            ),
            flip_prob: helstrom_error_prob_for(config.alpha, config.eta),
        }
    }

    /// Draws, in order: the sign, the real and imaginary noise, Eve's flip.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> RoundRecord {
        let sign: i8 = if rng.random::<bool>() { 1 } else { -1 };
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        let noise = ComplexSample::new(HALF_SQRT * x, HALF_SQRT * y);
        let flipped = rng.random::<f64>() < self.flip_prob;
        RoundRecord {
            alice_sign: sign,
            bob_outcome: self.signal * f64::from(sign) + noise,
            eve_decision: if flipped { -sign } else { sign },
        }
    }
}

/// One round `β_i = √η·s_i·α·e^{iφ} + n_i` with `n_i ~ CN(0, 1)`, plus
/// Eve's Helstrom-limited sign guess.
pub fn sample_round<R: Rng + ?Sized>(config: &ProtocolConfig, rng: &mut R) -> RoundRecord {
    RoundSampler::new(config).sample(rng)
}

/// Random stream of trial `trial_index` under `seed`.
pub fn trial_rng(seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial_index);
    rng
}

/// Estimates produced by one protocol run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub phi_hat_alice: f64,
    pub phi_hat_eve: f64,
    /// `None` when `α = 0`: there is no amplitude to normalize by.
    pub eta_hat: Option<f64>,
    pub check: Option<CheckDecision>,
}

/// Simulates `N` rounds of trial `trial_index` and applies both parties'
/// estimators and the CHECK phase (on Alice's sign-corrected data).
pub fn run_trial(config: &ProtocolConfig, trial_index: u64) -> Result<TrialResult> {
    run_trial_with(config, trial_index, &QuadratureSpec::default())
}

pub fn run_trial_with(
    config: &ProtocolConfig,
    trial_index: u64,
    spec: &QuadratureSpec,
) -> Result<TrialResult> {
    let sampler = RoundSampler::new(config);
    let mut rng = trial_rng(config.seed, trial_index);
    let mut alice = Vec::with_capacity(config.n_rounds as usize);
    let mut eve_sum = ComplexSample::new(0.0, 0.0);
    for _ in 0..config.n_rounds {
        let round = sampler.sample(&mut rng);
        alice.push(round.bob_outcome * f64::from(round.alice_sign));
        eve_sum += round.bob_outcome * f64::from(round.eve_decision);
    }
    let alice = SignedDataset::new(alice, config.alpha)?;
    let phi_hat_eve = wrapped_arg(eve_sum / config.n_rounds as f64);
    let phi_hat_alice = ml_phase(&alice);
    let (eta_hat, check) = if config.alpha > 0.0 {
        let check = run_check(
            &alice,
            config.n_rounds,
            config.epsilon,
            config.delta,
            config.check_mode,
            spec,
        )?;
        (Some(ml_transmissivity(&alice)?), Some(check))
    } else {
        (None, None)
    };
    Ok(TrialResult {
        phi_hat_alice,
        phi_hat_eve,
        eta_hat,
        check,
    })
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Measured {
    pub value: f64,
    pub std_error: f64,
}

/// Aggregate statistics over the trials of one experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EmpiricalSummary {
    pub n_trials: u64,
    pub seed: u64,
    pub mse_alice: Measured,
    pub mse_eve: Measured,
    /// `1 - mse_alice/mse_eve`, error by the delta method (with covariance).
    pub privacy_emp: Measured,
    pub bias_alice: Measured,
    pub pass_rate: f64,
}

fn mean_and_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Reduces per-trial results (in trial-index order) to an [`EmpiricalSummary`].
pub fn summarize(config: &ProtocolConfig, trials: &[TrialResult]) -> Result<EmpiricalSummary> {
    if trials.len() < 2 {
        return Err(Error::domain("an experiment needs at least two trials"));
    }
    let n = trials.len() as f64;
    let err_alice: Vec<f64> = trials
        .iter()
        .map(|t| wrap_angle(t.phi_hat_alice - config.phi_true))
        .collect();
    let sq_alice: Vec<f64> = err_alice.iter().map(|e| e * e).collect();
    let sq_eve: Vec<f64> = trials
        .iter()
        .map(|t| {
            let e = wrap_angle(t.phi_hat_eve - config.phi_true);
            e * e
        })
        .collect();

    let (bias, var_err) = mean_and_var(&err_alice);
    let (mse_a, var_a) = mean_and_var(&sq_alice);
    let (mse_e, var_e) = mean_and_var(&sq_eve);
    if mse_e == 0.0 {
        return Err(Error::Internal("empirical Eve MSE is exactly zero".into()));
    }
    let cov = sq_alice
        .iter()
        .zip(&sq_eve)
        .map(|(a, e)| (a - mse_a) * (e - mse_e))
        .sum::<f64>()
        / (n - 1.0);

    let ratio = mse_a / mse_e;
    let rel_var = if mse_a > 0.0 {
        (var_a / (mse_a * mse_a) + var_e / (mse_e * mse_e) - 2.0 * cov / (mse_a * mse_e)) / n
    } else {
        0.0
    };
    let passes = trials
        .iter()
        .filter(|t| t.check.is_some_and(|c| c.passed))
        .count();

    Ok(EmpiricalSummary {
        n_trials: trials.len() as u64,
        seed: config.seed,
        mse_alice: Measured {
            value: mse_a,
            std_error: libm::sqrt(var_a / n),
        },
        mse_eve: Measured {
            value: mse_e,
            std_error: libm::sqrt(var_e / n),
        },
        privacy_emp: Measured {
            value: 1.0 - ratio,
            std_error: ratio * libm::sqrt(rel_var.max(0.0)),
        },
        bias_alice: Measured {
            value: bias,
            std_error: libm::sqrt(var_err / n),
        },
        pass_rate: passes as f64 / n,
    })
}

/// Runs every trial sequentially and summarizes them.
pub fn run_experiment(config: &ProtocolConfig) -> Result<EmpiricalSummary> {
    config.validate()?;
    if config.n_trials < 2 {
        return Err(Error::domain("an experiment needs at least two trials"));
    }
    let spec = QuadratureSpec::default();
    let trials = (0..config.n_trials)
        .map(|i| run_trial_with(config, i, &spec))
        .collect::<Result<Vec<_>>>()?;
    summarize(config, &trials)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(alpha: f64, eta: f64, n_rounds: u64) -> ProtocolConfig {
        ProtocolConfig {
            alpha,
            eta,
            n_rounds,
            ..ProtocolConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(ProtocolConfig::default().validate().is_ok());
        let bad = [
            ProtocolConfig {
                alpha: -1.0,
                ..Default::default()
            },
            ProtocolConfig {
                eta: 1.1,
                ..Default::default()
            },
            ProtocolConfig {
                n_rounds: 0,
                ..Default::default()
            },
            ProtocolConfig {
                phi_true: -PI,
                ..Default::default()
            },
            ProtocolConfig {
                epsilon: 0.0,
                ..Default::default()
            },
            ProtocolConfig {
                delta: 1.0,
                ..Default::default()
            },
            ProtocolConfig {
                n_trials: 0,
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
        let one = ProtocolConfig {
            n_trials: 1,
            ..Default::default()
        };
        assert!(run_experiment(&one).is_err());
    }

    #[test]
    fn vacuum_outcomes_are_centred_unit_noise() {
        let cfg = config(0.0, 1.0, 1);
        let mut rng = trial_rng(3, 0);
        let sampler = RoundSampler::new(&cfg);
        let m = 1_000_000;
        let (mut sum, mut sum_sq_re) = (ComplexSample::new(0.0, 0.0), 0.0);
        let mut flips = 0u32;
        for _ in 0..m {
            let r = sampler.sample(&mut rng);
            sum += r.bob_outcome;
            sum_sq_re += r.bob_outcome.re * r.bob_outcome.re;
            if r.eve_agreement() < 0 {
                flips += 1;
            }
        }
        let mean = sum / m as f64;
        assert!(mean.norm() < 3e-3);
        // Var(Re β) = 1/2; SE of a sample variance of N(0, 1/2) is 0.5·√(2/m).
        let var = sum_sq_re / m as f64 - mean.re * mean.re;
        assert!((var - 0.5).abs() < 3.0 * 0.5 * libm::sqrt(2.0 / m as f64));
        // α = 0: Eve's guess is a fair coin.
        let frac = flips as f64 / m as f64;
        assert!((frac - 0.5).abs() < 3.0 * 0.5 / libm::sqrt(m as f64));
    }

    #[test]
    fn rounds_are_reproducible_per_stream() {
        let cfg = config(1.0, 0.7, 10);
        let a = sample_round(&cfg, &mut trial_rng(9, 4));
        let b = sample_round(&cfg, &mut trial_rng(9, 4));
        let c = sample_round(&cfg, &mut trial_rng(9, 5));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.eve_agreement().abs(), 1);
    }

    #[test]
    fn strong_lossless_signal_pins_the_phase() {
        let cfg = ProtocolConfig {
            phi_true: 0.4,
            ..config(100.0, 1.0, 100)
        };
        for i in 0..20 {
            let t = run_trial(&cfg, i).unwrap();
            assert!((t.phi_hat_alice - 0.4).abs() < 1e-2);
        }
    }

    #[test]
    fn trials_are_deterministic() {
        let cfg = config(1.0, 0.8, 50);
        assert_eq!(run_trial(&cfg, 17).unwrap(), run_trial(&cfg, 17).unwrap());
    }

    #[test]
    fn zero_amplitude_gives_uniform_phase() {
        let cfg = ProtocolConfig {
            n_trials: 10_000,
            ..config(0.0, 0.8, 20)
        };
        let s = run_experiment(&cfg).unwrap();
        let target = PI * PI / 3.0;
        assert!((s.mse_alice.value - target).abs() < 3.0 * s.mse_alice.std_error);
        assert_eq!(s.pass_rate, 0.0);
    }

    #[test]
    fn summary_statistics_by_hand() {
        let cfg = config(1.0, 0.8, 10);
        let mk = |a: f64, e: f64| TrialResult {
            phi_hat_alice: a,
            phi_hat_eve: e,
            eta_hat: None,
            check: None,
        };
        let trials = [mk(0.1, 0.3), mk(-0.1, -0.5), mk(0.2, 0.1)];
        let s = summarize(&cfg, &trials).unwrap();
        assert!((s.mse_alice.value - 0.06 / 3.0).abs() < 1e-15);
        assert!((s.mse_eve.value - 0.35 / 3.0).abs() < 1e-15);
        assert!((s.bias_alice.value - 0.2 / 3.0).abs() < 1e-15);
        assert!((s.privacy_emp.value - (1.0 - 0.06 / 0.35)).abs() < 1e-14);
        assert!(s.privacy_emp.std_error > 0.0);
    }

    #[test]
    fn squared_errors_use_wrapped_differences() {
        let cfg = ProtocolConfig {
            phi_true: 3.0,
            ..config(1.0, 0.8, 10)
        };
        let mk = |a: f64| TrialResult {
            phi_hat_alice: a,
            phi_hat_eve: a,
            eta_hat: None,
            check: None,
        };
        let s = summarize(&cfg, &[mk(-3.0), mk(-3.0)]).unwrap();
        let d = 2.0 * PI - 6.0;
        assert!((s.mse_alice.value - d * d).abs() < 1e-12);
        assert!(s.mse_alice.value <= PI * PI);
    }
}
