//! Simulation against the analytic results it should reproduce.

use prqs_core::analytic::{edgeworth_inverse_moment, mse_alice_exact, mse_eve_exact, ChannelPoint};
use prqs_core::numerics::QuadratureSpec;
use prqs_core::simulate::{run_experiment, ProtocolConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn config(alpha2: f64, eta: f64, n_rounds: u64, n_trials: u64, seed: u64) -> ProtocolConfig {
    ProtocolConfig {
        alpha: alpha2.sqrt(),
        eta,
        n_rounds,
        n_trials,
        seed,
        ..ProtocolConfig::default()
    }
}

#[test]
fn empirical_mse_matches_quadrature() {
    let spec = QuadratureSpec::default();
    for (i, (a2, eta, n)) in [(1.0, 0.9, 100), (0.25, 0.6, 10), (4.0, 0.3, 100)]
        .into_iter()
        .enumerate()
    {
        let cfg = config(a2, eta, n, 20_000, 100 + i as u64);
        let summary = run_experiment(&cfg).unwrap();
        let pt = ChannelPoint::new(cfg.alpha, eta, n).unwrap();
        let alice = mse_alice_exact(pt.received_amplitude(), n, &spec).unwrap();
        let eve = mse_eve_exact(&pt, &spec).unwrap();
        let z_a = (summary.mse_alice.value - alice) / summary.mse_alice.std_error;
        let z_e = (summary.mse_eve.value - eve) / summary.mse_eve.std_error;
        assert!(z_a.abs() < 4.0, "Alice at {a2},{eta},{n}: z = {z_a}");
        assert!(z_e.abs() < 4.0, "Eve at {a2},{eta},{n}: z = {z_e}");
    }
}

#[test]
fn phase_estimate_is_unbiased() {
    let mut cfg = config(1.0, 0.8, 20, 20_000, 7);
    for phi in [0.0, 0.3, -2.0, std::f64::consts::PI] {
        cfg.phi_true = phi;
        let s = run_experiment(&cfg).unwrap();
        assert!(
            s.bias_alice.value.abs() < 4.0 * s.bias_alice.std_error,
            "φ={phi}"
        );
    }
}

#[test]
fn pass_rate_tracks_the_threshold() {
    let generous = run_experiment(&ProtocolConfig {
        epsilon: 0.5,
        ..config(0.01, 0.99, 100, 200, 1)
    })
    .unwrap();
    assert_eq!(generous.pass_rate, 1.0);
    let strict = run_experiment(&ProtocolConfig {
        epsilon: 0.05,
        ..config(4.0, 0.2, 1000, 50, 1)
    })
    .unwrap();
    assert_eq!(strict.pass_rate, 0.0);
}

/// Inverse moments of a Gaussian sample mean against the second-order expansion.
#[test]
fn edgeworth_inverse_moments_match_sampling() {
    let (mu, sigma2, n) = (3.0f64, 1.0f64, 50u64);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let draws = 1_000_000;
    let (mut m2, mut m4) = (0.0, 0.0);
    for _ in 0..draws {
        let mean = (0..n)
            .map(|_| {
                let g: f64 = rng.sample(StandardNormal);
                mu + g * sigma2.sqrt()
            })
            .sum::<f64>()
            / n as f64;
        m2 += mean.powi(-2);
        m4 += mean.powi(-4);
    }
    m2 /= draws as f64;
    m4 /= draws as f64;
    let e2 = edgeworth_inverse_moment(mu, sigma2, n, 2).unwrap();
    let e4 = edgeworth_inverse_moment(mu, sigma2, n, 4).unwrap();
    // Next-order terms are ~7e-5 (k = 2) and ~5e-4 (k = 4) relative; the
    // sampling error is ~1e-4 and ~2e-4.
    assert!(((m2 - e2) / e2).abs() < 4e-4, "{m2} vs {e2}");
    assert!(((m4 - e4) / e4).abs() < 1.5e-3, "{m4} vs {e4}");
    let naive = mu.powi(-2);
    assert!((m2 - e2).abs() < (m2 - naive).abs() / 5.0);
}
