//! One-dimensional parameter scans written as CSV.

use std::io::Write;

use prqs_core::analytic::{asymptotic_point, infinite_n_point, privacy_exact};
use prqs_core::numerics::QuadratureSpec;
use prqs_core::simulate::ProtocolConfig;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::format::{sig, sig_opt};
use crate::runner::run_experiment;
use crate::LabError;

pub const SWEEP_SCHEMA: &str = "# prqs sweep schema=1";
pub const SWEEP_HEADER: &str =
    "alpha2,eta,n_rounds,method,mse_alice,mse_eve,privacy,mse_alice_se,mse_eve_se";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Alpha2,
    Eta,
    NRounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMethod {
    Exact,
    Asymptotic,
    InfiniteN,
    MonteCarlo,
}

impl SweepMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepMethod::Exact => "exact",
            SweepMethod::Asymptotic => "asymptotic",
            SweepMethod::InfiniteN => "infinite_n",
            SweepMethod::MonteCarlo => "monte_carlo",
        }
    }
}

/// A scan of one parameter with everything else held at `fixed`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub grid: Vec<f64>,
    pub fixed: ProtocolConfig,
    pub methods: Vec<SweepMethod>,
}

/// One CSV row. Cells a method cannot produce are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha2: f64,
    pub eta: f64,
    pub n_rounds: u64,
    pub method: SweepMethod,
    pub mse_alice: Option<f64>,
    pub mse_eve: Option<f64>,
    pub privacy: Option<f64>,
    pub mse_alice_se: Option<f64>,
    pub mse_eve_se: Option<f64>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), LabError> {
        let usage = |m: String| Err(LabError::Usage(m));
        if self.grid.is_empty() {
            return usage("sweep grid is empty".into());
        }
        if let Some(bad) = self.grid.iter().find(|v| !v.is_finite()) {
            return usage(format!("sweep grid value {bad} is not finite"));
        }
        if let Some(w) = self.grid.windows(2).find(|w| w[0] >= w[1]) {
            return usage(format!(
                "sweep grid must be strictly increasing ({} then {})",
                w[0], w[1]
            ));
        }
        if self.methods.is_empty() {
            return usage("no methods requested".into());
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return usage(format!("method {} listed twice", m.as_str()));
            }
        }
        if self.methods.contains(&SweepMethod::MonteCarlo) && self.fixed.n_trials < 2 {
            return usage("monte_carlo needs n_trials >= 2".into());
        }
        self.fixed.validate()?;
        for &v in &self.grid {
            self.config_at(v)?.validate()?;
        }
        Ok(())
    }

    /// The configuration at grid value `v`.
    pub fn config_at(&self, v: f64) -> Result<ProtocolConfig, LabError> {
        let mut config = self.fixed;
        match self.axis {
            Axis::Alpha2 => {
                if v < 0.0 {
                    return Err(LabError::Usage(format!(
                        "alpha2 grid value {v} is negative"
                    )));
                }
                config.alpha = v.sqrt();
            }
            Axis::Eta => config.eta = v,
            Axis::NRounds => {
                if v < 1.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
                    return Err(LabError::Usage(format!(
                        "n_rounds grid value {v} is not a positive integer"
                    )));
                }
                config.n_rounds = v as u64;
            }
        }
        Ok(config)
    }

    /// Evaluates every (grid point, method) pair in parallel; rows come out
    /// grid-major in the order of `methods`.
    pub fn evaluate(&self, spec: &QuadratureSpec) -> Result<Vec<SweepRow>, LabError> {
        self.validate()?;
        let jobs: Vec<(f64, SweepMethod)> = self
            .grid
            .iter()
            .flat_map(|&v| self.methods.iter().map(move |&m| (v, m)))
            .collect();
        jobs.into_par_iter()
            .map(|(v, m)| evaluate_point(&self.config_at(v)?, m, spec))
            .collect()
    }
}

/// Evaluates one method at one configuration. The asymptotic forms are
/// undefined when Alice receives nothing or Eve's sign error reaches ½;
/// such rows carry empty cells.
pub fn evaluate_point(
    config: &ProtocolConfig,
    method: SweepMethod,
    spec: &QuadratureSpec,
) -> Result<SweepRow, LabError> {
    let point = config.channel_point()?;
    let mut row = SweepRow {
        alpha2: config.alpha * config.alpha,
        eta: config.eta,
        n_rounds: config.n_rounds,
        method,
        mse_alice: None,
        mse_eve: None,
        privacy: None,
        mse_alice_se: None,
        mse_eve_se: None,
    };
    let analytic = match method {
        SweepMethod::Exact => Some(privacy_exact(&point, spec)?),
        SweepMethod::Asymptotic => asymptotic_point(&point).ok(),
        SweepMethod::InfiniteN => Some(infinite_n_point(&point)),
        SweepMethod::MonteCarlo => {
            let (_, summary) = run_experiment(config, spec)?;
            row.mse_alice = Some(summary.mse_alice.value);
            row.mse_eve = Some(summary.mse_eve.value);
            row.privacy = Some(summary.privacy_emp.value);
            row.mse_alice_se = Some(summary.mse_alice.std_error);
            row.mse_eve_se = Some(summary.mse_eve.std_error);
            None
        }
    };
    if let Some(a) = analytic {
        row.mse_alice = a.mse_alice;
        row.mse_eve = a.mse_eve;
        row.privacy = Some(a.privacy);
    }
    Ok(row)
}

pub fn write_csv<W: Write>(mut out: W, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_SCHEMA}")?;
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            sig(r.alpha2),
            sig(r.eta),
            r.n_rounds,
            r.method.as_str(),
            sig_opt(r.mse_alice),
            sig_opt(r.mse_eve),
            sig_opt(r.privacy),
            sig_opt(r.mse_alice_se),
            sig_opt(r.mse_eve_se),
        )?;
    }
    out.flush()
}

/// `n` points from `lo` to `hi` inclusive, evenly spaced in `log10`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)
                }
            })
            .collect(),
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// The mean-photon-number scan at `η = 0.9`, `N = 100`.
pub fn fig2_alpha2_spec() -> SweepSpec {
    SweepSpec {
        axis: Axis::Alpha2,
        grid: log_grid(0.01, 100.0, 50),
        fixed: ProtocolConfig {
            eta: 0.9,
            n_rounds: 100,
            ..ProtocolConfig::default()
        },
        methods: vec![SweepMethod::Exact, SweepMethod::Asymptotic],
    }
}

/// The transmissivity scan at `α² = 1`, `N = 100`.
pub fn fig2_eta_spec() -> SweepSpec {
    SweepSpec {
        axis: Axis::Eta,
        grid: linear_grid(0.02, 1.0, 50),
        fixed: ProtocolConfig {
            alpha: 1.0,
            n_rounds: 100,
            ..ProtocolConfig::default()
        },
        methods: vec![SweepMethod::Exact, SweepMethod::Asymptotic],
    }
}
