//! Binomial probabilities in log space.
//!
//! Uses Loader's saddle-point decomposition (Stirling remainder plus the
//! deviance term `bd0`), which keeps full relative precision for `n` in the
//! tens of thousands where differences of `lgamma` values lose ~5 digits.

use alloc::format;
use core::f64::consts::PI;

use crate::{Error, Result};

/// `ln[C(n,k) p^k (1-p)^(n-k)]`.
///
/// The boundaries `p = 0` and `p = 1` are exact: the log-weight is `0` on
/// the single reachable outcome and `-inf` elsewhere.
pub fn log_binomial_pmf(k: u64, n: u64, p: f64) -> Result<f64> {
    if k > n {
        return Err(Error::domain(format!(
            "log_binomial_pmf: k = {k} exceeds n = {n}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!(
            "log_binomial_pmf: probability {p} outside [0, 1]"
        )));
    }
    Ok(log_pmf_unchecked(k, n, p))
}

pub(crate) fn log_pmf_unchecked(k: u64, n: u64, p: f64) -> f64 {
    let q = 1.0 - p;
    if p == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    let nf = n as f64;
    if k == 0 {
        return nf * libm::log1p(-p);
    }
    if k == n {
        return nf * libm::log(p);
    }
    let kf = k as f64;
    let rest = nf - kf;
    let lc = stirling_remainder(n)
        - stirling_remainder(k)
        - stirling_remainder(n - k)
        - deviance(kf, nf * p)
        - deviance(rest, nf * q);
    let lf = libm::log(2.0 * PI) + libm::log(kf) + libm::log1p(-kf / nf);
    lc - 0.5 * lf
}

// Stirling remainders for n = 0..=15 (40-digit mpmath); below 16 the
// asymptotic series is not accurate enough. Index 0 is never used.
const SMALL_STIRLING_REMAINDER: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_258_22,
    0.041_340_695_955_409_294_094,
    0.027_677_925_684_998_339_149,
    0.020_790_672_103_765_093_112,
    0.016_644_691_189_821_192_163,
    0.013_876_128_823_070_747_999,
    0.011_896_709_945_891_770_095,
    0.010_411_265_261_972_096_497,
    0.009_255_462_182_712_732_917_7,
    0.008_330_563_433_362_871_256_5,
    0.007_573_675_487_951_840_795,
    0.006_942_840_107_209_529_865_7,
    0.006_408_994_188_004_207_068_4,
    0.005_951_370_112_758_847_735_6,
    0.005_554_733_551_962_801_371,
];

/// `ln n! - [(n + 1/2) ln n - n + ln √(2π)]`.
fn stirling_remainder(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15 {
        return SMALL_STIRLING_REMAINDER[n as usize];
    }
    let nf = n as f64;
    let nn = nf * nf;
    if n > 500 {
        (S0 - S1 / nn) / nf
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / nf
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / nf
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / nf
    }
}

/// `x ln(x/np) + np - x`, summed as a series when `x ≈ np`.
fn deviance(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        let mut j = 1.0;
        loop {
            ej *= v;
            let s1 = s + ej / (2.0 * j + 1.0);
            if s1 == s {
                return s1;
            }
            s = s1;
            j += 1.0;
        }
    }
    x * libm::log(x / np) + np - x
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exact ln C(n,k) by big-integer-free rational accumulation, valid for
    /// the small `n` used here (products stay below 2^53).
    fn exact_choose(n: u64, k: u64) -> f64 {
        let mut c: u64 = 1;
        for i in 0..k {
            c = c * (n - i) / (i + 1);
        }
        c as f64
    }

    #[test]
    fn boundaries() {
        assert_eq!(log_binomial_pmf(0, 17, 0.0).unwrap(), 0.0);
        assert_eq!(log_binomial_pmf(3, 17, 0.0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(log_binomial_pmf(17, 17, 1.0).unwrap(), 0.0);
        assert_eq!(log_binomial_pmf(16, 17, 1.0).unwrap(), f64::NEG_INFINITY);
        assert!(matches!(
            log_binomial_pmf(11, 10, 0.5),
            Err(Error::Domain(_))
        ));
        assert!(log_binomial_pmf(1, 10, 1.5).is_err());
    }

    #[test]
    fn half_coin_ten_flips() {
        // C(10,5) / 2^10 = 252 / 1024
        let expect = libm::log(252.0 / 1024.0);
        let got = log_binomial_pmf(5, 10, 0.5).unwrap();
        assert!((got - expect).abs() < 1e-15, "{got} vs {expect}");
    }

    #[test]
    fn matches_exact_small_n() {
        for n in 1..=40u64 {
            for k in 0..=n {
                for &p in &[0.01, 0.3, 0.5, 0.77] {
                    let exact = libm::log(exact_choose(n, k))
                        + k as f64 * libm::log(p)
                        + (n - k) as f64 * libm::log1p(-p);
                    let got = log_binomial_pmf(k, n, p).unwrap();
                    assert!(
                        (got - exact).abs() <= 1e-13 * exact.abs().max(1.0),
                        "n={n} k={k} p={p}: {got} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn sums_to_one_up_to_ten_thousand() {
        for &n in &[1u64, 7, 100, 1000, 10_000] {
            for &p in &[0.01, 0.3, 0.5] {
                let total: f64 = (0..=n)
                    .map(|k| libm::exp(log_binomial_pmf(k, n, p).unwrap()))
                    .sum();
                assert!((total - 1.0).abs() <= 1e-12, "n={n} p={p}: {total}");
            }
        }
    }

    proptest! {
        #[test]
        fn symmetric_under_complement(n in 1u64..5000, frac in 0.0f64..1.0, p in 0.001f64..0.999) {
            let k = ((n as f64) * frac) as u64;
            let a = log_binomial_pmf(k, n, p).unwrap();
            let b = log_binomial_pmf(n - k, n, 1.0 - p).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
        }
    }
}
