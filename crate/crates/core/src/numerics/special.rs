//! Error-function family and the standard normal quantile.

use alloc::format;
use core::f64::consts::PI;

use crate::{Error, Result};

/// Smallest argument for which `erfcx` stays finite: `exp(x²)` overflows
/// just below `x = -26.64`.
pub const ERFCX_MIN_ARG: f64 = -26.6;

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Standard error function.
pub fn erf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("erf: non-finite argument {x}")));
    }
    Ok(libm::erf(x))
}

/// Complementary error function `1 - erf(x)`, accurate in the right tail.
pub fn erfc(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("erfc: non-finite argument {x}")));
    }
    Ok(libm::erfc(x))
}

/// Scaled complementary error function `exp(x²)·erfc(x)`.
pub fn erfcx(x: f64) -> Result<f64> {
    if x.is_nan() || x == f64::INFINITY {
        return Err(Error::domain(format!("erfcx: non-finite argument {x}")));
    }
    if x < ERFCX_MIN_ARG {
        return Err(Error::Range(format!(
            "erfcx: exp(x^2) overflows for x = {x} < {ERFCX_MIN_ARG}"
        )));
    }
    Ok(erfcx_unchecked(x))
}

/// `erfcx` without argument validation; `x` must be finite and `>= -26.6`.
pub(crate) fn erfcx_unchecked(x: f64) -> f64 {
    if x < 0.0 {
        // erfc(x) = 2 - erfc(-x)
        2.0 * exp_square(x) - erfcx_nonnegative(-x)
    } else {
        erfcx_nonnegative(x)
    }
}

fn erfcx_nonnegative(x: f64) -> f64 {
    if x < 5.0 {
        exp_square(x) * libm::erfc(x)
    } else {
        FRAC_1_SQRT_PI / laplace_continued_fraction(x)
    }
}

/// `x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))`, evaluated with modified Lentz.
fn laplace_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for j in 1..500 {
        let a = 0.5 * j as f64;
        d = x + a * d;
        if d == 0.0 {
            d = TINY;
        }
        c = x + a / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    f
}

/// `exp(x²)` with the square split into an exact head and a small tail, so
/// the rounding of `x*x` (relative 1e-16, absolute ~1e-13 at x≈26) does not
/// leak into the exponent.
fn exp_square(x: f64) -> f64 {
    let hi = f64::from_bits(x.to_bits() & 0xffff_ffff_f800_0000);
    let lo = x - hi;
    libm::exp(hi * hi) * libm::exp(lo * (2.0 * hi + lo))
}

/// Standard normal quantile `Φ⁻¹(p)` for `p ∈ (0, 1)`.
///
/// Rational starting point (Acklam) followed by one Halley step on `erfc`,
/// which brings the relative error to the level of the `erfc` evaluation.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!(
            "normal_quantile: probability {p} outside (0, 1)"
        )));
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_671_010_229_528,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let tail = |q: f64| ((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5];
    let tail_den = |q: f64| (((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0;

    let mut x = if p < P_LOW {
        let q = libm::sqrt(-2.0 * libm::log(p));
        tail(q) / tail_den(q)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = libm::sqrt(-2.0 * libm::log1p(-p));
        -tail(q) / tail_den(q)
    };

    // Halley refinement against Φ(x) = erfc(-x/√2)/2.
    let e = 0.5 * libm::erfc(-x / core::f64::consts::SQRT_2) - p;
    let u = e * libm::sqrt(2.0 * PI) * libm::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    // 40-digit mpmath values (tests/oracle/reference_values.py).
    const ERF_1: f64 = 0.842_700_792_949_714_869_34;
    const ERFCX_1: f64 = 0.427_583_576_155_807_004_41;
    const ERFCX_M3: f64 = 16_205.988_853_999_586_625;
    const ERFCX_5: f64 = 0.110_704_637_733_068_626_37;
    const ERFCX_30: f64 = 0.018_795_888_861_416_751_497;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn erf_reference_points() {
        assert_eq!(erf(0.0).unwrap(), 0.0);
        assert!((erf(10.0).unwrap() - 1.0).abs() <= 1e-15);
        assert!((erf(-10.0).unwrap() + 1.0).abs() <= 1e-15);
        assert!((erf(1.0).unwrap() - ERF_1).abs() <= 1e-14);
    }

    #[test]
    fn erf_rejects_non_finite() {
        assert!(matches!(erf(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(erf(f64::INFINITY), Err(Error::Domain(_))));
    }

    #[test]
    fn erfcx_reference_points() {
        assert_eq!(erfcx(0.0).unwrap(), 1.0);
        assert!(rel(erfcx(1.0).unwrap(), ERFCX_1) <= 1e-13);
        assert!(rel(erfcx(-3.0).unwrap(), ERFCX_M3) <= 1e-13);
        assert!(rel(erfcx(5.0).unwrap(), ERFCX_5) <= 1e-13);
        assert!(rel(erfcx(30.0).unwrap(), ERFCX_30) <= 1e-13);
        let asym = 1.0 / (100.0 * libm::sqrt(PI));
        assert!(rel(erfcx(100.0).unwrap(), asym) <= 1e-4);
    }

    #[test]
    fn erfcx_is_continuous_across_branch_switch() {
        let below = erfcx(5.0 - 1e-12).unwrap();
        let above = erfcx(5.0).unwrap();
        assert!(rel(below, above) < 1e-11);
    }

    #[test]
    fn erfcx_range_limits() {
        assert!(erfcx(-26.6).unwrap().is_finite());
        assert!(matches!(erfcx(-26.7), Err(Error::Range(_))));
        assert!(matches!(erfcx(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn erfcx_matches_erfc_on_moderate_range() {
        let mut x = -5.0;
        while x <= 5.0 {
            let scaled = erfcx(x).unwrap() * libm::exp(-x * x);
            assert!(rel(scaled, libm::erfc(x)) <= 1e-12, "x = {x}");
            x += 0.0625;
        }
    }

    #[test]
    fn normal_quantile_known_values() {
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        assert!((normal_quantile(0.95).unwrap() - 1.644_853_626_951_472_2).abs() < 1e-13);
        assert!((normal_quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-13);
        assert!((normal_quantile(1e-10).unwrap() + 6.361_340_902_404_056).abs() < 1e-10);
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
    }

    #[test]
    fn erf_is_odd() {
        for i in 0..200 {
            let x = i as f64 * 0.03;
            assert_eq!(erf(-x).unwrap(), -erf(x).unwrap());
        }
    }
}
