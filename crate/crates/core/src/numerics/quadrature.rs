//! Adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Panels are kept in a max-heap keyed by their error estimate and the worst
//! one is bisected until the summed error meets the tolerance. The error of
//! a panel is `|K15 - G7|`, i.e. the error of the embedded Gauss rule, which
//! overstates the Kronrod error by several orders on smooth integrands.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::{FRAC_PI_2, PI};

use crate::{Error, Result};

/// Tolerances for [`integrate`] and [`integrate_circle`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 4000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = QuadratureSpec {
            rel_tol,
            abs_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol >= 0.0) || self.max_subdivisions < 1 {
            return Err(Error::domain(
                "quadrature spec needs rel_tol > 0, abs_tol >= 0, max_subdivisions >= 1",
            ));
        }
        Ok(())
    }

    /// Error budget for an integral whose current value is `value`.
    pub fn tolerance_for(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// An integral together with its absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

// Nodes on [0, 1] (abscissae of the 15-point Kronrod rule, descending).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[breakpoints[0], breakpoints[last]]`, starting from
/// one panel per consecutive pair of breakpoints.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    spec.validate()?;
    if breakpoints.len() < 2 || breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain(
            "integrate: need at least two strictly increasing breakpoints",
        ));
    }
    let mut heap: BinaryHeap<Panel> = breakpoints
        .windows(2)
        .map(|w| gauss_kronrod(&mut f, w[0], w[1]))
        .collect();
    let mut panels = heap.len();
    loop {
        let (value, error) = totals(&heap);
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::domain(
                "integrate: integrand produced a non-finite value",
            ));
        }
        if error <= spec.tolerance_for(value) {
            return Ok(Estimate { value, error });
        }
        if panels >= spec.max_subdivisions {
            return Err(Error::Convergence {
                estimate: value,
                error_bound: error,
                subdivisions: panels,
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Panel cannot be split any further in f64.
            return Err(Error::Convergence {
                estimate: value,
                error_bound: error,
                subdivisions: panels,
            });
        }
        heap.push(gauss_kronrod(&mut f, worst.a, mid));
        heap.push(gauss_kronrod(&mut f, mid, worst.b));
        panels += 1;
    }
}

// Summed in position order so the result does not depend on heap layout.
fn totals(heap: &BinaryHeap<Panel>) -> (f64, f64) {
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    panels
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
}

/// Depth of the geometric grading towards `0` and `±π`; the finest panel
/// is `(π/2)·2^-20 ≈ 1.5e-6` wide, below the `1/√(N r²)` peak width at
/// `N r² = 1e8`.
const GRADING_LEVELS: i32 = 20;

/// Breakpoints on `[-π, π]`: the quarter points `{-π, -π/2, 0, π/2, π}`
/// plus a geometric refinement towards `0` and `±π`, where the angular
/// posterior concentrates for positive and negative amplitudes.
pub fn circle_breakpoints() -> Vec<f64> {
    let mut pts = Vec::with_capacity(4 * GRADING_LEVELS as usize + 5);
    pts.extend_from_slice(&[-PI, -FRAC_PI_2, 0.0, FRAC_PI_2, PI]);
    for level in 1..=GRADING_LEVELS {
        let h = FRAC_PI_2 * libm::exp2(-level as f64);
        pts.extend_from_slice(&[-h, h, -PI + h, PI - h]);
    }
    pts.sort_by(f64::total_cmp);
    pts
}

/// `∫_{-π}^{π} f(θ) dθ` with its error bound.
pub fn integrate_circle_estimate<F: FnMut(f64) -> f64>(
    f: F,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    integrate(f, &circle_breakpoints(), spec)
}

/// `∫_{-π}^{π} f(θ) dθ`.
pub fn integrate_circle<F: FnMut(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<f64> {
    integrate_circle_estimate(f, spec).map(|e| e.value)
}
