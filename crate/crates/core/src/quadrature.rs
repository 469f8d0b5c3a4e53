//! Globally adaptive Gauss–Kronrod (10/21-point) quadrature on finite and
//! semi-infinite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// Kronrod abscissae; odd entries (1, 3, ..., 9) are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_548_311_270_660,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Accuracy request for the adaptive integrators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub relative_tolerance: f64,
    pub absolute_tolerance: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            relative_tolerance: 1e-8,
            absolute_tolerance: 1e-10,
            max_subdivisions: 500,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.relative_tolerance > 0.0 && self.absolute_tolerance > 0.0) {
            return Err(Error::param("tolerance", "quadrature tolerances must be positive"));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::param("max_subdivisions", "need at least one subdivision"));
        }
        Ok(())
    }
}

/// Integral estimate with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_bound: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut kronrod = WGK[10] * f_center;
    let mut gauss = 0.0;
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let (f1, f2) = (f(center - x), f(center + x));
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment { a, b, value, error }
}

/// Integrates `f` over the finite interval `[a, b]`.
///
/// Subdivides the interval with the largest error estimate until the total
/// error is below `max(absolute_tolerance, relative_tolerance·|value|)`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral> {
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::param("bounds", format!("finite bounds required, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error_bound: 0.0,
            subdivisions: 0,
        });
    }
    let first = gauss_kronrod(&mut f, a, b);
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::from([first]);
    let mut subdivisions = 1;
    let target = |v: f64| spec.absolute_tolerance.max(spec.relative_tolerance * v.abs());
    while error > target(value) {
        if !value.is_finite() || !error.is_finite() {
            break;
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::Numerical {
                estimate: value,
                error_bound: error,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap holds every live segment");
        let mid = 0.5 * (worst.a + worst.b);
        let left = gauss_kronrod(&mut f, worst.a, mid);
        let right = gauss_kronrod(&mut f, mid, worst.b);
        value += left.value + right.value - worst.value;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
        // Re-sum to avoid drift from repeated incremental updates.
        error = heap.iter().map(|s| s.error).sum();
    }
    value = heap.iter().map(|s| s.value).sum();
    if !value.is_finite() {
        return Err(Error::Numerical {
            estimate: value,
            error_bound: f64::INFINITY,
            subdivisions,
        });
    }
    Ok(Integral {
        value,
        error_bound: error,
        subdivisions,
    })
}

/// Integrates `f` over `[lower, ∞)` by mapping `x = lower + (1 − t)/t` onto
/// `t ∈ (0, 1]`.
pub fn integrate_semi_infinite<F: FnMut(f64) -> f64>(
    mut f: F,
    lower: f64,
    spec: &QuadratureSpec,
) -> Result<Integral> {
    if !lower.is_finite() {
        return Err(Error::param("lower", format!("must be finite, got {lower}")));
    }
    integrate(
        |t| {
            let x = lower + (1.0 - t) / t;
            let v = f(x);
            if v == 0.0 {
                0.0
            } else {
                v / (t * t)
            }
        },
        0.0,
        1.0,
        spec,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tight() -> QuadratureSpec {
        QuadratureSpec {
            relative_tolerance: 1e-10,
            absolute_tolerance: 1e-13,
            max_subdivisions: 1000,
        }
    }

    #[test]
    fn weights_are_normalized() {
        let k: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn exact_for_polynomials() {
        // Single panel: Kronrod rule is exact up to degree 31, Gauss up to 19.
        for deg in [0, 3, 10, 19, 31] {
            let s = gauss_kronrod(&mut |x: f64| x.powi(deg), 0.0, 1.0);
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!((s.value - exact).abs() < 1e-14, "degree {deg}: {}", s.value);
        }
    }

    #[test]
    fn finite_interval() {
        let r = integrate(|x: f64| x.sin(), 0.0, PI, &tight()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        assert!(r.error_bound >= (r.value - 2.0).abs());
    }

    #[test]
    fn exponential_tail() {
        let r = integrate_semi_infinite(|x: f64| (-x).exp(), 0.0, &tight()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10, "{}", r.value);
        assert!(r.error_bound >= (r.value - 1.0).abs());
    }

    #[test]
    fn rayleigh_density_normalizes() {
        let lambda = 1e-2;
        let r = integrate_semi_infinite(
            |x: f64| 2.0 * PI * lambda * x * (-PI * lambda * x * x).exp(),
            0.0,
            &tight(),
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-10, "{}", r.value);
        assert!(r.error_bound >= (r.value - 1.0).abs());
    }

    #[test]
    fn gaussian_tail_from_one() {
        // ∫_1^∞ x·e^{−x²} dx = e^{−1}/2.
        let exact = (-1.0f64).exp() / 2.0;
        let r = integrate_semi_infinite(|x: f64| x * (-x * x).exp(), 1.0, &tight()).unwrap();
        assert!((r.value - exact).abs() < 1e-11, "{}", r.value);
        assert!(r.error_bound >= (r.value - exact).abs());
    }

    #[test]
    fn reports_non_convergence_with_best_estimate() {
        let spec = QuadratureSpec {
            relative_tolerance: 1e-14,
            absolute_tolerance: 1e-16,
            max_subdivisions: 3,
        };
        match integrate(|x: f64| x.abs().sqrt() * (50.0 * x).sin(), -1.0, 1.0, &spec) {
            Err(Error::Numerical {
                estimate,
                error_bound,
                subdivisions,
            }) => {
                assert!(estimate.is_finite());
                assert!(error_bound > 0.0);
                assert_eq!(subdivisions, 3);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn invalid_spec() {
        let spec = QuadratureSpec {
            relative_tolerance: 0.0,
            ..QuadratureSpec::default()
        };
        assert!(integrate(|x| x, 0.0, 1.0, &spec).is_err());
        assert!(integrate_semi_infinite(|x| x, f64::NEG_INFINITY, &QuadratureSpec::default()).is_err());
    }
}
