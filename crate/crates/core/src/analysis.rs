//! Closed-form and quadrature results for the PPP network: the joint law of
//! the nearest and second-nearest BS distances and the network-averaged CEU
//! classification probability.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::pathloss::PathLossParams;
pub use crate::quadrature::{integrate_semi_infinite, Integral, QuadratureSpec};
use crate::quadrature::integrate;

/// Joint density of `(r1, r2)`, the distances from the typical point to its
/// nearest and second-nearest BS of a PPP with intensity `lambda`:
/// `(2πλ)²·r1·r2·exp(−πλ·r2²)` on `0 < r1 < r2`, zero elsewhere.
pub fn joint_nearest_pdf(r1: f64, r2: f64, lambda: f64) -> f64 {
    if !(r1 > 0.0 && r2 > r1) {
        return 0.0;
    }
    let c = 2.0 * PI * lambda;
    c * c * r1 * r2 * (-PI * lambda * r2 * r2).exp()
}

/// Marginal density of the nearest-BS distance (Rayleigh law).
pub fn nearest_distance_pdf(r: f64, lambda: f64) -> f64 {
    if r < 0.0 {
        return 0.0;
    }
    2.0 * PI * lambda * r * (-PI * lambda * r * r).exp()
}

/// CDF of the nearest-BS distance.
pub fn nearest_distance_cdf(r: f64, lambda: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    -(-PI * lambda * r * r).exp_m1()
}

/// Upper end of the outer integral in `u = πλr²`: the nearest-distance weight
/// `e^{−u}` drops below 1e-12 of its peak there.
const OUTER_CUTOFF_U: f64 = 12.0 * std::f64::consts::LN_10;

/// Network-averaged CEU classification probability
///
/// `p̄_e = ∫₀^∞ ∫_{r1}^∞ T·L(r2) / (L(r1) + T·L(r2)) · f(r1, r2) dr2 dr1`
///
/// evaluated after the change of variables `u = πλr²`, under which the joint
/// density becomes `e^{−u2}` on `0 < u1 < u2`. The outer integral runs over
/// `u1`, the inner one over `u2 ∈ (u1, ∞)`.
pub fn average_ceu_probability(
    lambda: f64,
    threshold: f64,
    params: &PathLossParams,
    quad: &QuadratureSpec,
) -> Result<f64> {
    average_ceu_probability_with_bound(lambda, threshold, params, quad).map(|i| i.value)
}

/// As [`average_ceu_probability`], also returning the quadrature error bound.
pub fn average_ceu_probability_with_bound(
    lambda: f64,
    threshold: f64,
    params: &PathLossParams,
    quad: &QuadratureSpec,
) -> Result<Integral> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::param("lambda", format!("must be positive, got {lambda}")));
    }
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::param("threshold_T", format!("must be positive, got {threshold}")));
    }
    params.validate()?;
    quad.validate()?;

    let scale = 1.0 / (PI * lambda);
    let radius = |u: f64| (u * scale).sqrt();
    // T·L2 / (L1 + T·L2) = T / (T + exp(α(r2^β − r1^β))), safe against underflow.
    let ceu_prob = |r1: f64, r2: f64| {
        let gap = params.alpha * (r2.powf(params.beta) - r1.powf(params.beta));
        threshold / (threshold + gap.exp())
    };

    let inner_spec = QuadratureSpec {
        relative_tolerance: quad.relative_tolerance,
        absolute_tolerance: quad.absolute_tolerance * 1e-2,
        max_subdivisions: quad.max_subdivisions,
    };
    let mut inner_failure: Option<Error> = None;
    let mut inner_error = 0.0f64;
    let outer = integrate(
        |u1| {
            if inner_failure.is_some() {
                return 0.0;
            }
            let r1 = radius(u1);
            // ∫_{u1}^∞ e^{−u2} h du2 = e^{−u1} ∫_0^∞ e^{−v} h(u1 + v) dv
            match integrate_semi_infinite(|v| (-v).exp() * ceu_prob(r1, radius(u1 + v)), 0.0, &inner_spec) {
                Ok(i) => {
                    let w = (-u1).exp();
                    inner_error = inner_error.max(w * i.error_bound);
                    w * i.value
                }
                Err(e) => {
                    inner_failure = Some(e);
                    0.0
                }
            }
        },
        0.0,
        OUTER_CUTOFF_U,
        quad,
    );
    if let Some(e) = inner_failure {
        return Err(e);
    }
    let outer = outer?;
    // Truncated tail ≤ e^{−cutoff}; inner errors integrate over a unit-mass weight.
    let error_bound = outer.error_bound + inner_error + (-OUTER_CUTOFF_U).exp();
    Ok(Integral {
        value: outer.value,
        error_bound,
        subdivisions: outer.subdivisions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn pdf_support() {
        assert_eq!(joint_nearest_pdf(5.0, 5.0, 1e-2), 0.0);
        assert_eq!(joint_nearest_pdf(6.0, 5.0, 1e-2), 0.0);
        assert_eq!(joint_nearest_pdf(0.0, 5.0, 1e-2), 0.0);
        assert!(joint_nearest_pdf(3.0, 5.0, 1e-2) > 0.0);
    }

    #[test]
    fn pdf_normalizes() {
        let lambda = 1e-2;
        let quad = QuadratureSpec {
            relative_tolerance: 1e-10,
            absolute_tolerance: 1e-12,
            max_subdivisions: 1000,
        };
        let total = integrate_semi_infinite(
            |r1| {
                integrate_semi_infinite(|r2| joint_nearest_pdf(r1, r2, lambda), r1, &quad)
                    .unwrap()
                    .value
            },
            0.0,
            &quad,
        )
        .unwrap();
        assert!((total.value - 1.0).abs() < 1e-6, "{}", total.value);
    }

    #[test]
    fn pdf_marginal_is_rayleigh() {
        let lambda = 1e-2;
        for r1 in [0.5, 2.0, 5.0, 9.0, 15.0] {
            let m = integrate_semi_infinite(|r2| joint_nearest_pdf(r1, r2, lambda), r1, &spec()).unwrap();
            let exact = nearest_distance_pdf(r1, lambda);
            assert!((m.value - exact).abs() < 1e-8 * exact.max(1e-3), "r1 {r1}: {} vs {exact}", m.value);
        }
    }

    #[test]
    fn limits_in_threshold() {
        let p = PathLossParams::new(0.1, 1.0).unwrap();
        let low = average_ceu_probability(1e-2, 1e-9, &p, &spec()).unwrap();
        let high = average_ceu_probability(1e-2, 1e6, &p, &spec()).unwrap();
        assert!(low < 1e-6, "{low}");
        assert!((high - 1.0).abs() < 1e-3, "{high}");
    }

    #[test]
    fn equal_attenuation_limit_is_half() {
        // With negligible path-loss differences the two received powers are
        // exchangeable and T = 1 splits users evenly.
        let p = PathLossParams::new(1e-9, 1.0).unwrap();
        let v = average_ceu_probability(1e-2, 1.0, &p, &spec()).unwrap();
        assert!((v - 0.5).abs() < 1e-8, "{v}");
    }

    #[test]
    fn matches_direct_r_space_integration() {
        // Independent route: nest the quadrature in (r1, r2) against the
        // joint density, without the u = πλr² substitution.
        let lambda = 1e-2;
        let params = PathLossParams::new(0.1, 1.5).unwrap();
        let t = 1.0;
        let quad = QuadratureSpec {
            relative_tolerance: 1e-9,
            absolute_tolerance: 1e-12,
            max_subdivisions: 1000,
        };
        let direct = integrate_semi_infinite(
            |r1| {
                integrate_semi_infinite(
                    |r2| {
                        let ratio = (params.alpha * (r2.powf(params.beta) - r1.powf(params.beta))).exp();
                        t / (t + ratio) * joint_nearest_pdf(r1, r2, lambda)
                    },
                    r1,
                    &quad,
                )
                .unwrap()
                .value
            },
            0.0,
            &quad,
        )
        .unwrap()
        .value;
        let fast = average_ceu_probability_with_bound(lambda, t, &params, &spec()).unwrap();
        assert!((direct - fast.value).abs() < 1e-7, "{direct} vs {}", fast.value);
        assert!(fast.error_bound < 1e-6);
    }

    #[test]
    fn monotone_in_threshold() {
        let p = PathLossParams::new(0.1, 1.5).unwrap();
        let values: Vec<f64> = (-10..=20)
            .step_by(2)
            .map(|db| average_ceu_probability(1e-2, crate::db_to_linear(db as f64), &p, &spec()).unwrap())
            .collect();
        assert!(values.windows(2).all(|w| w[1] >= w[0]), "{values:?}");
    }

    #[test]
    fn rejects_invalid_inputs() {
        let p = PathLossParams::new(0.1, 1.5).unwrap();
        assert!(average_ceu_probability(0.0, 1.0, &p, &spec()).is_err());
        assert!(average_ceu_probability(1e-2, 0.0, &p, &spec()).is_err());
    }

    #[test]
    fn non_convergence_surfaces_numerical_error() {
        let p = PathLossParams::new(0.1, 1.5).unwrap();
        let quad = QuadratureSpec {
            relative_tolerance: 1e-15,
            absolute_tolerance: 1e-18,
            max_subdivisions: 2,
        };
        assert!(matches!(
            average_ceu_probability(1e-2, 1.0, &p, &quad),
            Err(Error::Numerical { .. })
        ));
    }
}
