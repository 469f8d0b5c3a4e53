//! Stretched exponential path loss `L(r) = exp(-α·r^β)`.
//!
//! `α` models obstacle resistance and `β` obstacle density. Distances are in
//! meters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossParams {
    pub alpha: f64,
    pub beta: f64,
}

impl PathLossParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let params = PathLossParams { alpha, beta };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::param("alpha", format!("must be positive, got {}", self.alpha)));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::param("beta", format!("must be positive, got {}", self.beta)));
        }
        Ok(())
    }

    /// Attenuation at distance `r` without argument checks.
    #[inline]
    pub fn attenuation(&self, r: f64) -> f64 {
        (-self.alpha * r.powf(self.beta)).exp()
    }
}

/// Attenuation factor in `(0, 1]` at distance `r ≥ 0`.
pub fn loss(r: f64, params: &PathLossParams) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::param("r", format!("distance must be non-negative, got {r}")));
    }
    Ok(params.attenuation(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(alpha: f64, beta: f64) -> PathLossParams {
        PathLossParams::new(alpha, beta).unwrap()
    }

    #[test]
    fn unit_at_zero_distance() {
        assert_eq!(loss(0.0, &p(0.3, 1.7)).unwrap(), 1.0);
    }

    #[test]
    fn linear_exponent_closed_form() {
        let v = loss(10.0, &p(0.1, 1.0)).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        assert!((v - 0.367879).abs() < 1e-6);
    }

    #[test]
    fn fractional_exponent_value() {
        // 20^1.5 = 40·√5; exp(-0.4·√5) evaluated with a 40-digit reference
        // = 0.40884171979780414... (mpmath, mp.dps = 40).
        let v = loss(20.0, &p(0.01, 1.5)).unwrap();
        assert!((v - 0.408_841_719_797_804_14).abs() < 1e-14, "{v}");
    }

    #[test]
    fn invalid_inputs() {
        assert!(loss(-1.0, &p(0.1, 1.0)).is_err());
        assert!(loss(f64::NAN, &p(0.1, 1.0)).is_err());
        assert!(PathLossParams::new(0.0, 1.0).is_err());
        assert!(PathLossParams::new(0.1, -2.0).is_err());
    }

    proptest! {
        #[test]
        fn strictly_decreasing_in_distance(alpha in 1e-3f64..1.0, beta in 0.1f64..2.5, r in 0.0f64..50.0, dr in 0.01f64..10.0) {
            let params = p(alpha, beta);
            let (a, b) = (params.attenuation(r), params.attenuation(r + dr));
            prop_assume!(b > 0.0);
            prop_assert!(b < a);
        }

        #[test]
        fn bounded_in_unit_interval(alpha in 1e-3f64..0.1, beta in 0.1f64..1.5, r in 0.0f64..100.0) {
            let v = p(alpha, beta).attenuation(r);
            prop_assert!(v > 0.0 && v <= 1.0);
        }

        #[test]
        fn monotone_in_parameters(a1 in 1e-3f64..0.5, da in 1e-3f64..0.5, beta in 0.2f64..2.0, db in 0.01f64..0.5, r in 1.5f64..10.0) {
            prop_assert!(p(a1, beta).attenuation(r) > p(a1 + da, beta).attenuation(r));
            prop_assert!(p(a1, beta).attenuation(r) > p(a1, beta + db).attenuation(r));
        }
    }
}
