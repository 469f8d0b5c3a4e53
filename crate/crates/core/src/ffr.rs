//! Power-ratio fractional frequency reuse.
//!
//! A user compares the fading-weighted power `g1·L(r1)` from its serving
//! (nearest) base station with `g2·L(r2)` from the second nearest. When the
//! ratio falls below the threshold `T` the user is a cell-edge user and is
//! served at `a·P`; otherwise it is a cell-center user served at `P`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{db_to_linear, linear_to_db};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FfrConfig {
    /// Classification threshold `T` as a linear power ratio.
    pub threshold_linear: f64,
    /// CEU-to-CCU transmit power ratio `a`.
    pub power_ratio: f64,
    /// CCU transmit power `P` in watts.
    pub base_power_w: f64,
    /// Number of sub-bands `N` per base station.
    pub subbands: u32,
}

impl Default for FfrConfig {
    fn default() -> Self {
        FfrConfig {
            threshold_linear: 1.0,
            power_ratio: 10.0,
            base_power_w: 1.0,
            subbands: 10,
        }
    }
}

impl FfrConfig {
    pub fn new(threshold_db: f64, power_ratio: f64, base_power_w: f64, subbands: u32) -> Result<Self> {
        let cfg = FfrConfig {
            threshold_linear: db_to_linear(threshold_db),
            power_ratio,
            base_power_w,
            subbands,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn threshold_db(&self) -> f64 {
        linear_to_db(self.threshold_linear)
    }

    pub fn with_threshold_db(mut self, threshold_db: f64) -> Self {
        self.threshold_linear = db_to_linear(threshold_db);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold_linear > 0.0 && self.threshold_linear.is_finite()) {
            return Err(Error::param(
                "threshold_T",
                format!("linear threshold must be positive, got {}", self.threshold_linear),
            ));
        }
        if !(self.power_ratio > 0.0 && self.power_ratio.is_finite()) {
            return Err(Error::param(
                "power_ratio_a",
                format!("must be positive, got {}", self.power_ratio),
            ));
        }
        if !(self.base_power_w > 0.0 && self.base_power_w.is_finite()) {
            return Err(Error::param(
                "base_power_P",
                format!("must be positive, got {}", self.base_power_w),
            ));
        }
        if self.subbands == 0 {
            return Err(Error::param("subbands_N", "need at least one sub-band"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UserClass {
    /// Cell-center user.
    Ccu,
    /// Cell-edge user.
    Ceu,
}

/// Classifies a user from its broadcast-channel gains and attenuations.
///
/// CEU iff `g1·L1 / (g2·L2) < T`; equality is CCU.
pub fn classify(g1: f64, g2: f64, l1: f64, l2: f64, threshold: f64) -> Result<UserClass> {
    if !(g1 > 0.0 && g2 > 0.0) {
        return Err(Error::param("g", format!("fading gains must be positive, got ({g1}, {g2})")));
    }
    if !(l1 > 0.0 && l1 <= 1.0 && l2 > 0.0 && l2 <= 1.0) {
        return Err(Error::param("L", format!("attenuations must lie in (0, 1], got ({l1}, {l2})")));
    }
    if !(threshold > 0.0) {
        return Err(Error::param("threshold_T", format!("must be positive, got {threshold}")));
    }
    Ok(classify_unchecked(g1 * l1, g2 * l2, threshold))
}

/// Classification from the two received powers, both strictly positive.
/// Written multiplicatively so underflowed attenuations stay well defined.
#[inline]
pub(crate) fn classify_unchecked(serving_power: f64, second_power: f64, threshold: f64) -> UserClass {
    if serving_power < threshold * second_power {
        UserClass::Ceu
    } else {
        UserClass::Ccu
    }
}

/// Probability of CEU classification given the two attenuations, averaged
/// over i.i.d. unit-mean exponential gains: `T·L2 / (L1 + T·L2)`.
pub fn ceu_prob_conditional(l1: f64, l2: f64, threshold: f64) -> f64 {
    let t_l2 = threshold * l2;
    t_l2 / (l1 + t_l2)
}

/// Transmit power used to serve a user of the given class.
pub fn tx_power(class: UserClass, cfg: &FfrConfig) -> f64 {
    match class {
        UserClass::Ccu => cfg.base_power_w,
        UserClass::Ceu => cfg.power_ratio * cfg.base_power_w,
    }
}

/// Splits the BS density into `(λ_c, λ_e)`, the densities of base stations
/// transmitting at the CCU and CEU power levels.
pub fn split_densities(lambda: f64, p_e: f64) -> (f64, f64) {
    let lambda_e = lambda * p_e;
    (lambda - lambda_e, lambda_e)
}

/// Mean per-user transmit power `P·(p_c + a·p_e)`.
pub fn average_power(cfg: &FfrConfig, p_c: f64, p_e: f64) -> Result<f64> {
    if (p_c + p_e - 1.0).abs() > 1e-12 {
        return Err(Error::Consistency(format!(
            "class probabilities must sum to 1, got p_c = {p_c}, p_e = {p_e}"
        )));
    }
    Ok(cfg.base_power_w * (p_c + cfg.power_ratio * p_e))
}
