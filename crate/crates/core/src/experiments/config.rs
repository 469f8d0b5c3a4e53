//! TOML configuration file. Every physical quantity carries its unit in the
//! key name; thresholds are given in dB and converted once on load.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ffr::FfrConfig;
use crate::geometry::Window;
use crate::pathloss::PathLossParams;
use crate::simulator::SimConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkSection {
    pub lambda_bs_per_m2: f64,
    pub lambda_user_per_m2: f64,
    pub window_half_width_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FfrSection {
    pub threshold_t_db: f64,
    pub power_ratio_a: f64,
    pub base_power_w: f64,
    pub subbands_n: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathLossSection {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub coverage_threshold_db: f64,
    pub n_drops: u64,
    pub master_seed: u64,
    pub reuse_broadcast_fade: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigFile {
    pub network: NetworkSection,
    pub ffr: FfrSection,
    pub pathloss: PathLossSection,
    pub simulation: SimulationSection,
}

impl From<&SimConfig> for ConfigFile {
    fn from(c: &SimConfig) -> Self {
        ConfigFile {
            network: NetworkSection {
                lambda_bs_per_m2: c.lambda_bs_per_m2,
                lambda_user_per_m2: c.lambda_user_per_m2,
                window_half_width_m: c.window.half_width(),
            },
            ffr: FfrSection {
                threshold_t_db: c.ffr.threshold_db(),
                power_ratio_a: c.ffr.power_ratio,
                base_power_w: c.ffr.base_power_w,
                subbands_n: c.ffr.subbands,
            },
            pathloss: PathLossSection {
                alpha: c.pathloss.alpha,
                beta: c.pathloss.beta,
            },
            simulation: SimulationSection {
                coverage_threshold_db: c.coverage_threshold_db(),
                n_drops: c.n_drops,
                master_seed: c.master_seed,
                reuse_broadcast_fade: c.reuse_broadcast_fade,
            },
        }
    }
}

macro_rules! default_from_sim {
    ($ty:ident, $field:ident) => {
        impl Default for $ty {
            fn default() -> Self {
                ConfigFile::from(&SimConfig::default()).$field
            }
        }
    };
}

// Missing keys fall back to `SimConfig::default()`.
default_from_sim!(NetworkSection, network);
default_from_sim!(FfrSection, ffr);
default_from_sim!(PathLossSection, pathloss);
default_from_sim!(SimulationSection, simulation);

impl ConfigFile {
    pub fn to_sim_config(&self) -> Result<SimConfig> {
        let cfg = SimConfig {
            lambda_bs_per_m2: self.network.lambda_bs_per_m2,
            lambda_user_per_m2: self.network.lambda_user_per_m2,
            window: Window::new(self.network.window_half_width_m)?,
            ffr: FfrConfig::new(
                self.ffr.threshold_t_db,
                self.ffr.power_ratio_a,
                self.ffr.base_power_w,
                self.ffr.subbands_n,
            )?,
            pathloss: PathLossParams::new(self.pathloss.alpha, self.pathloss.beta)?,
            coverage_threshold_linear: crate::db_to_linear(self.simulation.coverage_threshold_db),
            n_drops: self.simulation.n_drops,
            master_seed: self.simulation.master_seed,
            reuse_broadcast_fade: self.simulation.reuse_broadcast_fade,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config sections serialize")
    }
}

/// Loads a [`SimConfig`] from a TOML file.
pub fn load_sim_config(path: &Path) -> Result<SimConfig> {
    ConfigFile::load(path)?.to_sim_config()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = ConfigFile::parse("").unwrap().to_sim_config().unwrap();
        let d = SimConfig::default();
        assert_eq!(cfg.lambda_bs_per_m2, d.lambda_bs_per_m2);
        assert_eq!(cfg.ffr.subbands, 10);
        assert!((cfg.coverage_threshold_db() + 20.0).abs() < 1e-12);
        assert_eq!(cfg.n_drops, d.n_drops);
    }

    #[test]
    fn units_in_keys() {
        let text = r#"
            [network]
            lambda_bs_per_m2 = 0.02
            window_half_width_m = 50.0

            [ffr]
            threshold_t_db = 10.0
            power_ratio_a = 5.0

            [pathloss]
            alpha = 0.01
            beta = 1.2

            [simulation]
            coverage_threshold_db = -10.0
            n_drops = 500
            master_seed = 9
        "#;
        let cfg = ConfigFile::parse(text).unwrap().to_sim_config().unwrap();
        assert_eq!(cfg.lambda_bs_per_m2, 0.02);
        assert!((cfg.lambda_user_per_m2 - 0.1).abs() < 1e-15);
        assert_eq!(cfg.window.half_width(), 50.0);
        assert!((cfg.ffr.threshold_linear - 10.0).abs() < 1e-12);
        assert!((cfg.coverage_threshold_linear - 0.1).abs() < 1e-15);
        assert_eq!((cfg.pathloss.alpha, cfg.pathloss.beta), (0.01, 1.2));
        assert_eq!(cfg.n_drops, 500);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ConfigFile::parse("[ffr]\nthreshold_t = 3.0\n").is_err());
        assert!(ConfigFile::parse("[pathloss]\nalpha = -1.0\n").unwrap().to_sim_config().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let file = ConfigFile::from(&SimConfig::default());
        assert_eq!(ConfigFile::parse(&file.to_toml()).unwrap(), file);
    }
}
