//! Canned sweeps reproducing the three reference figures.

use serde::{Deserialize, Serialize};

use super::calibrate::{linear_grid, CalibratedRecord};
use super::{Axis, SweepMode, SweepSpec};
use crate::error::{Error, Result};
use crate::pathloss::PathLossParams;
use crate::simulator::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Figure {
    /// CEU density vs `T` for `β ∈ {0.5, 1.5, 2.0}`.
    Fig3,
    /// Coverage vs `T` for `a ∈ {5, 10, 15}`.
    Fig4,
    /// Coverage vs `β` for `α ∈ {0.001, 0.01, 0.1}`.
    Fig5,
}

impl Figure {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fig3" | "3" => Ok(Figure::Fig3),
            "fig4" | "4" => Ok(Figure::Fig4),
            "fig5" | "5" => Ok(Figure::Fig5),
            other => Err(Error::Config(format!("unknown figure `{other}` (fig3, fig4 or fig5)"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
        }
    }

    /// Full-resolution sweep: 1 dB steps in `T`, 0.1 steps in `β`.
    pub fn spec(&self, base: &SimConfig, record: &CalibratedRecord) -> Result<SweepSpec> {
        let grid = match self {
            Figure::Fig3 => linear_grid(-10.0, 20.0, 1.0),
            Figure::Fig4 => linear_grid(-15.0, 15.0, 1.0),
            Figure::Fig5 => linear_grid(0.2, 2.0, 0.1),
        };
        self.spec_with_grid(base, record, grid)
    }

    /// Coarse sweep: `T ∈ {−15, 0, 15}` / `{−10, 0, 10, 20}` dB, `β` in 0.2 steps.
    pub fn coarse_spec(&self, base: &SimConfig, record: &CalibratedRecord) -> Result<SweepSpec> {
        let grid = match self {
            Figure::Fig3 => vec![-10.0, 0.0, 10.0, 20.0],
            Figure::Fig4 => vec![-15.0, 0.0, 15.0],
            Figure::Fig5 => linear_grid(0.2, 2.0, 0.2),
        };
        self.spec_with_grid(base, record, grid)
    }

    pub fn spec_with_grid(&self, base: &SimConfig, record: &CalibratedRecord, grid: Vec<f64>) -> Result<SweepSpec> {
        let mut cfg = *base;
        let spec = match self {
            Figure::Fig3 => {
                cfg.pathloss = PathLossParams::new(record.ceu_density_alpha, cfg.pathloss.beta)?;
                SweepSpec::new(cfg, Axis::ThresholdTDb, grid)
                    .with_overlay(Axis::Beta, vec![0.5, 1.5, 2.0])
                    .with_mode(SweepMode::ClassificationOnly)
            }
            Figure::Fig4 => {
                cfg.pathloss = record.coverage_vs_threshold_pathloss;
                SweepSpec::new(cfg, Axis::ThresholdTDb, grid).with_overlay(Axis::PowerRatioA, vec![5.0, 10.0, 15.0])
            }
            Figure::Fig5 => {
                cfg.ffr = cfg.ffr.with_threshold_db(record.coverage_vs_beta_threshold_db);
                cfg.ffr.power_ratio = record.coverage_vs_beta_power_ratio;
                SweepSpec::new(cfg, Axis::Beta, grid).with_overlay(Axis::Alpha, vec![0.001, 0.01, 0.1])
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canned_specs_are_valid() {
        let rec = CalibratedRecord::bundled();
        let base = SimConfig::default();
        for fig in [Figure::Fig3, Figure::Fig4, Figure::Fig5] {
            let s = fig.spec(&base, &rec).unwrap();
            assert_eq!(Figure::parse(fig.name()).unwrap(), fig);
            assert_eq!(s.overlay.as_ref().unwrap().values.len(), 3);
            fig.coarse_spec(&base, &rec).unwrap();
        }
        assert_eq!(Figure::Fig3.spec(&base, &rec).unwrap().grid.len(), 31);
        assert_eq!(Figure::Fig4.spec(&base, &rec).unwrap().grid.len(), 31);
        assert_eq!(Figure::Fig5.spec(&base, &rec).unwrap().grid.len(), 19);
    }
}
