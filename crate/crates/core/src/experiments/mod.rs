//! Parameter sweeps, calibration of unpublished constants and result files.

pub mod calibrate;
pub mod config;
pub mod emit;
pub mod figures;
pub mod validation;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{average_ceu_probability, QuadratureSpec};
use crate::error::{Error, Result};
use crate::rng::point_seed;
use crate::simulator::{estimate_ceu_fraction, estimate_with, SimConfig, Workers};

pub use calibrate::{calibrate_unstated, Anchor, CalibratedRecord, CalibrationOptions, CalibrationReport, CalibrationTarget, Comparison};
pub use emit::{emit, write_plot_csv, Format};

/// Parameter varied along a sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Classification threshold `T` in dB.
    ThresholdTDb,
    Beta,
    Alpha,
    PowerRatioA,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::ThresholdTDb => "threshold_T_dB",
            Axis::Beta => "beta",
            Axis::Alpha => "alpha",
            Axis::PowerRatioA => "power_ratio_a",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "threshold_t_db" | "t" | "threshold" => Ok(Axis::ThresholdTDb),
            "beta" => Ok(Axis::Beta),
            "alpha" => Ok(Axis::Alpha),
            "power_ratio_a" | "a" => Ok(Axis::PowerRatioA),
            other => Err(Error::Config(format!("unknown axis `{other}`"))),
        }
    }

    /// Returns `cfg` with this axis set to `value`.
    pub fn apply(&self, cfg: &SimConfig, value: f64) -> Result<SimConfig> {
        let mut out = *cfg;
        match self {
            Axis::ThresholdTDb => out.ffr = out.ffr.with_threshold_db(value),
            Axis::Beta => out.pathloss.beta = value,
            Axis::Alpha => out.pathloss.alpha = value,
            Axis::PowerRatioA => out.ffr.power_ratio = value,
        }
        out.validate()?;
        Ok(out)
    }
}

/// Which estimators a sweep runs per point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Full drops: coverage and CEU density.
    #[default]
    Full,
    /// BS geometry and broadcast fading only: CEU density, no coverage.
    ClassificationOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Overlay {
    pub axis: Axis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: SimConfig,
    pub axis: Axis,
    pub grid: Vec<f64>,
    #[serde(default)]
    pub overlay: Option<Overlay>,
    #[serde(default)]
    pub mode: SweepMode,
}

impl SweepSpec {
    pub fn new(base: SimConfig, axis: Axis, grid: Vec<f64>) -> Self {
        SweepSpec {
            base,
            axis,
            grid,
            overlay: None,
            mode: SweepMode::Full,
        }
    }

    pub fn with_overlay(mut self, axis: Axis, values: Vec<f64>) -> Self {
        self.overlay = Some(Overlay { axis, values });
        self
    }

    pub fn with_mode(mut self, mode: SweepMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        check_grid("grid", &self.grid)?;
        if let Some(o) = &self.overlay {
            check_grid("overlay", &o.values)?;
            if o.axis == self.axis {
                return Err(Error::Config("overlay axis must differ from the sweep axis".into()));
            }
        }
        for point in self.points() {
            point.config()?;
        }
        Ok(())
    }

    /// Grid points in output order: overlay-major, axis-minor.
    pub fn points(&self) -> Vec<SweepPoint<'_>> {
        let overlays: Vec<(usize, Option<f64>)> = match &self.overlay {
            Some(o) => o.values.iter().copied().map(Some).enumerate().collect(),
            None => vec![(0, None)],
        };
        overlays
            .into_iter()
            .flat_map(|(oi, ov)| {
                self.grid.iter().enumerate().map(move |(ai, &av)| SweepPoint {
                    spec: self,
                    axis_index: ai,
                    axis_value: av,
                    overlay_index: oi,
                    overlay_value: ov,
                })
            })
            .collect()
    }
}

fn check_grid(what: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config(format!("{what} must not be empty")));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config(format!("{what} values must be finite")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!("{what} must be strictly increasing")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct SweepPoint<'a> {
    spec: &'a SweepSpec,
    pub axis_index: usize,
    pub axis_value: f64,
    pub overlay_index: usize,
    pub overlay_value: Option<f64>,
}

impl SweepPoint<'_> {
    pub fn seed(&self) -> u64 {
        point_seed(self.spec.base.master_seed, self.axis_index, self.overlay_index)
    }

    /// Simulation config of this point, including its derived seed.
    pub fn config(&self) -> Result<SimConfig> {
        let mut cfg = self.spec.axis.apply(&self.spec.base, self.axis_value)?;
        if let (Some(o), Some(v)) = (&self.spec.overlay, self.overlay_value) {
            cfg = o.axis.apply(&cfg, v)?;
        }
        cfg.master_seed = self.seed();
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: f64,
    pub overlay: Option<f64>,
    /// `None` in classification-only sweeps.
    pub coverage: Option<f64>,
    pub coverage_ci: Option<f64>,
    pub ceu_density: f64,
    pub ceu_density_ci: f64,
    /// `None` flags a quadrature failure at this point.
    pub analytical_pe: Option<f64>,
    pub n_drops: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Rows of one overlay series, in axis order.
    pub fn series(&self, overlay: Option<f64>) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.overlay == overlay)
    }

    pub fn row(&self, axis: f64, overlay: Option<f64>) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.axis == axis && r.overlay == overlay)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    pub workers: Workers,
    /// Run grid points concurrently instead of one after another.
    pub parallel_points: bool,
}

fn run_point(point: &SweepPoint<'_>, mode: SweepMode, workers: Workers) -> Result<SweepRow> {
    let cfg = point.config()?;
    let est = match mode {
        SweepMode::Full => estimate_with(&cfg, workers)?,
        SweepMode::ClassificationOnly => estimate_ceu_fraction(&cfg, workers)?,
    };
    let analytical_pe = average_ceu_probability(
        cfg.lambda_bs_per_m2,
        cfg.ffr.threshold_linear,
        &cfg.pathloss,
        &QuadratureSpec::default(),
    )
    .ok();
    let full = mode == SweepMode::Full;
    Ok(SweepRow {
        axis: point.axis_value,
        overlay: point.overlay_value,
        coverage: full.then_some(est.coverage),
        coverage_ci: full.then_some(est.coverage_ci),
        ceu_density: est.ceu_density,
        ceu_density_ci: est.ceu_density_ci,
        analytical_pe,
        n_drops: est.counts.drops,
        seed: cfg.master_seed,
    })
}

/// Runs every grid × overlay point of `spec`.
pub fn run_sweep(spec: &SweepSpec, options: SweepOptions) -> Result<SweepResult> {
    spec.validate()?;
    let points = spec.points();
    let rows = if options.parallel_points {
        points
            .par_iter()
            .map(|p| run_point(p, spec.mode, Workers::Auto))
            .collect::<Result<Vec<_>>>()?
    } else {
        points
            .iter()
            .map(|p| run_point(p, spec.mode, options.workers))
            .collect::<Result<Vec<_>>>()?
    };
    Ok(SweepResult {
        spec: spec.clone(),
        rows,
    })
}
