//! Grid-search calibration of the constants the reference figures rely on
//! but do not state.
//!
//! * CEU density vs `T` (three `β` curves): the path-loss `α`. Predictions
//!   come from the quadrature of the averaged CEU probability.
//! * Coverage vs `T` (three `a` curves): path-loss `(α, β)`, by simulation.
//! * Coverage vs `β` (three `α` curves): power ratio `a` and threshold `T`,
//!   by simulation.
//!
//! Each target scores `|predicted − expected| / tolerance` (or a one-sided
//! violation); a candidate is feasible when every score is ≤ 1. The candidate
//! with the smallest worst score wins, ties broken by the sum of squares.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{average_ceu_probability, QuadratureSpec};
use crate::db_to_linear;
use crate::error::{Error, Result};
use crate::pathloss::PathLossParams;
use crate::simulator::{estimate_with, SimConfig, Workers};

/// Which figure and operating point a target refers to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "figure", rename_all = "snake_case")]
pub enum Anchor {
    /// CEU density at threshold `T` (dB) and path-loss exponent `β`.
    CeuDensity { threshold_db: f64, beta: f64 },
    /// Coverage at threshold `T` (dB) and power ratio `a`.
    CoverageVsThreshold { threshold_db: f64, power_ratio: f64 },
    /// Coverage at path-loss `(α, β)`.
    CoverageVsBeta { alpha: f64, beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Comparison {
    Within { expected: f64, tolerance: f64 },
    Above { bound: f64 },
    Below { bound: f64 },
}

impl Comparison {
    /// Normalized violation: ≤ 1 means satisfied.
    pub fn score(&self, predicted: f64) -> f64 {
        match *self {
            Comparison::Within { expected, tolerance } => (predicted - expected).abs() / tolerance,
            Comparison::Above { bound } => {
                if predicted > bound {
                    0.0
                } else {
                    1.0 + 100.0 * (bound - predicted)
                }
            }
            Comparison::Below { bound } => {
                if predicted < bound {
                    0.0
                } else {
                    1.0 + 100.0 * (predicted - bound)
                }
            }
        }
    }

    pub fn satisfied(&self, predicted: f64) -> bool {
        match *self {
            Comparison::Within { .. } => self.score(predicted) <= 1.0,
            Comparison::Above { bound } => predicted > bound,
            Comparison::Below { bound } => predicted < bound,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTarget {
    pub anchor: Anchor,
    pub comparison: Comparison,
}

impl CalibrationTarget {
    pub fn within(anchor: Anchor, expected: f64, tolerance: f64) -> Self {
        CalibrationTarget {
            anchor,
            comparison: Comparison::Within { expected, tolerance },
        }
    }
}

/// Reference values read off the published figures and their discussion.
pub fn reference_targets() -> Vec<CalibrationTarget> {
    use Anchor::*;
    let ceu = |t: f64, beta: f64| CeuDensity { threshold_db: t, beta };
    let cov_t = |t: f64, a: f64| CoverageVsThreshold {
        threshold_db: t,
        power_ratio: a,
    };
    let cov_b = |alpha: f64, beta: f64| CoverageVsBeta { alpha, beta };
    vec![
        CalibrationTarget::within(ceu(0.0, 0.5), 0.45, 0.05),
        CalibrationTarget::within(ceu(0.0, 1.5), 0.30, 0.05),
        CalibrationTarget::within(ceu(0.0, 2.0), 0.15, 0.05),
        CalibrationTarget {
            anchor: ceu(20.0, 0.5),
            comparison: Comparison::Above { bound: 0.93 },
        },
        CalibrationTarget {
            anchor: ceu(20.0, 2.0),
            comparison: Comparison::Below { bound: 0.70 },
        },
        CalibrationTarget::within(cov_t(-15.0, 10.0), 0.905, 0.05),
        CalibrationTarget::within(cov_t(0.0, 10.0), 0.808, 0.05),
        CalibrationTarget::within(cov_t(15.0, 10.0), 0.902, 0.05),
        CalibrationTarget::within(cov_t(0.0, 5.0), 0.873, 0.05),
        CalibrationTarget::within(cov_t(0.0, 15.0), 0.744, 0.05),
        CalibrationTarget::within(cov_b(0.1, 1.2), 0.99, 0.07),
        CalibrationTarget::within(cov_b(0.01, 1.2), 0.71, 0.07),
        CalibrationTarget::within(cov_b(0.001, 1.2), 0.15, 0.07),
    ]
}

/// Persisted calibration outcome; figure reproduction reads this record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibratedRecord {
    pub version: u32,
    /// `α` behind the CEU-density curves.
    pub ceu_density_alpha: f64,
    /// Path loss behind the coverage-vs-threshold curves.
    pub coverage_vs_threshold_pathloss: PathLossParams,
    /// Power ratio and threshold behind the coverage-vs-β curves.
    pub coverage_vs_beta_power_ratio: f64,
    pub coverage_vs_beta_threshold_db: f64,
    /// Drops per simulated evaluation during the search (0 if none ran).
    pub drops_per_evaluation: u64,
    pub seed: u64,
}

pub const RECORD_VERSION: u32 = 1;

impl Default for CalibratedRecord {
    fn default() -> Self {
        let d = SimConfig::default();
        CalibratedRecord {
            version: RECORD_VERSION,
            ceu_density_alpha: d.pathloss.alpha,
            coverage_vs_threshold_pathloss: d.pathloss,
            coverage_vs_beta_power_ratio: d.ffr.power_ratio,
            coverage_vs_beta_threshold_db: d.ffr.threshold_db(),
            drops_per_evaluation: 0,
            seed: d.master_seed,
        }
    }
}

const BUNDLED_RECORD: &str = include_str!("../../calibration/record.toml");

impl CalibratedRecord {
    /// The record committed with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_RECORD).expect("bundled calibration record parses")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let rec: CalibratedRecord = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if rec.version != RECORD_VERSION {
            return Err(Error::Config(format!(
                "calibration record version {} unsupported (expected {RECORD_VERSION})",
                rec.version
            )));
        }
        rec.coverage_vs_threshold_pathloss.validate()?;
        PathLossParams::new(rec.ceu_density_alpha, 1.0)?;
        Ok(rec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("record serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone)]
pub struct CalibrationOptions {
    pub base: SimConfig,
    /// Drops per simulated evaluation.
    pub drops: u64,
    pub workers: Workers,
    pub ceu_alpha_grid: Vec<f64>,
    pub coverage_alpha_grid: Vec<f64>,
    pub coverage_beta_grid: Vec<f64>,
    pub power_ratio_grid: Vec<f64>,
    pub threshold_db_grid: Vec<f64>,
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// `lo, lo + step, ...` up to `hi` inclusive, rounded to kill drift.
pub fn linear_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| ((lo + step * i as f64) * 1e9).round() / 1e9).collect()
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            base: SimConfig::default(),
            drops: 20_000,
            workers: Workers::Auto,
            ceu_alpha_grid: log_grid(0.001, 0.5, 28),
            coverage_alpha_grid: vec![0.01, 0.02, 0.05, 0.1, 0.2, 0.5],
            coverage_beta_grid: linear_grid(0.6, 2.0, 0.2),
            power_ratio_grid: vec![1.0, 2.0, 5.0, 10.0, 15.0],
            threshold_db_grid: linear_grid(-15.0, 15.0, 5.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub target: CalibrationTarget,
    pub predicted: f64,
    pub score: f64,
    pub satisfied: bool,
}

/// Best candidate of one figure's search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureFit {
    pub figure: String,
    /// Parameter names and values of the chosen candidate.
    pub parameters: Vec<(String, f64)>,
    pub residuals: Vec<Residual>,
    pub feasible: bool,
    /// Runner-up candidates (parameters, worst score), best first.
    pub nearest_misses: Vec<(Vec<(String, f64)>, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub record: CalibratedRecord,
    pub fits: Vec<FigureFit>,
}

impl CalibrationReport {
    pub fn feasible(&self) -> bool {
        self.fits.iter().all(|f| f.feasible)
    }

    pub fn fit(&self, figure: &str) -> Option<&FigureFit> {
        self.fits.iter().find(|f| f.figure == figure)
    }
}

struct Candidate {
    params: Vec<(String, f64)>,
    residuals: Vec<Residual>,
    worst: f64,
    sum_sq: f64,
}

fn evaluate<F>(params: Vec<(String, f64)>, targets: &[CalibrationTarget], mut predict: F) -> Result<Candidate>
where
    F: FnMut(&CalibrationTarget) -> Result<f64>,
{
    let residuals = targets
        .iter()
        .map(|t| {
            let predicted = predict(t)?;
            Ok(Residual {
                target: *t,
                predicted,
                score: t.comparison.score(predicted),
                satisfied: t.comparison.satisfied(predicted),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = residuals.iter().map(|r| r.score).fold(0.0, f64::max);
    let sum_sq = residuals.iter().map(|r| r.score * r.score).sum();
    Ok(Candidate {
        params,
        residuals,
        worst,
        sum_sq,
    })
}

fn select(figure: &str, mut candidates: Vec<Candidate>) -> FigureFit {
    candidates.sort_by(|a, b| a.worst.total_cmp(&b.worst).then(a.sum_sq.total_cmp(&b.sum_sq)));
    let mut iter = candidates.into_iter();
    let best = iter.next().expect("at least one candidate");
    FigureFit {
        figure: figure.to_string(),
        parameters: best.params,
        feasible: best.residuals.iter().all(|r| r.satisfied),
        residuals: best.residuals,
        nearest_misses: iter.take(3).map(|c| (c.params, c.worst)).collect(),
    }
}

fn param(fit: &FigureFit, name: &str) -> f64 {
    fit.parameters
        .iter()
        .find(|(n, _)| n == name)
        .map(|&(_, v)| v)
        .expect("fit carries its parameters")
}

fn simulated(cfg: SimConfig, opts: &CalibrationOptions) -> Result<f64> {
    let cfg = SimConfig {
        n_drops: opts.drops,
        master_seed: opts.base.master_seed,
        ..cfg
    };
    Ok(estimate_with(&cfg, opts.workers)?.coverage)
}

/// Grid-searches the unstated constants against `targets`.
///
/// Figures without targets keep the default value of their constants. An
/// infeasible figure is not an error: the report carries the residuals of the
/// best candidate and its nearest misses.
pub fn calibrate_unstated(targets: &[CalibrationTarget], opts: &CalibrationOptions) -> Result<CalibrationReport> {
    let mut record = CalibratedRecord {
        seed: opts.base.master_seed,
        ..CalibratedRecord::default()
    };
    let mut fits = Vec::new();
    let base = &opts.base;
    let quad = QuadratureSpec::default();

    let ceu: Vec<_> = targets.iter().filter(|t| matches!(t.anchor, Anchor::CeuDensity { .. })).copied().collect();
    if !ceu.is_empty() {
        let candidates = opts
            .ceu_alpha_grid
            .iter()
            .map(|&alpha| {
                evaluate(vec![("alpha".into(), alpha)], &ceu, |t| match t.anchor {
                    Anchor::CeuDensity { threshold_db, beta } => average_ceu_probability(
                        base.lambda_bs_per_m2,
                        db_to_linear(threshold_db),
                        &PathLossParams::new(alpha, beta)?,
                        &quad,
                    ),
                    _ => unreachable!(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let fit = select("ceu_density", candidates);
        record.ceu_density_alpha = param(&fit, "alpha");
        fits.push(fit);
    }

    let cov_t: Vec<_> = targets
        .iter()
        .filter(|t| matches!(t.anchor, Anchor::CoverageVsThreshold { .. }))
        .copied()
        .collect();
    if !cov_t.is_empty() {
        let mut candidates = Vec::new();
        for &alpha in &opts.coverage_alpha_grid {
            for &beta in &opts.coverage_beta_grid {
                let pathloss = PathLossParams::new(alpha, beta)?;
                candidates.push(evaluate(
                    vec![("alpha".into(), alpha), ("beta".into(), beta)],
                    &cov_t,
                    |t| match t.anchor {
                        Anchor::CoverageVsThreshold {
                            threshold_db,
                            power_ratio,
                        } => {
                            let mut cfg = SimConfig { pathloss, ..*base };
                            cfg.ffr = cfg.ffr.with_threshold_db(threshold_db);
                            cfg.ffr.power_ratio = power_ratio;
                            simulated(cfg, opts)
                        }
                        _ => unreachable!(),
                    },
                )?);
            }
        }
        let fit = select("coverage_vs_threshold", candidates);
        record.coverage_vs_threshold_pathloss = PathLossParams::new(param(&fit, "alpha"), param(&fit, "beta"))?;
        record.drops_per_evaluation = opts.drops;
        fits.push(fit);
    }

    let cov_b: Vec<_> = targets
        .iter()
        .filter(|t| matches!(t.anchor, Anchor::CoverageVsBeta { .. }))
        .copied()
        .collect();
    if !cov_b.is_empty() {
        let mut candidates = Vec::new();
        for &a in &opts.power_ratio_grid {
            for &t_db in &opts.threshold_db_grid {
                candidates.push(evaluate(
                    vec![("power_ratio".into(), a), ("threshold_db".into(), t_db)],
                    &cov_b,
                    |t| match t.anchor {
                        Anchor::CoverageVsBeta { alpha, beta } => {
                            let mut cfg = SimConfig {
                                pathloss: PathLossParams::new(alpha, beta)?,
                                ..*base
                            };
                            cfg.ffr = cfg.ffr.with_threshold_db(t_db);
                            cfg.ffr.power_ratio = a;
                            simulated(cfg, opts)
                        }
                        _ => unreachable!(),
                    },
                )?);
            }
        }
        let fit = select("coverage_vs_beta", candidates);
        record.coverage_vs_beta_power_ratio = param(&fit, "power_ratio");
        record.coverage_vs_beta_threshold_db = param(&fit, "threshold_db");
        record.drops_per_evaluation = opts.drops;
        fits.push(fit);
    }

    Ok(CalibrationReport { record, fits })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_targets_give_default_record() {
        let report = calibrate_unstated(&[], &CalibrationOptions::default()).unwrap();
        assert!(report.fits.is_empty());
        assert!(report.feasible());
        let d = CalibratedRecord::default();
        assert_eq!(report.record.ceu_density_alpha, d.ceu_density_alpha);
        assert_eq!(report.record.coverage_vs_threshold_pathloss, d.coverage_vs_threshold_pathloss);
        assert_eq!(report.record.coverage_vs_beta_power_ratio, d.coverage_vs_beta_power_ratio);
    }

    #[test]
    fn recovers_alpha_from_synthetic_targets() {
        let opts = CalibrationOptions::default();
        let truth = opts.ceu_alpha_grid[17];
        let quad = QuadratureSpec::default();
        let targets: Vec<_> = [(0.0, 0.5), (0.0, 1.5), (0.0, 2.0), (10.0, 2.0)]
            .iter()
            .map(|&(t_db, beta)| {
                let p = average_ceu_probability(
                    1e-2,
                    db_to_linear(t_db),
                    &PathLossParams::new(truth, beta).unwrap(),
                    &quad,
                )
                .unwrap();
                CalibrationTarget::within(
                    Anchor::CeuDensity {
                        threshold_db: t_db,
                        beta,
                    },
                    p,
                    0.01,
                )
            })
            .collect();
        let report = calibrate_unstated(&targets, &opts).unwrap();
        let found = report.record.ceu_density_alpha;
        let step = (opts.ceu_alpha_grid[1] / opts.ceu_alpha_grid[0]).ln();
        assert!((found / truth).ln().abs() <= step * 1.0001, "{found} vs {truth}");
        assert!(report.feasible());
    }

    #[test]
    fn comparison_scores() {
        let w = Comparison::Within {
            expected: 0.5,
            tolerance: 0.05,
        };
        assert!(w.satisfied(0.54) && !w.satisfied(0.56));
        assert!((w.score(0.525) - 0.5).abs() < 1e-12);
        let above = Comparison::Above { bound: 0.9 };
        assert!(above.satisfied(0.95) && above.score(0.95) == 0.0);
        assert!(!above.satisfied(0.85) && above.score(0.85) > 1.0);
        let below = Comparison::Below { bound: 0.7 };
        assert!(below.satisfied(0.6) && !below.satisfied(0.72));
    }

    #[test]
    fn bundled_record_parses_and_round_trips() {
        let rec = CalibratedRecord::bundled();
        assert_eq!(CalibratedRecord::parse(&rec.to_toml()).unwrap(), rec);
        assert!(CalibratedRecord::parse("version = 99").is_err());
    }

    #[test]
    fn grids() {
        let g = log_grid(0.001, 0.5, 28);
        assert_eq!(g.len(), 28);
        assert!((g[0] - 0.001).abs() < 1e-15 && (g[27] - 0.5).abs() < 1e-12);
        assert_eq!(linear_grid(-15.0, 15.0, 5.0), vec![-15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0]);
        assert_eq!(linear_grid(0.2, 0.5, 0.1), vec![0.2, 0.3, 0.4, 0.5]);
    }
}
