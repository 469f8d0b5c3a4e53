//! Theory-versus-simulation checks run by the `validate` subcommand.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::analysis::{average_ceu_probability, integrate_semi_infinite, joint_nearest_pdf, nearest_distance_cdf, QuadratureSpec};
use crate::error::Result;
use crate::ffr::ceu_prob_conditional;
use crate::pathloss::PathLossParams;
use crate::simulator::{estimate_ceu_fraction, typical_distances, SimConfig, Workers};
use crate::stats::{ks_p_value, ks_statistic};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Classification frequency over `n` unit-exponential gain pairs for 20
/// random `(L1, L2, T)` triples, each within 3 standard errors.
pub fn check_conditional_probability(n: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let l1: f64 = rng.random_range(0.05..1.0);
        let l2: f64 = rng.random_range(0.05..1.0);
        let t = 10f64.powf(rng.random_range(-1.0..1.0));
        let hits = (0..n)
            .filter(|_| {
                let g1: f64 = rng.sample(Exp1);
                let g2: f64 = rng.sample(Exp1);
                g1 * l1 < t * g2 * l2
            })
            .count();
        let p = ceu_prob_conditional(l1, l2, t);
        let se = (p * (1.0 - p) / n as f64).sqrt();
        worst = worst.max((hits as f64 / n as f64 - p).abs() / se);
    }
    Check {
        name: "conditional CEU probability vs exponential draws".into(),
        passed: worst < 3.0,
        detail: format!("worst deviation {worst:.2} standard errors over 20 triples"),
    }
}

/// KS test of simulated nearest-BS distances against the Rayleigh law.
pub fn check_nearest_distance(cfg: &SimConfig, drops: u64) -> Result<Check> {
    let samples = (0..drops)
        .map(|i| typical_distances(cfg, i).map(|n| n.r1))
        .collect::<Result<Vec<_>>>()?;
    let lambda = cfg.lambda_bs_per_m2;
    let d = ks_statistic(&samples, |r| nearest_distance_cdf(r, lambda));
    let p = ks_p_value(d, samples.len());
    Ok(Check {
        name: "nearest-BS distance vs Rayleigh (KS)".into(),
        passed: p > 0.01,
        detail: format!("D = {d:.5}, p = {p:.4}, n = {drops}"),
    })
}

/// Double quadrature of the joint distance density.
pub fn check_joint_pdf_normalization(lambda: f64) -> Result<Check> {
    let quad = QuadratureSpec {
        relative_tolerance: 1e-10,
        absolute_tolerance: 1e-12,
        max_subdivisions: 1000,
    };
    let mut inner_err = None;
    let total = integrate_semi_infinite(
        |r1| match integrate_semi_infinite(|r2| joint_nearest_pdf(r1, r2, lambda), r1, &quad) {
            Ok(i) => i.value,
            Err(e) => {
                inner_err.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        &quad,
    );
    if let Some(e) = inner_err {
        return Err(e);
    }
    let total = total?.value;
    Ok(Check {
        name: "joint distance density normalization".into(),
        passed: (total - 1.0).abs() < 1e-6,
        detail: format!("integral = {total:.12} (λ = {lambda}, peak scale {:.3} m)", 1.0 / (2.0 * (PI * lambda).sqrt())),
    })
}

/// The `(T dB, β)` pairs cross-validated between quadrature and simulation.
pub const CROSS_VALIDATION_POINTS: [(f64, f64); 6] = [(-10.0, 0.5), (0.0, 0.5), (0.0, 1.5), (0.0, 2.0), (10.0, 1.5), (20.0, 2.0)];

/// Simulated CEU fraction against the averaged closed form, within 0.01.
pub fn check_ceu_cross_validation(base: &SimConfig, alpha: f64, drops: u64, workers: Workers) -> Result<Vec<Check>> {
    CROSS_VALIDATION_POINTS
        .iter()
        .map(|&(t_db, beta)| {
            let mut cfg = SimConfig {
                pathloss: PathLossParams::new(alpha, beta)?,
                n_drops: drops,
                ..*base
            };
            cfg.ffr = cfg.ffr.with_threshold_db(t_db);
            let sim = estimate_ceu_fraction(&cfg, workers)?.ceu_density;
            let theory = average_ceu_probability(cfg.lambda_bs_per_m2, cfg.ffr.threshold_linear, &cfg.pathloss, &QuadratureSpec::default())?;
            Ok(Check {
                name: format!("CEU density T = {t_db} dB, β = {beta}"),
                passed: (sim - theory).abs() <= 0.01,
                detail: format!("simulated {sim:.4}, quadrature {theory:.4}"),
            })
        })
        .collect()
}

/// All checks, in order.
pub fn run_all(base: &SimConfig, alpha: f64, drops: u64, workers: Workers) -> Result<Vec<Check>> {
    let mut checks = vec![check_conditional_probability(1_000_000, base.master_seed)];
    checks.push(check_nearest_distance(base, drops)?);
    checks.push(check_joint_pdf_normalization(base.lambda_bs_per_m2)?);
    checks.extend(check_ceu_cross_validation(base, alpha, drops, workers)?);
    Ok(checks)
}
