//! Joint law of the two nearest BS distances seen by the typical user.

use std::f64::consts::PI;

use ffr_core::simulator::{typical_distances, SimConfig};
use statrs::distribution::{ChiSquared, ContinuousCDF};

const DROPS: u64 = 100_000;
const BINS: usize = 5;

// With u = πλr², u1 and u2 − u1 are independent unit exponentials, so
// equiprobable bins come from exponential quantiles.
fn bin(x: f64) -> usize {
    let edges: Vec<f64> = (1..BINS).map(|k| -(1.0 - k as f64 / BINS as f64).ln()).collect();
    edges.iter().take_while(|&&e| x >= e).count()
}

#[test]
fn joint_histogram_matches_poisson_law() {
    let cfg = SimConfig {
        n_drops: DROPS,
        ..SimConfig::default()
    };
    let lambda = cfg.lambda_bs_per_m2;
    let mut counts = [[0u64; BINS]; BINS];
    for i in 0..DROPS {
        let d = typical_distances(&cfg, i).unwrap();
        assert!(d.r1 <= d.r2);
        let u1 = PI * lambda * d.r1 * d.r1;
        let u2 = PI * lambda * d.r2 * d.r2;
        counts[bin(u1)][bin(u2 - u1)] += 1;
    }
    let expected = DROPS as f64 / (BINS * BINS) as f64;
    let chi2: f64 = counts
        .iter()
        .flatten()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let p = 1.0 - ChiSquared::new((BINS * BINS - 1) as f64).unwrap().cdf(chi2);
    assert!(p > 0.01, "chi2 = {chi2:.2}, p = {p:.4}");
}
