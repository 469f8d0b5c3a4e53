//! Monte Carlo engine for the downlink SIR of the typical user.
//!
//! One drop:
//!
//! 1. BSs and users are independent PPPs on the window; the typical user is
//!    pinned at the window centre and prepended to the user set.
//! 2. Users associate with their nearest BS, giving per-BS loads `N_u`.
//! 3. The typical user draws broadcast-channel gains `(g1, g2)` and is
//!    classified CCU/CEU against its nearest and second-nearest BSs.
//! 4. Every other BS transmits on the typical user's sub-band with probability
//!    `min(N_u/N, 1)`. An active BS serves one of its own users, picked
//!    uniformly, and transmits at `P` or `a·P` depending on that user's class.
//! 5. SIR = `tx·g·L(r1) / Σ p_k·g_k·L(r_k)` with fresh unit-mean exponential
//!    gains; the drop is covered when SIR exceeds the coverage threshold.
//!
//! Drop `i` consumes only the random stream `(master_seed, i)`, and the
//! estimators aggregate integer counts, so estimates are bit-identical for
//! any worker count.

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ffr::{classify_unchecked, tx_power, FfrConfig, UserClass};
use crate::geometry::{associate_with, sample_ppp, Association, NearestTwo, Point, PointSet, SpatialIndex, Window};
use crate::pathloss::PathLossParams;
use crate::rng::{drop_stream, DropRng};
use crate::{db_to_linear, linear_to_db};

/// z-value of a two-sided 95% normal confidence interval.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub lambda_bs_per_m2: f64,
    pub lambda_user_per_m2: f64,
    pub window: Window,
    pub ffr: FfrConfig,
    pub pathloss: PathLossParams,
    /// Coverage threshold `T̂` as a linear SIR.
    pub coverage_threshold_linear: f64,
    pub n_drops: u64,
    pub master_seed: u64,
    /// Use the broadcast gain `g1` as the data-channel gain of the serving link
    /// instead of an independent draw.
    #[serde(default)]
    pub reuse_broadcast_fade: bool,
}

pub const DEFAULT_LAMBDA_BS: f64 = 1e-2;
pub const DEFAULT_HALF_WIDTH_M: f64 = 100.0;
pub const DEFAULT_COVERAGE_THRESHOLD_DB: f64 = -20.0;
pub const DEFAULT_DROPS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 20_250_601;

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            lambda_bs_per_m2: DEFAULT_LAMBDA_BS,
            lambda_user_per_m2: 10.0 * DEFAULT_LAMBDA_BS,
            window: Window::new(DEFAULT_HALF_WIDTH_M).expect("positive default"),
            ffr: FfrConfig::default(),
            pathloss: PathLossParams { alpha: 0.1, beta: 1.0 },
            coverage_threshold_linear: db_to_linear(DEFAULT_COVERAGE_THRESHOLD_DB),
            n_drops: DEFAULT_DROPS,
            master_seed: DEFAULT_SEED,
            reuse_broadcast_fade: false,
        }
    }
}

impl SimConfig {
    pub fn coverage_threshold_db(&self) -> f64 {
        linear_to_db(self.coverage_threshold_linear)
    }

    pub fn with_coverage_threshold_db(mut self, db: f64) -> Self {
        self.coverage_threshold_linear = db_to_linear(db);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_bs_per_m2 > 0.0 && self.lambda_bs_per_m2.is_finite()) {
            return Err(Error::param(
                "lambda_bs",
                format!("must be positive, got {}", self.lambda_bs_per_m2),
            ));
        }
        if !(self.lambda_user_per_m2 >= 0.0 && self.lambda_user_per_m2.is_finite()) {
            return Err(Error::param(
                "lambda_user",
                format!("must be non-negative, got {}", self.lambda_user_per_m2),
            ));
        }
        // Round-trips through serde bypass the constructor.
        Window::new(self.window.half_width())?;
        self.ffr.validate()?;
        self.pathloss.validate()?;
        if !(self.coverage_threshold_linear >= 0.0) {
            return Err(Error::param(
                "coverage_threshold",
                format!("must be non-negative, got {}", self.coverage_threshold_linear),
            ));
        }
        if self.n_drops == 0 {
            return Err(Error::param("n_drops", "need at least one drop"));
        }
        Ok(())
    }
}

/// Broadcast-channel gains of the typical user towards its nearest and
/// second-nearest BS, drawn once per drop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BroadcastFading {
    pub g1: f64,
    pub g2: f64,
}

/// One Monte Carlo drop.
///
/// Gains other than the typical user's broadcast pair are drawn on demand from
/// `stream`, which continues the drop's random stream after generation.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub bss: PointSet,
    /// All users; the typical user is index 0.
    pub users: PointSet,
    pub typical: Point,
    pub association: Association,
    pub typical_nearest: NearestTwo,
    pub fading: BroadcastFading,
    pub stream: DropRng,
    index: SpatialIndex,
}

impl Scenario {
    pub const TYPICAL_USER: usize = 0;

    pub fn serving_bs(&self) -> usize {
        self.typical_nearest.first
    }

    pub fn bs_index(&self) -> &SpatialIndex {
        &self.index
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropOutcome {
    pub sir: f64,
    pub class: UserClass,
    pub covered: bool,
    pub interferer_count: u32,
}

fn draw_gain<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Exp1)
}

/// Draws the BS set (redrawing until it has ≥ 2 points) and the typical
/// user's broadcast gains. Shared prefix of full and classification-only drops.
fn draw_bss_and_typical(cfg: &SimConfig, rng: &mut DropRng) -> Result<(PointSet, SpatialIndex, NearestTwo, BroadcastFading)> {
    let bss = loop {
        let s = sample_ppp(cfg.lambda_bs_per_m2, &cfg.window, rng)?;
        if s.len() >= 2 {
            break s;
        }
    };
    let hw = cfg.window.half_width();
    let index = SpatialIndex::covering(&bss, &[Point::new(-hw, -hw), Point::new(hw, hw)]);
    let nearest = index.nearest_two(&cfg.window.center())?;
    let fading = BroadcastFading {
        g1: draw_gain(rng),
        g2: draw_gain(rng),
    };
    Ok((bss, index, nearest, fading))
}

/// Generates drop `drop_index`, a deterministic function of
/// `(cfg.master_seed, drop_index)`.
pub fn generate_drop(cfg: &SimConfig, drop_index: u64) -> Result<Scenario> {
    cfg.validate()?;
    generate_from_stream(cfg, drop_stream(cfg.master_seed, drop_index))
}

fn generate_from_stream(cfg: &SimConfig, mut rng: DropRng) -> Result<Scenario> {
    let (bss, index, typical_nearest, fading) = draw_bss_and_typical(cfg, &mut rng)?;
    let typical = cfg.window.center();
    let others = sample_ppp(cfg.lambda_user_per_m2, &cfg.window, &mut rng)?;
    let mut users = PointSet::new(Vec::with_capacity(others.len() + 1));
    users.push(typical);
    for p in others.positions() {
        users.push(*p);
    }
    let association = associate_with(&users, &index)?;
    debug_assert_eq!(association.serving(Scenario::TYPICAL_USER), typical_nearest.first);
    Ok(Scenario {
        bss,
        users,
        typical,
        association,
        typical_nearest,
        fading,
        stream: rng,
        index,
    })
}

/// Whether a BS with `load` users occupies one given sub-band out of `subbands`.
/// Happens with probability `min(load/subbands, 1)`.
pub fn subband_active<R: Rng + ?Sized>(load: u32, subbands: u32, rng: &mut R) -> bool {
    if load == 0 {
        false
    } else if load >= subbands {
        true
    } else {
        rng.random_range(0..subbands) < load
    }
}

/// `L(r1)/L(r2) = exp(α(r2^β − r1^β))`, finite or +∞ but never NaN.
#[inline]
fn attenuation_ratio(params: &PathLossParams, r1: f64, r2: f64) -> f64 {
    (params.alpha * (r2.powf(params.beta) - r1.powf(params.beta))).exp()
}

/// Classifies a user from its distances and broadcast gains. Works on the
/// attenuation ratio so that far-away users whose absolute attenuations
/// underflow are still classified correctly.
#[inline]
fn classify_link(g1: f64, g2: f64, r1: f64, r2: f64, cfg: &SimConfig) -> UserClass {
    classify_unchecked(g1 * attenuation_ratio(&cfg.pathloss, r1, r2), g2, cfg.ffr.threshold_linear)
}

/// Transmit power of BS `bs` on the typical user's sub-band: the level it
/// uses for one of its own users, picked uniformly and classified afresh.
pub fn interferer_power_level<R: Rng + ?Sized>(
    bs: usize,
    scenario: &Scenario,
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<f64> {
    let served = scenario.association.users_of(bs);
    if served.is_empty() {
        return Err(Error::Consistency(format!(
            "base station {bs} has no users and cannot be an active interferer"
        )));
    }
    let user = served[rng.random_range(0..served.len())] as usize;
    let near = scenario.index.nearest_two(&scenario.users[user])?;
    debug_assert_eq!(near.first, bs);
    let g1 = draw_gain(rng);
    let g2 = draw_gain(rng);
    let class = classify_link(g1, g2, near.r1, near.r2, cfg);
    Ok(tx_power(class, &cfg.ffr))
}

/// Downlink SIR of the typical user in `scenario`.
pub fn typical_sir<R: Rng + ?Sized>(scenario: &Scenario, cfg: &SimConfig, rng: &mut R) -> Result<DropOutcome> {
    let near = scenario.typical_nearest;
    let BroadcastFading { g1, g2 } = scenario.fading;
    let class = classify_link(g1, g2, near.r1, near.r2, cfg);
    let g = if cfg.reuse_broadcast_fade { g1 } else { draw_gain(rng) };
    let desired = tx_power(class, &cfg.ffr) * g;

    // Interferer powers are kept relative to the serving link's attenuation,
    // i.e. each term carries L(r_k)/L(r1).
    let serving_stretch = near.r1.powf(cfg.pathloss.beta);
    let mut interference = 0.0;
    let mut interferer_count = 0u32;
    for (k, p) in scenario.bss.positions().iter().enumerate() {
        if k == near.first {
            continue;
        }
        if !subband_active(scenario.association.load(k), cfg.ffr.subbands, rng) {
            continue;
        }
        interferer_count += 1;
        let power = interferer_power_level(k, scenario, cfg, rng)?;
        let gk = draw_gain(rng);
        let rk = p.distance(&scenario.typical);
        let rel = (-cfg.pathloss.alpha * (rk.powf(cfg.pathloss.beta) - serving_stretch)).exp();
        interference += power * gk * rel;
    }
    let sir = if interference > 0.0 {
        desired / interference
    } else {
        f64::INFINITY
    };
    Ok(DropOutcome {
        sir,
        class,
        covered: sir > cfg.coverage_threshold_linear,
        interferer_count,
    })
}

/// Generates drop `drop_index` and evaluates the typical user's SIR.
pub fn simulate_drop(cfg: &SimConfig, drop_index: u64) -> Result<DropOutcome> {
    let mut scenario = generate_from_stream(cfg, drop_stream(cfg.master_seed, drop_index))?;
    let mut rng = scenario.stream.clone();
    let outcome = typical_sir(&scenario, cfg, &mut rng)?;
    scenario.stream = rng;
    Ok(outcome)
}

/// Class of the typical user in drop `drop_index`, drawing only the BS set
/// and the broadcast gains. Agrees with [`simulate_drop`] on the same drop.
pub fn classify_drop(cfg: &SimConfig, drop_index: u64) -> Result<UserClass> {
    let mut rng = drop_stream(cfg.master_seed, drop_index);
    let (_, _, near, f) = draw_bss_and_typical(cfg, &mut rng)?;
    Ok(classify_link(f.g1, f.g2, near.r1, near.r2, cfg))
}

/// Nearest and second-nearest BS of the typical user in drop `drop_index`.
pub fn typical_distances(cfg: &SimConfig, drop_index: u64) -> Result<NearestTwo> {
    let mut rng = drop_stream(cfg.master_seed, drop_index);
    Ok(draw_bss_and_typical(cfg, &mut rng)?.2)
}

/// Event counts over a batch of drops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub drops: u64,
    pub covered: u64,
    pub ceu: u64,
}

impl Counts {
    fn merge(self, other: Counts) -> Counts {
        Counts {
            drops: self.drops + other.drops,
            covered: self.covered + other.covered,
            ceu: self.ceu + other.ceu,
        }
    }
}

/// Proportion estimates with normal-approximation 95% half-widths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub counts: Counts,
    pub coverage: f64,
    pub coverage_ci: f64,
    pub ceu_density: f64,
    pub ceu_density_ci: f64,
}

/// `1.96·√(p(1−p)/n)`.
pub fn ci_half_width(p: f64, n: u64) -> f64 {
    Z_95 * (p * (1.0 - p) / n as f64).sqrt()
}

impl From<Counts> for Estimate {
    fn from(counts: Counts) -> Self {
        let n = counts.drops.max(1);
        let coverage = counts.covered as f64 / n as f64;
        let ceu_density = counts.ceu as f64 / n as f64;
        Estimate {
            counts,
            coverage,
            coverage_ci: ci_half_width(coverage, n),
            ceu_density,
            ceu_density_ci: ci_half_width(ceu_density, n),
        }
    }
}

/// How drops are spread over threads. Results do not depend on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Workers {
    /// The ambient rayon pool.
    #[default]
    Auto,
    /// Plain sequential loop on the calling thread.
    Single,
    /// A dedicated pool with this many threads.
    Fixed(usize),
}

impl Workers {
    pub fn from_count(count: Option<usize>) -> Self {
        match count {
            None | Some(0) => Workers::Auto,
            Some(1) => Workers::Single,
            Some(n) => Workers::Fixed(n),
        }
    }
}

fn par_counts<F>(n_drops: u64, per_drop: &F) -> Result<Counts>
where
    F: Fn(u64) -> Result<Counts> + Sync,
{
    (0..n_drops)
        .into_par_iter()
        .map(per_drop)
        .try_reduce(Counts::default, |a, b| Ok(a.merge(b)))
}

fn run_counts<F>(n_drops: u64, workers: Workers, per_drop: F) -> Result<Counts>
where
    F: Fn(u64) -> Result<Counts> + Sync,
{
    match workers {
        Workers::Single => (0..n_drops).try_fold(Counts::default(), |acc, i| Ok(acc.merge(per_drop(i)?))),
        Workers::Auto => par_counts(n_drops, &per_drop),
        Workers::Fixed(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
            pool.install(|| par_counts(n_drops, &per_drop))
        }
    }
}

/// Coverage probability and CEU density of the typical user over
/// `cfg.n_drops` drops.
pub fn estimate(cfg: &SimConfig) -> Result<Estimate> {
    estimate_with(cfg, Workers::Auto)
}

pub fn estimate_with(cfg: &SimConfig, workers: Workers) -> Result<Estimate> {
    cfg.validate()?;
    run_counts(cfg.n_drops, workers, |i| {
        let o = simulate_drop(cfg, i)?;
        Ok(Counts {
            drops: 1,
            covered: o.covered as u64,
            ceu: (o.class == UserClass::Ceu) as u64,
        })
    })
    .map(Estimate::from)
}

/// CEU fraction only (classification stage of each drop); the coverage fields
/// of the result are zero.
pub fn estimate_ceu_fraction(cfg: &SimConfig, workers: Workers) -> Result<Estimate> {
    cfg.validate()?;
    run_counts(cfg.n_drops, workers, |i| {
        Ok(Counts {
            drops: 1,
            covered: 0,
            ceu: (classify_drop(cfg, i)? == UserClass::Ceu) as u64,
        })
    })
    .map(Estimate::from)
}

/// Builds a scenario from explicit geometry and broadcast gains.
pub fn scenario_from_parts(
    bss: PointSet,
    other_users: PointSet,
    typical: Point,
    fading: BroadcastFading,
    stream: DropRng,
) -> Result<Scenario> {
    let index = SpatialIndex::new(&bss);
    let typical_nearest = index.nearest_two(&typical)?;
    let mut users = PointSet::new(vec![typical]);
    for p in other_users.positions() {
        users.push(*p);
    }
    let association = associate_with(&users, &index)?;
    Ok(Scenario {
        bss,
        users,
        typical,
        association,
        typical_nearest,
        fading,
        stream,
        index,
    })
}
