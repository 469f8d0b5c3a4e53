//! Deterministic random-stream derivation.
//!
//! Every Monte Carlo drop owns an independent ChaCha8 stream selected by its
//! index, so results never depend on how drops are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type DropRng = ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random stream for drop `drop_index` under `master_seed`.
pub fn drop_stream(master_seed: u64, drop_index: u64) -> DropRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(drop_index);
    rng
}

/// Seed of one sweep grid point, derived from the master seed and the point's
/// position on the axis and overlay grids.
pub fn point_seed(master_seed: u64, axis_index: usize, overlay_index: usize) -> u64 {
    let h = mix64(master_seed);
    let h = mix64(h ^ (axis_index as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    mix64(h ^ (overlay_index as u64).wrapping_mul(0xABC9_8388_FB8F_AC03))
}
