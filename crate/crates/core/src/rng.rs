//! Counter-based uniform map `(seed, x, y) -> [0, 1)`.
//!
//! Each coordinate is absorbed by one round of the SplitMix64 finalizer:
//!
//! ```text
//! h = mix(seed ^ 0x9E3779B97F4A7C15)
//! h = mix(h ^ x)            // x as two's-complement u64
//! h = mix(h + 0x9E3779B97F4A7C15 ^ y)
//! u = (h >> 11) * 2^-53
//! ```
//!
//! where `mix(z)` is `z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
//! z *= 0x94D049BB133111EB; z ^= z >> 31`. The output has 53 bits of
//! resolution. The map is stateless, so the inclusion decision for a point
//! never depends on the order in which points are visited.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64 pseudorandom bits for `(seed, x, y)`.
#[inline]
pub fn hash_point(seed: u64, x: i64, y: i64) -> u64 {
    let h = mix64(seed ^ GOLDEN);
    let h = mix64(h ^ x as u64);
    mix64(h.wrapping_add(GOLDEN) ^ y as u64)
}

/// Uniform value in `[0, 1)` with 53-bit resolution.
#[inline]
pub fn uniform(seed: u64, x: i64, y: i64) -> f64 {
    (hash_point(seed, x, y) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
