//! Deterministic, platform-independent random streams.
//!
//! Every random decision in the crate draws from a ChaCha8 stream keyed by
//! `(seed, path)`, where `path` names the consumer (e.g. `"weights.blocks.3.wq"`
//! or `"first_frame.random"`). Distinct paths give statistically independent
//! streams, and the same `(seed, path)` pair reproduces the same sequence on
//! any platform.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Scalar;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// ChaCha8 stream keyed by `(seed, path)`.
pub fn stream(seed: u64, path: &str) -> ChaCha8Rng {
    let mixed = splitmix64(seed) ^ splitmix64(fnv1a(path.as_bytes()));
    let mut key = [0u8; 32];
    for (i, chunk) in key.chunks_exact_mut(8).enumerate() {
        let word = splitmix64(mixed.wrapping_add(i as u64));
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Uniform draw in [0, 1) built from the top 53 bits of one u64.
pub fn uniform_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One Gaussian(0, std^2) sample via Box-Muller, computed in f64 then cast.
pub fn gaussian<S: Scalar>(rng: &mut ChaCha8Rng, std: f64) -> S {
    // Shift u1 into (0, 1] so the log is always finite.
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
    let u2 = uniform_f64(rng);
    let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
    S::cast(z * std)
}

/// Uniform index in [0, bound) by rejection sampling (no modulo bias).
pub fn index(rng: &mut ChaCha8Rng, bound: usize) -> usize {
    assert!(bound > 0, "index bound must be positive");
    let bound = bound as u64;
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let x = rng.next_u64();
        if x < zone {
            return (x % bound) as usize;
        }
    }
}

/// `count` distinct indices drawn uniformly from [0, n), ascending order.
pub fn sample_without_replacement(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<usize> {
    assert!(count <= n, "cannot sample {count} of {n}");
    // Partial Fisher-Yates over an index pool.
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..count {
        let j = i + index(rng, n - i);
        pool.swap(i, j);
    }
    let mut picked: Vec<usize> = pool[..count].to_vec();
    picked.sort_unstable();
    picked
}
