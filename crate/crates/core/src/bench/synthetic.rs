use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prng;
use crate::scalar::Scalar;
use crate::vitcore::Video;

/// Background style of a synthetic clip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundKind {
    /// Random 2x2-pixel texture tiles, so distinct regions are dissimilar;
    /// constant over time except where the redundancy mask lets cells vary.
    StaticTiles,
    /// Smooth sinusoidal pattern that slides over time.
    SlowDrift,
}

/// A single square block that moves diagonally, reflecting at the edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Foreground {
    pub block_size: usize,
    /// Pixels per frame along each axis.
    pub velocity: f64,
    pub intensity: f64,
}

/// Recipe for a clip with controllable temporal redundancy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    pub background: BackgroundKind,
    pub foreground: Foreground,
    pub noise_sigma: f64,
    /// Fraction of background pixels held constant across frames, in [0, 1].
    pub redundancy: f64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 || self.height == 0 || self.width == 0 {
            return Err(Error::Config("synthetic dims must be positive".into()));
        }
        let b = self.foreground.block_size;
        if b == 0 || b > self.height || b > self.width {
            return Err(Error::Config(format!(
                "foreground block {b} does not fit inside {}x{}",
                self.height, self.width
            )));
        }
        if !(0.0..=1.0).contains(&self.redundancy) {
            return Err(Error::Config(format!(
                "redundancy {} outside [0, 1]",
                self.redundancy
            )));
        }
        if self.noise_sigma < 0.0 {
            return Err(Error::Config("noise_sigma must be non-negative".into()));
        }
        Ok(())
    }

    /// High-redundancy default sized to a model input: static tiles, a small
    /// fast block, light noise.
    pub fn high_redundancy(frames: usize, height: usize, width: usize) -> Self {
        Self {
            frames,
            height,
            width,
            background: BackgroundKind::StaticTiles,
            foreground: Foreground {
                block_size: (height / 4).max(1),
                velocity: 2.0,
                intensity: 2.5 * AMP,
            },
            noise_sigma: 0.05,
            redundancy: 0.9,
        }
    }
}

/// Reflecting 1-D position after `t` frames of travel at `v` px/frame.
fn bounce(start: f64, v: f64, t: f64, limit: f64) -> f64 {
    if limit <= 0.0 {
        return 0.0;
    }
    let period = 2.0 * limit;
    let u = (start + v * t).rem_euclid(period);
    if u <= limit {
        u
    } else {
        period - u
    }
}

/// Texture tile edge (pixels): regions are dissimilar at this granularity.
const TILE: usize = 2;
/// Texture amplitude. Large contrast keeps the affinity softmax peaked when
/// the clip is embedded with inference-scale (0.02) weights.
const AMP: f64 = 8.0;
/// Redundancy-mask cell edge (pixels): temporal variation is decided per
/// cell, so a clip contains cleanly static and cleanly changing regions.
const CELL: usize = 8;

/// Deterministic clip for `(spec, seed)`: textured background per kind, a
/// fraction `redundancy` of pixels frozen to their first-frame value (whole
/// cells at a time), a moving foreground block drawn on top, then additive
/// Gaussian noise.
pub fn gen_synthetic_video<S: Scalar>(spec: &SyntheticSpec, seed: u64) -> Result<Video<S>> {
    spec.validate()?;
    let (frames, h, w) = (spec.frames, spec.height, spec.width);

    let tiles_x = w.div_ceil(TILE);
    let tiles_y = h.div_ceil(TILE);
    let cells_x = w.div_ceil(CELL);

    // Base texture at t = 0.
    let mut base_tiles = vec![0f64; tiles_y * tiles_x];
    match spec.background {
        BackgroundKind::StaticTiles => {
            let mut rng = prng::stream(seed, "synthetic.tiles");
            for v in &mut base_tiles {
                *v = 2.0 * AMP * (prng::uniform_f64(&mut rng) - 0.5);
            }
        }
        BackgroundKind::SlowDrift => {
            let mut rng = prng::stream(seed, "synthetic.drift");
            let phase = prng::uniform_f64(&mut rng) * std::f64::consts::TAU;
            for ty in 0..tiles_y {
                for tx in 0..tiles_x {
                    let u = (tx + ty) as f64 / (tiles_x + tiles_y) as f64;
                    base_tiles[ty * tiles_x + tx] =
                        AMP * (std::f64::consts::TAU * u + phase).sin();
                }
            }
        }
    }

    // Cells NOT frozen get per-frame variation; exactly
    // round((1 - redundancy) * cells) of them, at seeded positions.
    let cells = h.div_ceil(CELL) * cells_x;
    let mut frozen = vec![true; cells];
    if spec.redundancy < 1.0 {
        let mut rng = prng::stream(seed, "synthetic.mask");
        let vary = ((1.0 - spec.redundancy) * cells as f64).round() as usize;
        for i in prng::sample_without_replacement(&mut rng, cells, vary.min(cells)) {
            frozen[i] = false;
        }
    }

    // Foreground start position.
    let mut rng_start = prng::stream(seed, "synthetic.start");
    let limit_y = (h - spec.foreground.block_size) as f64;
    let limit_x = (w - spec.foreground.block_size) as f64;
    let start_y = prng::uniform_f64(&mut rng_start) * limit_y;
    let start_x = prng::uniform_f64(&mut rng_start) * limit_x;

    let mut rng_flicker = prng::stream(seed, "synthetic.flicker");
    let mut data = vec![S::zero(); frames * h * w * 3];
    let mut frame_tiles = base_tiles.clone();
    for t in 0..frames {
        // Refresh the unfrozen cells for this frame.
        frame_tiles.copy_from_slice(&base_tiles);
        if spec.redundancy < 1.0 {
            let drift_shift = 0.4 * t as f64;
            for ty in 0..tiles_y {
                for tx in 0..tiles_x {
                    let cell = (ty * TILE / CELL) * cells_x + tx * TILE / CELL;
                    if frozen[cell] {
                        continue;
                    }
                    frame_tiles[ty * tiles_x + tx] = match spec.background {
                        // Fresh texture each frame: genuinely novel content.
                        BackgroundKind::StaticTiles => {
                            2.0 * AMP * (prng::uniform_f64(&mut rng_flicker) - 0.5)
                        }
                        BackgroundKind::SlowDrift => {
                            let u = (tx + ty) as f64 / (tiles_x + tiles_y) as f64;
                            AMP * (std::f64::consts::TAU * u + drift_shift).sin()
                        }
                    };
                }
            }
        }
        for y in 0..h {
            for x in 0..w {
                let value = frame_tiles[(y / TILE) * tiles_x + x / TILE];
                let base_idx = ((t * h + y) * w + x) * 3;
                let sv = S::cast(value);
                data[base_idx] = sv;
                data[base_idx + 1] = sv;
                data[base_idx + 2] = sv;
            }
        }

        // Foreground block on top.
        let by = bounce(start_y, spec.foreground.velocity, t as f64, limit_y).floor() as usize;
        let bx = bounce(start_x, spec.foreground.velocity, t as f64, limit_x).floor() as usize;
        let fg = S::cast(spec.foreground.intensity);
        for y in by..by + spec.foreground.block_size {
            for x in bx..bx + spec.foreground.block_size {
                let base_idx = ((t * h + y) * w + x) * 3;
                data[base_idx] = fg;
                data[base_idx + 1] = fg;
                data[base_idx + 2] = fg;
            }
        }
    }

    if spec.noise_sigma > 0.0 {
        let mut rng = prng::stream(seed, "synthetic.noise");
        for v in &mut data {
            let n: S = prng::gaussian(&mut rng, spec.noise_sigma);
            *v += n;
        }
    }

    Video::new(frames, h, w, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn still_spec() -> SyntheticSpec {
        SyntheticSpec {
            frames: 4,
            height: 32,
            width: 32,
            background: BackgroundKind::StaticTiles,
            foreground: Foreground {
                block_size: 8,
                velocity: 0.0,
                intensity: 1.5,
            },
            noise_sigma: 0.0,
            redundancy: 1.0,
        }
    }

    #[test]
    fn fully_redundant_still_clip_has_identical_frames() {
        let video: Video<f32> = gen_synthetic_video(&still_spec(), 3).unwrap();
        let stride = 32 * 32 * 3;
        let first = &video.data[..stride];
        for t in 1..4 {
            assert_eq!(&video.data[t * stride..(t + 1) * stride], first);
        }
    }

    #[test]
    fn same_spec_and_seed_reproduce_bitwise() {
        let mut spec = still_spec();
        spec.noise_sigma = 0.05;
        spec.redundancy = 0.5;
        spec.foreground.velocity = 1.5;
        let a: Video<f32> = gen_synthetic_video(&spec, 9).unwrap();
        let b: Video<f32> = gen_synthetic_video(&spec, 9).unwrap();
        assert_eq!(a.data, b.data);
    }

    #[test]
    fn moving_block_changes_exactly_the_swept_region() {
        let mut spec = still_spec();
        spec.foreground.velocity = 3.0;
        let video: Video<f32> = gen_synthetic_video(&spec, 5).unwrap();
        for t in 0..3 {
            let mut changed = Vec::new();
            for y in 0..32 {
                for x in 0..32 {
                    if video.pixel(t, y, x) != video.pixel(t + 1, y, x) {
                        changed.push((y, x));
                    }
                }
            }
            assert!(!changed.is_empty(), "block did not move between {t} and {}", t + 1);
            // Every changed pixel carries the block intensity in exactly one
            // of the two frames (symmetric difference of the two rectangles).
            for (y, x) in changed {
                let now = video.pixel(t, y, x)[0];
                let next = video.pixel(t + 1, y, x)[0];
                assert!(
                    (now == 1.5) ^ (next == 1.5),
                    "pixel ({y},{x}) changed outside the swept region"
                );
            }
        }
    }

    #[test]
    fn geometry_violations_are_config_errors() {
        let mut spec = still_spec();
        spec.foreground.block_size = 64;
        assert!(matches!(
            gen_synthetic_video::<f32>(&spec, 0),
            Err(Error::Config(_))
        ));
        let mut spec = still_spec();
        spec.redundancy = 1.5;
        assert!(gen_synthetic_video::<f32>(&spec, 0).is_err());
    }

    #[test]
    fn drift_background_changes_unfrozen_pixels() {
        let spec = SyntheticSpec {
            frames: 3,
            height: 16,
            width: 16,
            background: BackgroundKind::SlowDrift,
            foreground: Foreground {
                block_size: 2,
                velocity: 0.0,
                intensity: 2.0,
            },
            noise_sigma: 0.0,
            redundancy: 0.0,
        };
        let video: Video<f32> = gen_synthetic_video(&spec, 2).unwrap();
        let stride = 16 * 16 * 3;
        assert_ne!(&video.data[..stride], &video.data[stride..2 * stride]);
    }
}
