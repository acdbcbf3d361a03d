use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Transformer dimensions plus input/tube geometry.
///
/// Token counts derive from the geometry: `n_t = frames / tube_t` temporal
/// slots, `n_s = (height * width) / (tube_h * tube_w)` spatial tokens per
/// slot, `n = n_t * n_s` tokens in total.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    pub tube_t: usize,
    pub tube_h: usize,
    pub tube_w: usize,
    /// Number of transformer blocks.
    pub depth: usize,
    /// Channel width of every token.
    pub dim: usize,
    pub heads: usize,
    pub classes: usize,
}

impl ModelConfig {
    /// Depth 0 (embed + classifier only) is allowed for gradient probes.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.frames,
            self.height,
            self.width,
            self.tube_t,
            self.tube_h,
            self.tube_w,
            self.dim,
            self.heads,
            self.classes,
        ];
        if positive.contains(&0) {
            return Err(Error::Config("model dims must all be positive".into()));
        }
        if !self.frames.is_multiple_of(self.tube_t) {
            return Err(Error::Config(format!(
                "frames {} not divisible by tube_t {}",
                self.frames, self.tube_t
            )));
        }
        if !self.height.is_multiple_of(self.tube_h) || !self.width.is_multiple_of(self.tube_w) {
            return Err(Error::Config(format!(
                "spatial dims {}x{} not divisible by tube {}x{}",
                self.height, self.width, self.tube_h, self.tube_w
            )));
        }
        if !self.dim.is_multiple_of(self.heads) {
            return Err(Error::Config(format!(
                "dim {} not divisible by heads {}",
                self.dim, self.heads
            )));
        }
        Ok(())
    }

    /// Temporal token slots.
    pub fn n_t(&self) -> usize {
        self.frames / self.tube_t
    }

    /// Spatial tokens per temporal slot.
    pub fn n_s(&self) -> usize {
        (self.height * self.width) / (self.tube_h * self.tube_w)
    }

    /// Total tokens entering block 1.
    pub fn n_tokens(&self) -> usize {
        self.n_t() * self.n_s()
    }

    pub fn head_dim(&self) -> usize {
        self.dim / self.heads
    }

    /// Flattened pixel count of one RGB tube.
    pub fn tube_len(&self) -> usize {
        self.tube_t * self.tube_h * self.tube_w * 3
    }

    fn vit(depth: usize, dim: usize, heads: usize) -> Self {
        Self {
            frames: 16,
            height: 224,
            width: 224,
            tube_t: 2,
            tube_h: 16,
            tube_w: 16,
            depth,
            dim,
            heads,
            classes: 400,
        }
    }

    /// 16x224^2 input, 2x16x16 tubes, 1568 tokens. Full-scale variants are
    /// meant for the analytic cost model, not for running forward passes.
    pub fn vit_s() -> Self {
        Self::vit(12, 384, 6)
    }

    pub fn vit_b() -> Self {
        Self::vit(12, 768, 12)
    }

    pub fn vit_l() -> Self {
        Self::vit(24, 1024, 16)
    }

    pub fn vit_h() -> Self {
        Self::vit(32, 1280, 16)
    }

    /// Desk-scale preset for forward-pass experiments: 8x64^2 input,
    /// 2x8x8 tubes (4 slots x 64 tokens), 6 blocks of width 64.
    pub fn toy() -> Self {
        Self {
            frames: 8,
            height: 64,
            width: 64,
            tube_t: 2,
            tube_h: 8,
            tube_w: 8,
            depth: 6,
            dim: 64,
            heads: 4,
            classes: 10,
        }
    }

    /// Smallest useful model, for gradient probing: 2 slots x 4 tokens,
    /// 2 blocks of width 16.
    pub fn micro() -> Self {
        Self {
            frames: 4,
            height: 16,
            width: 16,
            tube_t: 2,
            tube_h: 8,
            tube_w: 8,
            depth: 2,
            dim: 16,
            heads: 2,
            classes: 4,
        }
    }

    /// Look up a named preset.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "vit-s" => Some(Self::vit_s()),
            "vit-b" => Some(Self::vit_b()),
            "vit-l" => Some(Self::vit_l()),
            "vit-h" => Some(Self::vit_h()),
            "toy" => Some(Self::toy()),
            "micro" => Some(Self::micro()),
            _ => None,
        }
    }
}
