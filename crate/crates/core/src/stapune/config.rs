use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the per-frame drop count evolves across stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    /// Halve the drop count at each stage (the default).
    Decreasing,
    Constant,
    /// Double the drop count at each stage.
    Increasing,
}

/// Direction of the frame-to-frame accumulation chain within one stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    Forward,
    Backward,
}

/// Named per-stage order plans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderPattern {
    /// F, B, F, B, ... (the default).
    AlternatingFbf,
    /// B, F, B, F, ...
    AlternatingBfb,
    AllForward,
    AllBackward,
}

/// Image-style removal used on the chain's first frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FirstFrameMethod {
    /// Drop r indices uniformly without replacement.
    Random,
    /// Partition indices into r contiguous cells, drop one per cell.
    Grid,
    /// Even/odd bipartite matching; drop the r most redundant even tokens.
    Bipartite,
}

/// Which projection supplies the similarity features for the affinity chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityHead {
    Q,
    K,
    V,
    Ffn,
}

/// Which score drives per-frame selection (ablation knob).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    /// `(1 - F) * A` (the default).
    Combined,
    /// Temporal accumulation `A` alone.
    TemporalOnly,
    /// `1 - F` alone.
    SemanticOnly,
}

/// Scope of the semantic min-max normalization (ablation knob).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemanticScope {
    /// Normalize over the whole clip at once (the default).
    Global,
    PerFrame,
}

/// All pruning knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaConfig {
    /// Tokens dropped per frame at the first stage.
    pub r1: usize,
    pub schedule_kind: ScheduleKind,
    /// 1-indexed blocks after which a pruning stage runs; sorted, unique.
    pub insertion_blocks: Vec<usize>,
    /// Accumulation direction per stage; same length as `insertion_blocks`.
    pub order_pattern: Vec<Order>,
    pub first_frame_method: FirstFrameMethod,
    pub similarity_head: SimilarityHead,
    /// Scale affinity logits by 1/sqrt(d') before the softmax.
    pub scaled_softmax: bool,
    pub seed: u64,
    pub score_mode: ScoreMode,
    pub semantic_scope: SemanticScope,
}

impl StaConfig {
    /// Default configuration for a transformer of the given depth:
    /// three stages after blocks 1, 1 + depth/3, 1 + 2*depth/3, decreasing
    /// schedule, F-B-F order, bipartite first frame, K similarity head.
    pub fn for_depth(r1: usize, depth: usize) -> Self {
        let insertion = insertion_points(depth);
        let n_stages = insertion.len();
        Self {
            r1,
            schedule_kind: ScheduleKind::Decreasing,
            insertion_blocks: insertion,
            order_pattern: make_order_plan(n_stages, OrderPattern::AlternatingFbf),
            first_frame_method: FirstFrameMethod::Bipartite,
            similarity_head: SimilarityHead::K,
            scaled_softmax: false,
            seed: 0,
            score_mode: ScoreMode::Combined,
            semantic_scope: SemanticScope::Global,
        }
    }

    /// Per-stage drop counts under the configured schedule.
    pub fn drops(&self) -> Vec<usize> {
        make_schedule(self.r1, self.schedule_kind, self.insertion_blocks.len())
    }

    /// Check the plan against a model: insertion blocks in [1, depth],
    /// strictly increasing, order plan aligned, cumulative drops below n_s.
    pub fn validate(&self, n_s: usize, depth: usize) -> Result<()> {
        if self.insertion_blocks.is_empty() {
            return Err(Error::Config("no insertion blocks configured".into()));
        }
        for w in self.insertion_blocks.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Config(format!(
                    "insertion blocks must be strictly increasing, got {:?}",
                    self.insertion_blocks
                )));
            }
        }
        if self.insertion_blocks[0] < 1 || *self.insertion_blocks.last().unwrap() > depth {
            return Err(Error::Config(format!(
                "insertion blocks {:?} outside [1, {depth}]",
                self.insertion_blocks
            )));
        }
        if self.order_pattern.len() != self.insertion_blocks.len() {
            return Err(Error::Config(format!(
                "order pattern has {} stages, insertion plan has {}",
                self.order_pattern.len(),
                self.insertion_blocks.len()
            )));
        }
        let total: usize = self.drops().iter().sum();
        if total >= n_s {
            return Err(Error::Config(format!(
                "schedule drops {total} tokens per frame, only {n_s} available"
            )));
        }
        if self.first_frame_method == FirstFrameMethod::Bipartite {
            // Each stage's drop must fit in the even half of what is left.
            let mut live = n_s;
            for &r in &self.drops() {
                if r > live / 2 {
                    return Err(Error::Config(format!(
                        "bipartite first-frame drop {r} exceeds half of {live} live tokens"
                    )));
                }
                live -= r;
            }
        }
        Ok(())
    }
}

/// Stage drop counts: decreasing halves, increasing doubles, constant repeats.
pub fn make_schedule(r1: usize, kind: ScheduleKind, n_stages: usize) -> Vec<usize> {
    (0..n_stages)
        .map(|i| match kind {
            ScheduleKind::Decreasing => r1 >> i,
            ScheduleKind::Constant => r1,
            ScheduleKind::Increasing => r1 << i,
        })
        .collect()
}

/// Expand a named pattern into per-stage orders.
pub fn make_order_plan(n_stages: usize, pattern: OrderPattern) -> Vec<Order> {
    (0..n_stages)
        .map(|i| match pattern {
            OrderPattern::AlternatingFbf => {
                if i % 2 == 0 {
                    Order::Forward
                } else {
                    Order::Backward
                }
            }
            OrderPattern::AlternatingBfb => {
                if i % 2 == 0 {
                    Order::Backward
                } else {
                    Order::Forward
                }
            }
            OrderPattern::AllForward => Order::Forward,
            OrderPattern::AllBackward => Order::Backward,
        })
        .collect()
}

/// Default three-stage insertion plan: after blocks 1, 1 + depth/3,
/// 1 + 2*depth/3 (floored), deduplicated for very shallow models.
pub fn insertion_points(depth: usize) -> Vec<usize> {
    let mut points = vec![1, 1 + depth / 3, 1 + 2 * depth / 3];
    points.dedup();
    points.retain(|&b| b <= depth);
    points
}
