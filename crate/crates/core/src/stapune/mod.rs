//! Semantic-aware temporal accumulation (STA) token pruning.
//!
//! Each pruning stage scores every token by combining two signals:
//!
//! - an **accumulative temporal score** `A`: a per-frame drop probability
//!   propagated frame to frame through a softmax affinity (transition)
//!   matrix, so tokens that keep matching earlier content accumulate mass;
//! - a **semantic score** `F` in [0, 1]: min-max normalized channel-wise L1
//!   of each token's activations.
//!
//! The combined score `(1 - F) * A` is highest for tokens that are both
//! temporally redundant and semantically weak; those are dropped first.
//! The first frame has no predecessor and is pruned by an image-style
//! method (random / grid / bipartite-matching drop) to seed the chain.
//! Pruning is pure selection: surviving tokens are copied bit-for-bit.

mod config;
mod first_frame;
mod prune;
mod score;
mod transition;

pub use config::{
    insertion_points, make_order_plan, make_schedule, FirstFrameMethod, Order, OrderPattern,
    ScheduleKind, ScoreMode, SemanticScope, SimilarityHead, StaConfig,
};
pub use first_frame::{first_frame_prune, FirstFramePick};
pub use prune::{prune_clip, SelectionTrace};
pub use score::{combine_score, select_keep, semantic_scores, semantic_scores_scoped};
pub use transition::{accumulate_step, transition_matrix, AccumScore};
