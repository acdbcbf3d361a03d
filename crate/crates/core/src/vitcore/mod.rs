//! Minimal columnar video transformer with token-pruning hook points.
//!
//! Tube embedding -> learned positional table -> `depth` pre-norm
//! attention+FFN blocks with joint space-time attention -> mean-pool
//! classifier. Pruning, when enabled, runs at the end of the configured
//! insertion blocks and only ever *selects* tokens; it never modifies them.

mod config;
mod forward;
mod tensor;
mod weights;

pub use config::ModelConfig;
pub use forward::{
    classify, forward, similarity_features, transformer_block, tube_embed, ForwardOutput,
    PruneTrace, Pruning,
};
pub use tensor::{TokenTensor, Video};
pub use weights::{init_weights, BlockWeights, LayerNormParams, Weights};
