//! Token-pruning laboratory for video transformers built around the
//! semantic-aware temporal accumulation (STA) score.
//!
//! The crate is organized as a small pipeline:
//!
//! - [`numkernel`] — dense float kernels (matmul, softmax, layer norm, ...)
//!   with deterministic summation order, generic over the scalar type.
//! - [`vitcore`] — a minimal columnar video transformer: tube embedding,
//!   pre-norm attention/FFN blocks, mean-pool classifier, and hook points
//!   where token pruning is applied between blocks.
//! - [`stapune`] — the STA scoring and pruning algorithm itself: per-token
//!   semantic scores, frame-to-frame transition matrices, accumulated drop
//!   probabilities, and per-frame top-k retention.
//! - [`diagnostics`] — trajectory-sum redundancy metric, finite-difference
//!   gradient heatmaps, retention statistics, and an analytic FLOPs model.
//! - [`bench`] — synthetic clip generation, the STTN tensor file format,
//!   mask export, and the end-to-end experiment harness.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the
//! concrete aliases below pin the default 32-bit pipeline used by the CLI.

pub mod bench;
pub mod diagnostics;
pub mod error;
pub mod numkernel;
pub mod prng;
pub mod scalar;
pub mod stapune;
pub mod vitcore;

pub use error::{Error, FormatError, Result};
pub use scalar::Scalar;

/// Default scalar type of the pipeline (inference-style 32-bit floats).
pub type Real = f32;

pub type Matrix32 = numkernel::Matrix<f32>;
pub type Matrix64 = numkernel::Matrix<f64>;
pub type TokenTensor32 = vitcore::TokenTensor<f32>;
pub type TokenTensor64 = vitcore::TokenTensor<f64>;
pub type Video32 = vitcore::Video<f32>;
pub type Video64 = vitcore::Video<f64>;
pub type Weights32 = vitcore::Weights<f32>;
pub type Weights64 = vitcore::Weights<f64>;
