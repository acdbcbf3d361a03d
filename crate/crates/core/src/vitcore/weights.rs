use crate::error::Result;
use crate::numkernel::Matrix;
use crate::prng;
use crate::scalar::Scalar;

use super::config::ModelConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct LayerNormParams<S> {
    pub gamma: Vec<S>,
    pub beta: Vec<S>,
}

impl<S: Scalar> LayerNormParams<S> {
    fn unit(d: usize) -> Self {
        Self {
            gamma: vec![S::one(); d],
            beta: vec![S::zero(); d],
        }
    }
}

/// One pre-norm transformer block: attention projections, FFN, two norms.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockWeights<S> {
    pub ln1: LayerNormParams<S>,
    pub wq: Matrix<S>,
    pub bq: Vec<S>,
    pub wk: Matrix<S>,
    pub bk: Vec<S>,
    pub wv: Matrix<S>,
    pub bv: Vec<S>,
    pub wo: Matrix<S>,
    pub bo: Vec<S>,
    pub ln2: LayerNormParams<S>,
    /// d x 4d expansion.
    pub w1: Matrix<S>,
    pub b1: Vec<S>,
    /// 4d x d contraction.
    pub w2: Matrix<S>,
    pub b2: Vec<S>,
}

/// Full parameter set for a [`ModelConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct Weights<S> {
    /// (tube_t * tube_h * tube_w * 3) x d tube projection.
    pub embed_w: Matrix<S>,
    pub embed_b: Vec<S>,
    /// n x d learned positional table.
    pub pos: Matrix<S>,
    pub blocks: Vec<BlockWeights<S>>,
    /// d x classes classifier head.
    pub head_w: Matrix<S>,
    pub head_b: Vec<S>,
}

const INIT_STD: f64 = 0.02;

fn gaussian_matrix<S: Scalar>(rows: usize, cols: usize, seed: u64, path: &str) -> Matrix<S> {
    let mut rng = prng::stream(seed, path);
    let data = (0..rows * cols)
        .map(|_| prng::gaussian(&mut rng, INIT_STD))
        .collect();
    Matrix::new(rows, cols, data).expect("sized by construction")
}

/// Deterministic Gaussian(0, 0.02^2) init keyed by `(seed, parameter path)`.
/// Biases start at zero, layer-norm gains at one.
pub fn init_weights<S: Scalar>(cfg: &ModelConfig, seed: u64) -> Result<Weights<S>> {
    cfg.validate()?;
    let d = cfg.dim;
    let blocks = (0..cfg.depth)
        .map(|i| {
            let p = |name: &str| format!("weights.blocks.{i}.{name}");
            BlockWeights {
                ln1: LayerNormParams::unit(d),
                wq: gaussian_matrix(d, d, seed, &p("wq")),
                bq: vec![S::zero(); d],
                wk: gaussian_matrix(d, d, seed, &p("wk")),
                bk: vec![S::zero(); d],
                wv: gaussian_matrix(d, d, seed, &p("wv")),
                bv: vec![S::zero(); d],
                wo: gaussian_matrix(d, d, seed, &p("wo")),
                bo: vec![S::zero(); d],
                ln2: LayerNormParams::unit(d),
                w1: gaussian_matrix(d, 4 * d, seed, &p("ffn.w1")),
                b1: vec![S::zero(); 4 * d],
                w2: gaussian_matrix(4 * d, d, seed, &p("ffn.w2")),
                b2: vec![S::zero(); d],
            }
        })
        .collect();
    Ok(Weights {
        embed_w: gaussian_matrix(cfg.tube_len(), d, seed, "weights.embed.w"),
        embed_b: vec![S::zero(); d],
        pos: gaussian_matrix(cfg.n_tokens(), d, seed, "weights.pos"),
        blocks,
        head_w: gaussian_matrix(d, cfg.classes, seed, "weights.head.w"),
        head_b: vec![S::zero(); cfg.classes],
    })
}
