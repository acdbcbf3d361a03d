use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::stapune::StaConfig;
use crate::vitcore::ModelConfig;

/// Cost of one transformer block at a given live token count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockFlops {
    /// 1-indexed block number.
    pub block: usize,
    /// Tokens entering the block.
    pub tokens: usize,
    pub macs: u64,
}

/// Multiply-accumulate budget of a forward pass under a pruning plan.
/// One MAC counts as one FLOP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlopsReport {
    pub per_block: Vec<BlockFlops>,
    pub embed_macs: u64,
    pub head_macs: u64,
    pub total_macs: u64,
    pub baseline_total_macs: u64,
    /// `1 - total / baseline`, in [0, 1).
    pub reduction_fraction: f64,
}

impl FlopsReport {
    pub fn total_gflops(&self) -> f64 {
        self.total_macs as f64 / 1e9
    }
}

/// MACs of one block over n tokens of width d:
/// QKV projections 3nd^2, attention logits n^2 d, attention-times-values
/// n^2 d, output projection nd^2, FFN 8nd^2 — 12nd^2 + 2n^2 d in total.
/// Layer-norm, softmax, and GELU scalar work is not counted.
fn block_macs(n: u64, d: u64) -> u64 {
    12 * n * d * d + 2 * n * n * d
}

/// Tokens entering each block under the pruning plan (per-frame counts
/// times `n_t`).
fn token_plan(cfg: &ModelConfig, sta: Option<&StaConfig>) -> Result<Vec<usize>> {
    let n_t = cfg.n_t();
    let mut n_s_live = cfg.n_s();
    let mut counts = Vec::with_capacity(cfg.depth);
    match sta {
        None => Ok(vec![n_t * n_s_live; cfg.depth]),
        Some(sta) => {
            sta.validate(cfg.n_s(), cfg.depth)?;
            let drops = sta.drops();
            for block in 1..=cfg.depth {
                counts.push(n_t * n_s_live);
                if let Some(i) = sta.insertion_blocks.iter().position(|&b| b == block) {
                    n_s_live -= drops[i];
                }
            }
            Ok(counts)
        }
    }
}

/// Analytic MAC count for a forward pass, with and without the plan,
/// including the tube-embedding and classifier projections.
pub fn flops_model(cfg: &ModelConfig, sta: Option<&StaConfig>) -> Result<FlopsReport> {
    cfg.validate()?;
    let d = cfg.dim as u64;
    let embed_macs = (cfg.n_tokens() * cfg.tube_len()) as u64 * d;
    let head_macs = d * cfg.classes as u64;

    let plan = token_plan(cfg, sta)?;
    let per_block: Vec<BlockFlops> = plan
        .iter()
        .enumerate()
        .map(|(i, &tokens)| BlockFlops {
            block: i + 1,
            tokens,
            macs: block_macs(tokens as u64, d),
        })
        .collect();
    let blocks_total: u64 = per_block.iter().map(|b| b.macs).sum();
    let total_macs = embed_macs + head_macs + blocks_total;

    let baseline_blocks: u64 = (0..cfg.depth)
        .map(|_| block_macs(cfg.n_tokens() as u64, d))
        .sum();
    let baseline_total_macs = embed_macs + head_macs + baseline_blocks;

    let reduction_fraction = 1.0 - total_macs as f64 / baseline_total_macs as f64;
    Ok(FlopsReport {
        per_block,
        embed_macs,
        head_macs,
        total_macs,
        baseline_total_macs,
        reduction_fraction,
    })
}
