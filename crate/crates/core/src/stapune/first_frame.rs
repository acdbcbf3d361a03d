use crate::error::{Error, Result};
use crate::numkernel::Matrix;
use crate::prng;
use crate::scalar::Scalar;

use super::config::FirstFrameMethod;

/// Outcome of pruning the chain's first frame.
#[derive(Debug, Clone)]
pub struct FirstFramePick<S> {
    /// Kept spatial indices, ascending, length `n_s - r`.
    pub kept: Vec<usize>,
    /// Drop priority each token was judged by. For bipartite this is the
    /// max cosine similarity of even-set tokens (odd-set tokens get -2, below
    /// any cosine); for random/grid it is a 0/1 dropped indicator.
    pub scores: Vec<S>,
    /// Feature-pair dot products spent (bipartite only).
    pub dot_products: u64,
}

/// Image-style token removal for the first frame of an accumulation chain.
///
/// `feats` holds one row per token (the similarity-head features for the
/// bipartite method; random and grid ignore the content).
pub fn first_frame_prune<S: Scalar>(
    feats: &Matrix<S>,
    r: usize,
    method: FirstFrameMethod,
    seed: u64,
) -> Result<FirstFramePick<S>> {
    let n_s = feats.rows();
    if r >= n_s && !(r == 0 && n_s > 0) {
        return Err(Error::Config(format!(
            "first-frame drop {r} out of range for {n_s} tokens"
        )));
    }
    if method == FirstFrameMethod::Bipartite && r > n_s / 2 {
        return Err(Error::Config(format!(
            "bipartite drop {r} exceeds floor({n_s}/2)"
        )));
    }
    if r == 0 {
        return Ok(FirstFramePick {
            kept: (0..n_s).collect(),
            scores: vec![S::zero(); n_s],
            dot_products: 0,
        });
    }

    match method {
        FirstFrameMethod::Random => {
            let mut rng = prng::stream(seed, "first_frame.random");
            let dropped = prng::sample_without_replacement(&mut rng, n_s, r);
            Ok(indicator_pick(n_s, &dropped))
        }
        FirstFrameMethod::Grid => {
            // r contiguous cells of near-equal size; drop one index per cell.
            let mut rng = prng::stream(seed, "first_frame.grid");
            let mut dropped = Vec::with_capacity(r);
            for cell in 0..r {
                let lo = cell * n_s / r;
                let hi = (cell + 1) * n_s / r;
                dropped.push(lo + prng::index(&mut rng, hi - lo));
            }
            Ok(indicator_pick(n_s, &dropped))
        }
        FirstFrameMethod::Bipartite => bipartite_pick(feats, r),
    }
}

fn indicator_pick<S: Scalar>(n_s: usize, dropped: &[usize]) -> FirstFramePick<S> {
    let mut is_dropped = vec![false; n_s];
    for &i in dropped {
        is_dropped[i] = true;
    }
    FirstFramePick {
        kept: (0..n_s).filter(|&i| !is_dropped[i]).collect(),
        scores: is_dropped
            .iter()
            .map(|&d| if d { S::one() } else { S::zero() })
            .collect(),
        dot_products: 0,
    }
}

/// Even/odd bipartite soft matching: each even-indexed token is scored by
/// its best cosine match in the odd set, and the r most redundant even
/// tokens are dropped (no merging). Zero-norm pairs count as similarity 0.
fn bipartite_pick<S: Scalar>(feats: &Matrix<S>, r: usize) -> Result<FirstFramePick<S>> {
    let n_s = feats.rows();
    let evens: Vec<usize> = (0..n_s).step_by(2).collect();
    let odds: Vec<usize> = (1..n_s).step_by(2).collect();
    let norms: Vec<S> = (0..n_s)
        .map(|i| {
            let mut acc = S::zero();
            for &v in feats.row(i) {
                acc += v * v;
            }
            acc.sqrt()
        })
        .collect();

    let mut dots: u64 = 0;
    let mut best: Vec<(usize, S)> = Vec::with_capacity(evens.len());
    for &e in &evens {
        let mut max_sim = S::neg_infinity();
        for &o in &odds {
            let mut dot = S::zero();
            for (a, b) in feats.row(e).iter().zip(feats.row(o)) {
                dot += *a * *b;
            }
            dots += 1;
            let denom = norms[e] * norms[o];
            let sim = if denom > S::zero() { dot / denom } else { S::zero() };
            if sim > max_sim {
                max_sim = sim;
            }
        }
        best.push((e, max_sim));
    }

    // Drop the r highest similarities; on ties the higher index goes first,
    // so the lower index survives.
    let mut order = best.clone();
    order.sort_by(|a, b| match b.1.partial_cmp(&a.1).expect("finite similarity") {
        std::cmp::Ordering::Equal => b.0.cmp(&a.0),
        other => other,
    });
    let mut is_dropped = vec![false; n_s];
    for &(idx, _) in order.iter().take(r) {
        is_dropped[idx] = true;
    }

    let floor = S::cast(-2.0);
    let mut scores = vec![floor; n_s];
    for &(idx, sim) in &best {
        scores[idx] = sim;
    }
    Ok(FirstFramePick {
        kept: (0..n_s).filter(|&i| !is_dropped[i]).collect(),
        scores,
        dot_products: dots,
    })
}
