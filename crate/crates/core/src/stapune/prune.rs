use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vitcore::TokenTensor;

use super::config::{Order, ScoreMode, StaConfig};
use super::first_frame::first_frame_prune;
use super::score::{combine_score, select_keep, semantic_scores_scoped};
use super::transition::{accumulate_step, transition_matrix, AccumScore};

/// Record of one pruning stage: which indices survived in each frame and
/// the scores that decided it.
#[derive(Debug, Clone)]
pub struct SelectionTrace<S> {
    /// Stage index within the insertion plan.
    pub stage: usize,
    /// Spatial token count the stage operated on.
    pub n_s_before: usize,
    /// Per-frame kept indices, ascending, each of length `n_s_before - r`.
    pub kept: Vec<Vec<usize>>,
    /// Per-frame score vector each token was judged by (the combined score
    /// for chain frames; the removal method's drop priority for the first).
    pub combined_scores: Vec<Vec<S>>,
    /// Per-frame semantic scores used in the combination.
    pub semantic_scores: Vec<Vec<S>>,
    /// Accumulated score distribution entering each frame iteration
    /// (index 0 holds the uniform initialization over kept first-frame tokens).
    pub accum_entry: Vec<Vec<S>>,
    /// Feature-pair dot products spent on affinity work in this stage.
    pub dot_products: u64,
}

impl<S: Scalar> SelectionTrace<S> {
    /// Tokens kept per frame after this stage.
    pub fn kept_per_frame(&self) -> usize {
        self.kept.first().map_or(0, Vec::len)
    }
}

/// One full pruning stage over a clip.
///
/// Semantic scores are computed once over the whole clip, the first frame is
/// pruned by the configured image-style method, and every later frame is
/// scored by propagating the accumulated drop distribution through the
/// affinity transition built on `key_feats`. The `n_s - r` lowest-scoring
/// tokens survive each frame. Backward order reverses the frame axis, runs
/// the same chain, and maps the results back.
///
/// Output tokens are bit-for-bit copies of the inputs at the kept indices.
pub fn prune_clip<S: Scalar>(
    x: &TokenTensor<S>,
    r: usize,
    cfg: &StaConfig,
    order: Order,
    key_feats: &TokenTensor<S>,
    stage: usize,
) -> Result<(TokenTensor<S>, SelectionTrace<S>)> {
    let (n_t, n_s) = (x.n_t(), x.n_s());
    if r >= n_s {
        return Err(Error::Config(format!(
            "cannot drop {r} of {n_s} tokens per frame"
        )));
    }
    if key_feats.n_t() != n_t || key_feats.n_s() != n_s {
        return Err(Error::Shape(format!(
            "similarity features {}x{} misaligned with tokens {n_t}x{n_s}",
            key_feats.n_t(),
            key_feats.n_s()
        )));
    }

    let (x_run, feats_run);
    let (x_ref, feats_ref) = match order {
        Order::Forward => (x, key_feats),
        Order::Backward => {
            x_run = x.reverse_frames();
            feats_run = key_feats.reverse_frames();
            (&x_run, &feats_run)
        }
    };

    let mut trace = run_forward_chain(x_ref, r, cfg, feats_ref, stage)?;
    if order == Order::Backward {
        trace.kept.reverse();
        trace.combined_scores.reverse();
        trace.semantic_scores.reverse();
        trace.accum_entry.reverse();
    }
    let pruned = x.select_per_frame(&trace.kept)?;
    Ok((pruned, trace))
}

#[allow(clippy::needless_range_loop)] // the frame index drives several views
fn run_forward_chain<S: Scalar>(
    x: &TokenTensor<S>,
    r: usize,
    cfg: &StaConfig,
    feats: &TokenTensor<S>,
    stage: usize,
) -> Result<SelectionTrace<S>> {
    let (n_t, n_s) = (x.n_t(), x.n_s());
    let keep = n_s - r;
    let f_sem = semantic_scores_scoped(x, cfg.semantic_scope);

    let first = first_frame_prune(&feats.frame_matrix(0), r, cfg.first_frame_method, cfg.seed)?;
    let mut dots = first.dot_products;
    let mut kept = vec![first.kept];
    let mut combined_scores = vec![first.scores];

    let mut s_acc = AccumScore::uniform(keep);
    let mut accum_entry = vec![s_acc.values().to_vec()];
    let mut prev_kept_feats = feats.frame_matrix(0).select_rows(&kept[0]);

    for t in 1..n_t {
        let curr = feats.frame_matrix(t);
        let p = transition_matrix(&curr, &prev_kept_feats, cfg.scaled_softmax)?;
        dots += (n_s * keep) as u64;
        let a_raw = accumulate_step(&p, &s_acc)?;
        let combined = match cfg.score_mode {
            ScoreMode::Combined => combine_score(&a_raw, &f_sem[t]),
            ScoreMode::TemporalOnly => a_raw.clone(),
            ScoreMode::SemanticOnly => f_sem[t].iter().map(|&f| S::one() - f).collect(),
        };
        let kept_t = select_keep(&combined, keep)?;
        // The next frame inherits the *uncombined* accumulation, restricted
        // to the survivors and renormalized to a distribution.
        s_acc = AccumScore::from_restricted(&a_raw, &kept_t)?;
        debug_assert!(s_acc.is_valid(S::cast(1e-4)), "accumulated score left the simplex");
        accum_entry.push(s_acc.values().to_vec());
        prev_kept_feats = curr.select_rows(&kept_t);
        kept.push(kept_t);
        combined_scores.push(combined);
    }

    Ok(SelectionTrace {
        stage,
        n_s_before: n_s,
        kept,
        combined_scores,
        semantic_scores: f_sem,
        accum_entry,
        dot_products: dots,
    })
}
