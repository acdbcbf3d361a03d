use crate::error::{Error, Result};
use crate::numkernel::{gelu, layer_norm, matmul, softmax_axis, Axis, Matrix};
use crate::prng;
use crate::scalar::Scalar;
use crate::stapune::{self, Order, SelectionTrace, SimilarityHead, StaConfig};

use super::config::ModelConfig;
use super::tensor::{TokenTensor, Video};
use super::weights::{BlockWeights, Weights};

/// Token-pruning policy applied inside [`forward`].
#[derive(Debug, Clone)]
pub enum Pruning {
    /// Plain transformer forward, no tokens removed.
    Disabled,
    /// STA scoring at the configured insertion blocks.
    Sta(StaConfig),
    /// Same schedule and insertion plan as STA but uniformly random
    /// per-frame selection — the equal-budget baseline for diagnostics.
    Random(StaConfig),
}

impl Pruning {
    fn config(&self) -> Option<&StaConfig> {
        match self {
            Pruning::Disabled => None,
            Pruning::Sta(cfg) | Pruning::Random(cfg) => Some(cfg),
        }
    }
}

/// Observability record of one forward pass.
#[derive(Debug, Clone)]
pub struct PruneTrace<S> {
    /// One entry per executed pruning stage.
    pub stages: Vec<SelectionTrace<S>>,
    /// Token count entering each block, length = depth.
    pub per_block_tokens: Vec<usize>,
    pub logits: Vec<S>,
}

/// Everything a forward pass produces.
#[derive(Debug, Clone)]
pub struct ForwardOutput<S> {
    pub logits: Vec<S>,
    pub trace: PruneTrace<S>,
    /// Token states after the last block (diagnostics probe point).
    pub final_tokens: TokenTensor<S>,
}

fn add_bias<S: Scalar>(m: &mut Matrix<S>, bias: &[S]) {
    let cols = m.cols();
    for i in 0..m.rows() {
        let row = &mut m.data_mut()[i * cols..(i + 1) * cols];
        for (v, &b) in row.iter_mut().zip(bias) {
            *v += b;
        }
    }
}

fn linear<S: Scalar>(x: &Matrix<S>, w: &Matrix<S>, b: &[S]) -> Result<Matrix<S>> {
    let mut out = matmul(x, w)?;
    add_bias(&mut out, b);
    Ok(out)
}

fn add_into<S: Scalar>(dst: &mut Matrix<S>, src: &Matrix<S>) {
    for (d, &s) in dst.data_mut().iter_mut().zip(src.data()) {
        *d += s;
    }
}

/// Flatten non-overlapping tubes and project them to `d` channels.
/// Positional embeddings are *not* added here.
pub fn tube_embed<S: Scalar>(
    video: &Video<S>,
    cfg: &ModelConfig,
    weights: &Weights<S>,
) -> Result<TokenTensor<S>> {
    cfg.validate()?;
    if video.frames != cfg.frames || video.height != cfg.height || video.width != cfg.width {
        return Err(Error::Shape(format!(
            "video {}x{}x{} does not match model input {}x{}x{}",
            video.frames, video.height, video.width, cfg.frames, cfg.height, cfg.width
        )));
    }
    let (n_t, n_s, d) = (cfg.n_t(), cfg.n_s(), cfg.dim);
    let grid_w = cfg.width / cfg.tube_w;
    let tube_len = cfg.tube_len();
    let mut tubes = Matrix::zeros(n_t * n_s, tube_len);
    for gt in 0..n_t {
        for gy in 0..cfg.height / cfg.tube_h {
            for gx in 0..grid_w {
                let token = gt * n_s + gy * grid_w + gx;
                let row = &mut tubes.data_mut()[token * tube_len..(token + 1) * tube_len];
                let mut k = 0;
                for dt in 0..cfg.tube_t {
                    for dy in 0..cfg.tube_h {
                        for dx in 0..cfg.tube_w {
                            let px = video.pixel(
                                gt * cfg.tube_t + dt,
                                gy * cfg.tube_h + dy,
                                gx * cfg.tube_w + dx,
                            );
                            row[k..k + 3].copy_from_slice(px);
                            k += 3;
                        }
                    }
                }
            }
        }
    }
    let projected = linear(&tubes, &weights.embed_w, &weights.embed_b)?;
    debug_assert_eq!(projected.cols(), d);
    TokenTensor::from_matrix(n_t, n_s, projected)
}

/// One pre-norm residual block: `x + MHSA(LN(x))` then `+ FFN(LN(.))`,
/// attention jointly over all tokens with per-head scaling `1/sqrt(d/heads)`.
pub fn transformer_block<S: Scalar>(
    x: &TokenTensor<S>,
    bw: &BlockWeights<S>,
    heads: usize,
) -> Result<TokenTensor<S>> {
    let (n_t, n_s, d) = (x.n_t(), x.n_s(), x.d());
    if heads == 0 || d % heads != 0 {
        return Err(Error::Shape(format!("{d} channels not divisible into {heads} heads")));
    }
    let mut state = x.clone().into_matrix();

    let normed = layer_norm(&state, &bw.ln1.gamma, &bw.ln1.beta)?;
    let q = linear(&normed, &bw.wq, &bw.bq)?;
    let k = linear(&normed, &bw.wk, &bw.bk)?;
    let v = linear(&normed, &bw.wv, &bw.bv)?;

    let dh = d / heads;
    let scale = S::one() / S::from_usize(dh).unwrap().sqrt();
    let n = q.rows();
    let mut concat = Matrix::zeros(n, d);
    for h in 0..heads {
        let (lo, hi) = (h * dh, (h + 1) * dh);
        let qh = q.col_slice(lo, hi);
        let kh = k.col_slice(lo, hi);
        let vh = v.col_slice(lo, hi);
        let logits = matmul(&qh, &kh.transpose())?.map(|val| val * scale);
        let attn = softmax_axis(&logits, Axis::Rows);
        let oh = matmul(&attn, &vh)?;
        for i in 0..n {
            concat.data_mut()[i * d + lo..i * d + hi].copy_from_slice(oh.row(i));
        }
    }
    let attn_out = linear(&concat, &bw.wo, &bw.bo)?;
    add_into(&mut state, &attn_out);

    let normed2 = layer_norm(&state, &bw.ln2.gamma, &bw.ln2.beta)?;
    let hidden = gelu(&linear(&normed2, &bw.w1, &bw.b1)?);
    let ffn_out = linear(&hidden, &bw.w2, &bw.b2)?;
    add_into(&mut state, &ffn_out);

    TokenTensor::from_matrix(n_t, n_s, state)
}

/// Channel-wise mean over all remaining tokens, then the classifier head.
pub fn classify<S: Scalar>(
    x: &TokenTensor<S>,
    head_w: &Matrix<S>,
    head_b: &[S],
) -> Result<Vec<S>> {
    let n = x.n_t() * x.n_s();
    if n == 0 {
        return Err(Error::Domain("classify: no tokens to pool".into()));
    }
    let d = x.d();
    let inv = S::one() / S::from_usize(n).unwrap();
    let mut mean = vec![S::zero(); d];
    for t in 0..x.n_t() {
        for s in 0..x.n_s() {
            for (m, &v) in mean.iter_mut().zip(x.token(t, s)) {
                *m += v;
            }
        }
    }
    for m in &mut mean {
        *m *= inv;
    }
    let pooled = Matrix::new(1, d, mean)?;
    let logits = linear(&pooled, head_w, head_b)?;
    Ok(logits.into_data())
}

/// Similarity features for a pruning stage: the chosen projection of the
/// block where the stage is inserted, applied to the current token states.
/// No new parameters are involved.
pub fn similarity_features<S: Scalar>(
    x: &TokenTensor<S>,
    bw: &BlockWeights<S>,
    head: SimilarityHead,
) -> Result<TokenTensor<S>> {
    let (n_t, n_s) = (x.n_t(), x.n_s());
    let m = x.clone().into_matrix();
    let feats = match head {
        SimilarityHead::Q => linear(&m, &bw.wq, &bw.bq)?,
        SimilarityHead::K => linear(&m, &bw.wk, &bw.bk)?,
        SimilarityHead::V => linear(&m, &bw.wv, &bw.bv)?,
        SimilarityHead::Ffn => {
            let hidden = gelu(&linear(&m, &bw.w1, &bw.b1)?);
            linear(&hidden, &bw.w2, &bw.b2)?
        }
    };
    TokenTensor::from_matrix(n_t, n_s, feats)
}

/// Add the learned positional table to freshly embedded tokens.
fn add_positional<S: Scalar>(x: &mut TokenTensor<S>, pos: &Matrix<S>) -> Result<()> {
    let n = x.n_t() * x.n_s();
    if pos.rows() != n || pos.cols() != x.d() {
        return Err(Error::Shape(format!(
            "positional table {}x{} vs tokens {}x{}",
            pos.rows(),
            pos.cols(),
            n,
            x.d()
        )));
    }
    for (v, &p) in x.data_mut().iter_mut().zip(pos.data()) {
        *v += p;
    }
    Ok(())
}

fn random_stage_trace<S: Scalar>(
    x: &TokenTensor<S>,
    r: usize,
    seed: u64,
    stage: usize,
) -> SelectionTrace<S> {
    let (n_t, n_s) = (x.n_t(), x.n_s());
    let keep = n_s - r;
    let mut kept = Vec::with_capacity(n_t);
    let mut scores = Vec::with_capacity(n_t);
    for t in 0..n_t {
        let mut rng = prng::stream(seed, &format!("random_prune.stage{stage}.frame{t}"));
        let frame_kept = prng::sample_without_replacement(&mut rng, n_s, keep);
        let mut frame_scores = vec![S::one(); n_s];
        for &i in &frame_kept {
            frame_scores[i] = S::zero();
        }
        kept.push(frame_kept);
        scores.push(frame_scores);
    }
    SelectionTrace {
        stage,
        n_s_before: n_s,
        kept,
        combined_scores: scores,
        semantic_scores: vec![vec![S::zero(); n_s]; n_t],
        accum_entry: Vec::new(),
        dot_products: 0,
    }
}

/// Full forward pass: tube embedding, positional table, `depth` blocks with
/// pruning stages at the configured insertion points, mean-pool classifier.
///
/// The pruning plan is validated before any numeric work. Pruned tokens
/// never re-enter later blocks.
pub fn forward<S: Scalar>(
    video: &Video<S>,
    cfg: &ModelConfig,
    weights: &Weights<S>,
    pruning: &Pruning,
) -> Result<ForwardOutput<S>> {
    cfg.validate()?;
    let mut stage_plan: Vec<(usize, usize, Order)> = Vec::new(); // (block, drop, order)
    if let Some(sta) = pruning.config() {
        sta.validate(cfg.n_s(), cfg.depth)?;
        let drops = sta.drops();
        for (i, &block) in sta.insertion_blocks.iter().enumerate() {
            stage_plan.push((block, drops[i], sta.order_pattern[i]));
        }
    }

    let mut x = tube_embed(video, cfg, weights)?;
    add_positional(&mut x, &weights.pos)?;

    let mut stages = Vec::new();
    let mut per_block_tokens = Vec::with_capacity(cfg.depth);
    for (block_idx, bw) in weights.blocks.iter().enumerate() {
        let block_no = block_idx + 1;
        per_block_tokens.push(x.n_t() * x.n_s());
        x = transformer_block(&x, bw, cfg.heads)?;
        if let Some(stage_idx) = stage_plan.iter().position(|&(b, _, _)| b == block_no) {
            let (_, r, order) = stage_plan[stage_idx];
            let trace = match pruning {
                Pruning::Sta(sta) => {
                    let feats = similarity_features(&x, bw, sta.similarity_head)?;
                    let (pruned, trace) = stapune::prune_clip(&x, r, sta, order, &feats, stage_idx)?;
                    x = pruned;
                    trace
                }
                Pruning::Random(sta) => {
                    let trace = random_stage_trace(&x, r, sta.seed, stage_idx);
                    x = x.select_per_frame(&trace.kept)?;
                    trace
                }
                Pruning::Disabled => unreachable!("stage plan is empty when disabled"),
            };
            stages.push(trace);
        }
    }

    let logits = classify(&x, &weights.head_w, &weights.head_b)?;
    Ok(ForwardOutput {
        trace: PruneTrace {
            stages,
            per_block_tokens,
            logits: logits.clone(),
        },
        logits,
        final_tokens: x,
    })
}
