//! Naive scalar-loop reference for the pruning chain, written independently
//! of the library kernels: explicit loops, no shared matrix code. Random and
//! grid first-frame picks reuse the library's seeded draw (PRNG plumbing);
//! every scored path — semantics, bipartite matching, transitions,
//! accumulation, selection — is reimplemented here.
#![allow(dead_code)] // each integration test binary uses a subset
#![allow(clippy::needless_range_loop)] // scalar-loop reference stays indexed

use sta_core::prng;
use sta_core::stapune::{first_frame_prune, FirstFrameMethod, Order};

pub type Frames = Vec<Vec<Vec<f32>>>; // frame -> token -> channels

#[derive(Debug)]
pub struct NaiveTrace {
    pub kept: Vec<Vec<usize>>,
    /// Frame 0 holds the first-frame method's priorities; chain frames hold
    /// the combined score of every candidate token.
    pub combined: Vec<Vec<f32>>,
    /// Accumulated distribution entering each frame step (index 0 is the
    /// uniform initialization over the kept first-frame tokens).
    pub accum: Vec<Vec<f32>>,
    /// Column sums of every transition matrix built along the chain.
    pub transition_col_sums: Vec<Vec<f32>>,
}

fn reverse_frames(x: &Frames) -> Frames {
    x.iter().rev().cloned().collect()
}

fn semantic_map(x: &Frames) -> Vec<Vec<f32>> {
    let mut raw = Vec::new();
    for frame in x {
        let mut row = Vec::new();
        for token in frame {
            let mut s = 0f32;
            for &v in token {
                s += v.abs();
            }
            row.push(s);
        }
        raw.push(row);
    }
    let mut lo = f32::INFINITY;
    let mut hi = f32::NEG_INFINITY;
    for row in &raw {
        for &v in row {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if hi == lo {
        return raw.iter().map(|r| vec![0.0; r.len()]).collect();
    }
    raw.iter()
        .map(|r| r.iter().map(|&v| (v - lo) / (hi - lo)).collect())
        .collect()
}

fn cosine(a: &[f32], b: &[f32]) -> f32 {
    let mut dot = 0f32;
    let mut na = 0f32;
    let mut nb = 0f32;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    let denom = na.sqrt() * nb.sqrt();
    if denom > 0.0 {
        dot / denom
    } else {
        0.0
    }
}

/// Even/odd bipartite drop, exhaustively: each even token scored by its best
/// odd-set cosine; the r highest go (ties drop the higher index first).
fn bipartite_first_frame(frame: &[Vec<f32>], r: usize) -> (Vec<usize>, Vec<f32>) {
    let n_s = frame.len();
    let odds: Vec<usize> = (1..n_s).step_by(2).collect();
    let mut scores = vec![-2.0f32; n_s];
    for e in (0..n_s).step_by(2) {
        let mut best = f32::NEG_INFINITY;
        for &o in &odds {
            best = best.max(cosine(&frame[e], &frame[o]));
        }
        scores[e] = best;
    }
    let mut dropped = vec![false; n_s];
    for _ in 0..r {
        let mut pick = None;
        for e in (0..n_s).step_by(2) {
            if dropped[e] {
                continue;
            }
            pick = match pick {
                None => Some(e),
                Some(p) => {
                    if scores[e] > scores[p] || (scores[e] == scores[p] && e > p) {
                        Some(e)
                    } else {
                        Some(p)
                    }
                }
            };
        }
        dropped[pick.expect("r <= evens")] = true;
    }
    let kept = (0..n_s).filter(|&i| !dropped[i]).collect();
    (kept, scores)
}

/// Smallest-`keep` selection with the lowest index winning ties.
fn keep_smallest(scores: &[f32], keep: usize) -> Vec<usize> {
    let n = scores.len();
    let mut taken = vec![false; n];
    for _ in 0..keep {
        let mut best: Option<usize> = None;
        for i in 0..n {
            if taken[i] {
                continue;
            }
            best = match best {
                None => Some(i),
                Some(b) => {
                    if scores[i] < scores[b] {
                        Some(i)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        taken[best.expect("keep <= n")] = true;
    }
    (0..n).filter(|&i| taken[i]).collect()
}

/// Scalar-loop rendition of one pruning stage over a clip.
pub fn naive_prune(
    x: &Frames,
    feats: &Frames,
    r: usize,
    order: Order,
    method: FirstFrameMethod,
    seed: u64,
    scaled: bool,
) -> NaiveTrace {
    let (x_run, feats_run) = match order {
        Order::Forward => (x.clone(), feats.clone()),
        Order::Backward => (reverse_frames(x), reverse_frames(feats)),
    };
    let mut trace = naive_forward(&x_run, &feats_run, r, method, seed, scaled);
    if order == Order::Backward {
        trace.kept.reverse();
        trace.combined.reverse();
        trace.accum.reverse();
        // Column sums stay in chain order; only per-frame views flip.
    }
    trace
}

fn naive_forward(
    x: &Frames,
    feats: &Frames,
    r: usize,
    method: FirstFrameMethod,
    seed: u64,
    scaled: bool,
) -> NaiveTrace {
    let n_t = x.len();
    let n_s = x[0].len();
    let keep = n_s - r;
    let f_sem = semantic_map(x);

    let (kept0, scores0) = match method {
        FirstFrameMethod::Bipartite => bipartite_first_frame(&feats[0], r),
        _ => {
            // Seeded index draws are shared plumbing, not scored math.
            let d = feats[0][0].len();
            let flat: Vec<f32> = feats[0].iter().flatten().copied().collect();
            let m = sta_core::numkernel::Matrix::new(n_s, d, flat).unwrap();
            let pick = first_frame_prune(&m, r, method, seed).unwrap();
            (pick.kept, pick.scores)
        }
    };

    let mut kept = vec![kept0.clone()];
    let mut combined = vec![scores0];
    let mut s_acc = vec![1.0f32 / keep as f32; keep];
    let mut accum = vec![s_acc.clone()];
    let mut col_sums = Vec::new();
    let mut prev_kept = kept0;

    for t in 1..n_t {
        let d = feats[t][0].len();
        let scale = if scaled { 1.0 / (d as f32).sqrt() } else { 1.0 };
        // Affinity logits current x previous-kept, then per-column softmax.
        let mut p = vec![vec![0f32; prev_kept.len()]; n_s];
        for (j, &pk) in prev_kept.iter().enumerate() {
            let mut logits = Vec::with_capacity(n_s);
            for i in 0..n_s {
                let mut dot = 0f32;
                for c in 0..d {
                    dot += feats[t][i][c] * feats[t - 1][pk][c];
                }
                logits.push(dot * scale);
            }
            let mut m = f32::NEG_INFINITY;
            for &l in &logits {
                m = m.max(l);
            }
            let mut sum = 0f32;
            let mut exps = Vec::with_capacity(n_s);
            for &l in &logits {
                let e = (l - m).exp();
                exps.push(e);
                sum += e;
            }
            for i in 0..n_s {
                p[i][j] = exps[i] / sum;
            }
        }
        col_sums.push(
            (0..prev_kept.len())
                .map(|j| (0..n_s).map(|i| p[i][j]).sum())
                .collect(),
        );

        let mut a_raw = vec![0f32; n_s];
        for i in 0..n_s {
            for (j, &s) in s_acc.iter().enumerate() {
                a_raw[i] += p[i][j] * s;
            }
        }
        let score: Vec<f32> = a_raw
            .iter()
            .zip(&f_sem[t])
            .map(|(&a, &f)| (1.0 - f) * a)
            .collect();
        let kept_t = keep_smallest(&score, keep);

        let mut restricted: Vec<f32> = kept_t.iter().map(|&i| a_raw[i]).collect();
        let total: f32 = restricted.iter().sum();
        for v in &mut restricted {
            *v /= total;
        }
        s_acc = restricted;
        accum.push(s_acc.clone());
        prev_kept = kept_t.clone();
        kept.push(kept_t);
        combined.push(score);
    }

    NaiveTrace {
        kept,
        combined,
        accum,
        transition_col_sums: col_sums,
    }
}

/// Random clip + per-head projected features for oracle instances.
pub fn random_instance(
    n_t: usize,
    n_s: usize,
    d: usize,
    seed: u64,
    head_tag: usize,
) -> (Frames, Frames) {
    let mut rng = prng::stream(seed, "oracle.instance.x");
    let x: Frames = (0..n_t)
        .map(|_| {
            (0..n_s)
                .map(|_| {
                    (0..d)
                        .map(|_| (prng::uniform_f64(&mut rng) * 4.0 - 2.0) as f32)
                        .collect()
                })
                .collect()
        })
        .collect();
    // Emulate a similarity-head projection with a per-head random map.
    let mut wrng = prng::stream(seed, &format!("oracle.instance.head{head_tag}"));
    let w: Vec<Vec<f32>> = (0..d)
        .map(|_| {
            (0..d)
                .map(|_| (prng::uniform_f64(&mut wrng) * 2.0 - 1.0) as f32)
                .collect()
        })
        .collect();
    let feats: Frames = x
        .iter()
        .map(|frame| {
            frame
                .iter()
                .map(|token| {
                    (0..d)
                        .map(|c| {
                            let mut acc = 0f32;
                            for (k, &v) in token.iter().enumerate() {
                                acc += v * w[k][c];
                            }
                            acc
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    (x, feats)
}

/// Flatten helper for feeding the library pipeline.
pub fn to_token_tensor(frames: &Frames) -> sta_core::vitcore::TokenTensor<f32> {
    let n_t = frames.len();
    let n_s = frames[0].len();
    let d = frames[0][0].len();
    let data: Vec<f32> = frames
        .iter()
        .flat_map(|f| f.iter().flat_map(|t| t.iter().copied()))
        .collect();
    sta_core::vitcore::TokenTensor::new(n_t, n_s, d, data).unwrap()
}
