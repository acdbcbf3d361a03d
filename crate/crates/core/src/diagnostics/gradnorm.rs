use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vitcore::{classify, transformer_block, tube_embed, ModelConfig, TokenTensor, Video, Weights};

/// Per-token aggregated gradient magnitudes, estimated by central finite
/// differences with step `step`.
#[derive(Debug, Clone)]
pub struct GradHeatmap<S> {
    pub n_t: usize,
    pub n_s: usize,
    /// Row-major `n_t x n_s`, all non-negative.
    pub values: Vec<S>,
    pub step: S,
}

impl<S: Scalar> GradHeatmap<S> {
    pub fn get(&self, t: usize, s: usize) -> S {
        self.values[t * self.n_s + s]
    }
}

/// Central-difference estimate of `sum_i |d loss / d x[t,s,i]|` for every
/// token: each channel is perturbed by plus/minus `step` and the scalar
/// functional re-evaluated.
pub fn fd_heatmap<S, F>(x: &TokenTensor<S>, step: S, mut loss: F) -> Result<GradHeatmap<S>>
where
    S: Scalar,
    F: FnMut(&TokenTensor<S>) -> Result<S>,
{
    // Rejects NaN steps too, hence the negated comparison.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(step > S::zero()) {
        return Err(Error::Config("fd step must be positive".into()));
    }
    let (n_t, n_s, d) = (x.n_t(), x.n_s(), x.d());
    let two_h = step + step;
    let mut probe = x.clone();
    let mut values = vec![S::zero(); n_t * n_s];
    for t in 0..n_t {
        for s in 0..n_s {
            let mut acc = S::zero();
            for c in 0..d {
                let orig = probe.token(t, s)[c];
                probe.token_mut(t, s)[c] = orig + step;
                let up = loss(&probe)?;
                probe.token_mut(t, s)[c] = orig - step;
                let down = loss(&probe)?;
                probe.token_mut(t, s)[c] = orig;
                let g = (up - down) / two_h;
                if !g.is_finite() {
                    return Err(Error::Numeric(format!(
                        "non-finite finite-difference at token ({t},{s}) channel {c}"
                    )));
                }
                acc += g.abs();
            }
            values[t * n_s + s] = acc;
        }
    }
    Ok(GradHeatmap {
        n_t,
        n_s,
        values,
        step,
    })
}

/// Cross-entropy of the mean-pool classifier against `label`.
fn cross_entropy_tail<S: Scalar>(
    x: &TokenTensor<S>,
    weights: &Weights<S>,
    heads: usize,
    from_block: usize,
    label: usize,
) -> Result<S> {
    let mut state = x.clone();
    for bw in &weights.blocks[from_block..] {
        state = transformer_block(&state, bw, heads)?;
    }
    let logits = classify(&state, &weights.head_w, &weights.head_b)?;
    if label >= logits.len() {
        return Err(Error::Config(format!(
            "label {label} out of range for {} classes",
            logits.len()
        )));
    }
    // Stable log-softmax.
    let mut max = S::neg_infinity();
    for &v in &logits {
        if v > max {
            max = v;
        }
    }
    let mut sum = S::zero();
    for &v in &logits {
        sum += (v - max).exp();
    }
    let loss = sum.ln() + max - logits[label];
    if !loss.is_finite() {
        return Err(Error::Numeric("non-finite cross-entropy loss".into()));
    }
    Ok(loss)
}

/// Token-level gradient-norm heatmap of the training loss, aggregated over
/// every block input: at each layer the input tokens are perturbed channel by
/// channel and the remaining blocks plus the cross-entropy head re-evaluated.
/// With a depth-0 model the classifier input itself is probed.
///
/// Cost grows as depth^2 * tokens * channels; intended for small probe models.
pub fn gradnorm_fd<S: Scalar>(
    video: &Video<S>,
    cfg: &ModelConfig,
    weights: &Weights<S>,
    label: usize,
    step: S,
) -> Result<GradHeatmap<S>> {
    cfg.validate()?;
    let mut x = tube_embed(video, cfg, weights)?;
    // Positional table, as in the forward pass.
    for (v, &p) in x.data_mut().iter_mut().zip(weights.pos.data()) {
        *v += p;
    }

    let depth = weights.blocks.len();
    let mut block_inputs = Vec::with_capacity(depth.max(1));
    block_inputs.push(x.clone());
    for bw in &weights.blocks {
        x = transformer_block(&x, bw, cfg.heads)?;
        block_inputs.push(x.clone());
    }

    let (n_t, n_s) = (cfg.n_t(), cfg.n_s());
    let mut total = vec![S::zero(); n_t * n_s];
    if depth == 0 {
        let heat = fd_heatmap(&block_inputs[0], step, |probe| {
            cross_entropy_tail(probe, weights, cfg.heads, 0, label)
        })?;
        total = heat.values;
    } else {
        for (l, input) in block_inputs[..depth].iter().enumerate() {
            let heat = fd_heatmap(input, step, |probe| {
                cross_entropy_tail(probe, weights, cfg.heads, l, label)
            })?;
            for (t, h) in total.iter_mut().zip(&heat.values) {
                *t += *h;
            }
        }
    }
    Ok(GradHeatmap {
        n_t,
        n_s,
        values: total,
        step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::Matrix;
    use crate::prng;
    use crate::vitcore::init_weights;

    fn random_video(cfg: &ModelConfig, seed: u64) -> Video<f64> {
        let mut rng = prng::stream(seed, "gradnorm.video");
        let len = cfg.frames * cfg.height * cfg.width * 3;
        let data = (0..len).map(|_| prng::uniform_f64(&mut rng)).collect();
        Video::new(cfg.frames, cfg.height, cfg.width, data).unwrap()
    }

    #[test]
    fn constant_loss_gives_zero_heatmap() {
        // Zero head weights and bias: logits are constant regardless of the
        // tokens, so every central difference cancels exactly.
        let cfg = ModelConfig::micro();
        let mut weights: Weights<f64> = init_weights(&cfg, 3).unwrap();
        weights.head_w = Matrix::zeros(cfg.dim, cfg.classes);
        weights.head_b = vec![0.0; cfg.classes];
        let video = random_video(&cfg, 3);
        let h = 1e-3;
        let heat = gradnorm_fd(&video, &cfg, &weights, 0, h).unwrap();
        let bound = 10.0 * h * h;
        assert!(heat.values.iter().all(|&v| v <= bound));
    }

    #[test]
    fn linear_functional_matches_closed_form() {
        // loss(x) = sum of c[t,s,i] * x[t,s,i]: the exact per-token gradient
        // norm is sum_i |c[t,s,i]|.
        let mut rng = prng::stream(5, "gradnorm.linear");
        let (n_t, n_s, d) = (2, 3, 4);
        let coeffs: Vec<f64> = (0..n_t * n_s * d)
            .map(|_| prng::uniform_f64(&mut rng) * 2.0 - 1.0)
            .collect();
        let x = TokenTensor::new(
            n_t,
            n_s,
            d,
            (0..n_t * n_s * d)
                .map(|_| prng::uniform_f64(&mut rng) * 2.0 - 1.0)
                .collect(),
        )
        .unwrap();
        let heat = fd_heatmap(&x, 1e-5, |probe| {
            let mut acc = 0.0;
            for (c, v) in coeffs.iter().zip(probe.data()) {
                acc += c * v;
            }
            Ok(acc + 0.25)
        })
        .unwrap();
        for t in 0..n_t {
            for s in 0..n_s {
                let want: f64 = coeffs[(t * n_s + s) * d..(t * n_s + s + 1) * d]
                    .iter()
                    .map(|c| c.abs())
                    .sum();
                assert!((heat.get(t, s) - want).abs() < 1e-4, "{} vs {want}", heat.get(t, s));
            }
        }
    }

    #[test]
    fn deterministic_for_fixed_inputs() {
        let cfg = ModelConfig::micro();
        let weights: Weights<f64> = init_weights(&cfg, 7).unwrap();
        let video = random_video(&cfg, 7);
        let a = gradnorm_fd(&video, &cfg, &weights, 1, 1e-3).unwrap();
        let b = gradnorm_fd(&video, &cfg, &weights, 1, 1e-3).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn non_positive_step_rejected() {
        let x = TokenTensor::<f64>::zeros(1, 1, 1);
        assert!(fd_heatmap(&x, 0.0, |_| Ok(0.0)).is_err());
    }
}
