use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vitcore::TokenTensor;

/// Temporal-redundancy probe: for each token of the last frame, sum its best
/// cosine match in every earlier frame, then average over tokens.
///
/// Identical frames give exactly `n_t - 1`; a single frame gives 0. Any
/// zero-norm token is a domain error (cosine undefined).
pub fn trajectory_sum<S: Scalar>(x: &TokenTensor<S>) -> Result<S> {
    let (n_t, n_s, d) = (x.n_t(), x.n_s(), x.d());
    if n_t == 0 || n_s == 0 {
        return Err(Error::Domain("trajectory_sum: empty tensor".into()));
    }
    let mut norms = vec![S::zero(); n_t * n_s];
    for t in 0..n_t {
        for s in 0..n_s {
            let mut acc = S::zero();
            for &v in x.token(t, s) {
                acc += v * v;
            }
            let norm = acc.sqrt();
            // Rejects NaN norms too, hence the negated comparison.
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(norm > S::zero()) {
                return Err(Error::Domain(format!(
                    "trajectory_sum: zero-norm token at frame {t}, index {s}"
                )));
            }
            norms[t * n_s + s] = norm;
        }
    }

    let last = n_t - 1;
    let mut total = S::zero();
    for i in 0..n_s {
        let probe = x.token(last, i);
        let probe_norm = norms[last * n_s + i];
        for t in 0..last {
            let mut best = S::neg_infinity();
            for j in 0..n_s {
                let other = x.token(t, j);
                let mut dot = S::zero();
                for c in 0..d {
                    dot += probe[c] * other[c];
                }
                let sim = dot / (probe_norm * norms[t * n_s + j]);
                if sim > best {
                    best = sim;
                }
            }
            total += best;
        }
    }
    Ok(total / S::from_usize(n_s).unwrap())
}
