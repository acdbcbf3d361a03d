use crate::error::{Error, Result};
use crate::numkernel::minmax_norm;
use crate::scalar::Scalar;
use crate::vitcore::TokenTensor;

use super::config::SemanticScope;

/// Per-token semantic scores in [0, 1]: channel-wise L1 of each token,
/// min-max normalized over the whole clip at once. Returned frame by frame.
pub fn semantic_scores<S: Scalar>(x: &TokenTensor<S>) -> Vec<Vec<S>> {
    semantic_scores_scoped(x, SemanticScope::Global)
}

/// Semantic scores with a selectable normalization scope.
pub fn semantic_scores_scoped<S: Scalar>(x: &TokenTensor<S>, scope: SemanticScope) -> Vec<Vec<S>> {
    let (n_t, n_s) = (x.n_t(), x.n_s());
    let mut raw = Vec::with_capacity(n_t * n_s);
    for t in 0..n_t {
        for s in 0..n_s {
            let mut sum = S::zero();
            for &v in x.token(t, s) {
                sum += v.abs();
            }
            raw.push(sum);
        }
    }
    match scope {
        SemanticScope::Global => {
            let flat = minmax_norm(&raw).expect("n_t * n_s > 0");
            flat.chunks(n_s).map(<[S]>::to_vec).collect()
        }
        SemanticScope::PerFrame => raw
            .chunks(n_s)
            .map(|frame| minmax_norm(frame).expect("n_s > 0"))
            .collect(),
    }
}

/// Semantic-aware combination `(1 - F) * A`, elementwise.
pub fn combine_score<S: Scalar>(a_raw: &[S], f_sem: &[S]) -> Vec<S> {
    debug_assert_eq!(a_raw.len(), f_sem.len());
    a_raw
        .iter()
        .zip(f_sem)
        .map(|(&a, &f)| (S::one() - f) * a)
        .collect()
}

/// Indices of the `keep_count` smallest scores, ascending. Ties keep the
/// lower spatial index.
pub fn select_keep<S: Scalar>(scores: &[S], keep_count: usize) -> Result<Vec<usize>> {
    if keep_count == 0 || keep_count > scores.len() {
        return Err(Error::Config(format!(
            "keep_count {keep_count} out of range for {} scores",
            scores.len()
        )));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    // Stable sort on score only, so equal scores stay in index order.
    idx.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores"));
    let mut kept = idx[..keep_count].to_vec();
    kept.sort_unstable();
    Ok(kept)
}
