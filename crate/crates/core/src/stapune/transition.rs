use crate::error::{Error, Result};
use crate::numkernel::{matmul, softmax_axis, Axis, Matrix};
use crate::scalar::Scalar;

/// Accumulated drop-probability distribution over the currently kept tokens.
/// Non-negative and summing to 1 at the start of every frame iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct AccumScore<S> {
    values: Vec<S>,
}

impl<S: Scalar> AccumScore<S> {
    /// Maximum-entropy start: uniform 1/n over the kept first-frame tokens.
    pub fn uniform(n: usize) -> Self {
        let v = S::one() / S::from_usize(n).unwrap();
        Self {
            values: vec![v; n],
        }
    }

    /// Restrict raw scores to the kept entries and renormalize to sum 1.
    pub fn from_restricted(raw: &[S], kept: &[usize]) -> Result<Self> {
        let mut values: Vec<S> = kept.iter().map(|&i| raw[i]).collect();
        let mut sum = S::zero();
        for &v in &values {
            sum += v;
        }
        // Rejects a NaN sum too, hence the negated comparison.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(sum > S::zero()) {
            return Err(Error::Numeric(
                "accumulated score mass vanished after cutoff".into(),
            ));
        }
        for v in &mut values {
            *v /= sum;
        }
        Ok(Self { values })
    }

    #[inline]
    pub fn values(&self) -> &[S] {
        &self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Non-negative and sums to 1 within `tol`.
    pub fn is_valid(&self, tol: S) -> bool {
        let mut sum = S::zero();
        for &v in &self.values {
            if v < S::zero() {
                return false;
            }
            sum += v;
        }
        (sum - S::one()).abs() <= tol
    }
}

/// Affinity transition from the previous frame's kept tokens to every token
/// of the current frame.
///
/// Logits are plain dot products `curr * prev_kept^T`, optionally scaled by
/// `1/sqrt(d')`. The softmax normalizes over the current-token axis, making
/// each column a distribution — so propagating a probability vector through
/// the matrix yields a probability vector again.
pub fn transition_matrix<S: Scalar>(
    curr: &Matrix<S>,
    prev_kept: &Matrix<S>,
    scaled: bool,
) -> Result<Matrix<S>> {
    if curr.cols() != prev_kept.cols() {
        return Err(Error::Shape(format!(
            "feature widths differ: {} vs {}",
            curr.cols(),
            prev_kept.cols()
        )));
    }
    let mut logits = matmul(curr, &prev_kept.transpose())?;
    if scaled {
        let inv = S::one() / S::from_usize(curr.cols()).unwrap().sqrt();
        logits = logits.map(|v| v * inv);
    }
    Ok(softmax_axis(&logits, Axis::Cols))
}

/// Propagate the kept-token distribution through the transition matrix:
/// raw next-frame scores, one per current-frame token, summing to 1.
pub fn accumulate_step<S: Scalar>(p: &Matrix<S>, s_prev: &AccumScore<S>) -> Result<Vec<S>> {
    if p.cols() != s_prev.len() {
        return Err(Error::Shape(format!(
            "transition has {} columns, score has {} entries",
            p.cols(),
            s_prev.len()
        )));
    }
    let mut out = vec![S::zero(); p.rows()];
    for (i, o) in out.iter_mut().enumerate() {
        let row = p.row(i);
        let mut acc = S::zero();
        for (j, &s) in s_prev.values().iter().enumerate() {
            acc += row[j] * s;
        }
        *o = acc;
    }
    Ok(out)
}
