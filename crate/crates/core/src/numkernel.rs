//! Minimal dense numeric kernels.
//!
//! Row-major matrices with deterministic, fixed left-to-right summation per
//! output element, so independent reference implementations can be compared
//! at tight tolerances. No BLAS, no threads, no learning-framework semantics.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Axis along which a per-slice operation normalizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Each row is treated as one slice.
    Rows,
    /// Each column is treated as one slice.
    Cols,
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn new(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "matrix {rows}x{cols} needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = S::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn data(&self) -> &[S] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// Copy of the column range `lo..hi`.
    pub fn col_slice(&self, lo: usize, hi: usize) -> Self {
        debug_assert!(lo <= hi && hi <= self.cols);
        let w = hi - lo;
        let mut out = Self::zeros(self.rows, w);
        for i in 0..self.rows {
            out.data[i * w..(i + 1) * w].copy_from_slice(&self.data[i * self.cols + lo..i * self.cols + hi]);
        }
        out
    }

    /// Copy of the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Standard matrix product; per output element the k-sum runs left to right.
pub fn matmul<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Result<Matrix<S>> {
    if a.cols != b.rows {
        return Err(Error::Shape(format!(
            "matmul: {}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    debug_assert!(a.is_finite() && b.is_finite(), "matmul: non-finite input");
    let (n, k, m) = (a.rows, a.cols, b.cols);
    let mut out = vec![S::zero(); n * m];
    // ikj loop order: cache friendly and still left-to-right in k per element.
    for i in 0..n {
        for kk in 0..k {
            let aik = a.data[i * k + kk];
            let brow = &b.data[kk * m..(kk + 1) * m];
            let orow = &mut out[i * m..(i + 1) * m];
            for j in 0..m {
                orow[j] += aik * brow[j];
            }
        }
    }
    Matrix::new(n, m, out)
}

/// Exp-normalize along `axis` with max subtraction; each slice sums to 1.
#[allow(clippy::needless_range_loop)] // column gathers read clearest indexed
pub fn softmax_axis<S: Scalar>(m: &Matrix<S>, axis: Axis) -> Matrix<S> {
    debug_assert!(m.is_finite(), "softmax_axis: non-finite input");
    let mut out = Matrix::zeros(m.rows, m.cols);
    match axis {
        Axis::Rows => {
            for i in 0..m.rows {
                softmax_slice(m.row(i), &mut out.data[i * m.cols..(i + 1) * m.cols]);
            }
        }
        Axis::Cols => {
            let mut col = vec![S::zero(); m.rows];
            let mut tmp = vec![S::zero(); m.rows];
            for j in 0..m.cols {
                for i in 0..m.rows {
                    col[i] = m.get(i, j);
                }
                softmax_slice(&col, &mut tmp);
                for i in 0..m.rows {
                    out.set(i, j, tmp[i]);
                }
            }
        }
    }
    out
}

fn softmax_slice<S: Scalar>(src: &[S], dst: &mut [S]) {
    let mut max = S::neg_infinity();
    for &v in src {
        if v > max {
            max = v;
        }
    }
    let mut sum = S::zero();
    for (d, &v) in dst.iter_mut().zip(src) {
        let e = (v - max).exp();
        *d = e;
        sum += e;
    }
    for d in dst.iter_mut() {
        *d /= sum;
    }
}

/// Min-max normalization into [0, 1]; a constant vector maps to all zeros.
pub fn minmax_norm<S: Scalar>(v: &[S]) -> Result<Vec<S>> {
    if v.is_empty() {
        return Err(Error::Domain("minmax_norm: empty input".into()));
    }
    debug_assert!(v.iter().all(|x| x.is_finite()), "minmax_norm: non-finite input");
    let mut lo = v[0];
    let mut hi = v[0];
    for &x in v {
        if x < lo {
            lo = x;
        }
        if x > hi {
            hi = x;
        }
    }
    if hi == lo {
        return Ok(vec![S::zero(); v.len()]);
    }
    let span = hi - lo;
    Ok(v.iter().map(|&x| (x - lo) / span).collect())
}

/// Per-row standardization (epsilon 1e-5) followed by the affine map
/// `gamma * x + beta`.
pub fn layer_norm<S: Scalar>(x: &Matrix<S>, gamma: &[S], beta: &[S]) -> Result<Matrix<S>> {
    if gamma.len() != x.cols || beta.len() != x.cols {
        return Err(Error::Shape(format!(
            "layer_norm: gamma/beta lengths {}/{} vs {} cols",
            gamma.len(),
            beta.len(),
            x.cols
        )));
    }
    let eps = S::cast(1e-5);
    let n = S::from_usize(x.cols).unwrap();
    let mut out = Matrix::zeros(x.rows, x.cols);
    for i in 0..x.rows {
        let row = x.row(i);
        let mut mean = S::zero();
        for &v in row {
            mean += v;
        }
        mean /= n;
        let mut var = S::zero();
        for &v in row {
            let d = v - mean;
            var += d * d;
        }
        var /= n;
        let inv = S::one() / (var + eps).sqrt();
        let orow = &mut out.data[i * x.cols..(i + 1) * x.cols];
        for j in 0..x.cols {
            orow[j] = (row[j] - mean) * inv * gamma[j] + beta[j];
        }
    }
    Ok(out)
}

/// Elementwise GELU, tanh approximation with fixed constants.
pub fn gelu<S: Scalar>(x: &Matrix<S>) -> Matrix<S> {
    let half = S::cast(0.5);
    let c0 = S::cast(0.797_884_560_802_865_4); // sqrt(2/pi)
    let c1 = S::cast(0.044_715);
    x.map(|v| half * v * (S::one() + (c0 * (v + c1 * v * v * v)).tanh()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m32(rows: usize, cols: usize, v: &[f32]) -> Matrix<f32> {
        Matrix::new(rows, cols, v.to_vec()).unwrap()
    }

    #[test]
    fn matmul_identity_is_bitwise_exact() {
        let m = m32(3, 2, &[1.5, -2.25, 0.125, 7.0, 3.5, -0.75]);
        let out = matmul(&Matrix::identity(3), &m).unwrap();
        assert_eq!(out.data(), m.data());
    }

    #[test]
    fn matmul_zero_times_anything_is_zero() {
        let z = Matrix::<f32>::zeros(2, 3);
        let m = m32(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let out = matmul(&z, &m).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matmul_matches_naive_triple_loop() {
        let a = m32(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let b = m32(2, 1, &[5.0, 6.0]);
        let out = matmul(&a, &b).unwrap();
        assert_eq!(out.data(), &[17.0, 39.0]);
    }

    #[test]
    fn matmul_shape_mismatch_errors() {
        let a = m32(2, 3, &[0.0; 6]);
        let b = m32(2, 2, &[0.0; 4]);
        assert!(matches!(matmul(&a, &b), Err(Error::Shape(_))));
    }

    #[test]
    fn softmax_constant_row_is_uniform() {
        let m = m32(1, 4, &[3.0, 3.0, 3.0, 3.0]);
        let s = softmax_axis(&m, Axis::Rows);
        for &v in s.data() {
            assert!((v - 0.25).abs() < 1e-6);
        }
    }

    #[test]
    fn softmax_dominant_entry_saturates() {
        let m = m32(1, 3, &[1e4, 0.0, 0.0]);
        let s = softmax_axis(&m, Axis::Rows);
        assert!((s.get(0, 0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn softmax_shift_invariance() {
        let m = m32(2, 3, &[0.1, -1.2, 2.3, 4.0, 0.0, -3.0]);
        let shifted = m.map(|v| v + 17.5);
        let a = softmax_axis(&m, Axis::Rows);
        let b = softmax_axis(&shifted, Axis::Rows);
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn softmax_cols_sum_to_one() {
        let m = m32(3, 2, &[0.5, 2.0, -1.0, 0.0, 4.0, 1.0]);
        let s = softmax_axis(&m, Axis::Cols);
        for j in 0..2 {
            let sum: f32 = (0..3).map(|i| s.get(i, j)).sum();
            assert!((sum - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn minmax_basic() {
        let out = minmax_norm(&[0.0f32, 5.0, 10.0]).unwrap();
        assert_eq!(out, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn minmax_constant_is_zeros() {
        let out = minmax_norm(&[2.5f32, 2.5, 2.5]).unwrap();
        assert_eq!(out, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn minmax_single_element_is_zero() {
        assert_eq!(minmax_norm(&[42.0f32]).unwrap(), vec![0.0]);
    }

    #[test]
    fn minmax_empty_errors() {
        assert!(matches!(minmax_norm::<f32>(&[]), Err(Error::Domain(_))));
    }

    #[test]
    fn layer_norm_constant_row_is_zero() {
        let x = m32(1, 4, &[7.0; 4]);
        let out = layer_norm(&x, &[1.0; 4], &[0.0; 4]).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn layer_norm_unit_variance() {
        let x = m32(1, 8, &[1.0, -2.0, 0.5, 3.0, 4.5, -1.25, 0.0, 2.0]);
        let out = layer_norm(&x, &[1.0; 8], &[0.0; 8]).unwrap();
        let mean: f32 = out.data().iter().sum::<f32>() / 8.0;
        let var: f32 = out.data().iter().map(|v| (v - mean) * (v - mean)).sum::<f32>() / 8.0;
        assert!(mean.abs() < 1e-5);
        assert!((var - 1.0).abs() < 1e-4);
    }

    #[test]
    fn layer_norm_gamma_zero_gives_beta() {
        let x = m32(2, 3, &[1.0, 2.0, 3.0, -1.0, 0.0, 1.0]);
        let beta = [0.5, -0.5, 2.0];
        let out = layer_norm(&x, &[0.0; 3], &beta).unwrap();
        for i in 0..2 {
            assert_eq!(out.row(i), &beta);
        }
    }

    #[test]
    fn layer_norm_length_mismatch_errors() {
        let x = m32(1, 3, &[1.0, 2.0, 3.0]);
        assert!(matches!(layer_norm(&x, &[1.0; 2], &[0.0; 3]), Err(Error::Shape(_))));
    }

    #[test]
    fn gelu_fixed_points() {
        let x = m32(1, 3, &[0.0, 10.0, -10.0]);
        let out = gelu(&x);
        assert_eq!(out.get(0, 0), 0.0);
        assert!((out.get(0, 1) - 10.0).abs() < 1e-3);
        assert!(out.get(0, 2).abs() < 1e-3);
    }

    #[test]
    fn kernels_are_pure() {
        let a = m32(2, 2, &[0.3, -1.7, 2.2, 0.9]);
        let b = m32(2, 2, &[1.1, 0.2, -0.4, 0.8]);
        assert_eq!(matmul(&a, &b).unwrap().data(), matmul(&a, &b).unwrap().data());
        assert_eq!(
            softmax_axis(&a, Axis::Rows).data(),
            softmax_axis(&a, Axis::Rows).data()
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn finite_vec(len: usize) -> impl Strategy<Value = Vec<f32>> {
            proptest::collection::vec(-50.0f32..50.0, len)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn softmax_rows_sum_to_one(data in finite_vec(12)) {
                let m = Matrix::new(3, 4, data).unwrap();
                let s = softmax_axis(&m, Axis::Rows);
                for i in 0..3 {
                    let sum: f32 = s.row(i).iter().sum();
                    prop_assert!((sum - 1.0).abs() < 1e-6);
                }
            }

            #[test]
            fn minmax_bounds_and_extremes(data in finite_vec(9)) {
                let out = minmax_norm(&data).unwrap();
                prop_assert!(out.iter().all(|&v| (0.0..=1.0).contains(&v)));
                let lo = data.iter().cloned().fold(f32::INFINITY, f32::min);
                let hi = data.iter().cloned().fold(f32::NEG_INFINITY, f32::max);
                if hi > lo {
                    let imin = data.iter().position(|&v| v == lo).unwrap();
                    let imax = data.iter().position(|&v| v == hi).unwrap();
                    prop_assert_eq!(out[imin], 0.0);
                    prop_assert_eq!(out[imax], 1.0);
                }
            }

            #[test]
            fn identity_matmul_bitwise(data in finite_vec(12)) {
                let m = Matrix::new(4, 3, data).unwrap();
                let out = matmul(&Matrix::identity(4), &m).unwrap();
                prop_assert_eq!(out.data(), m.data());
            }
        }
    }
}
