use crate::error::{Error, Result};
use crate::numkernel::Matrix;
use crate::scalar::Scalar;

/// Dense token block: `n_t` temporal slots x `n_s` spatial tokens x `d`
/// channels, laid out slot-major then token then channel.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenTensor<S> {
    n_t: usize,
    n_s: usize,
    d: usize,
    data: Vec<S>,
}

impl<S: Scalar> TokenTensor<S> {
    pub fn new(n_t: usize, n_s: usize, d: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != n_t * n_s * d {
            return Err(Error::Shape(format!(
                "token tensor {n_t}x{n_s}x{d} needs {} values, got {}",
                n_t * n_s * d,
                data.len()
            )));
        }
        Ok(Self { n_t, n_s, d, data })
    }

    pub fn zeros(n_t: usize, n_s: usize, d: usize) -> Self {
        Self {
            n_t,
            n_s,
            d,
            data: vec![S::zero(); n_t * n_s * d],
        }
    }

    #[inline]
    pub fn n_t(&self) -> usize {
        self.n_t
    }

    #[inline]
    pub fn n_s(&self) -> usize {
        self.n_s
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn data(&self) -> &[S] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    #[inline]
    pub fn token(&self, t: usize, s: usize) -> &[S] {
        let base = (t * self.n_s + s) * self.d;
        &self.data[base..base + self.d]
    }

    #[inline]
    pub fn token_mut(&mut self, t: usize, s: usize) -> &mut [S] {
        let base = (t * self.n_s + s) * self.d;
        &mut self.data[base..base + self.d]
    }

    /// View the whole tensor as an `(n_t * n_s) x d` matrix (copy-free move).
    pub fn into_matrix(self) -> Matrix<S> {
        Matrix::new(self.n_t * self.n_s, self.d, self.data).expect("layout is consistent")
    }

    /// Rebuild from an `(n_t * n_s) x d` matrix.
    pub fn from_matrix(n_t: usize, n_s: usize, m: Matrix<S>) -> Result<Self> {
        if m.rows() != n_t * n_s {
            return Err(Error::Shape(format!(
                "matrix has {} rows, expected {}",
                m.rows(),
                n_t * n_s
            )));
        }
        let d = m.cols();
        Self::new(n_t, n_s, d, m.into_data())
    }

    /// Copy of one temporal slot as an `n_s x d` matrix.
    pub fn frame_matrix(&self, t: usize) -> Matrix<S> {
        let base = t * self.n_s * self.d;
        Matrix::new(
            self.n_s,
            self.d,
            self.data[base..base + self.n_s * self.d].to_vec(),
        )
        .expect("layout is consistent")
    }

    /// Reverse the temporal axis.
    pub fn reverse_frames(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        let stride = self.n_s * self.d;
        for t in (0..self.n_t).rev() {
            data.extend_from_slice(&self.data[t * stride..(t + 1) * stride]);
        }
        Self {
            n_t: self.n_t,
            n_s: self.n_s,
            d: self.d,
            data,
        }
    }

    /// Keep only the listed spatial indices in each slot. Every kept list
    /// must have the same length; tokens are copied bit-for-bit.
    pub fn select_per_frame(&self, kept: &[Vec<usize>]) -> Result<Self> {
        if kept.len() != self.n_t {
            return Err(Error::Shape(format!(
                "kept lists for {} slots, tensor has {}",
                kept.len(),
                self.n_t
            )));
        }
        let new_ns = kept.first().map_or(0, Vec::len);
        if kept.iter().any(|k| k.len() != new_ns) {
            return Err(Error::Shape("uneven kept counts across slots".into()));
        }
        let mut data = Vec::with_capacity(self.n_t * new_ns * self.d);
        for (t, frame_kept) in kept.iter().enumerate() {
            for &s in frame_kept {
                if s >= self.n_s {
                    return Err(Error::Shape(format!(
                        "kept index {s} out of range for n_s {}",
                        self.n_s
                    )));
                }
                data.extend_from_slice(self.token(t, s));
            }
        }
        Self::new(self.n_t, new_ns, self.d, data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// RGB video clip, `frames x height x width x 3`, channel-last.
#[derive(Debug, Clone, PartialEq)]
pub struct Video<S> {
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> Video<S> {
    pub fn new(frames: usize, height: usize, width: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != frames * height * width * 3 {
            return Err(Error::Shape(format!(
                "video {frames}x{height}x{width}x3 needs {} values, got {}",
                frames * height * width * 3,
                data.len()
            )));
        }
        Ok(Self {
            frames,
            height,
            width,
            data,
        })
    }

    pub fn constant(frames: usize, height: usize, width: usize, value: S) -> Self {
        Self {
            frames,
            height,
            width,
            data: vec![value; frames * height * width * 3],
        }
    }

    #[inline]
    pub fn pixel(&self, t: usize, y: usize, x: usize) -> &[S] {
        let base = ((t * self.height + y) * self.width + x) * 3;
        &self.data[base..base + 3]
    }

    #[inline]
    pub fn pixel_mut(&mut self, t: usize, y: usize, x: usize) -> &mut [S] {
        let base = ((t * self.height + y) * self.width + x) * 3;
        &mut self.data[base..base + 3]
    }
}
