//! Dense third-order tensors.
//!
//! Storage is frontal-slice major: entry `(i, j, k)` of an `n1 x n2 x n3`
//! tensor lives at offset `(k * n1 + i) * n2 + j`. Each frontal slice is a
//! contiguous row-major `n1 x n2` matrix, and a tube (fixed `i`, `j`) has
//! stride `n1 * n2`. This layout is also the on-disk payload order.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::error::{Result, TlsmError};

/// One of the two spatial modes along which first-order differences are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpatialMode {
    /// Mode 1 (row index `i` of each frontal slice, the inline direction).
    First,
    /// Mode 2 (column index `j` of each frontal slice, the crossline direction).
    Second,
}

impl SpatialMode {
    pub fn from_index(mode: usize) -> Result<Self> {
        match mode {
            1 => Ok(SpatialMode::First),
            2 => Ok(SpatialMode::Second),
            other => Err(TlsmError::InvalidArgument(format!(
                "difference mode must be 1 or 2, got {other}"
            ))),
        }
    }
}

/// A dense real `n1 x n2 x n3` tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: [usize; 3],
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dims: [usize; 3]) -> Self {
        Self::filled(dims, 0.0)
    }

    pub fn filled(dims: [usize; 3], value: f64) -> Self {
        assert!(
            dims.iter().all(|&d| d > 0),
            "tensor dimensions must be positive, got {dims:?}"
        );
        Tensor3 {
            dims,
            data: vec![value; dims[0] * dims[1] * dims[2]],
        }
    }

    /// Wraps `data` (in canonical layout) as a tensor, rejecting bad lengths
    /// and non-finite entries.
    pub fn from_vec(dims: [usize; 3], data: Vec<f64>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(TlsmError::InvalidArgument(format!(
                "tensor dimensions must be positive, got {dims:?}"
            )));
        }
        let expected = dims[0] * dims[1] * dims[2];
        if data.len() != expected {
            return Err(TlsmError::DimensionMismatch(format!(
                "{dims:?} needs {expected} entries, got {}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(TlsmError::InvalidArgument(format!(
                "entry {pos} is not finite"
            )));
        }
        Ok(Tensor3 { dims, data })
    }

    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(dims);
        let [n1, n2, n3] = dims;
        for k in 0..n3 {
            for i in 0..n1 {
                for j in 0..n2 {
                    t.data[(k * n1 + i) * n2 + j] = f(i, j, k);
                }
            }
        }
        t
    }

    pub(crate) fn from_raw(dims: [usize; 3], data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dims[0] * dims[1] * dims[2]);
        Tensor3 { dims, data }
    }

    #[inline]
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.dims[0] + i) * self.dims[1] + j
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Frontal slice `k` as a row-major `n1 x n2` slice.
    pub fn frontal_slice(&self, k: usize) -> &[f64] {
        let area = self.dims[0] * self.dims[1];
        &self.data[k * area..(k + 1) * area]
    }

    pub fn frontal_slice_mut(&mut self, k: usize) -> &mut [f64] {
        let area = self.dims[0] * self.dims[1];
        &mut self.data[k * area..(k + 1) * area]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Euclidean inner product of the vectorized tensors.
    pub fn dot(&self, other: &Tensor3) -> f64 {
        assert_eq!(self.dims, other.dims, "dot: dimension mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor3 {
        Tensor3 {
            dims: self.dims,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Tensor3, f: impl Fn(f64, f64) -> f64) -> Tensor3 {
        assert_eq!(self.dims, other.dims, "zip_map: dimension mismatch");
        Tensor3 {
            dims: self.dims,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// `self += scale * other`.
    pub fn axpy(&mut self, scale: f64, other: &Tensor3) {
        assert_eq!(self.dims, other.dims, "axpy: dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
    }

    /// Circular forward difference: `out[i] = t[i + 1 mod n] - t[i]` along `mode`.
    pub fn diff_circular(&self, mode: SpatialMode) -> Tensor3 {
        let [n1, n2, n3] = self.dims;
        let mut out = vec![0.0; self.data.len()];
        for k in 0..n3 {
            let base = k * n1 * n2;
            for i in 0..n1 {
                for j in 0..n2 {
                    let here = base + i * n2 + j;
                    let next = match mode {
                        SpatialMode::First => base + ((i + 1) % n1) * n2 + j,
                        SpatialMode::Second => base + i * n2 + (j + 1) % n2,
                    };
                    out[here] = self.data[next] - self.data[here];
                }
            }
        }
        Tensor3::from_raw(self.dims, out)
    }

    /// Adjoint of [`diff_circular`](Self::diff_circular):
    /// `out[i] = t[i - 1 mod n] - t[i]` along `mode`.
    pub fn diff_adjoint(&self, mode: SpatialMode) -> Tensor3 {
        let [n1, n2, n3] = self.dims;
        let mut out = vec![0.0; self.data.len()];
        for k in 0..n3 {
            let base = k * n1 * n2;
            for i in 0..n1 {
                for j in 0..n2 {
                    let here = base + i * n2 + j;
                    let prev = match mode {
                        SpatialMode::First => base + ((i + n1 - 1) % n1) * n2 + j,
                        SpatialMode::Second => base + i * n2 + (j + n2 - 1) % n2,
                    };
                    out[here] = self.data[prev] - self.data[here];
                }
            }
        }
        Tensor3::from_raw(self.dims, out)
    }

    /// Tensor transpose under the t-product: every frontal slice is
    /// transposed and slices `2..n3` are taken in reverse order.
    pub fn t_transpose(&self) -> Tensor3 {
        let [n1, n2, n3] = self.dims;
        let mut out = Tensor3::zeros([n2, n1, n3]);
        for k in 0..n3 {
            let src = if k == 0 { 0 } else { n3 - k };
            let from = self.frontal_slice(src);
            let to = out.frontal_slice_mut(k);
            for i in 0..n1 {
                for j in 0..n2 {
                    to[j * n1 + i] = from[i * n2 + j];
                }
            }
        }
        out
    }

    /// The t-product identity: first frontal slice is the `n x n` identity,
    /// all others zero.
    pub fn identity(n: usize, n3: usize) -> Tensor3 {
        let mut t = Tensor3::zeros([n, n, n3]);
        for i in 0..n {
            let idx = t.offset(i, i, 0);
            t.data[idx] = 1.0;
        }
        t
    }
}

pub fn frobenius_norm(t: &Tensor3) -> f64 {
    t.frobenius_norm()
}

pub fn diff_circular(t: &Tensor3, mode: SpatialMode) -> Tensor3 {
    t.diff_circular(mode)
}

pub fn diff_adjoint(t: &Tensor3, mode: SpatialMode) -> Tensor3 {
    t.diff_adjoint(mode)
}

impl Index<(usize, usize, usize)> for Tensor3 {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &f64 {
        &self.data[self.offset(i, j, k)]
    }
}

impl IndexMut<(usize, usize, usize)> for Tensor3 {
    #[inline]
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut f64 {
        let idx = self.offset(i, j, k);
        &mut self.data[idx]
    }
}

impl Add for &Tensor3 {
    type Output = Tensor3;

    fn add(self, rhs: &Tensor3) -> Tensor3 {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &Tensor3 {
    type Output = Tensor3;

    fn sub(self, rhs: &Tensor3) -> Tensor3 {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &Tensor3 {
    type Output = Tensor3;

    fn mul(self, rhs: f64) -> Tensor3 {
        self.map(|a| a * rhs)
    }
}
