//! Tensor-tensor product and the t-SVD.
//!
//! Both are evaluated in the mode-3 Fourier domain, where the t-product
//! becomes an independent matrix product per frequency slice and the t-SVD
//! an independent matrix SVD per frequency slice. Factors are kept in
//! economy form: with `r = min(n1, n2)`, `U` is `n1 x r x n3`, `S` is
//! `r x r x n3` and `V` is `n2 x r x n3`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{Result, TlsmError};
use crate::spectral::{fft_mode3, ifft_mode3, ifft_mode3_complex, spectral_from_raw};
use crate::tensor::Tensor3;

type CMatrix = DMatrix<Complex64>;

/// Largest imaginary residue tolerated when folding a reconstruction back
/// to a real tensor, relative to the largest singular value.
const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// The factors of `L = U * S * V^T`.
#[derive(Debug, Clone)]
pub struct TSvdFactors {
    pub u: Tensor3,
    pub s: Tensor3,
    pub v: Tensor3,
    /// Nonincreasing singular values of every frequency slice, `min(n1, n2)`
    /// entries per slice, `n3` slices.
    pub spectral_singulars: Vec<Vec<f64>>,
    dims: [usize; 3],
    u_hat: Vec<CMatrix>,
    v_hat: Vec<CMatrix>,
}

impl TSvdFactors {
    /// Dimensions of the factored tensor.
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn rank_bound(&self) -> usize {
        self.dims[0].min(self.dims[1])
    }
}

fn slice_to_matrix(rows: usize, cols: usize, slice: &[Complex64]) -> CMatrix {
    CMatrix::from_row_slice(rows, cols, slice)
}

fn matrix_into_slice(m: &CMatrix, out: &mut [Complex64]) {
    let cols = m.ncols();
    for i in 0..m.nrows() {
        for j in 0..cols {
            out[i * cols + j] = m[(i, j)];
        }
    }
}

/// t-product `a * b` for `a: n1 x p x n3` and `b: p x n2 x n3`.
pub fn t_product(a: &Tensor3, b: &Tensor3) -> Result<Tensor3> {
    let [n1, p, n3] = a.dims();
    let [p2, n2, n3b] = b.dims();
    if p != p2 || n3 != n3b {
        return Err(TlsmError::DimensionMismatch(format!(
            "t-product of {:?} and {:?}",
            a.dims(),
            b.dims()
        )));
    }
    let fa = fft_mode3(a);
    let fb = fft_mode3(b);
    let mut out = vec![Complex64::new(0.0, 0.0); n1 * n2 * n3];
    out.par_chunks_mut(n1 * n2)
        .enumerate()
        .for_each(|(f, chunk)| {
            let ma = slice_to_matrix(n1, p, fa.frequency_slice(f));
            let mb = slice_to_matrix(p, n2, fb.frequency_slice(f));
            matrix_into_slice(&(ma * mb), chunk);
        });
    Ok(ifft_mode3(&spectral_from_raw([n1, n2, n3], out)))
}

struct SliceSvd {
    u: CMatrix,
    v: CMatrix,
    singulars: Vec<f64>,
}

fn slice_svd(rows: usize, cols: usize, slice: &[Complex64], index: usize) -> Result<SliceSvd> {
    let m = slice_to_matrix(rows, cols, slice);
    let max_iters = 1000 * rows.max(cols);
    let svd = nalgebra::SVD::try_new(m, true, true, f64::EPSILON * 5.0, max_iters)
        .ok_or(TlsmError::SvdNonConvergence { slice: index })?;
    let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
        return Err(TlsmError::SvdNonConvergence { slice: index });
    };
    let singulars = svd.singular_values.iter().map(|&s| s.max(0.0)).collect();
    Ok(SliceSvd {
        u,
        v: v_t.adjoint(),
        singulars,
    })
}

/// Economy t-SVD via per-frequency matrix SVDs.
///
/// Only frequencies `0..=n3/2` are decomposed; the remaining slices are
/// complex conjugates, which keeps `U` and `V` exactly real.
pub fn t_svd(l: &Tensor3) -> Result<TSvdFactors> {
    let dims = l.dims();
    let [n1, n2, n3] = dims;
    let r = n1.min(n2);
    let spectral = fft_mode3(l);

    let half: Vec<SliceSvd> = (0..=n3 / 2)
        .into_par_iter()
        .map(|f| slice_svd(n1, n2, spectral.frequency_slice(f), f))
        .collect::<Result<_>>()?;

    let mut u_hat = Vec::with_capacity(n3);
    let mut v_hat = Vec::with_capacity(n3);
    let mut spectral_singulars = Vec::with_capacity(n3);
    for f in 0..n3 {
        let (src, conjugate) = if f <= n3 / 2 { (f, false) } else { (n3 - f, true) };
        let svd = &half[src];
        if conjugate {
            u_hat.push(svd.u.map(|c| c.conj()));
            v_hat.push(svd.v.map(|c| c.conj()));
        } else {
            u_hat.push(svd.u.clone());
            v_hat.push(svd.v.clone());
        }
        let mut s = svd.singulars.clone();
        s.resize(r, 0.0);
        spectral_singulars.push(s);
    }

    let u = fold_factor(&u_hat, [n1, r, n3]);
    let v = fold_factor(&v_hat, [n2, r, n3]);
    let mut s_hat = vec![Complex64::new(0.0, 0.0); r * r * n3];
    for (f, sv) in spectral_singulars.iter().enumerate() {
        for (i, &s) in sv.iter().enumerate() {
            s_hat[(f * r + i) * r + i] = Complex64::new(s, 0.0);
        }
    }
    let s = ifft_mode3(&spectral_from_raw([r, r, n3], s_hat));

    Ok(TSvdFactors {
        u,
        s,
        v,
        spectral_singulars,
        dims,
        u_hat,
        v_hat,
    })
}

fn fold_factor(slices: &[CMatrix], dims: [usize; 3]) -> Tensor3 {
    let area = dims[0] * dims[1];
    let mut data = vec![Complex64::new(0.0, 0.0); area * dims[2]];
    for (f, m) in slices.iter().enumerate() {
        matrix_into_slice(m, &mut data[f * area..(f + 1) * area]);
    }
    ifft_mode3(&spectral_from_raw(dims, data))
}

/// Rebuilds `U * S' * V^T` where `S'` carries `new_singulars` on the
/// diagonal of every frequency slice.
///
/// The replacement lists must be nonnegative and conjugate-symmetric across
/// frequencies (`s[f] == s[n3 - f]`) so that the result is real.
pub fn t_reconstruct(factors: &TSvdFactors, new_singulars: &[Vec<f64>]) -> Result<Tensor3> {
    let [n1, n2, n3] = factors.dims;
    let r = factors.rank_bound();
    if new_singulars.len() != n3 || new_singulars.iter().any(|s| s.len() != r) {
        return Err(TlsmError::DimensionMismatch(format!(
            "expected {n3} singular-value lists of length {r}"
        )));
    }
    let mut peak = 0.0f64;
    for (f, list) in new_singulars.iter().enumerate() {
        for &s in list {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(TlsmError::InvalidArgument(format!(
                    "replacement singular value {s} on slice {f} is negative or not finite"
                )));
            }
            peak = peak.max(s);
        }
    }

    let mut out = vec![Complex64::new(0.0, 0.0); n1 * n2 * n3];
    out.par_chunks_mut(n1 * n2)
        .enumerate()
        .for_each(|(f, chunk)| {
            let u = &factors.u_hat[f];
            let v = &factors.v_hat[f];
            let mut scaled = u.clone();
            for (c, &s) in new_singulars[f].iter().enumerate() {
                scaled.column_mut(c).scale_mut(s);
            }
            matrix_into_slice(&(scaled * v.adjoint()), chunk);
        });
    let (real, imag) = ifft_mode3_complex(&spectral_from_raw([n1, n2, n3], out));
    if imag > IMAG_RESIDUE_TOL * peak.max(1.0) {
        return Err(TlsmError::InvalidArgument(format!(
            "replacement singular values are not conjugate-symmetric (imaginary residue {imag:e})"
        )));
    }
    Ok(real)
}

/// Tensor nuclear norm: `(1 / n3) * sum_f ||L_f||_*` over frequency slices.
pub fn tensor_nuclear_norm(l: &Tensor3) -> Result<f64> {
    let f = t_svd(l)?;
    let n3 = l.dims()[2] as f64;
    Ok(f.spectral_singulars.iter().flatten().sum::<f64>() / n3)
}
