//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use rustfft::num_complex::Complex64;
use tlsm::Tensor3;

pub struct Rng(Xoshiro256StarStar);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(Xoshiro256StarStar::seed_from_u64(seed))
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }

    /// Uniform in `(0, hi]`.
    pub fn positive(&mut self, hi: f64) -> f64 {
        hi - self.uniform(0.0, hi)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.0.next_u64() % n as u64) as usize
    }

    pub fn tensor(&mut self, dims: [usize; 3]) -> Tensor3 {
        Tensor3::from_fn(dims, |_, _, _| self.uniform(-1.0, 1.0))
    }
}

/// `(X_hat)_f(i, j) = sum_k X(i, j, k) exp(-2 pi i f k / n3)`, returned as row-major matrices.
pub fn naive_dft_slices(t: &Tensor3) -> Vec<Vec<Complex64>> {
    let [n1, n2, n3] = t.dims();
    (0..n3)
        .map(|f| {
            let mut m = vec![Complex64::new(0.0, 0.0); n1 * n2];
            for i in 0..n1 {
                for j in 0..n2 {
                    for k in 0..n3 {
                        let w = -2.0 * PI * (f * k) as f64 / n3 as f64;
                        m[i * n2 + j] += Complex64::from_polar(t[(i, j, k)], w);
                    }
                }
            }
            m
        })
        .collect()
}

/// Singular values of a complex `rows x cols` row-major matrix by one-sided
/// (Hestenes) Jacobi rotations, sorted descending.
pub fn jacobi_singular_values(m: &[Complex64], rows: usize, cols: usize) -> Vec<f64> {
    // Work on columns of A (or A^H when wide) so that there are at most `rows` columns.
    let (nr, nc, cols_of): (usize, usize, Box<dyn Fn(usize, usize) -> Complex64>) = if rows >= cols {
        (rows, cols, Box::new(|r, c| m[r * cols + c]))
    } else {
        (cols, rows, Box::new(|r, c| m[c * cols + r].conj()))
    };
    let mut a: Vec<Vec<Complex64>> = (0..nc).map(|c| (0..nr).map(|r| cols_of(r, c)).collect()).collect();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..nc {
            for q in p + 1..nc {
                let alpha: f64 = a[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = a[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = a[p].iter().zip(&a[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..nr {
                    let x = a[p][r];
                    let y = a[q][r] * phase.conj();
                    a[p][r] = x * c - y * s;
                    a[q][r] = x * s + y * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = a.iter().map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sv
}

/// Dense row-major matrix of the circular forward difference along one axis
/// of an `n1 x n2` slice vectorized as `i * n2 + j`.
pub fn difference_matrix(n1: usize, n2: usize, along_rows: bool) -> Vec<f64> {
    let n = n1 * n2;
    let mut d = vec![0.0; n * n];
    for i in 0..n1 {
        for j in 0..n2 {
            let row = i * n2 + j;
            let next = if along_rows { ((i + 1) % n1) * n2 + j } else { i * n2 + (j + 1) % n2 };
            d[row * n + next] += 1.0;
            d[row * n + row] -= 1.0;
        }
    }
    d
}

pub fn mat_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..m.len() / n).map(|r| (0..n).map(|c| m[r * n + c] * v[c]).sum()).collect()
}

pub fn mat_t_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let rows = v.len();
    let n = m.len() / rows;
    (0..n).map(|c| (0..rows).map(|r| m[r * n + c] * v[r]).sum()).collect()
}

pub fn mat_t_mat(m: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            out[r * n + c] = (0..n).map(|k| m[k * n + r] * m[k * n + c]).sum();
        }
    }
    out
}

/// Gaussian elimination with partial pivoting on a dense `n x n` system.
pub fn dense_solve(mut m: Vec<f64>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[x * n + col].abs().partial_cmp(&m[y * n + col].abs()).unwrap())
            .unwrap();
        if pivot != col {
            for c in 0..n {
                m.swap(col * n + c, pivot * n + c);
            }
            b.swap(col, pivot);
        }
        for r in col + 1..n {
            let factor = m[r * n + col] / m[col * n + col];
            if factor != 0.0 {
                for c in col..n {
                    m[r * n + c] -= factor * m[col * n + c];
                }
                b[r] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r * n + c] * x[c]).sum();
        x[r] = (b[r] - s) / m[r * n + r];
    }
    x
}

pub fn relative_error(x: &Tensor3, reference: &Tensor3) -> f64 {
    (x - reference).frobenius_norm() / reference.frobenius_norm().max(f64::MIN_POSITIVE)
}
