//! Mode-3 discrete Fourier transform.
//!
//! Convention used everywhere in the crate: the forward transform is
//! unnormalized, `X[f] = sum_t x[t] exp(-2 pi i f t / n3)`, and the inverse
//! carries the `1 / n3` factor. Spectral tensors share the frontal-slice
//! major layout of [`Tensor3`], so frequency slice `f` is contiguous.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::tensor::Tensor3;

/// Complex tensor holding the mode-3 DFT of a real tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTensor3 {
    dims: [usize; 3],
    data: Vec<Complex64>,
}

impl SpectralTensor3 {
    pub fn zeros(dims: [usize; 3]) -> Self {
        SpectralTensor3 {
            dims,
            data: vec![Complex64::new(0.0, 0.0); dims[0] * dims[1] * dims[2]],
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Frequency slice `f` as a row-major `n1 x n2` complex matrix.
    pub fn frequency_slice(&self, f: usize) -> &[Complex64] {
        let area = self.dims[0] * self.dims[1];
        &self.data[f * area..(f + 1) * area]
    }

    pub fn frequency_slice_mut(&mut self, f: usize) -> &mut [Complex64] {
        let area = self.dims[0] * self.dims[1];
        &mut self.data[f * area..(f + 1) * area]
    }

    pub fn get(&self, i: usize, j: usize, f: usize) -> Complex64 {
        self.data[(f * self.dims[0] + i) * self.dims[1] + j]
    }
}

/// Applies an in-place FFT of length `n3` to every tube of `data`.
fn transform_tubes(dims: [usize; 3], data: &mut [Complex64], inverse: bool) {
    let [n1, n2, n3] = dims;
    if n3 == 1 {
        return;
    }
    let area = n1 * n2;
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n3)
    } else {
        planner.plan_fft_forward(n3)
    };
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut tube = vec![Complex64::new(0.0, 0.0); n3];
    for p in 0..area {
        for (f, v) in tube.iter_mut().enumerate() {
            *v = data[f * area + p];
        }
        fft.process_with_scratch(&mut tube, &mut scratch);
        for (f, v) in tube.iter().enumerate() {
            data[f * area + p] = *v;
        }
    }
}

/// Forward (unnormalized) DFT along mode 3.
pub fn fft_mode3(t: &Tensor3) -> SpectralTensor3 {
    let dims = t.dims();
    let mut data: Vec<Complex64> = t
        .as_slice()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    transform_tubes(dims, &mut data, false);
    SpectralTensor3 { dims, data }
}

/// Inverse DFT along mode 3 (scaled by `1 / n3`), keeping the real part.
pub fn ifft_mode3(s: &SpectralTensor3) -> Tensor3 {
    ifft_mode3_complex(s).0
}

/// Inverse DFT that also reports the largest discarded imaginary magnitude.
pub(crate) fn ifft_mode3_complex(s: &SpectralTensor3) -> (Tensor3, f64) {
    let dims = s.dims;
    let mut data = s.data.clone();
    transform_tubes(dims, &mut data, true);
    let scale = 1.0 / dims[2] as f64;
    let mut imag = 0.0f64;
    let real = data
        .iter()
        .map(|c| {
            imag = imag.max((c.im * scale).abs());
            c.re * scale
        })
        .collect();
    (Tensor3::from_raw(dims, real), imag)
}

pub(crate) fn spectral_from_raw(dims: [usize; 3], data: Vec<Complex64>) -> SpectralTensor3 {
    debug_assert_eq!(data.len(), dims[0] * dims[1] * dims[2]);
    SpectralTensor3 { dims, data }
}
