//! Synthetic seismic volumes and noise.
//!
//! Volumes are `n1 x n2 x n3` with the two spatial (inline, crossline) modes
//! first and time last. Clean data is a superposition of Ricker wavelets
//! along linear moveout surfaces, normalized to a peak magnitude of 1.
//!
//! Noise is the sum of a time-decaying acquisition footprint and white
//! Gaussian noise. The Gaussian stream is reproducible across languages:
//!
//! * generator: xoshiro256** seeded by expanding the 64-bit seed with
//!   SplitMix64 (the reference seeding procedure);
//! * uniforms: `u = (next_u64 >> 11) * 2^-53`, in `[0, 1)`;
//! * normals: Box-Muller on consecutive pairs `(u1, u2)`, emitting
//!   `sqrt(-2 ln(1 - u1)) cos(2 pi u2)` then the matching `sin` term;
//! * samples are consumed in canonical tensor layout order.

use std::f64::consts::PI;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::error::{Result, TlsmError};
use crate::tensor::Tensor3;

pub const DEFAULT_DT: f64 = 0.002;
pub const DEFAULT_PEAK_FREQ: f64 = 10.0;
pub const DEFAULT_DIMS: [usize; 3] = [40, 64, 128];
pub const DEFAULT_FOOTPRINT_PERIOD: usize = 4;

/// A planar event: arrival time `t0 + dip_inline * i + dip_crossline * j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventSpec {
    /// Arrival time at trace (0, 0), seconds.
    pub intercept_time: f64,
    /// Seconds per inline trace.
    pub dip_inline: f64,
    /// Seconds per crossline trace.
    pub dip_crossline: f64,
    pub amplitude: f64,
}

impl EventSpec {
    pub fn arrival(&self, i: usize, j: usize) -> f64 {
        self.intercept_time + self.dip_inline * i as f64 + self.dip_crossline * j as f64
    }
}

/// One noise condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Peak footprint amplitude `F`, in `[0, 1]`.
    pub footprint_amplitude: f64,
    /// Gaussian standard deviation.
    pub gaussian_sigma: f64,
    pub seed: u64,
    /// Every `footprint_period`-th inline and crossline trace carries the footprint.
    pub footprint_period: usize,
    /// Exponential decay constant of the footprint along time, in samples.
    pub footprint_decay: f64,
}

impl NoiseSpec {
    /// Default period and a decay of a quarter of the record length.
    pub fn new(footprint_amplitude: f64, gaussian_sigma: f64, seed: u64, n3: usize) -> Self {
        NoiseSpec {
            footprint_amplitude,
            gaussian_sigma,
            seed,
            footprint_period: DEFAULT_FOOTPRINT_PERIOD,
            footprint_decay: n3 as f64 / 4.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.footprint_amplitude) {
            return Err(TlsmError::InvalidArgument(format!(
                "footprint amplitude must lie in [0, 1], got {}",
                self.footprint_amplitude
            )));
        }
        if !(self.gaussian_sigma >= 0.0 && self.gaussian_sigma.is_finite()) {
            return Err(TlsmError::InvalidArgument(format!(
                "gaussian sigma must be nonnegative, got {}",
                self.gaussian_sigma
            )));
        }
        if self.footprint_period == 0 || !(self.footprint_decay > 0.0) {
            return Err(TlsmError::InvalidArgument(
                "footprint period and decay must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Zero-phase Ricker wavelet `(1 - 2 pi^2 f^2 t^2) exp(-pi^2 f^2 t^2)`.
pub fn ricker(peak_freq: f64, t: f64) -> f64 {
    let a = (PI * peak_freq * t).powi(2);
    (1.0 - 2.0 * a) * (-a).exp()
}

/// Three planar events crossing at the center trace, halfway down the record.
pub fn default_events(dims: [usize; 3], dt: f64) -> Vec<EventSpec> {
    let [n1, n2, n3] = dims;
    let record = n3 as f64 * dt;
    let center_time = 0.5 * record;
    let (ci, cj) = ((n1 / 2) as f64, (n2 / 2) as f64);
    // Total moveout across each spatial axis, as a fraction of the record.
    let layout = [(0.30, 0.20, 1.0), (-0.35, 0.25, -0.8), (0.05, -0.40, 0.6)];
    layout
        .iter()
        .map(|&(f1, f2, amplitude)| {
            let dip_inline = f1 * record / n1 as f64;
            let dip_crossline = f2 * record / n2 as f64;
            EventSpec {
                intercept_time: center_time - dip_inline * ci - dip_crossline * cj,
                dip_inline,
                dip_crossline,
                amplitude,
            }
        })
        .collect()
}

/// Superposes the events and scales the result to a peak magnitude of 1.
/// An all-zero volume is returned unscaled.
pub fn generate_clean(dims: [usize; 3], events: &[EventSpec], dt: f64, peak_freq: f64) -> Result<Tensor3> {
    if events.is_empty() {
        return Err(TlsmError::InvalidArgument("at least one event is required".into()));
    }
    if !(dt > 0.0 && peak_freq > 0.0) {
        return Err(TlsmError::InvalidArgument(format!(
            "dt and peak frequency must be positive, got {dt} and {peak_freq}"
        )));
    }
    let mut x = Tensor3::from_fn(dims, |i, j, k| {
        let t = k as f64 * dt;
        events
            .iter()
            .map(|e| e.amplitude * ricker(peak_freq, t - e.arrival(i, j)))
            .sum()
    });
    let peak = x.max_abs();
    if peak > 0.0 {
        x.as_mut_slice().iter_mut().for_each(|v| *v /= peak);
    }
    Ok(x)
}

/// Standard normal variates in the documented portable order.
pub struct GaussianStream {
    rng: Xoshiro256StarStar,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        GaussianStream {
            rng: Xoshiro256StarStar::seed_from_u64(seed),
            spare: None,
        }
    }

    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * (1.0 - u1).ln()).sqrt();
        let angle = 2.0 * PI * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }
}

/// Footprint stripe mask: true where `i` or `j` is a multiple of `period`.
pub fn footprint_trace(i: usize, j: usize, period: usize) -> bool {
    i.is_multiple_of(period) || j.is_multiple_of(period)
}

/// Clean data plus its noise components.
#[derive(Debug, Clone)]
pub struct NoisyVolume {
    /// `x + footprint + gaussian`
    pub noisy: Tensor3,
    pub footprint: Tensor3,
    pub gaussian: Tensor3,
}

pub fn add_noise(x: &Tensor3, spec: &NoiseSpec) -> Result<NoisyVolume> {
    spec.validate()?;
    let dims = x.dims();
    let footprint = Tensor3::from_fn(dims, |i, j, k| {
        if footprint_trace(i, j, spec.footprint_period) {
            spec.footprint_amplitude * (-(k as f64) / spec.footprint_decay).exp()
        } else {
            0.0
        }
    });
    let mut stream = GaussianStream::new(spec.seed);
    let sigma = spec.gaussian_sigma;
    let gaussian_data = (0..x.len()).map(|_| sigma * stream.next_normal()).collect();
    let gaussian = Tensor3::from_raw(dims, gaussian_data);
    let mut noisy = x + &footprint;
    noisy.axpy(1.0, &gaussian);
    Ok(NoisyVolume {
        noisy,
        footprint,
        gaussian,
    })
}
