//! ADMM solver for TLSM denoising.
//!
//! The observation `Y` is split as `Z = X`, `D1 = grad1(X - Y)` and
//! `D2 = grad2(X)`, and each outer iteration runs
//!
//! 1. the X update, a shifted Laplacian solve diagonalized by the 2-D DFT
//!    of every frontal slice;
//! 2. the Z update, LSM shrinkage of the spectral singular values of `X + B`;
//! 3. the D1 and D2 updates, LSM shrinkage of the vectorized differences;
//! 4. the three scaled multiplier updates.
//!
//! The ablation modes switch individual priors back to plain
//! soft-thresholding.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Result, TlsmError};
use crate::lsm::{self, LsmParams, DEFAULT_EPSILON};
use crate::metrics;
use crate::tensor::{SpatialMode, Tensor3};
use crate::tsvd;

/// Alternation rounds of the LSM pair solve per outer iteration.
pub const LSM_ROUNDS: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SolverMode {
    /// LSM on the low-rank and both difference priors.
    #[default]
    Tlsm,
    /// LSM on the low-rank prior only; difference priors soft-thresholded.
    TlsmTnn,
    /// LSM on the difference priors only; low-rank prior soft-thresholded.
    TlsmUtv,
}

impl SolverMode {
    pub const ALL: [SolverMode; 3] = [SolverMode::Tlsm, SolverMode::TlsmTnn, SolverMode::TlsmUtv];

    pub fn as_str(&self) -> &'static str {
        match self {
            SolverMode::Tlsm => "TLSM",
            SolverMode::TlsmTnn => "TLSM-TNN",
            SolverMode::TlsmUtv => "TLSM-UTV",
        }
    }

    fn low_rank_shrinkage(&self) -> Shrinkage {
        match self {
            SolverMode::Tlsm | SolverMode::TlsmTnn => Shrinkage::Lsm,
            SolverMode::TlsmUtv => Shrinkage::Soft,
        }
    }

    fn difference_shrinkage(&self) -> Shrinkage {
        match self {
            SolverMode::Tlsm | SolverMode::TlsmUtv => Shrinkage::Lsm,
            SolverMode::TlsmTnn => Shrinkage::Soft,
        }
    }
}

impl fmt::Display for SolverMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverMode {
    type Err = TlsmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "TLSM" => Ok(SolverMode::Tlsm),
            "TLSM-TNN" => Ok(SolverMode::TlsmTnn),
            "TLSM-UTV" => Ok(SolverMode::TlsmUtv),
            other => Err(TlsmError::InvalidArgument(format!("unknown solver mode {other:?}"))),
        }
    }
}

/// How a prior's proximal step treats its target coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shrinkage {
    /// Joint theta/alpha estimation, cold-started every call.
    Lsm,
    /// LSM with every multiplier pinned at 1.
    FrozenLsm,
    /// Soft-thresholding at `penalty / quad_weight`.
    Soft,
}

impl Shrinkage {
    fn apply(&self, g: &[f64], params: &LsmParams) -> Vec<f64> {
        match self {
            Shrinkage::Lsm => lsm::lsm_shrink(g, params, LSM_ROUNDS).signal(),
            Shrinkage::FrozenLsm => lsm::lsm_shrink_frozen(g, params).signal(),
            Shrinkage::Soft => {
                let t = params.penalty_weight / params.quad_weight;
                g.iter().map(|&v| lsm::soft_threshold(v, t)).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Balancing factor of the `Z = X` split.
    pub a: f64,
    /// Balancing factor of the `D2 = grad2(X)` split.
    pub b: f64,
    /// Balancing factor of the `D1 = grad1(X - Y)` split.
    pub c: f64,
    /// Low-rank weight.
    pub tau: f64,
    /// Weight of the smoothness prior on `grad2(X)`.
    pub lambda1: f64,
    /// Weight of the footprint prior on `grad1(X - Y)`.
    pub lambda2: f64,
    pub max_iters: usize,
    pub epsilon: f64,
    pub mode: SolverMode,
    /// Stop once `||X_t - X_{t-1}|| / ||X_{t-1}||` drops below this; 0 disables.
    pub rel_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            a: 4.0,
            b: 0.2,
            c: 1.0,
            tau: 0.5,
            lambda1: 0.05,
            lambda2: 1.0,
            max_iters: 20,
            epsilon: DEFAULT_EPSILON,
            mode: SolverMode::Tlsm,
            rel_tol: 0.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("tau", self.tau),
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(TlsmError::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iters == 0 {
            return Err(TlsmError::InvalidArgument("max_iters must be at least 1".into()));
        }
        if !(self.rel_tol >= 0.0) {
            return Err(TlsmError::InvalidArgument(format!(
                "rel_tol must be nonnegative, got {}",
                self.rel_tol
            )));
        }
        LsmParams::new(1.0, 1.0, self.epsilon)?;
        Ok(())
    }

    fn low_rank_params(&self) -> LsmParams {
        LsmParams {
            penalty_weight: self.tau,
            quad_weight: self.a,
            epsilon: self.epsilon,
        }
    }

    fn footprint_params(&self) -> LsmParams {
        LsmParams {
            penalty_weight: self.lambda2,
            quad_weight: self.c,
            epsilon: self.epsilon,
        }
    }

    fn smoothness_params(&self) -> LsmParams {
        LsmParams {
            penalty_weight: self.lambda1,
            quad_weight: self.b,
            epsilon: self.epsilon,
        }
    }
}

/// Diagnostics recorded after every outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    /// `||Z - X||_F`
    pub res_z: f64,
    /// `||D1 - grad1(X - Y)||_F`
    pub res_d1: f64,
    /// `||D2 - grad2(X)||_F`
    pub res_d2: f64,
    /// `||X_t - X_{t-1}||_F / ||X_{t-1}||_F`
    pub rel_change: f64,
    pub psnr_db: Option<f64>,
    pub ssim: Option<f64>,
}

/// Primal and scaled dual variables of one run.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub x: Tensor3,
    pub z: Tensor3,
    pub d1: Tensor3,
    pub d2: Tensor3,
    /// Multiplier of `Z = X`.
    pub bb: Tensor3,
    /// Multiplier of `D1 = grad1(X - Y)`.
    pub b1: Tensor3,
    /// Multiplier of `D2 = grad2(X)`.
    pub b2: Tensor3,
    pub iter: usize,
    pub history: Vec<IterationRecord>,
}

impl SolverState {
    /// Zero multipliers and differences, `Z = Y`; `X` starts at `Y` as the
    /// baseline of the first relative-change measurement.
    pub fn new(y: &Tensor3) -> Self {
        let zeros = Tensor3::zeros(y.dims());
        SolverState {
            x: y.clone(),
            z: y.clone(),
            d1: zeros.clone(),
            d2: zeros.clone(),
            bb: zeros.clone(),
            b1: zeros.clone(),
            b2: zeros,
            iter: 0,
            history: Vec::new(),
        }
    }

    fn check_dims(&self, y: &Tensor3) -> Result<()> {
        let dims = y.dims();
        let all = [&self.x, &self.z, &self.d1, &self.d2, &self.bb, &self.b1, &self.b2];
        if all.iter().any(|t| t.dims() != dims) {
            return Err(TlsmError::DimensionMismatch(format!(
                "solver state does not match observation {dims:?}"
            )));
        }
        Ok(())
    }

    /// One outer iteration. Returns the record appended to the history.
    pub fn step(&mut self, y: &Tensor3, cfg: &SolverConfig, reference: Option<&Tensor3>) -> Result<&IterationRecord> {
        self.check_dims(y)?;
        let iteration = self.iter + 1;
        let next_x = update_x(self, y, cfg);
        let previous = std::mem::replace(&mut self.x, next_x);
        ensure_finite(&self.x, "X", iteration)?;

        self.z = update_z(self, cfg)?;
        ensure_finite(&self.z, "Z", iteration)?;
        self.d1 = update_d1(self, y, cfg);
        ensure_finite(&self.d1, "D1", iteration)?;
        self.d2 = update_d2(self, cfg);
        ensure_finite(&self.d2, "D2", iteration)?;

        let grad1 = (&self.x - y).diff_circular(SpatialMode::First);
        let grad2 = self.x.diff_circular(SpatialMode::Second);
        let res_z = (&self.z - &self.x).frobenius_norm();
        let res_d1 = (&self.d1 - &grad1).frobenius_norm();
        let res_d2 = (&self.d2 - &grad2).frobenius_norm();

        let (bb, b1, b2) = multipliers_from(self, &grad1, &grad2);
        self.bb = bb;
        self.b1 = b1;
        self.b2 = b2;

        let prev_norm = previous.frobenius_norm();
        let rel_change = if prev_norm > 0.0 {
            (&self.x - &previous).frobenius_norm() / prev_norm
        } else {
            self.x.frobenius_norm()
        };
        let (psnr_db, ssim) = match reference {
            Some(r) => (
                Some(metrics::psnr(&self.x, r, metrics::DEFAULT_PEAK)?),
                metrics::ssim(&self.x, r).ok(),
            ),
            None => (None, None),
        };
        self.iter = iteration;
        self.history.push(IterationRecord {
            iter: iteration,
            res_z,
            res_d1,
            res_d2,
            rel_change,
            psnr_db,
            ssim,
        });
        Ok(self.history.last().expect("record just pushed"))
    }
}

fn ensure_finite(t: &Tensor3, what: &'static str, iteration: usize) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(TlsmError::NonFinite { what, iteration })
    }
}

/// Eigenvalues `4 sin^2(pi k / n)` of `grad^T grad` for the circular
/// forward difference of length `n`.
fn difference_eigenvalues(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let s = (std::f64::consts::PI * k as f64 / n as f64).sin();
            4.0 * s * s
        })
        .collect()
}

/// Applies `(1 + a) I + b grad2^T grad2 + c grad1^T grad1` to `x`.
pub fn apply_system_operator(x: &Tensor3, a: f64, b: f64, c: f64) -> Tensor3 {
    let g1 = x
        .diff_circular(SpatialMode::First)
        .diff_adjoint(SpatialMode::First);
    let g2 = x
        .diff_circular(SpatialMode::Second)
        .diff_adjoint(SpatialMode::Second);
    let mut out = x * (1.0 + a);
    out.axpy(b, &g2);
    out.axpy(c, &g1);
    out
}

/// Solves `((1 + a) I + b grad2^T grad2 + c grad1^T grad1) X = rhs` slice by
/// slice with a 2-D DFT.
pub fn solve_system(rhs: &Tensor3, a: f64, b: f64, c: f64) -> Tensor3 {
    let [n1, n2, n3] = rhs.dims();
    let eig1 = difference_eigenvalues(n1);
    let eig2 = difference_eigenvalues(n2);
    let mut planner = FftPlanner::<f64>::new();
    let row_fwd = planner.plan_fft_forward(n2);
    let row_inv = planner.plan_fft_inverse(n2);
    let col_fwd = planner.plan_fft_forward(n1);
    let col_inv = planner.plan_fft_inverse(n1);
    let scale = 1.0 / (n1 * n2) as f64;

    let mut out = Tensor3::zeros([n1, n2, n3]);
    out.as_mut_slice()
        .par_chunks_mut(n1 * n2)
        .enumerate()
        .for_each(|(k, dst)| {
            let src = rhs.frontal_slice(k);
            let mut buf: Vec<Complex64> = src.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            for row in buf.chunks_mut(n2) {
                row_fwd.process(row);
            }
            let mut col = vec![Complex64::new(0.0, 0.0); n1];
            for j in 0..n2 {
                for i in 0..n1 {
                    col[i] = buf[i * n2 + j];
                }
                col_fwd.process(&mut col);
                for i in 0..n1 {
                    let denom = 1.0 + a + b * eig2[j] + c * eig1[i];
                    col[i] /= denom;
                }
                col_inv.process(&mut col);
                for i in 0..n1 {
                    buf[i * n2 + j] = col[i];
                }
            }
            for row in buf.chunks_mut(n2) {
                row_inv.process(row);
            }
            for (d, v) in dst.iter_mut().zip(&buf) {
                *d = v.re * scale;
            }
        });
    out
}

/// Right-hand side of the X update:
/// `a (Z - B) + b grad2^T (D2 - B2) + c grad1^T (D1 + grad1 Y - B1) + Y`.
pub fn x_update_rhs(state: &SolverState, y: &Tensor3, cfg: &SolverConfig) -> Tensor3 {
    let mut rhs = y.clone();
    rhs.axpy(cfg.a, &(&state.z - &state.bb));
    rhs.axpy(cfg.b, &(&state.d2 - &state.b2).diff_adjoint(SpatialMode::Second));
    let mut t1 = &state.d1 - &state.b1;
    t1.axpy(1.0, &y.diff_circular(SpatialMode::First));
    rhs.axpy(cfg.c, &t1.diff_adjoint(SpatialMode::First));
    rhs
}

pub fn update_x(state: &SolverState, y: &Tensor3, cfg: &SolverConfig) -> Tensor3 {
    solve_system(&x_update_rhs(state, y, cfg), cfg.a, cfg.b, cfg.c)
}

/// Z update on `L = X + B` with the shrinkage selected by the solver mode.
pub fn update_z(state: &SolverState, cfg: &SolverConfig) -> Result<Tensor3> {
    update_z_with(&state.x, &state.bb, cfg, cfg.mode.low_rank_shrinkage())
}

/// Z update with an explicit shrinkage rule for the spectral singular values.
pub fn update_z_with(x: &Tensor3, bb: &Tensor3, cfg: &SolverConfig, shrinkage: Shrinkage) -> Result<Tensor3> {
    let l = x + bb;
    let factors = tsvd::t_svd(&l)?;
    let params = cfg.low_rank_params();
    let shrunk: Vec<Vec<f64>> = factors
        .spectral_singulars
        .iter()
        .map(|g| {
            shrinkage
                .apply(g, &params)
                .into_iter()
                .map(|s| s.max(0.0))
                .collect()
        })
        .collect();
    tsvd::t_reconstruct(&factors, &shrunk)
}

fn shrink_tensor(target: &Tensor3, params: &LsmParams, shrinkage: Shrinkage) -> Tensor3 {
    let values = shrinkage.apply(target.as_slice(), params);
    Tensor3::from_raw(target.dims(), values)
}

/// D1 update: shrink `K1 = grad1(X - Y) + B1` with weights `(lambda2, c)`.
pub fn update_d1(state: &SolverState, y: &Tensor3, cfg: &SolverConfig) -> Tensor3 {
    let mut k1 = (&state.x - y).diff_circular(SpatialMode::First);
    k1.axpy(1.0, &state.b1);
    shrink_tensor(&k1, &cfg.footprint_params(), cfg.mode.difference_shrinkage())
}

/// D2 update: shrink `H2 = grad2(X) + B2` with weights `(lambda1, b)`.
pub fn update_d2(state: &SolverState, cfg: &SolverConfig) -> Tensor3 {
    let mut h2 = state.x.diff_circular(SpatialMode::Second);
    h2.axpy(1.0, &state.b2);
    shrink_tensor(&h2, &cfg.smoothness_params(), cfg.mode.difference_shrinkage())
}

/// `B <- B - (Z - X)`, `B1 <- B1 - (D1 - grad1(X - Y))`, `B2 <- B2 - (D2 - grad2 X)`.
pub fn update_multipliers(state: &SolverState, y: &Tensor3) -> (Tensor3, Tensor3, Tensor3) {
    let grad1 = (&state.x - y).diff_circular(SpatialMode::First);
    let grad2 = state.x.diff_circular(SpatialMode::Second);
    multipliers_from(state, &grad1, &grad2)
}

fn multipliers_from(state: &SolverState, grad1: &Tensor3, grad2: &Tensor3) -> (Tensor3, Tensor3, Tensor3) {
    let bb = &state.bb - &(&state.z - &state.x);
    let b1 = &state.b1 - &(&state.d1 - grad1);
    let b2 = &state.b2 - &(&state.d2 - grad2);
    (bb, b1, b2)
}

/// Result of a full run.
#[derive(Debug, Clone)]
pub struct DenoiseOutput {
    pub x: Tensor3,
    pub history: Vec<IterationRecord>,
}

/// Runs the full ADMM loop on the observation `y`.
///
/// When `reference` is given, PSNR and SSIM against it are recorded every
/// iteration.
pub fn denoise(y: &Tensor3, cfg: &SolverConfig, reference: Option<&Tensor3>) -> Result<DenoiseOutput> {
    cfg.validate()?;
    if !y.is_finite() {
        return Err(TlsmError::InvalidArgument("observation contains non-finite values".into()));
    }
    if let Some(r) = reference {
        if r.dims() != y.dims() {
            return Err(TlsmError::DimensionMismatch(format!(
                "reference {:?} vs observation {:?}",
                r.dims(),
                y.dims()
            )));
        }
    }
    let mut state = SolverState::new(y);
    for _ in 0..cfg.max_iters {
        let record = state.step(y, cfg, reference)?;
        if cfg.rel_tol > 0.0 && record.rel_change < cfg.rel_tol {
            break;
        }
    }
    Ok(DenoiseOutput {
        x: state.x,
        history: state.history,
    })
}
