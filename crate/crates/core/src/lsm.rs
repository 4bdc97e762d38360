//! Laplacian scale mixture shrinkage.
//!
//! A coefficient vector `s` is modelled as `s_i = theta_i * alpha_i` with a
//! Laplacian `alpha` and a nonnegative hidden multiplier `theta`. Given a
//! target `g`, the pair is estimated by alternating two closed-form scalar
//! solves on
//!
//! ```text
//! (a/2) ||g - diag(theta) alpha||^2 + sqrt(2) tau ||alpha||_1 + 2 tau sum log(theta_i + eps)
//! ```
//!
//! where `tau` is the penalty weight and `a` the quadratic weight. The same
//! machinery serves the low-rank term (on spectral singular values) and both
//! difference terms (on vectorized gradients).

use std::f64::consts::SQRT_2;

use crate::error::{Result, TlsmError};

/// Default `eps` inside the log penalty.
pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsmParams {
    /// `tau` (or `lambda1`, `lambda2` for the difference terms).
    pub penalty_weight: f64,
    /// `a` (or `b`, `c`).
    pub quad_weight: f64,
    pub epsilon: f64,
}

impl LsmParams {
    pub fn new(penalty_weight: f64, quad_weight: f64, epsilon: f64) -> Result<Self> {
        if !(penalty_weight > 0.0 && quad_weight > 0.0 && epsilon > 0.0 && epsilon <= 1e-3) {
            return Err(TlsmError::InvalidArgument(format!(
                "LSM parameters need penalty > 0, quad > 0, 0 < eps <= 1e-3; got \
                 ({penalty_weight}, {quad_weight}, {epsilon})"
            )));
        }
        Ok(LsmParams {
            penalty_weight,
            quad_weight,
            epsilon,
        })
    }

    /// Threshold of the alpha step, `sqrt(2) tau / a`.
    pub fn alpha_threshold(&self) -> f64 {
        SQRT_2 * self.penalty_weight / self.quad_weight
    }

    /// Scalar objective of the theta step, `r theta^2 + p theta + 2 tau log(theta + eps)`
    /// with `r = (a/2) alpha^2` and `p = -a g alpha`.
    pub fn theta_objective(&self, g: f64, alpha: f64, theta: f64) -> f64 {
        let a = self.quad_weight;
        let r = 0.5 * a * alpha * alpha;
        let p = -a * g * alpha;
        r * theta * theta + p * theta + 2.0 * self.penalty_weight * (theta + self.epsilon).ln()
    }
}

/// Laplacian coefficients and their hidden multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct LsmPair {
    pub alpha: Vec<f64>,
    pub theta: Vec<f64>,
}

impl LsmPair {
    /// The recovered signal `theta_i * alpha_i`.
    pub fn signal(&self) -> Vec<f64> {
        self.theta
            .iter()
            .zip(&self.alpha)
            .map(|(t, a)| t * a)
            .collect()
    }
}

#[inline]
pub fn soft_threshold(x: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    x.signum() * (x.abs() - t).max(0.0)
}

/// Global minimizer over `theta >= 0` of the scalar theta objective.
///
/// Returns 0 when the stationarity discriminant `(p^2 - 16 r tau) / 16 r^2`
/// is negative (the objective is then increasing), otherwise whichever of
/// 0 and the nonnegative stationary points
/// `-p / 4r +- sqrt((p^2 - 16 r tau) / 16 r^2)` has the smallest objective.
pub fn solve_theta(g: f64, alpha: f64, params: &LsmParams) -> f64 {
    let a = params.quad_weight;
    let tau = params.penalty_weight;
    let r = 0.5 * a * alpha * alpha;
    if r == 0.0 {
        return 0.0;
    }
    let p = -a * g * alpha;
    let disc = (p * p - 16.0 * r * tau) / (16.0 * r * r);
    if !(disc >= 0.0) {
        return 0.0;
    }
    let center = -p / (4.0 * r);
    let root = disc.sqrt();

    let mut best = 0.0;
    let mut best_value = params.theta_objective(g, alpha, 0.0);
    for candidate in [center + root, center - root] {
        if candidate < 0.0 || !candidate.is_finite() {
            continue;
        }
        let value = params.theta_objective(g, alpha, candidate);
        if value < best_value {
            best = candidate;
            best_value = value;
        }
    }
    best
}

/// Alpha step: `soft(g_i / theta_i, sqrt(2) tau / a)`, or 0 where `theta_i <= eps`.
pub fn solve_alpha(g: &[f64], theta: &[f64], params: &LsmParams) -> Vec<f64> {
    assert_eq!(g.len(), theta.len(), "solve_alpha: length mismatch");
    let threshold = params.alpha_threshold();
    g.iter()
        .zip(theta)
        .map(|(&gi, &ti)| {
            if ti > params.epsilon {
                soft_threshold(gi / ti, threshold)
            } else {
                0.0
            }
        })
        .collect()
}

/// Alternates `inner_iters` rounds of theta then alpha, starting from
/// `theta = 1`, `alpha = g`.
pub fn lsm_shrink(g: &[f64], params: &LsmParams, inner_iters: usize) -> LsmPair {
    assert!(inner_iters >= 1, "lsm_shrink needs at least one round");
    let mut alpha = g.to_vec();
    let mut theta = vec![1.0; g.len()];
    for _ in 0..inner_iters {
        for ((t, &gi), &ai) in theta.iter_mut().zip(g).zip(&alpha) {
            *t = solve_theta(gi, ai, params);
        }
        alpha = solve_alpha(g, &theta, params);
    }
    LsmPair { alpha, theta }
}

/// The pair with `theta` pinned at 1, which reduces the alpha step to plain
/// soft-thresholding at `sqrt(2) tau / a`.
pub fn lsm_shrink_frozen(g: &[f64], params: &LsmParams) -> LsmPair {
    let theta = vec![1.0; g.len()];
    let alpha = solve_alpha(g, &theta, params);
    LsmPair { alpha, theta }
}

/// Full objective of the alternation for a given pair.
pub fn lsm_objective(g: &[f64], pair: &LsmPair, params: &LsmParams) -> f64 {
    let a = params.quad_weight;
    let tau = params.penalty_weight;
    g.iter()
        .zip(&pair.alpha)
        .zip(&pair.theta)
        .map(|((&gi, &ai), &ti)| {
            let resid = gi - ti * ai;
            0.5 * a * resid * resid + SQRT_2 * tau * ai.abs() + 2.0 * tau * (ti + params.epsilon).ln()
        })
        .sum()
}
