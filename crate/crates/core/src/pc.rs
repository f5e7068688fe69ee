//! The traditional collision-probability estimate and its dilution curve.

use alloc::vec::Vec;

use crate::encounter::{ConjunctionState, TrueState};
use crate::inference::{ml_ci_pval, p_obs_lr, DEFAULT_ALPHA};
use crate::numerics::{gauss_disk_quadrature, SymMat2, DEFAULT_DISK_REL_TOL};
use crate::{Error, Result};

/// Gaussian mass centred on the prediction that falls inside the hard-body
/// disk: the operational `pc_hat`.
pub fn pc_hat(state: &ConjunctionState) -> Result<f64> {
    state.validate()?;
    gauss_disk_quadrature(state.x, state.cov, state.hbr, DEFAULT_DISK_REL_TOL)
}

/// Probability that a noisy prediction falls inside the hard-body disk when
/// the true miss vector is known. Only meaningful in simulation.
pub fn pc_true(truth: &TrueState, cov: &SymMat2, hbr: f64) -> Result<f64> {
    let state = ConjunctionState::new(truth.xi, *cov, hbr)?;
    pc_hat(&state)
}

/// `E‖x‖² = ‖ξ‖² + tr(D)`.
pub fn expected_sq_miss(truth: &TrueState, cov: &SymMat2) -> f64 {
    truth.xi.norm_sq() + cov.trace()
}

/// One point of a dilution sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilutionPoint {
    /// Multiplier applied to the covariance square root.
    pub scale: f64,
    pub pc_hat: f64,
    /// Ellipse-touch significance probability.
    pub p_obs: f64,
    /// Likelihood-ratio significance probability.
    pub p_obs_lr: f64,
}

/// Evaluate `pc_hat` and both significance probabilities while the
/// covariance square root is multiplied by each of `scales`.
///
/// Points come back in the order of `scales`.
pub fn dilution_curve(state: &ConjunctionState, scales: &[f64], ndof: u32) -> Result<Vec<DilutionPoint>> {
    state.validate()?;
    scales
        .iter()
        .map(|&scale| {
            if !(scale > 0.0) || !scale.is_finite() {
                return Err(Error::InvalidArgument {
                    name: "scale",
                    reason: "must be positive and finite",
                });
            }
            let scaled = state.with_cov_scale(scale);
            Ok(DilutionPoint {
                scale,
                pc_hat: pc_hat(&scaled)?,
                p_obs: ml_ci_pval(&scaled, DEFAULT_ALPHA, ndof)?.p_obs,
                p_obs_lr: p_obs_lr(&scaled, ndof)?,
            })
        })
        .collect()
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => {
            let (a, b) = (libm::log(lo), libm::log(hi));
            (0..n)
                .map(|i| match i {
                    0 => lo,
                    _ if i == n - 1 => hi,
                    _ => libm::exp(a + (b - a) * i as f64 / (n - 1) as f64),
                })
                .collect()
        }
    }
}
