//! Frequentist inference on the true miss vector.
//!
//! Under the Gaussian model `x ~ N(ξ, D)` the squared Mahalanobis distance
//! `Δ(ξ) = (x − ξ)ᵀ D⁻¹ (x − ξ)` is an exact chi-square(2) pivot. From it
//! come confidence ellipses, the P-value of the point null `ξ = 0`, and the
//! likelihood-ratio statistic `W = min_{‖ξ‖ ≤ HBR} Δ(ξ)` for the composite
//! null "the true miss lies inside the hard-body disk".
//!
//! [`ml_ci_pval`] is the ellipse-touch construction: a confidence interval on
//! the miss distance from the nearest and farthest points of the `k`-sigma
//! ellipse, and a P-value from the ellipse level that just touches the
//! hard-body circle. It is the normative decision path; [`p_obs_lr`] is the
//! plain likelihood-ratio tail kept as an independent cross-check. The two
//! differ by a factor of two in the tail (the ellipse-touch value is
//! half-tailed) and are never expected to agree numerically.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::encounter::ConjunctionState;
use crate::numerics::{
    chi2_cdf, chi2_inv, chi2_sf, eig_sym2, find_root, minimize_periodic, rng_stream, EigenPair2,
    Vec2,
};
use crate::pc::pc_hat;
use crate::{Error, Result};

/// Default significance level for intervals and decisions.
pub const DEFAULT_ALPHA: f64 = 0.01;
/// Default degrees of freedom for the likelihood-ratio reference distribution.
pub const DEFAULT_NDOF: u32 = 2;
/// Widest ellipse level searched before declaring `p_obs = 0`.
pub const KMAX: f64 = 7.0;
/// Eigenvalue ratio beyond which the covariance is conditioned.
pub const MAX_CONDITION: f64 = 1e12;

const Z_TOL: f64 = 1e-10;
const THETA_TOL: f64 = 1e-12;
const SCAN_POINTS: usize = 64;
const MAX_NEWTON: usize = 200;
const TOUCH_REL_TOL: f64 = 1e-12;
const MARGINAL_SEED: u64 = 0x6d61_7267_696e_616c;

/// Interval on the miss distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    /// Nominal coverage.
    pub level: f64,
    pub ndof: u32,
}

/// Output of [`ml_ci_pval`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlInference {
    pub ci: ConfidenceInterval,
    pub p_obs: f64,
    /// Ellipse levels of the interval bounds (both equal to `k`).
    pub z_bounds: (f64, f64),
    /// Signed level of the ellipse touching the hard-body circle.
    pub z_p: f64,
    /// The covariance eigenvalue ratio exceeded [`MAX_CONDITION`] and was floored.
    pub conditioned: bool,
}

/// Everything reported for one conjunction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssessmentResult {
    pub pc_hat: f64,
    /// Ellipse-touch significance probability.
    pub p_obs: f64,
    /// Likelihood-ratio significance probability `P(χ² > W)`.
    pub p_obs_lr: f64,
    pub ci: ConfidenceInterval,
    pub z_bounds: (f64, f64),
    pub z_p: f64,
    pub w_stat: f64,
    pub conditioned: bool,
}

// Prediction and covariance expressed in the covariance eigenframe.
struct Geometry {
    eig: EigenPair2,
    // prediction in eigenframe coordinates
    xe: Vec2,
    sd: (f64, f64),
    conditioned: bool,
}

impl Geometry {
    fn new(state: &ConjunctionState) -> Result<Self> {
        state.validate()?;
        let mut eig = eig_sym2(&state.cov)?;
        let floor = eig.lambda2 / MAX_CONDITION;
        let conditioned = eig.lambda1 < floor;
        if conditioned {
            eig.lambda1 = floor;
        }
        Ok(Self {
            xe: eig.to_eigen_frame(state.x),
            sd: (libm::sqrt(eig.lambda1), libm::sqrt(eig.lambda2)),
            eig,
            conditioned,
        })
    }

    fn mahalanobis_sq(&self, xi: Vec2) -> f64 {
        let d = self.xe - self.eig.to_eigen_frame(xi);
        d.x * d.x / self.eig.lambda1 + d.y * d.y / self.eig.lambda2
    }

    // Nearest or farthest distance from the origin of the k-sigma ellipse
    // around the prediction. The ellipse is parameterized by its eccentric
    // angle; the scan includes the four axis tips.
    fn ellipse_distance(&self, k: f64, extreme: Extreme) -> Result<f64> {
        if k == 0.0 {
            return Ok(self.xe.norm());
        }
        let (a, b) = (k * self.sd.0, k * self.sd.1);
        let (cx, cy) = (self.xe.x, self.xe.y);
        let dist = move |t: f64| libm::hypot(cx + a * libm::cos(t), cy + b * libm::sin(t));
        match extreme {
            Extreme::Min => {
                if self.mahalanobis_sq(Vec2::ZERO) <= k * k {
                    return Ok(0.0);
                }
                Ok(minimize_periodic(dist, 0.0, TAU, SCAN_POINTS, THETA_TOL)?.min)
            }
            Extreme::Max => {
                Ok(-minimize_periodic(move |t| -dist(t), 0.0, TAU, SCAN_POINTS, THETA_TOL)?.min)
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Extreme {
    Min,
    Max,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument {
            name: "alpha",
            reason: "must lie in (0, 1)",
        })
    }
}

fn touches(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOUCH_REL_TOL * a.abs().max(b.abs())
}

/// `Δ(ξ) = (x − ξ)ᵀ D⁻¹ (x − ξ)`, evaluated in the covariance eigenframe.
pub fn mahalanobis_sq(state: &ConjunctionState, xi: Vec2) -> Result<f64> {
    Ok(Geometry::new(state)?.mahalanobis_sq(xi))
}

/// Whether `xi` lies in the `(1 − alpha)` confidence ellipse
/// `{ξ : Δ(ξ) ≤ −2 ln alpha}`.
pub fn confidence_ellipse_contains(state: &ConjunctionState, xi: Vec2, alpha: f64) -> Result<bool> {
    check_alpha(alpha)?;
    Ok(mahalanobis_sq(state, xi)? <= -2.0 * libm::log(alpha))
}

/// P-value of the point null `ξ = 0`: `exp(−Δ(0)/2)`.
pub fn pvalue_center(state: &ConjunctionState) -> Result<f64> {
    Ok(libm::exp(-0.5 * mahalanobis_sq(state, Vec2::ZERO)?))
}

/// Likelihood-ratio statistic `W = min_{‖ξ‖ ≤ HBR} Δ(ξ)`.
///
/// Zero when the prediction is inside the disk. Otherwise the minimizer lies
/// on the boundary circle at `ξ(μ) = (I + μD)⁻¹ x`, where the multiplier
/// `μ > 0` solves `‖ξ(μ)‖ = HBR`. `1/‖ξ(μ)‖` is concave and increasing in
/// `μ`, so Newton's method started at `μ = 0` climbs to the root without
/// overshooting.
pub fn w_statistic(state: &ConjunctionState) -> Result<f64> {
    let g = Geometry::new(state)?;
    let hbr = state.hbr;
    if state.x.norm() <= hbr {
        return Ok(0.0);
    }
    if hbr == 0.0 {
        return Ok(g.mahalanobis_sq(Vec2::ZERO));
    }
    let x = [g.xe.x, g.xe.y];
    let l = [g.eig.lambda1, g.eig.lambda2];
    let target = 1.0 / hbr;
    let mut mu = 0.0_f64;
    for _ in 0..MAX_NEWTON {
        let (mut n2, mut slope) = (0.0, 0.0);
        for i in 0..2 {
            let q = 1.0 / (1.0 + mu * l[i]);
            n2 += (x[i] * q) * (x[i] * q);
            slope += x[i] * x[i] * l[i] * q * q * q;
        }
        let inv = 1.0 / libm::sqrt(n2);
        let f = inv - target;
        if f >= 0.0 {
            break;
        }
        let step = -f / (slope * inv * inv * inv);
        if !(step.is_finite() && step > 0.0) {
            break;
        }
        let next = mu + step;
        let done = step <= 4.0 * f64::EPSILON * next;
        mu = next;
        if done {
            break;
        }
    }
    let w: f64 = (0..2)
        .map(|i| {
            let r = x[i] * mu * l[i] / (1.0 + mu * l[i]);
            r * r / l[i]
        })
        .sum();
    if !w.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(w)
}

/// Likelihood-ratio significance probability `P(χ²_ndof > W)`; equals 1 when
/// the prediction is inside the hard-body disk.
pub fn p_obs_lr(state: &ConjunctionState, ndof: u32) -> Result<f64> {
    let w = w_statistic(state)?;
    chi2_sf(w, ndof)
}

/// Ellipse-touch confidence interval and P-value.
///
/// With `k = sqrt(chi2_inv(1 − alpha, ndof))` the interval is the nearest and
/// farthest distance from the origin of the `k`-sigma ellipse (lower bound
/// zero when the origin is inside it). The signed level `z_p` of the ellipse
/// touching the hard-body circle is
///
/// * `−k` / `+k` when the interval's lower / upper bound equals the radius,
/// * `0` when the prediction sits on the circle,
/// * `−∞` when even the [`KMAX`] ellipse stays outside the circle,
/// * the positive root of `HBR − farthest(z)` when the prediction is inside,
/// * the negated root of `HBR − nearest(z)` otherwise,
///
/// and `p_obs = (1 − F(z_p²))/2` for `z_p ≤ 0`, `(1 + F(z_p²))/2` above,
/// with `F` the chi-square CDF. If a prediction inside the circle is so
/// precise that the [`KMAX`] ellipse still fits inside, `z_p = +∞` and
/// `p_obs = 1`.
pub fn ml_ci_pval(state: &ConjunctionState, alpha: f64, ndof: u32) -> Result<MlInference> {
    check_alpha(alpha)?;
    let k = libm::sqrt(chi2_inv(1.0 - alpha, ndof)?);
    let g = Geometry::new(state)?;
    let dmin = g.ellipse_distance(k, Extreme::Min)?;
    let dmax = g.ellipse_distance(k, Extreme::Max)?;
    let ci = ConfidenceInterval {
        lower: dmin,
        upper: dmax,
        level: 1.0 - alpha,
        ndof,
    };

    let hbr = state.hbr;
    let dx = state.x.norm();
    let level_fn = |extreme: Extreme| {
        let g = &g;
        move |z: f64| hbr - g.ellipse_distance(z, extreme).unwrap_or(f64::NAN)
    };
    let z_p = if touches(dmin, hbr) {
        -k
    } else if touches(dmax, hbr) {
        k
    } else if touches(dx, hbr) {
        0.0
    } else if g.ellipse_distance(KMAX, Extreme::Min)? > hbr {
        f64::NEG_INFINITY
    } else if dx < hbr {
        match find_root(level_fn(Extreme::Max), 0.0, KMAX, Z_TOL) {
            Ok(z) => z,
            Err(Error::NoBracket { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        }
    } else {
        -find_root(level_fn(Extreme::Min), 0.0, KMAX, Z_TOL)?
    };

    let zz = z_p * z_p;
    let p_obs = if z_p <= 0.0 {
        0.5 * chi2_sf(zz, ndof)?
    } else {
        0.5 * (1.0 + chi2_cdf(zz, ndof)?)
    };
    Ok(MlInference {
        ci,
        p_obs,
        z_bounds: (k, k),
        z_p,
        conditioned: g.conditioned,
    })
}

/// Full assessment of one conjunction: `pc_hat`, both significance
/// probabilities, the interval, the touch level and `W`.
pub fn assess(state: &ConjunctionState, alpha: f64, ndof: u32) -> Result<AssessmentResult> {
    let ml = ml_ci_pval(state, alpha, ndof)?;
    let w = w_statistic(state)?;
    Ok(AssessmentResult {
        pc_hat: pc_hat(state)?,
        p_obs: ml.p_obs,
        p_obs_lr: chi2_sf(w, ndof)?,
        ci: ml.ci,
        z_bounds: ml.z_bounds,
        z_p: ml.z_p,
        w_stat: w,
        conditioned: ml.conditioned,
    })
}

/// Equal-tailed interval for `‖x′‖` with `x′ ~ N(x, D)`: the credible set
/// obtained by marginalizing the Gaussian onto the miss distance.
///
/// Estimated from `n_samples` draws of a fixed stream, so the result is a
/// deterministic function of its arguments.
pub fn marginal_credible_interval(
    state: &ConjunctionState,
    level: f64,
    n_samples: usize,
) -> Result<ConfidenceInterval> {
    state.validate()?;
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument {
            name: "level",
            reason: "must lie in (0, 1)",
        });
    }
    if n_samples < 2 {
        return Err(Error::InvalidArgument {
            name: "n_samples",
            reason: "need at least two samples",
        });
    }
    let chol = state.cov.cholesky()?;
    let mut rng = rng_stream(MARGINAL_SEED, 0);
    let mut norms: Vec<f64> = (0..n_samples)
        .map(|_| rng.gaussian2_chol(state.x, chol).norm())
        .collect();
    norms.sort_unstable_by(f64::total_cmp);
    Ok(ConfidenceInterval {
        lower: quantile_sorted(&norms, 0.5 * (1.0 - level)),
        upper: quantile_sorted(&norms, 0.5 * (1.0 + level)),
        level,
        ndof: 2,
    })
}

// Linear interpolation between order statistics.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
