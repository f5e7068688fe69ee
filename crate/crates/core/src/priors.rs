//! Bayesian extensions: the truncated uniform prior over the screening
//! slice, threshold calibration from the prior hit probability, and the
//! empirical-Bayes gamma prior on the squared miss distance.

use core::f64::consts::{PI, TAU};

use crate::encounter::ConjunctionState;
use crate::numerics::{gauss_disk_quadrature, integrate_with_breaks, SymMat2, Vec2};
use crate::{Error, Result};

/// Elliptical slice of the screening volume on the encounter plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreeningEllipse {
    /// Semi-axis along the rotated first axis (m).
    pub semi_a: f64,
    /// Semi-axis along the rotated second axis (m).
    pub semi_b: f64,
    /// Counter-clockwise rotation of the first axis (rad).
    pub rotation: f64,
    pub center: Vec2,
}

impl ScreeningEllipse {
    pub fn new(semi_a: f64, semi_b: f64, rotation: f64, center: Vec2) -> Result<Self> {
        let s = Self {
            semi_a,
            semi_b,
            rotation,
            center,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn centered(semi_a: f64, semi_b: f64) -> Result<Self> {
        Self::new(semi_a, semi_b, 0.0, Vec2::ZERO)
    }

    fn validate(&self) -> Result<()> {
        if !(self.semi_a > 0.0 && self.semi_b > 0.0)
            || !self.semi_a.is_finite()
            || !self.semi_b.is_finite()
            || !self.rotation.is_finite()
            || !self.center.is_finite()
        {
            return Err(Error::InvalidArgument {
                name: "screening ellipse",
                reason: "semi-axes must be positive and all fields finite",
            });
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        PI * self.semi_a * self.semi_b
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let u = (p - self.center).rotated(-self.rotation);
        (u.x / self.semi_a) * (u.x / self.semi_a) + (u.y / self.semi_b) * (u.y / self.semi_b) <= 1.0
    }
}

/// Prior probability of a hit under a uniform prior on the slice: the ratio
/// of the hard-body disk area to the slice area.
pub fn prior_hit_probability(hbr: f64, slice: &ScreeningEllipse) -> Result<f64> {
    slice.validate()?;
    if !(hbr >= 0.0) || !hbr.is_finite() {
        return Err(Error::InvalidArgument {
            name: "hbr",
            reason: "must be non-negative and finite",
        });
    }
    let smallest = slice.semi_a.min(slice.semi_b);
    if hbr > smallest {
        return Err(Error::HbrExceedsSlice {
            hbr,
            semi_axis: smallest,
        });
    }
    Ok(hbr * hbr / (slice.semi_a * slice.semi_b))
}

/// Missed-detection-rate threshold `t` such that `prior_hit · t` equals the
/// target posterior hit odds, clamped to at most one.
pub fn calibrated_pvalue_threshold(target_posterior_odds: f64, slice: &ScreeningEllipse, hbr: f64) -> Result<f64> {
    if !(target_posterior_odds > 0.0 && target_posterior_odds < 1.0) {
        return Err(Error::InvalidArgument {
            name: "target_posterior_odds",
            reason: "must lie in (0, 1)",
        });
    }
    let prior = prior_hit_probability(hbr, slice)?;
    if prior == 0.0 {
        return Err(Error::InvalidArgument {
            name: "hbr",
            reason: "prior hit probability is zero",
        });
    }
    Ok((target_posterior_odds / prior).min(1.0))
}

/// Evidence `∫ f(x | ξ) f(ξ) dξ` under the uniform prior truncated to the
/// slice: `(1 / area) ×` the mass of `N(x, D)` inside the slice (m⁻²).
///
/// The slice is mapped affinely onto the unit disk, which turns the integral
/// into a Gaussian disk integral with transformed mean and covariance.
pub fn truncated_evidence(state: &ConjunctionState, slice: &ScreeningEllipse, rel_tol: f64) -> Result<f64> {
    Ok(slice_mass(state, slice, rel_tol)? / slice.area())
}

/// Evidence under the untruncated uniform prior at the same density
/// `1 / area`; the Gaussian mass is one.
pub fn untruncated_evidence(slice: &ScreeningEllipse) -> Result<f64> {
    slice.validate()?;
    Ok(1.0 / slice.area())
}

/// Mass of `N(x, D)` inside the slice.
pub fn slice_mass(state: &ConjunctionState, slice: &ScreeningEllipse, rel_tol: f64) -> Result<f64> {
    state.validate()?;
    slice.validate()?;
    let (a, b) = (slice.semi_a, slice.semi_b);
    let local = (state.x - slice.center).rotated(-slice.rotation);
    let mean = Vec2::new(local.x / a, local.y / b);
    let c = state.cov.rotated(-slice.rotation);
    let cov = SymMat2::new(c.d11 / (a * a), c.d12 / (a * b), c.d22 / (b * b));
    gauss_disk_quadrature(mean, cov, 1.0, rel_tol)
}

/// Gamma prior on `φ = ψ²` (shape `a`, rate `b` in m⁻²), with the clock
/// angle independent and uniform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaMissPrior {
    pub a: f64,
    pub b: f64,
}

impl GammaMissPrior {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument {
                name: "a, b",
                reason: "shape and rate must be positive and finite",
            });
        }
        Ok(Self { a, b })
    }

    /// Construct from a rate given in km⁻².
    pub fn from_km(a: f64, b_per_km2: f64) -> Result<Self> {
        Self::new(a, b_per_km2 * 1e-6)
    }

    pub fn b_per_km2(&self) -> f64 {
        self.b * 1e6
    }

    pub fn mean_phi(&self) -> f64 {
        self.a / self.b
    }
}

/// Joint prior density of `(λ, φ)`:
/// `(1/2π) · bᵃ/Γ(a) · φ^(a−1) · e^(−bφ)`.
///
/// At `φ = 0` the density has a pole when `a < 1`; `+∞` is returned there.
pub fn gamma_prior_density(prior: &GammaMissPrior, phi: f64) -> f64 {
    if phi < 0.0 {
        return 0.0;
    }
    let GammaMissPrior { a, b } = *prior;
    if phi == 0.0 {
        return if a < 1.0 {
            f64::INFINITY
        } else if a == 1.0 {
            b / TAU
        } else {
            0.0
        };
    }
    let log_density = a * libm::log(b) - libm::lgamma(a) + (a - 1.0) * libm::log(phi) - b * phi;
    libm::exp(log_density) / TAU
}

/// `E[g(φ)]` under the gamma prior by quadrature.
///
/// For `a < 1` the substitution `φ = v^(1/a)` absorbs the pole at the
/// origin; otherwise `φ` is integrated directly.
pub fn gamma_expectation<G>(prior: &GammaMissPrior, mut g: G, rel_tol: f64) -> Result<f64>
where
    G: FnMut(f64) -> f64,
{
    let GammaMissPrior { a, b } = *prior;
    let sd = libm::sqrt(a) / b;
    let phi_max = (a + 40.0 * libm::sqrt(a) + 60.0) / b;
    let log_norm = a * libm::log(b) - libm::lgamma(a);
    if a < 1.0 {
        let v_max = libm::pow(phi_max, a);
        let scale = libm::exp(log_norm) / a;
        let f = |v: f64| {
            let phi = libm::pow(v, 1.0 / a);
            scale * libm::exp(-b * phi) * g(phi)
        };
        let breaks = [libm::pow(1.0 / b, a), libm::pow(10.0 / b, a)];
        integrate_with_breaks(f, 0.0, v_max, &breaks, rel_tol, 0.0)
    } else {
        let f = |phi: f64| {
            if phi <= 0.0 {
                return 0.0;
            }
            libm::exp(log_norm + (a - 1.0) * libm::log(phi) - b * phi) * g(phi)
        };
        let mean = a / b;
        let breaks = [mean - 4.0 * sd, mean, mean + 4.0 * sd, mean + 12.0 * sd];
        integrate_with_breaks(f, 0.0, phi_max, &breaks, rel_tol, 0.0)
    }
}

/// Mean and standard deviation of the miss distance `ψ = √φ` under the
/// prior, by quadrature.
pub fn gamma_psi_moments(prior: &GammaMissPrior) -> Result<(f64, f64)> {
    let m1 = gamma_expectation(prior, libm::sqrt, 1e-10)?;
    let m2 = gamma_expectation(prior, |phi| phi, 1e-10)?;
    Ok((m1, libm::sqrt((m2 - m1 * m1).max(0.0))))
}

/// Non-centrality of `t = (x1/d1)² + (x2/d2)²` for miss `√φ` at clock angle
/// `λ`: `(φ/2)·{(1/d1² + 1/d2²) + (1/d1² − 1/d2²)·cos 2λ}`.
pub fn noncentrality(phi: f64, lambda_angle: f64, d1: f64, d2: f64) -> f64 {
    let (p1, p2) = (1.0 / (d1 * d1), 1.0 / (d2 * d2));
    (0.5 * phi * ((p1 + p2) + (p1 - p2) * libm::cos(2.0 * lambda_angle))).max(0.0)
}

/// One past conjunction as used by the empirical-Bayes fit: prediction and
/// axis standard deviations in the covariance eigenframe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjunctionSample {
    pub x1: f64,
    pub x2: f64,
    pub d1: f64,
    pub d2: f64,
}

impl ConjunctionSample {
    /// Diagonalize a conjunction state into eigenframe coordinates.
    pub fn from_state(state: &ConjunctionState) -> Result<Self> {
        state.validate()?;
        let eig = crate::numerics::eig_sym2(&state.cov)?;
        let xe = eig.to_eigen_frame(state.x);
        Ok(Self {
            x1: xe.x,
            x2: xe.y,
            d1: libm::sqrt(eig.lambda1),
            d2: libm::sqrt(eig.lambda2),
        })
    }
}

/// Result of [`eb_fit`] with the intermediate moment estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EbFit {
    pub prior: GammaMissPrior,
    pub n_used: usize,
    /// Samples dropped because a standard deviation fell below the floor.
    pub n_excluded: usize,
    pub mean_t: f64,
    pub mean_t2: f64,
    pub mean_phi: f64,
    pub mean_phi_sq: f64,
}

/// Default lower bound on `d1`, `d2` for samples entering the fit (m).
pub const DEFAULT_D_FLOOR: f64 = 1.0;

// Neumaier compensated summation.
#[derive(Default, Clone, Copy)]
struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    fn add(&mut self, v: f64) {
        let t = self.s + v;
        if self.s.abs() >= v.abs() {
            self.c += (self.s - t) + v;
        } else {
            self.c += (v - t) + self.s;
        }
        self.s = t;
    }

    fn value(&self) -> f64 {
        self.s + self.c
    }
}

/// Moment-matching fit of the gamma prior.
///
/// With `t = (x1/d1)² + (x2/d2)²`, `A = 1/d1² + 1/d2²`, `B = 1/d1² − 1/d2²`
/// the sample moments satisfy
/// `mean(t) = 2 + ½E(φ)·mean(A)` and
/// `mean(t²) = 8 + 4E(φ)·mean(A) + ¼E(φ²)·(mean(A²) + mean(B²)/2)`;
/// these are solved for `E(φ)`, `E(φ²)` and then `b = E(φ)/Var(φ)`,
/// `a = b·E(φ)`. Samples with `d1` or `d2` below `d_floor` are excluded.
pub fn eb_fit(samples: &[ConjunctionSample], d_floor: f64) -> Result<EbFit> {
    let (mut st, mut st2, mut sa, mut sa2, mut sb2) = (Sum::default(), Sum::default(), Sum::default(), Sum::default(), Sum::default());
    let mut n_used = 0usize;
    let mut n_excluded = 0usize;
    for s in samples {
        if !(s.x1.is_finite() && s.x2.is_finite() && s.d1.is_finite() && s.d2.is_finite()) || s.d1 <= 0.0 || s.d2 <= 0.0 {
            return Err(Error::InvalidArgument {
                name: "samples",
                reason: "coordinates must be finite and standard deviations positive",
            });
        }
        if s.d1 < d_floor || s.d2 < d_floor {
            n_excluded += 1;
            continue;
        }
        let (p1, p2) = (1.0 / (s.d1 * s.d1), 1.0 / (s.d2 * s.d2));
        let t = s.x1 * s.x1 * p1 + s.x2 * s.x2 * p2;
        let (a, b) = (p1 + p2, p1 - p2);
        st.add(t);
        st2.add(t * t);
        sa.add(a);
        sa2.add(a * a);
        sb2.add(b * b);
        n_used += 1;
    }
    if n_used < 2 {
        return Err(Error::InvalidArgument {
            name: "samples",
            reason: "need at least two usable samples",
        });
    }
    let n = n_used as f64;
    let mean_t = st.value() / n;
    let mean_t2 = st2.value() / n;
    let mean_a = sa.value() / n;
    let mean_a2 = sa2.value() / n;
    let mean_b2 = sb2.value() / n;

    let mean_phi = 2.0 * (mean_t - 2.0) / mean_a;
    let mean_phi_sq = 4.0 * (mean_t2 - 8.0 - 4.0 * mean_phi * mean_a) / (mean_a2 + 0.5 * mean_b2);
    let var_phi = mean_phi_sq - mean_phi * mean_phi;
    if !(mean_phi > 0.0) || !(var_phi > 0.0) || !var_phi.is_finite() {
        return Err(Error::EbInfeasible {
            mean_phi,
            mean_phi_sq,
        });
    }
    let b = mean_phi / var_phi;
    let a = b * mean_phi;
    Ok(EbFit {
        prior: GammaMissPrior::new(a, b)?,
        n_used,
        n_excluded,
        mean_t,
        mean_t2,
        mean_phi,
        mean_phi_sq,
    })
}
