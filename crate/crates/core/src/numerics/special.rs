//! Chi-square distribution functions for one and two degrees of freedom.
//!
//! Only these two are needed: the Mahalanobis pivot is chi-square with two
//! degrees of freedom and the likelihood-ratio statistic is referred to
//! either one or two.

use core::f64::consts::{FRAC_1_SQRT_2, PI};

use super::optimize::find_root;
use crate::{Error, Result};

fn check_dof(ndof: u32) -> Result<()> {
    match ndof {
        1 | 2 => Ok(()),
        other => Err(Error::UnsupportedDof(other)),
    }
}

fn check_w(w: f64) -> Result<()> {
    if w.is_nan() || w < 0.0 {
        return Err(Error::InvalidArgument {
            name: "w",
            reason: "must be non-negative",
        });
    }
    Ok(())
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal upper tail, accurate far into the tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// `P(χ²_ndof ≤ w)`. `w = +∞` is accepted and maps to 1.
pub fn chi2_cdf(w: f64, ndof: u32) -> Result<f64> {
    check_dof(ndof)?;
    check_w(w)?;
    Ok(match ndof {
        2 => -libm::expm1(-0.5 * w),
        _ => libm::erf(libm::sqrt(0.5 * w)),
    })
}

/// `P(χ²_ndof > w)`, computed directly so small tails keep their precision.
pub fn chi2_sf(w: f64, ndof: u32) -> Result<f64> {
    check_dof(ndof)?;
    check_w(w)?;
    Ok(match ndof {
        2 => libm::exp(-0.5 * w),
        _ => libm::erfc(libm::sqrt(0.5 * w)),
    })
}

/// Quantile function: the `w` with `chi2_cdf(w, ndof) = p`.
pub fn chi2_inv(p: f64, ndof: u32) -> Result<f64> {
    check_dof(ndof)?;
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidArgument {
            name: "p",
            reason: "must lie in [0, 1)",
        });
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    match ndof {
        2 => Ok(-2.0 * libm::log1p(-p)),
        _ => {
            // w = 2 y² with erf(y) = p. Solve on the complementary side for
            // p > 1/2 so that the tail carries the precision.
            let y = if p <= 0.5 {
                find_root(|y| libm::erf(y) - p, 0.0, 1.0, 1e-16)?
            } else {
                let q = 1.0 - p;
                find_root(|y| libm::erfc(y) - q, 0.0, 27.0, 1e-16)?
            };
            let y = polish_erf_root(y, p);
            Ok(2.0 * y * y)
        }
    }
}

// One Newton step on erf(y) = p to recover the last bits lost to the
// bracketing tolerance.
fn polish_erf_root(y: f64, p: f64) -> f64 {
    let resid = if p <= 0.5 {
        libm::erf(y) - p
    } else {
        (1.0 - p) - libm::erfc(y)
    };
    let deriv = 2.0 / libm::sqrt(PI) * libm::exp(-y * y);
    if deriv > 0.0 && deriv.is_finite() {
        let next = y - resid / deriv;
        if next.is_finite() && next >= 0.0 {
            return next;
        }
    }
    y
}
