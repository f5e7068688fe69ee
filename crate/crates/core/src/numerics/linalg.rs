use core::ops::{Add, Mul, Neg, Sub};

use crate::{Error, Result};

/// A vector on the encounter plane, in metres unless stated otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(r: f64, angle: f64) -> Self {
        Self::new(r * libm::cos(angle), r * libm::sin(angle))
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    /// Counter-clockwise rotation by `angle` radians.
    pub fn rotated(self, angle: f64) -> Self {
        let (s, c) = (libm::sin(angle), libm::cos(angle));
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

/// Symmetric 2×2 matrix stored by its three distinct entries.
///
/// Used for encounter-plane covariances (m²). Positive definiteness is not
/// enforced by construction; operations that need it call
/// [`SymMat2::require_pd`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMat2 {
    pub d11: f64,
    pub d12: f64,
    pub d22: f64,
}

impl SymMat2 {
    pub const fn new(d11: f64, d12: f64, d22: f64) -> Self {
        Self { d11, d12, d22 }
    }

    pub const fn diag(d11: f64, d22: f64) -> Self {
        Self::new(d11, 0.0, d22)
    }

    /// `sigma² · I`.
    pub fn isotropic(sigma: f64) -> Self {
        Self::diag(sigma * sigma, sigma * sigma)
    }

    /// Covariance with standard deviations `sd_major`, `sd_minor` whose
    /// first principal axis points at `angle` radians.
    pub fn from_axes(sd_major: f64, sd_minor: f64, angle: f64) -> Self {
        Self::diag(sd_major * sd_major, sd_minor * sd_minor).rotated(angle)
    }

    pub fn trace(&self) -> f64 {
        self.d11 + self.d22
    }

    pub fn det(&self) -> f64 {
        self.d11 * self.d22 - self.d12 * self.d12
    }

    pub fn is_finite(&self) -> bool {
        self.d11.is_finite() && self.d12.is_finite() && self.d22.is_finite()
    }

    pub fn is_pd(&self) -> bool {
        self.is_finite() && self.d11 > 0.0 && self.det() > 0.0
    }

    pub fn require_pd(&self) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::NonFinite);
        }
        if self.is_pd() {
            Ok(())
        } else {
            Err(Error::NotPositiveDefinite {
                d11: self.d11,
                d12: self.d12,
                d22: self.d22,
            })
        }
    }

    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.d11 * v.x + self.d12 * v.y,
            self.d12 * v.x + self.d22 * v.y,
        )
    }

    /// Cofactor inverse. Caller guarantees a non-singular matrix.
    pub fn inverse(&self) -> SymMat2 {
        let det = self.det();
        SymMat2::new(self.d22 / det, -self.d12 / det, self.d11 / det)
    }

    pub fn scaled(&self, factor: f64) -> SymMat2 {
        SymMat2::new(self.d11 * factor, self.d12 * factor, self.d22 * factor)
    }

    /// `R M Rᵀ` for the counter-clockwise rotation `R` by `angle`.
    pub fn rotated(&self, angle: f64) -> SymMat2 {
        let (s, c) = (libm::sin(angle), libm::cos(angle));
        let (a, b, d) = (self.d11, self.d12, self.d22);
        SymMat2::new(
            c * c * a - 2.0 * c * s * b + s * s * d,
            c * s * (a - d) + (c * c - s * s) * b,
            s * s * a + 2.0 * c * s * b + c * c * d,
        )
    }

    /// Lower Cholesky factor `(l11, l21, l22)` with `M = L Lᵀ`.
    pub fn cholesky(&self) -> Result<(f64, f64, f64)> {
        self.require_pd()?;
        let l11 = libm::sqrt(self.d11);
        let l21 = self.d12 / l11;
        let l22 = libm::sqrt(self.det() / self.d11);
        Ok((l11, l21, l22))
    }
}
