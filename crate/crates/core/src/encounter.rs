//! Conjunction domain types and the projection of a 3-D relative state onto
//! the encounter plane.
//!
//! The encounter plane is normal to the relative velocity at the time of
//! closest approach. Straight-line relative motion over the encounter is
//! assumed, so a record already predicted to TCA needs no propagation.

use alloc::string::String;
use core::f64::consts::TAU;

use crate::numerics::{SymMat2, Vec2};
use crate::{Error, Result};

/// Relative asymmetry tolerated (and symmetrized away) in input covariances.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Predicted miss vector, its covariance and the combined hard-body radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjunctionState {
    /// Predicted encounter-plane miss vector (m).
    pub x: Vec2,
    /// Covariance of the prediction (m²).
    pub cov: SymMat2,
    /// Combined hard-body radius (m).
    pub hbr: f64,
}

impl ConjunctionState {
    pub fn new(x: Vec2, cov: SymMat2, hbr: f64) -> Result<Self> {
        let state = Self { x, cov, hbr };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.x.is_finite() || !self.hbr.is_finite() {
            return Err(Error::NonFinite);
        }
        if self.hbr < 0.0 {
            return Err(Error::InvalidArgument {
                name: "hbr",
                reason: "must be non-negative",
            });
        }
        self.cov.require_pd()
    }

    /// Same geometry with the covariance rotated by `angle` about the origin
    /// while the prediction stays put.
    pub fn with_cov_rotated(&self, angle: f64) -> Self {
        Self {
            cov: self.cov.rotated(angle),
            ..*self
        }
    }

    /// Rotate prediction and covariance together.
    pub fn rotated(&self, angle: f64) -> Self {
        Self {
            x: self.x.rotated(angle),
            cov: self.cov.rotated(angle),
            hbr: self.hbr,
        }
    }

    /// Covariance multiplied by `scale²` (i.e. its square root by `scale`).
    pub fn with_cov_scale(&self, scale: f64) -> Self {
        Self {
            cov: self.cov.scaled(scale * scale),
            ..*self
        }
    }
}

/// The true (unknown outside simulation) encounter-plane miss vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrueState {
    pub xi: Vec2,
}

/// Polar form of a miss vector: distance and clock angle in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarMiss {
    pub psi: f64,
    pub lambda_angle: f64,
}

impl PolarMiss {
    pub fn to_cartesian(self) -> Vec2 {
        Vec2::from_polar(self.psi, self.lambda_angle)
    }
}

pub fn to_polar(xi: Vec2) -> PolarMiss {
    let psi = xi.norm();
    if psi == 0.0 {
        return PolarMiss {
            psi: 0.0,
            lambda_angle: 0.0,
        };
    }
    let mut angle = libm::atan2(xi.y, xi.x);
    if angle < 0.0 {
        angle += TAU;
    }
    if angle >= TAU {
        angle -= TAU;
    }
    PolarMiss {
        psi,
        lambda_angle: angle,
    }
}

/// A 3-vector in an inertial or local frame (m or m/s).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    pub fn scale(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn as_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Row-major 3×3 matrix.
pub type Mat3 = [[f64; 3]; 3];

/// Fields of one conjunction data message needed for the 2-D assessment.
#[derive(Debug, Clone, PartialEq)]
pub struct CdmRecord {
    pub event_id: String,
    /// Time of closest approach, ISO-8601 as written in the message.
    pub tca: String,
    /// Relative position of the secondary with respect to the primary (m).
    pub rel_position: Vec3,
    /// Relative velocity (m/s).
    pub rel_velocity: Vec3,
    /// Combined relative position covariance at TCA (m²).
    pub pos_cov: Mat3,
    /// Combined hard-body radius (m).
    pub hbr: f64,
}

/// Check `m` against [`SYMMETRY_TOL`] and return `(M + Mᵀ)/2`.
pub fn symmetrize(m: &Mat3) -> Result<Mat3> {
    let scale = m
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if !m.iter().flat_map(|row| row.iter()).all(|v| v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut out = *m;
    let mut worst = 0.0_f64;
    for i in 0..3 {
        for j in (i + 1)..3 {
            worst = worst.max((m[i][j] - m[j][i]).abs());
            let avg = 0.5 * (m[i][j] + m[j][i]);
            out[i][j] = avg;
            out[j][i] = avg;
        }
    }
    let rel = if scale > 0.0 { worst / scale } else { 0.0 };
    if rel > SYMMETRY_TOL {
        return Err(Error::AsymmetricCovariance { asymmetry: rel });
    }
    Ok(out)
}

fn quad_form(m: &Mat3, a: Vec3, b: Vec3) -> f64 {
    let a = a.as_array();
    let b = b.as_array();
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += a[i] * m[i][j] * b[j];
        }
    }
    s
}

/// Orthonormal encounter-plane basis `(e1, e2)` for a record.
///
/// `e1` points along the component of the relative position normal to the
/// relative velocity, so the prediction lands on the +e1 axis. When that
/// component vanishes, `e1` is built from the coordinate axis on which the
/// velocity direction has its smallest component. `e2 = v̂ × e1`.
pub fn encounter_frame(rel_position: Vec3, rel_velocity: Vec3) -> Result<(Vec3, Vec3)> {
    let speed = rel_velocity.norm();
    if !(speed > 0.0) || !speed.is_finite() {
        return Err(Error::ZeroRelativeVelocity);
    }
    if !rel_position.is_finite() {
        return Err(Error::NonFinite);
    }
    let vhat = rel_velocity.scale(1.0 / speed);
    let r_perp = rel_position.sub(vhat.scale(rel_position.dot(vhat)));
    let r_perp_norm = r_perp.norm();
    let e1 = if r_perp_norm > 1e-13 * rel_position.norm() && r_perp_norm > 0.0 {
        r_perp.scale(1.0 / r_perp_norm)
    } else {
        let comps = vhat.as_array().map(f64::abs);
        let axis = if comps[0] <= comps[1] && comps[0] <= comps[2] {
            Vec3::new(1.0, 0.0, 0.0)
        } else if comps[1] <= comps[2] {
            Vec3::new(0.0, 1.0, 0.0)
        } else {
            Vec3::new(0.0, 0.0, 1.0)
        };
        let t = axis.sub(vhat.scale(axis.dot(vhat)));
        t.scale(1.0 / t.norm())
    };
    let e2 = vhat.cross(e1);
    Ok((e1, e2))
}

/// Project a record onto the encounter plane.
pub fn project_to_encounter_plane(rec: &CdmRecord) -> Result<ConjunctionState> {
    let (e1, e2) = encounter_frame(rec.rel_position, rec.rel_velocity)?;
    let cov3 = symmetrize(&rec.pos_cov)?;
    let x = Vec2::new(e1.dot(rec.rel_position), e2.dot(rec.rel_position));
    let cov = SymMat2::new(
        quad_form(&cov3, e1, e1),
        quad_form(&cov3, e1, e2),
        quad_form(&cov3, e2, e2),
    );
    if !cov.is_pd() {
        return Err(Error::DegenerateGeometry(
            "projected covariance is not positive definite",
        ));
    }
    ConjunctionState::new(x, cov, rec.hbr)
}
