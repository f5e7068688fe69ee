use super::linalg::{SymMat2, Vec2};
use crate::{Error, Result};

/// Eigendecomposition of a symmetric 2×2 matrix.
///
/// Eigenvalues are sorted ascending; `v1`, `v2` are the matching orthonormal
/// eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair2 {
    pub lambda1: f64,
    pub lambda2: f64,
    pub v1: Vec2,
    pub v2: Vec2,
}

impl EigenPair2 {
    /// `V diag(λ) Vᵀ`.
    pub fn reconstruct(&self) -> SymMat2 {
        let (a, b) = (self.v1, self.v2);
        SymMat2::new(
            self.lambda1 * a.x * a.x + self.lambda2 * b.x * b.x,
            self.lambda1 * a.x * a.y + self.lambda2 * b.x * b.y,
            self.lambda1 * a.y * a.y + self.lambda2 * b.y * b.y,
        )
    }

    /// Coordinates of `v` in the eigenbasis.
    pub fn to_eigen_frame(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.v1.dot(v), self.v2.dot(v))
    }

    pub fn from_eigen_frame(&self, c: Vec2) -> Vec2 {
        self.v1 * c.x + self.v2 * c.y
    }
}

/// Closed-form symmetric 2×2 eigensolver.
///
/// The larger eigenvalue comes from the half-trace/discriminant form; the
/// smaller is recovered as `det / λ2` when both are positive so that badly
/// conditioned covariances keep full relative accuracy in the small one.
pub fn eig_sym2(m: &SymMat2) -> Result<EigenPair2> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let (a, b, c) = (m.d11, m.d12, m.d22);
    let half_trace = 0.5 * (a + c);
    let disc = libm::hypot(0.5 * (a - c), b);
    let lambda2 = half_trace + disc;
    let det = m.det();
    let lambda1 = if lambda2 > 0.0 && det > 0.0 {
        det / lambda2
    } else {
        half_trace - disc
    };

    if b == 0.0 {
        // Axis-aligned input: keep the coordinate axes exactly.
        let (v1, v2) = if a <= c {
            (Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0))
        } else {
            (Vec2::new(0.0, 1.0), Vec2::new(1.0, 0.0))
        };
        return Ok(EigenPair2 {
            lambda1: a.min(c),
            lambda2: a.max(c),
            v1,
            v2,
        });
    }

    // Principal axis angle of the larger eigenvalue.
    let theta = 0.5 * libm::atan2(2.0 * b, a - c);
    let (s, co) = (libm::sin(theta), libm::cos(theta));
    Ok(EigenPair2 {
        lambda1,
        lambda2,
        v1: Vec2::new(-s, co),
        v2: Vec2::new(co, s),
    })
}

/// Like [`eig_sym2`] but rejects matrices that are not positive definite.
pub(crate) fn eig_sym2_pd(m: &SymMat2) -> Result<EigenPair2> {
    m.require_pd()?;
    eig_sym2(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_recon_err(m: &SymMat2, e: &EigenPair2) -> f64 {
        let r = e.reconstruct();
        let scale = e.lambda1.abs().max(e.lambda2.abs());
        let d = (r.d11 - m.d11)
            .abs()
            .max((r.d12 - m.d12).abs())
            .max((r.d22 - m.d22).abs());
        d / scale
    }

    fn check_invariants(e: &EigenPair2) {
        assert!(e.lambda1 <= e.lambda2);
        assert!(e.v1.dot(e.v2).abs() < 1e-12);
        assert!((e.v1.norm() - 1.0).abs() < 1e-12);
        assert!((e.v2.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_input() {
        let e = eig_sym2(&SymMat2::diag(4.0, 9.0)).unwrap();
        assert_eq!((e.lambda1, e.lambda2), (4.0, 9.0));
        assert_eq!(e.v1, Vec2::new(1.0, 0.0));
        assert_eq!(e.v2, Vec2::new(0.0, 1.0));
        check_invariants(&e);
    }

    #[test]
    fn two_by_two_with_coupling() {
        let m = SymMat2::new(5.0, 3.0, 5.0);
        let e = eig_sym2(&m).unwrap();
        assert!((e.lambda1 - 2.0).abs() < 1e-14);
        assert!((e.lambda2 - 8.0).abs() < 1e-14);
        let s = core::f64::consts::FRAC_1_SQRT_2;
        // eigenvectors are defined up to sign
        assert!((e.v1.dot(Vec2::new(s, -s)).abs() - 1.0).abs() < 1e-14);
        assert!((e.v2.dot(Vec2::new(s, s)).abs() - 1.0).abs() < 1e-14);
        check_invariants(&e);
        assert!(rel_recon_err(&m, &e) < 1e-14);
    }

    #[test]
    fn isotropic_is_degenerate_but_reconstructs() {
        let m = SymMat2::isotropic(3.0);
        let e = eig_sym2(&m).unwrap();
        check_invariants(&e);
        assert!(rel_recon_err(&m, &e) < 1e-15);
    }

    #[test]
    fn conditioning_up_to_1e8() {
        for &cond in &[1.0, 1e2, 1e4, 1e6, 1e8] {
            for k in 0..16 {
                let angle = 0.37 * k as f64;
                let m = SymMat2::from_axes(libm::sqrt(cond), 1.0, angle);
                let e = eig_sym2(&m).unwrap();
                check_invariants(&e);
                assert!(rel_recon_err(&m, &e) < 1e-10, "cond {cond} angle {angle}");
                assert!((e.lambda1 - 1.0).abs() < 1e-6, "small eigenvalue {}", e.lambda1);
            }
        }
    }

    #[test]
    fn rejects_non_finite_and_non_pd() {
        assert!(eig_sym2(&SymMat2::new(f64::INFINITY, 0.0, 1.0)).is_err());
        assert!(eig_sym2_pd(&SymMat2::new(1.0, 3.0, 1.0)).is_err());
        // indefinite input is fine when PD is not required
        let e = eig_sym2(&SymMat2::new(1.0, 3.0, 1.0)).unwrap();
        assert!((e.lambda1 + 2.0).abs() < 1e-14);
    }
}
