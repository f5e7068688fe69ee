use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument {
        name: &'static str,
        reason: &'static str,
    },

    #[error("unsupported degrees of freedom {0} (expected 1 or 2)")]
    UnsupportedDof(u32),

    #[error("matrix is not positive definite (d11={d11}, d12={d12}, d22={d22})")]
    NotPositiveDefinite { d11: f64, d12: f64, d22: f64 },

    #[error("non-finite value encountered")]
    NonFinite,

    #[error("objective is not finite at abscissa {abscissa}")]
    NonFiniteObjective { abscissa: f64 },

    #[error("no sign change on [{lo}, {hi}] (f(lo)={f_lo}, f(hi)={f_hi})")]
    NoBracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("quadrature did not converge: estimated relative error {achieved:e}")]
    QuadratureNotConverged { achieved: f64 },

    #[error("relative velocity is zero")]
    ZeroRelativeVelocity,

    #[error("degenerate encounter geometry: {0}")]
    DegenerateGeometry(&'static str),

    #[error("covariance asymmetry {asymmetry:e} exceeds tolerance")]
    AsymmetricCovariance { asymmetry: f64 },

    #[error("hard-body radius {hbr} exceeds the smallest screening semi-axis {semi_axis}")]
    HbrExceedsSlice { hbr: f64, semi_axis: f64 },

    #[error("empirical Bayes moments admit no gamma prior (E[phi]={mean_phi:e}, E[phi^2]={mean_phi_sq:e})")]
    EbInfeasible { mean_phi: f64, mean_phi_sq: f64 },
}
