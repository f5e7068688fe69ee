//! Numerical kernels shared by every other module: 2-D linear algebra,
//! chi-square special functions, bounded minimization and root finding,
//! adaptive quadrature (including the Gaussian disk integral) and seeded
//! random streams.

mod eigen;
mod linalg;
mod optimize;
mod quadrature;
mod rng;
mod special;

pub use eigen::{eig_sym2, EigenPair2};
pub use linalg::{SymMat2, Vec2};
pub use optimize::{find_root, minimize_periodic, minimize_scalar, Minimum};
pub use quadrature::{
    gauss_disk_quadrature, integrate, integrate_with_breaks, DEFAULT_DISK_REL_TOL,
};
pub use rng::{rng_stream, RngStream};
pub use special::{chi2_cdf, chi2_inv, chi2_sf, normal_cdf, normal_sf};
