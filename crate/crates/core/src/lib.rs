//! Conjunction assessment on the encounter plane.
//!
//! Two families of risk metric live side by side here:
//!
//! * the traditional estimate `pc_hat`, the Gaussian mass centred on the
//!   predicted miss vector that falls inside the hard-body disk ([`pc`]);
//! * frequentist inference on the true miss vector, built on the Mahalanobis
//!   pivot: confidence ellipses, significance probabilities for the null
//!   "the true miss lies inside the hard-body radius", and a confidence
//!   interval on the miss distance ([`inference`]).
//!
//! [`priors`] adds the Bayesian extensions (truncated uniform prior evidence,
//! threshold calibration, empirical-Bayes gamma prior) and [`encounter`]
//! carries the domain types and the projection from 3-D relative state into
//! the encounter plane.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, experiment
//! harnesses and the CLI live in the `conjunction-tools` crate.

#![no_std]

extern crate alloc;

mod error;

pub mod encounter;
pub mod inference;
pub mod numerics;
pub mod pc;
pub mod priors;

pub use error::{Error, Result};
pub use numerics::{SymMat2, Vec2};
