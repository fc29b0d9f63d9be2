//! Covariance recovery for one-bit sampled, non-stationary Gaussian
//! processes observed against time-varying Gaussian thresholds.
//!
//! The pipeline: generate a non-stationary ensemble ([`process`]), quantize
//! it to signs against random thresholds ([`sampling`]), then invert the
//! sign statistics back to the input covariance ([`recover`]) using one of
//! three integral-approximation backends (piecewise Pade, Gauss-Legendre
//! quadrature, Monte-Carlo integration) built on the sign-correlation
//! integral in [`arcsine`]. The [`threshold`] module estimates the threshold
//! parameters from a dataset by constrained maximum likelihood, and
//! [`bussgang`] recovers the input/sign cross-correlation matrix.
//!
//! See the crate examples for runnable walk-throughs of each capability,
//! and [`experiments`] for the batch harnesses behind the `onebit-cov`
//! command-line tool.

pub mod arcsine;
pub mod bussgang;
pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod optim;
pub mod process;
pub mod quad;
pub mod recover;
pub mod sampling;
pub mod special;
pub mod threshold;

pub use error::{Error, Result};
