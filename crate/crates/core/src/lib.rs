//! Numerical laboratory for localized gradient amplification in Schrödinger
//! equations: transmission eigenmodes on balls, Herglotz wave-function fits,
//! Crank–Nicolson solvers, and the measurements that check amplification claims.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amplify;
pub mod config;
pub mod error;
pub mod geometry;
pub mod herglotz;
pub mod pipeline;
pub mod quadrature;
pub mod schrodinger;
pub mod specialfn;
pub mod transmission;

pub use error::{Error, Result};
pub use num_complex::Complex64;
