//! Numerical laboratory for intrinsic contractivity of Feynman-Kac semigroups
//! generated by symmetric jump processes with a killing potential.
//!
//! - [`kernels`]: jump kernels, potentials, standing-assumption checks, `J*`, `V*`, `φ`.
//! - [`criteria`]: rate functions `Φ`, `β`, `β̂` and the contractivity verdicts.
//! - [`spectral`]: 1-D discretization of the quadratic form, ground state, heat kernel, checks.
//! - [`montecarlo`]: path simulation, Feynman-Kac estimates, exit events, ratio test.
//! - [`cli`]: scenario configs, task dispatch, CSV/report output.

pub mod cli;
pub mod criteria;
pub mod error;
pub mod kernels;
pub mod montecarlo;
pub mod spectral;
pub mod quad;
pub mod special;

pub use error::{Condition, Error, Result};
