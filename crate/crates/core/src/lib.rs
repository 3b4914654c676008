//! Numerical toolkit for `u_t = a0 Δu + a * Δu` with a memory kernel `a`.
//!
//! Every Fourier mode evolves by a scalar relaxation `z + λ A * z = 1`
//! with `A(t) = a0 + ∫_0^t a`; see [`volterra`]. The [`asymptotics`] module
//! rescales solutions and measures their distance to Mittag-Leffler limit
//! profiles, and [`visco`] handles the isotropic viscoelastic system.

// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod quad;
pub mod kernels;
pub mod specfun;
pub mod spectral;
pub mod visco;
pub mod volterra;

pub use error::{Error, Hypothesis, Result};
pub use num_complex::Complex64;
