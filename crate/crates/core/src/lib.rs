//! Vector-valued big q-Jacobi transform on the two-sided lattice
//! `R_q = z₊q^ℤ ∪ z₋q^ℤ`.
//!
//! The crate is organised bottom-up:
//!
//! - [`qcore`]: q-Pochhammer symbols, the modified theta function and basic
//!   hypergeometric series.
//! - [`grid`]: parameters, the lattice window, grid functions, the second order
//!   q-difference operator `L`, weights, Jackson integrals and Casorati
//!   determinants.
//! - [`eigen`]: the eigenfunctions `φ_γ`, `φ†_γ`, `Φ^±_γ` and their connection
//!   coefficients.
//! - [`spectral`]: Green kernel, spectral measure ingredients, the discrete
//!   spectrum `Γ` and a truncated-matrix spectrum.
//! - [`transform`]: the transforms `F`, `G`, `J` and the Hilbert spaces they map
//!   into.
//! - [`harness`]: configuration, check registry and reporting used by the CLI.

pub mod eigen;
pub mod error;
pub mod grid;
pub mod harness;
pub mod qcore;
pub mod spectral;
pub mod transform;

pub use error::{Error, Result};
pub use grid::{Branch, Grid, GridFunction, Params};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Shorthand for building a [`C64`].
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
