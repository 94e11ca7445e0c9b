//! Loewner–Kufarev evolution in the unit disk.
//!
//! The crate integrates Herglotz vector fields `G(z,t) = (τ−z)(1−τ̄z)p(z,t)`,
//! reconstructs Loewner chains from the resulting evolution families, builds
//! Becker quasiconformal extensions and analyses their Beltrami coefficients.
//!
//! It is `no_std` and needs only `alloc`. File formats, the command-line front
//! end and parallel grid fills live in the `loewner-cli` crate.
#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod becker;
pub mod chains;
mod error;
pub mod evolution;
mod fft;
pub mod geometry;
pub mod herglotz;
pub mod quadrature;

pub use error::{Error, Result};
pub use num_complex::Complex64;
