//! Sparse-recovery spectral estimation for 2D four-wave-mixing data.
//!
//! Replaces the 2D discrete Fourier transform in post-processing with a
//! two-pass compressed-sensing procedure: every tau row is converted to
//! the omega_t domain by a 1D basis-pursuit de-noising (BPDN) solve, then
//! every omega_t column is converted to the omega_tau domain the same
//! way. The BPDN problems are solved by spectral projected gradient on
//! LASSO subproblems with Newton root-finding on the Pareto curve.
//!
//! Also included: a baseline 2D discrete FT on the same frequency grids,
//! a synthetic generator for damped-exponential test signals (with an
//! Rb-vapor two-line preset), peak/FWHM analysis for resolution
//! comparisons, and plain-text file formats.

pub mod analysis;
pub mod bpdn;
pub mod data;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod io;
pub mod pipeline;
pub mod synth;

pub use error::{Error, Result};
