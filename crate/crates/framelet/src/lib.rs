//! Tight wavelet frame toolkit for image restoration from incomplete,
//! degraded measurements.
//!
//! The crate is organised around a small number of building blocks:
//!
//! * [`framelets`] — B-spline filter banks satisfying the unitary extension
//!   principle, with multi-level (quasi-affine) filter cascades.
//! * [`transform`] — undecimated analysis/synthesis transforms on periodic
//!   `N x N` grids, plus level-dependent coefficient weights.
//! * [`operators`] — measurement operators (identity, Gaussian blur,
//!   orthonormal wavelet), random sample sets and noisy measurements with
//!   exact empirical noise moments.
//! * [`solver`] — split Bregman solver for the box-constrained weighted-l1
//!   restoration model.
//! * [`bounds`] — closed-form evaluation of the a-priori error estimates
//!   (covering-number bound, mean-squared-error bound, critical epsilon).
//! * [`continuum`] — B-spline scaling functions on the periodic unit square,
//!   function sampling, interpolation and decay-constant estimation.
//! * [`harness`] — deterministic phantoms, Monte Carlo sweeps over sample
//!   densities/resolutions, and worst-case bound calibration.
//!
//! Every example under `examples/` exercises one capability end to end; the
//! `framelet` binary exposes the same functionality as subcommands.

pub mod bounds;
pub mod continuum;
pub mod error;
pub mod framelets;
pub mod grid;
pub mod harness;
pub mod operators;
pub mod solver;
pub mod transform;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
