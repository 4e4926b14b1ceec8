//! Exact and numerical machinery for discrete spherical averages on `Z^d`.
//!
//! The crate is organised by subsystem:
//!
//! - [`lattice`]: representation counts `r_d(λ)` of `λ` as a sum of `d`
//!   squares (theta-series convolution in arbitrary precision), ball counts,
//!   brute-force sphere enumeration and coordinate-profile statistics.
//! - [`arith`]: Farey sequences and their mediant dissection of `[0, 1)`,
//!   quadratic Gauss sums and the singular series of the sum-of-squares
//!   problem.
//! - [`specfun`]: log-gamma at half-integers, Bessel functions of
//!   half-integer order through their finite-interval integral, the Fourier
//!   transform of the normalised surface measure on `S^{r-1}`, and exact
//!   Krawtchouk polynomials.
//! - [`multiplier`]: the normalised exponential sum `m_t(ξ)` over the
//!   lattice sphere, its circle-method decomposition into major-arc terms and
//!   a residual, and semigroup comparison multipliers.
//! - [`maximal`]: spherical and ball averages of functions on the periodic
//!   box `(Z/MZ)^d`, dyadic maximal functions and ℓ² ratio experiments.
//! - [`sweep`]: seeded sweeps of bound ratios written as CSV, and the
//!   calibration suite whose results are frozen in [`calibration`].
//! - [`verify`]: the hard-assert suite behind `dspheres verify`.
//! - [`cli`]: the command-line front end (the `dspheres` binary is a thin
//!   wrapper around [`cli::run`]).
//!
//! Every count is exact; floating-point values are derived from exact data
//! only where a ratio or a transcendental function requires it.

pub mod arith;
pub mod calibration;
pub mod cli;
mod error;
pub mod lattice;
pub mod maximal;
pub mod multiplier;
pub mod numeric;
pub mod specfun;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};

/// Tool version embedded into every CSV header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
