//! Numerical laboratory for the spectra of products of correlated random
//! matrices.
//!
//! The crate simulates products `W = X^(1) ... X^(m)` of independent n×n
//! real matrices whose transpose-symmetric entry pairs carry a common
//! correlation, and verifies at desk scale that the eigenvalue cloud of `W`
//! converges to the law of the m-th power of a uniform point on the unit
//! disc, independently of the correlation. The pieces:
//!
//! - [`ensemble`]: correlated-entry generators, truncation, interpolation;
//! - [`spectra`]: products, eigenvalues, singular values and the 2n×2n
//!   Hermitian linearization carrying the symmetrized singular values;
//! - [`limitlaw`]: the closed-form limit density, its radial CDF, sampler
//!   and logarithmic potential;
//! - [`stieltjes`]: the two-equation fixed-point system for the Stieltjes
//!   transform of the symmetrized singular-value limit, plus inversion;
//! - [`potential`]: empirical log-potentials, density reconstruction by the
//!   discrete Laplacian, and smallest-singular-value diagnostics;
//! - [`harness`]: seeded, reproducible Monte Carlo experiments;
//! - [`verify`]: the end-to-end acceptance checks with one report entry per
//!   criterion.

pub mod ensemble;
pub mod error;
pub mod harness;
pub mod io;
pub mod limitlaw;
pub mod potential;
pub mod rng;
pub mod spectra;
pub mod stieltjes;
pub mod verify;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex<f64>;
