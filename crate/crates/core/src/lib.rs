//! Spectral analysis of isotropic kernels on the unit sphere `S^m`.
//!
//! Funk–Hecke eigenvalues, Kolmogorov widths of reproducing-kernel unit
//! balls, the shifting / cap-average / Steklov convolution families, and
//! Jackson-type finite-rank approximation operators, together with the
//! Hölder-exponent and brute-force Nyström checks used to validate them.
//!
//! The crate is `no_std` (it needs `alloc`); IO and the command line live in
//! the `spherewidth` companion crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod eigen;
pub mod error;
pub mod holder;
pub mod integrate;
pub mod jackson;
pub mod kernels;
pub mod multipliers;
pub mod oracle;
pub mod spectra;
pub mod sphere_math;

pub use error::{Error, Result};
pub use kernels::{DotPowerKernel, GaussianKernel, IsotropicProfile, ProfileKind};
pub use multipliers::{FamilyKind, Multiplier, MultiplierFamily};
pub use spectra::Spectrum;
pub use sphere_math::{CapGeometry, QuadratureRule, SphereDim};
