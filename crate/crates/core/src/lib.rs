//! Numerical Clifford analysis on the sphere and in Euclidean space.
//!
//! The library constructs Dirac-type operators on S^n and R^n, computes
//! their exact spectra through per-degree spectral blocks, and verifies the
//! associated sharp L2 inequalities numerically: spectral operators are
//! applied exactly on band-limited expansions in spherical monogenics, and
//! quadrature enters only where a genuinely independent measurement is
//! wanted (norms, kernel convolutions, Cayley transport).

pub mod clifford;
pub mod conformal;
pub mod error;
pub mod euclidean;
pub mod kernel;
pub mod linalg;
pub mod polyspace;
pub mod quad;
pub mod report;
pub mod sphere;
pub mod suites;

pub use error::{Error, Result};
