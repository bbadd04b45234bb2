//! Desk-scale numerics for finite-dimensional lattice norms, complex
//! interpolation couples, injective tensor norms, Rademacher type/cotype
//! constants and operator factorizations.
//!
//! The crate is organized around immutable norm objects:
//!
//! - [`lattice::LatticeNorm`]: lattice norms on `R^n` with dual, power and
//!   product constructors,
//! - [`spaces::Space`]: normed spaces over real or complex scalars, including
//!   vector-valued and tensor constructions, plus [`spaces::LinearMap`],
//! - [`interp`]: certified two-sided bounds for interpolation norms of
//!   couples, and the embedding-constant estimators built on them,
//! - [`constants`]: sign-average based type/cotype estimators and the
//!   registry of declared constant bounds,
//! - [`factorize`]: multiplier and Hilbert-space factorization searches,
//! - [`harness`]: instance grids, verification suites, CSV reports and the
//!   `verify` CLI entry point.
//!
//! All solvers are deterministic for a fixed seed; batch work is distributed
//! with rayon when the `parallel` feature (default) is enabled and falls back
//! to sequential execution otherwise.

pub mod cert;
pub mod constants;
pub mod factorize;
pub mod harness;
pub mod interp;
pub mod lattice;
mod optim;
pub mod par;
pub mod rng;
pub mod simplex;
pub mod spaces;

pub use num_complex::Complex64 as C64;

/// Errors reported by constructors and evaluators.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite input entry at index {index}")]
    NonFinite { index: usize },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_finite(x: &[f64]) -> Result<()> {
    for (i, v) in x.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite { index: i });
        }
    }
    Ok(())
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
