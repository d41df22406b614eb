//! Variable-Toeplitz matrix-sequences arising from two-step BDF methods on
//! non-uniform time grids.
//!
//! The crate builds the lower-banded matrices `L(r_2, ..., r_n)` driven by a
//! step-ratio sequence, their Hermitian parts, and the banded Toeplitz
//! comparison matrices; evaluates the associated spectral symbols (including
//! the first-order momentary correction for smooth grid maps); computes dense
//! symmetric eigenvalues and singular values with self-contained Jacobi
//! solvers; runs distribution and extreme-eigenvalue studies against symbol
//! samplings; and certifies (or refutes) positive definiteness through a
//! rank-at-most-2 block decomposition of `2S_n`.

pub mod decomposition;
pub mod distribution;
pub mod eigsolve;
pub mod error;
pub mod grid;
pub mod matrix;
pub mod symbol;

pub use error::{Error, Result};
pub use grid::{GridMap, GridSpec, RatioSequence, TimeGrid};
pub use matrix::{BandedToeplitz, DenseSymmetric, DiagSampling, LowerBand3Matrix};
pub use symbol::{PhiSpec, SymbolParams, SymbolPart};
