//! Multiple Geronimus transformations of orthogonal polynomial sequences.
//!
//! Starting from a moment functional `μ` and a monic polynomial `h` of degree
//! `N` (given by its roots and multiplicities), this crate builds the
//! transformed bilinear form `[·,·]_h` — a discrete Sobolev inner product with
//! an `N×N` block of free parameters — together with its monic orthogonal
//! polynomials, their `(2N+1)`-band recurrence matrix, and the UL/LU Darboux
//! and Cholesky factorizations connecting the original and transformed
//! sequences. A block-matrix view reinterprets the same data as a one-step
//! Geronimus transformation for `N×N` matrix orthogonal polynomials.
//!
//! Modules follow the pipeline order:
//!
//! * [`scalar`] — the working-precision abstraction (`f64` or MPFR floats),
//! * [`linalg`] — small dense kernels (LU, LDLᵀ, Cholesky) used throughout,
//! * [`poly`] — polynomials, the `{tᵐ hᵏ}` basis, jets, confluent matrices,
//! * [`forms`] — moment functionals and the three bilinear forms,
//! * [`orthopoly`] — monic orthogonal sequences, Jacobi matrices, kernels,
//! * [`transform`] — connection coefficients, determinants, definiteness,
//! * [`factor`] — band matrices and the factorization identities,
//! * [`blockview`] — the matrix-orthogonal-polynomial unfolding,
//! * [`config`] / [`report`] / [`pipeline`] — the CLI surface.

use thiserror::Error;

pub mod blockview;
pub mod config;
pub mod factor;
pub mod forms;
pub mod linalg;
pub mod orthopoly;
pub mod pipeline;
pub mod poly;
pub mod report;
pub mod scalar;
pub mod transform;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A moment beyond the functional's horizon was requested.
    #[error("moment horizon exceeded: moment {needed} requested, horizon is {horizon}")]
    MomentHorizon { needed: usize, horizon: usize },
    /// A leading principal minor (or connection determinant) vanished.
    #[error("quasi-definiteness failure at degree {degree}")]
    QuasiDefinite { degree: usize },
    /// A squared norm that must be positive was not.
    #[error("positivity failure at degree {degree}")]
    NotPositive { degree: usize },
    /// Three-term recurrence data requested from a non-measure form.
    #[error("the three-term recurrence requires a measure-backed (Hankel) form")]
    NonHankelSource,
    /// A truncation order is too small for the requested computation.
    #[error("truncation too small: need {need}, have {have}")]
    Truncation { need: usize, have: usize },
    /// Mass-table nodes do not match the transforming polynomial.
    #[error("mass nodes do not match the transforming polynomial")]
    NodeMismatch,
    /// A band matrix is too wide for the requested block partition.
    #[error("bandwidths ({lower},{upper}) exceed the block size {block}")]
    BandwidthTooLarge {
        lower: usize,
        upper: usize,
        block: usize,
    },
    /// Invalid user input (configs, node lists, parameter matrices).
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
