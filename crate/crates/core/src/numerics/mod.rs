//! Complex linear-algebra kernels: dense matrices, unitary DFT, Cholesky
//! factorization, Hermitian eigendecomposition and PSD log-determinants.
//!
//! All kernels are pure functions of their inputs and are generic over the
//! real scalar type.

mod cholesky;
mod eigen;
mod fft;
mod matrix;

pub use cholesky::{cholesky, cholesky_with, logdet_psd, logdet_psd_with, CholeskyFactor};
pub use eigen::{eig_hermitian, eig_hermitian_with, eigvals_hermitian, EigenResult};
pub use fft::{dft, dft_unscaled};
pub use matrix::ComplexMatrix;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use std::fmt;
use std::iter::Sum;

/// Real scalar the kernels are generic over (`f32` or `f64`).
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant, panicking only for non-representable NaN.
    fn from_f64_const(v: f64) -> Self {
        Self::from_f64(v).expect("constant representable in scalar type")
    }
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + NumAssign
        + Sum
        + fmt::Debug
        + fmt::Display
        + Send
        + Sync
        + 'static
{
}

/// Relative tolerances used by the kernels. All checks scale with the norm
/// (or trace) of the input so the same constants work across magnitudes.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances<T> {
    /// Hermitian-symmetry deviation, relative to the Frobenius norm.
    pub herm_rel: T,
    /// Cholesky pivot floor, relative to trace/n.
    pub pivot_rel: T,
    /// Diagonal loading added on a failed pivot, relative to trace/n.
    pub load_rel: T,
    /// Jacobi convergence: off-diagonal Frobenius mass relative to the norm.
    pub off_diag_rel: T,
    /// Eigenvalues with magnitude below this (relative to the norm) clamp to 0.
    pub eig_clamp_rel: T,
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        Tolerances {
            herm_rel: T::from_f64_const(1e-10),
            pivot_rel: T::from_f64_const(1e-12),
            load_rel: T::from_f64_const(1e-10),
            off_diag_rel: T::from_f64_const(1e-12),
            eig_clamp_rel: T::from_f64_const(1e-12),
        }
    }
}

/// Errors produced by the numeric kernels.
#[derive(Debug, thiserror::Error)]
pub enum NumericsError {
    #[error("empty sequence")]
    EmptySequence,
    #[error("matrix is not Hermitian: deviation {deviation} exceeds tolerance {tolerance}")]
    NotHermitian { deviation: f64, tolerance: f64 },
    #[error("matrix is not positive definite (pivot {index} = {pivot})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("singular matrix")]
    Singular,
    #[error("eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
}

pub(crate) fn complex_from_re<T: Scalar>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}
