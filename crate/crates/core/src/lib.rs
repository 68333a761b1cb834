//! Spatio-temporally correlated cyclostationary noise for MIMO narrowband
//! power-line links: synthesis through frequency-shift filter banks, slot
//! classification, Gaussianity testing, joint space-time whitening and
//! capacity lower bounds with and without transmitter channel knowledge.
//!
//! The numeric kernels in [`numerics`] are generic over the real scalar type
//! (`f32`/`f64` via `num-traits`); the pipeline modules work in `f64` through
//! the [`Real`], [`Cplx`] and [`Mat`] aliases below.

pub mod analysis;
pub mod capacity;
pub mod channel;
pub mod noisegen;
pub mod numerics;
pub mod whitening;

/// Scalar type used by the pipeline modules.
pub type Real = f64;
/// Complex sample type used by the pipeline modules.
pub type Cplx = num_complex::Complex<Real>;
/// Dense complex matrix over [`Real`].
pub type Mat = numerics::ComplexMatrix<Real>;

pub use numerics::{ComplexMatrix, EigenResult, Scalar, Tolerances};
