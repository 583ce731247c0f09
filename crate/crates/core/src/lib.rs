//! Resource-theoretic coherence tools and a simulator for two-server
//! distributed trace estimation.
//!
//! The numeric core ([`linalg`], [`coherence`], [`incoherent_ops`]) is
//! generic over a [`Real`] scalar; the aliases below fix it to `f64`, which
//! is what the optimizers, samplers and protocol harness use.

pub mod classify;
pub mod coherence;
pub mod incoherent_ops;
pub mod json;
pub mod linalg;
pub mod ndqc2;
pub mod random;
pub mod scalar;
pub mod suites;

pub use scalar::{Real, C};

/// Default master seed.
pub const DEFAULT_SEED: u64 = 0x00C0_FFEE;

pub type Matrix = linalg::DenseComplexMatrix<f64>;
pub type State = linalg::DensityMatrix<f64>;
pub type Basis = coherence::ProductBasis<f64>;
pub type Channel = incoherent_ops::KrausChannel<f64>;
pub type Complex64 = num_complex::Complex<f64>;

pub type MatrixF32 = linalg::DenseComplexMatrix<f32>;
pub type StateF32 = linalg::DensityMatrix<f32>;
