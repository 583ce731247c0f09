//! Dense complex linear algebra for small multi-qubit registers.
//!
//! Index convention: subsystem 0 is the most significant tensor factor, so
//! for dims `[d0, d1]` the flat index of `|i⟩|j⟩` is `i·d1 + j`.

mod eig;
mod gates;
mod io;
mod matrix;
mod state;

pub use eig::{
    cholesky_succeeds, hermitian_eig, hermitian_eigenvalues, log2_hermitian, spectral_map, unitary_eigenvectors,
    HermitianEigen,
};
pub use gates::{compile_gate_network, pauli, Gate, GateKind, GateNetwork};
pub use io::{MatrixFile, StateFile};
pub use matrix::{tensor, tensor_all, DenseComplexMatrix};
pub use state::{ket, DensityMatrix};

pub(crate) use state::{apply_on_subsystems, subsystem_offsets};

#[derive(Debug, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix of dimension {dim} needs {} entries, got {len}", dim * dim)]
    EntryCount { dim: usize, len: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("subsystem dims {dims:?} do not factor dimension {dim}")]
    SubsystemDims { dim: usize, dims: Vec<usize> },
    #[error("invalid subsystem selection {requested:?} for {count} subsystems")]
    InvalidSubsystems { requested: Vec<usize>, count: usize },
    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("matrix is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },
    #[error("trace is {re}{im:+}i, expected 1")]
    TraceNotOne { re: f64, im: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NotConverged { sweeps: usize, off_norm: f64 },
    #[error("zero vector")]
    ZeroVector,
    #[error("malformed gate network: {0}")]
    InvalidGate(String),
}
