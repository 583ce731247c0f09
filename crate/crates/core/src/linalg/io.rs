//! JSON shapes: `{"dim": d, "entries": [[re, im], ...]}` row-major.

use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{DenseComplexMatrix, DensityMatrix, LinalgError};
use crate::scalar::Real;

/// Wire form of a matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl<T: Real> From<&DenseComplexMatrix<T>> for MatrixFile {
    fn from(m: &DenseComplexMatrix<T>) -> Self {
        MatrixFile {
            dim: m.dim(),
            entries: m.entries().iter().map(|z| [z.re.as_f64(), z.im.as_f64()]).collect(),
        }
    }
}

impl<T: Real> TryFrom<MatrixFile> for DenseComplexMatrix<T> {
    type Error = LinalgError;

    fn try_from(f: MatrixFile) -> Result<Self, LinalgError> {
        let entries = f
            .entries
            .iter()
            .map(|[r, i]| Complex::new(T::lit(*r), T::lit(*i)))
            .collect();
        DenseComplexMatrix::from_entries(f.dim, entries)
    }
}

impl<T: Real> Serialize for DenseComplexMatrix<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatrixFile::from(self).serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for DenseComplexMatrix<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let f = MatrixFile::deserialize(d)?;
        DenseComplexMatrix::try_from(f).map_err(serde::de::Error::custom)
    }
}

/// A matrix file with an optional subsystem signature; qubits are assumed
/// when `dims` is absent.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
}

impl StateFile {
    pub fn from_state<T: Real>(rho: &DensityMatrix<T>) -> Self {
        let m = MatrixFile::from(rho.matrix());
        StateFile {
            dim: m.dim,
            entries: m.entries,
            dims: Some(rho.dims().to_vec()),
        }
    }

    pub fn into_state<T: Real>(self) -> Result<DensityMatrix<T>, LinalgError> {
        let m = DenseComplexMatrix::try_from(MatrixFile {
            dim: self.dim,
            entries: self.entries,
        })?;
        match self.dims {
            Some(dims) => DensityMatrix::new(m, dims),
            None => DensityMatrix::qubits(m),
        }
    }
}
