use crate::linalg::{apply_on_subsystems, pauli, tensor_all, DenseComplexMatrix, DensityMatrix};
use crate::scalar::Real;

use super::CoherenceError;

/// Tensor product of per-subsystem orthonormal bases. Each local basis is a
/// unitary whose columns are the basis vectors; global basis vectors are
/// enumerated lexicographically with subsystem 0 most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductBasis<T: Real> {
    local: Vec<DenseComplexMatrix<T>>,
}

impl<T: Real> ProductBasis<T> {
    pub fn new(local: Vec<DenseComplexMatrix<T>>) -> Result<Self, CoherenceError> {
        if local.is_empty() {
            return Err(CoherenceError::EmptyBasis);
        }
        for (k, u) in local.iter().enumerate() {
            let defect = u.unitarity_defect();
            if defect > T::SPECTRAL_TOL {
                return Err(CoherenceError::NonUnitaryBasis {
                    subsystem: k,
                    defect: defect.as_f64(),
                });
            }
        }
        Ok(Self { local })
    }

    /// Computational basis `{|i⟩}` on every subsystem.
    pub fn computational(dims: &[usize]) -> Self {
        Self {
            local: dims.iter().map(|&d| DenseComplexMatrix::identity(d)).collect(),
        }
    }

    /// `{|+⟩, |−⟩}` on each of `n` qubits.
    pub fn hadamard(n: usize) -> Self {
        Self {
            local: vec![pauli::h(); n],
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        self.local.iter().map(DenseComplexMatrix::dim).collect()
    }

    pub fn local(&self, k: usize) -> &DenseComplexMatrix<T> {
        &self.local[k]
    }

    pub fn locals(&self) -> &[DenseComplexMatrix<T>] {
        &self.local
    }

    pub fn global(&self) -> DenseComplexMatrix<T> {
        tensor_all(&self.local)
    }

    /// Basis restricted to the given subsystems, in the given order.
    pub fn restrict(&self, subsystems: &[usize]) -> Self {
        Self {
            local: subsystems.iter().map(|&k| self.local[k].clone()).collect(),
        }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut local = self.local.clone();
        local.extend(other.local.iter().cloned());
        Self { local }
    }

    pub(crate) fn check(&self, dims: &[usize]) -> Result<(), CoherenceError> {
        if self.dims() != dims {
            return Err(CoherenceError::BasisMismatch {
                basis: self.dims(),
                state: dims.to_vec(),
            });
        }
        Ok(())
    }

    /// `B† m B`: the matrix expressed in this basis.
    pub fn to_basis(&self, m: &DenseComplexMatrix<T>) -> DenseComplexMatrix<T> {
        self.conjugate_each(m, true)
    }

    /// `B m B†`: inverse of [`ProductBasis::to_basis`].
    pub fn from_basis(&self, m: &DenseComplexMatrix<T>) -> DenseComplexMatrix<T> {
        self.conjugate_each(m, false)
    }

    fn conjugate_each(&self, m: &DenseComplexMatrix<T>, adjoint: bool) -> DenseComplexMatrix<T> {
        let dims = self.dims();
        let mut out = m.clone();
        for (k, u) in self.local.iter().enumerate() {
            if u.approx_eq(&DenseComplexMatrix::identity(u.dim()), T::zero()) {
                continue;
            }
            let op = if adjoint { u.adjoint() } else { u.clone() };
            out = apply_on_subsystems(&out, &dims, &op, &[k]).expect("basis dims checked");
        }
        out
    }

    /// Whether `ρ` is diagonal in this basis within `tol` (max off-diagonal modulus).
    pub fn diagonalizes(&self, rho: &DensityMatrix<T>, tol: T) -> bool {
        self.check(rho.dims()).is_ok() && self.to_basis(rho.matrix()).max_off_diagonal() <= tol
    }
}

impl<T: Real> serde::Serialize for ProductBasis<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.local.iter().map(crate::linalg::MatrixFile::from))
    }
}

impl<'de, T: Real> serde::Deserialize<'de> for ProductBasis<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let files = Vec::<crate::linalg::MatrixFile>::deserialize(d)?;
        let local = files
            .into_iter()
            .map(DenseComplexMatrix::try_from)
            .collect::<Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        ProductBasis::new(local).map_err(serde::de::Error::custom)
    }
}
