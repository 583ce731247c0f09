use num_traits::Zero;

use super::eig::{cholesky_succeeds, hermitian_eigenvalues};
use super::{DenseComplexMatrix, LinalgError};
use crate::scalar::{re, Real, C};

/// Hermitian, positive semidefinite, unit-trace matrix over an ordered list
/// of subsystems. Subsystem 0 is the most significant tensor factor.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Real> {
    matrix: DenseComplexMatrix<T>,
    dims: Vec<usize>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(matrix: DenseComplexMatrix<T>, dims: Vec<usize>) -> Result<Self, LinalgError> {
        check_dims(matrix.dim(), &dims)?;
        let defect = matrix.hermiticity_defect();
        if defect > T::EXACT_TOL {
            return Err(LinalgError::NotHermitian {
                defect: defect.as_f64(),
            });
        }
        let tr = matrix.trace();
        if (tr - C::new(T::one(), T::zero())).norm() > T::EXACT_TOL {
            return Err(LinalgError::TraceNotOne {
                re: tr.re.as_f64(),
                im: tr.im.as_f64(),
            });
        }
        if !cholesky_succeeds(&matrix, T::PSD_TOL) {
            let min = hermitian_eigenvalues(&matrix)?
                .first()
                .copied()
                .unwrap_or_else(T::zero);
            if min < -T::PSD_TOL {
                return Err(LinalgError::NotPositive {
                    min_eigenvalue: min.as_f64(),
                });
            }
        }
        Ok(Self { matrix, dims })
    }

    /// Qubit register inferred from the matrix dimension.
    pub fn qubits(matrix: DenseComplexMatrix<T>) -> Result<Self, LinalgError> {
        let d = matrix.dim();
        if !d.is_power_of_two() {
            return Err(LinalgError::SubsystemDims {
                dim: d,
                dims: vec![d],
            });
        }
        let n = d.trailing_zeros() as usize;
        let dims = if n == 0 { vec![1] } else { vec![2; n] };
        Self::new(matrix, dims)
    }

    /// Skips validation; callers guarantee the invariants (e.g. unitary
    /// evolution of a valid state).
    pub(crate) fn from_parts_unchecked(matrix: DenseComplexMatrix<T>, dims: Vec<usize>) -> Self {
        debug_assert_eq!(matrix.dim(), dims.iter().product::<usize>());
        Self { matrix, dims }
    }

    /// `|ψ⟩⟨ψ|/⟨ψ|ψ⟩`.
    pub fn pure(psi: &[C<T>], dims: Vec<usize>) -> Result<Self, LinalgError> {
        check_dims(psi.len(), &dims)?;
        let norm: T = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm <= T::zero() {
            return Err(LinalgError::ZeroVector);
        }
        let m = DenseComplexMatrix::outer(psi).scale_real(T::one() / norm);
        Ok(Self::from_parts_unchecked(m, dims))
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        let m = DenseComplexMatrix::identity(d).scale_real(T::one() / T::lit(d as f64));
        Self::from_parts_unchecked(m, dims)
    }

    /// Diagonal state `diag(p)` over the given subsystems.
    pub fn diagonal(probs: &[T], dims: Vec<usize>) -> Result<Self, LinalgError> {
        Self::new(DenseComplexMatrix::diag(probs), dims)
    }

    pub fn matrix(&self) -> &DenseComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DenseComplexMatrix<T> {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn subsystem_count(&self) -> usize {
        self.dims.len()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::from_parts_unchecked(self.matrix.kron(&other.matrix), dims)
    }

    /// Relabels subsystems with the same total dimension.
    pub fn with_dims(self, dims: Vec<usize>) -> Result<Self, LinalgError> {
        check_dims(self.matrix.dim(), &dims)?;
        Ok(Self { dims, ..self })
    }

    /// Reduced state on `keep`, kept subsystems in their original order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self, LinalgError> {
        let keep = self.sorted_subset(keep)?;
        let traced: Vec<usize> = (0..self.dims.len()).filter(|k| !keep.contains(k)).collect();
        let kept_off = self.offsets(&keep);
        let traced_off = self.offsets(&traced);
        let dk = kept_off.len();
        let mut out = DenseComplexMatrix::zeros(dk);
        for (r, &ro) in kept_off.iter().enumerate() {
            for (c, &co) in kept_off.iter().enumerate() {
                out[(r, c)] = traced_off
                    .iter()
                    .fold(C::zero(), |acc, &t| acc + self.matrix[(ro + t, co + t)]);
            }
        }
        let dims = keep.iter().map(|&k| self.dims[k]).collect();
        Ok(Self::from_parts_unchecked(out, dims))
    }

    /// Transpose on one subsystem's indices. The result is Hermitian with
    /// the same trace but not necessarily positive.
    pub fn partial_transpose(&self, subsystem: usize) -> Result<DenseComplexMatrix<T>, LinalgError> {
        if subsystem >= self.dims.len() {
            return Err(LinalgError::InvalidSubsystems {
                requested: vec![subsystem],
                count: self.dims.len(),
            });
        }
        let stride: usize = self.dims[subsystem + 1..].iter().product();
        let ds = self.dims[subsystem];
        let digit = |i: usize| (i / stride) % ds;
        Ok(DenseComplexMatrix::from_fn(self.dim(), |i, j| {
            let (di, dj) = (digit(i), digit(j));
            let i2 = i - di * stride + dj * stride;
            let j2 = j - dj * stride + di * stride;
            self.matrix[(i2, j2)]
        }))
    }

    /// Reorders subsystems: new subsystem `k` is old subsystem `order[k]`.
    pub fn permute_subsystems(&self, order: &[usize]) -> Result<Self, LinalgError> {
        let n = self.dims.len();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&k| k >= n || std::mem::replace(&mut seen[k], true)) {
            return Err(LinalgError::InvalidSubsystems {
                requested: order.to_vec(),
                count: n,
            });
        }
        let new_dims: Vec<usize> = order.iter().map(|&k| self.dims[k]).collect();
        let map = permutation_map(&self.dims, order);
        let d = self.dim();
        let m = DenseComplexMatrix::from_fn(d, |i, j| self.matrix[(map[i], map[j])]);
        Ok(Self::from_parts_unchecked(m, new_dims))
    }

    /// `(I ⊗ op ⊗ I) ρ (I ⊗ op ⊗ I)†` with `op` acting on `targets` (in the
    /// listed order). `op` must be unitary for the result to stay a state;
    /// this is not checked here.
    pub fn conjugate_on(&self, op: &DenseComplexMatrix<T>, targets: &[usize]) -> Result<Self, LinalgError> {
        let m = apply_on_subsystems(&self.matrix, &self.dims, op, targets)?;
        Ok(Self::from_parts_unchecked(m, self.dims.clone()))
    }

    /// Expectation value `Tr(ρ O)`.
    pub fn expectation(&self, op: &DenseComplexMatrix<T>) -> C<T> {
        let d = self.dim();
        let mut acc = C::zero();
        for i in 0..d {
            for k in 0..d {
                acc = acc + self.matrix[(i, k)] * op[(k, i)];
            }
        }
        acc
    }

    /// Eigenvalues, ascending.
    pub fn spectrum(&self) -> Result<Vec<T>, LinalgError> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn cast<U: Real>(&self) -> DensityMatrix<U> {
        DensityMatrix {
            matrix: self.matrix.cast(),
            dims: self.dims.clone(),
        }
    }

    fn sorted_subset(&self, keep: &[usize]) -> Result<Vec<usize>, LinalgError> {
        let mut k = keep.to_vec();
        k.sort_unstable();
        k.dedup();
        if k.len() != keep.len() || k.iter().any(|&i| i >= self.dims.len()) {
            return Err(LinalgError::InvalidSubsystems {
                requested: keep.to_vec(),
                count: self.dims.len(),
            });
        }
        Ok(k)
    }

    fn offsets(&self, subsystems: &[usize]) -> Vec<usize> {
        subsystem_offsets(&self.dims, subsystems)
    }
}

fn check_dims(dim: usize, dims: &[usize]) -> Result<(), LinalgError> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0) || dims.iter().product::<usize>() != dim {
        return Err(LinalgError::SubsystemDims {
            dim,
            dims: dims.to_vec(),
        });
    }
    Ok(())
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Flat-index offsets of every joint value of `subsystems` (first listed most
/// significant), with all other subsystem digits zero.
pub(crate) fn subsystem_offsets(dims: &[usize], subsystems: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let mut offs = vec![0usize];
    for &k in subsystems {
        let mut next = Vec::with_capacity(offs.len() * dims[k]);
        for &o in &offs {
            for digit in 0..dims[k] {
                next.push(o + digit * st[k]);
            }
        }
        offs = next;
    }
    offs
}

/// `map[new_index] = old_index` for a subsystem permutation.
fn permutation_map(dims: &[usize], order: &[usize]) -> Vec<usize> {
    // enumerating old offsets over subsystems in the new order yields, at
    // position `i`, the old flat index of new flat index `i`
    subsystem_offsets(dims, order)
}

/// `(I ⊗ op ⊗ I) m (I ⊗ op ⊗ I)†`.
pub(crate) fn apply_on_subsystems<T: Real>(
    m: &DenseComplexMatrix<T>,
    dims: &[usize],
    op: &DenseComplexMatrix<T>,
    targets: &[usize],
) -> Result<DenseComplexMatrix<T>, LinalgError> {
    let n = dims.len();
    let mut seen = vec![false; n];
    if targets.is_empty() || targets.iter().any(|&k| k >= n || std::mem::replace(&mut seen[k], true)) {
        return Err(LinalgError::InvalidSubsystems {
            requested: targets.to_vec(),
            count: n,
        });
    }
    let dt: usize = targets.iter().map(|&k| dims[k]).product();
    if op.dim() != dt {
        return Err(LinalgError::DimensionMismatch {
            expected: dt,
            found: op.dim(),
        });
    }
    let rest: Vec<usize> = (0..n).filter(|k| !targets.contains(k)).collect();
    let t_off = subsystem_offsets(dims, targets);
    let r_off = subsystem_offsets(dims, &rest);
    let d = m.dim();
    let mut left = DenseComplexMatrix::zeros(d);
    let mut buf = vec![C::zero(); dt];
    // left multiplication, column by column
    for j in 0..d {
        for &ro in &r_off {
            for (a, &to) in t_off.iter().enumerate() {
                buf[a] = m[(ro + to, j)];
            }
            for (a, &to) in t_off.iter().enumerate() {
                let mut s = C::zero();
                for (b, &x) in buf.iter().enumerate() {
                    s = s + op[(a, b)] * x;
                }
                left[(ro + to, j)] = s;
            }
        }
    }
    // right multiplication by op†, row by row
    let mut out = DenseComplexMatrix::zeros(d);
    for i in 0..d {
        for &ro in &r_off {
            for (a, &to) in t_off.iter().enumerate() {
                buf[a] = left[(i, ro + to)];
            }
            for (a, &to) in t_off.iter().enumerate() {
                let mut s = C::zero();
                for (b, &x) in buf.iter().enumerate() {
                    s = s + x * op[(a, b)].conj();
                }
                out[(i, ro + to)] = s;
            }
        }
    }
    Ok(out)
}

/// `|ψ⟩` from real amplitudes.
pub fn ket<T: Real>(amps: &[f64]) -> Vec<C<T>> {
    amps.iter().map(|&a| re(T::lit(a))).collect()
}
