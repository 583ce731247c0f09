use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use super::LinalgError;
use crate::scalar::{re, Real, C};

/// Square dense complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseComplexMatrix<T: Real> {
    dim: usize,
    entries: Vec<C<T>>,
}

impl<T: Real> DenseComplexMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![C::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self { dim, entries }
    }

    /// Builds a matrix from row-major entries; fails unless `entries.len() == dim²`.
    pub fn from_entries(dim: usize, entries: Vec<C<T>>) -> Result<Self, LinalgError> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(LinalgError::EntryCount {
                dim,
                len: entries.len(),
            });
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<C<T>>]) -> Result<Self, LinalgError> {
        let dim = rows.len();
        let entries: Vec<C<T>> = rows.iter().flatten().copied().collect();
        Self::from_entries(dim, entries)
    }

    /// Real diagonal matrix.
    pub fn diag(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = re(v);
        }
        m
    }

    /// `|ψ⟩⟨ψ|` for an (unnormalized) vector.
    pub fn outer(psi: &[C<T>]) -> Self {
        Self::from_fn(psi.len(), |i, j| psi[i] * psi[j].conj())
    }

    /// `|i⟩⟨j|` in dimension `dim`.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(i, j)] = C::one();
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<C<T>>]) -> Result<Self, LinalgError> {
        let dim = cols.len();
        if cols.iter().any(|c| c.len() != dim) {
            return Err(LinalgError::DimensionMismatch {
                expected: dim,
                found: cols.iter().map(Vec::len).find(|&l| l != dim).unwrap_or(0),
            });
        }
        Ok(Self::from_fn(dim, |i, j| cols[j][i]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C<T>] {
        &self.entries
    }

    pub fn column(&self, j: usize) -> Vec<C<T>> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> &[C<T>] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> C<T> {
        (0..self.dim).map(|i| self[(i, i)]).fold(C::zero(), |a, b| a + b)
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(re(s))
    }

    pub fn map(&self, f: impl Fn(C<T>) -> C<T>) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Kronecker product; the first factor is the most significant index.
    pub fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim, other.dim);
        let d = da * db;
        let mut out = Self::zeros(d);
        for ia in 0..da {
            for ja in 0..da {
                let a = self[(ia, ja)];
                if a.is_zero() {
                    continue;
                }
                for ib in 0..db {
                    let row = (ia * db + ib) * d + ja * db;
                    let brow = other.row(ib);
                    for (jb, &b) in brow.iter().enumerate() {
                        out.entries[row + jb] = a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mat_vec(&self, v: &[C<T>]) -> Vec<C<T>> {
        (0..self.dim)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(C::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// `self · other · self†`.
    pub fn conjugate(&self, other: &Self) -> Self {
        &(self * other) * &self.adjoint()
    }

    pub fn max_abs(&self) -> T {
        self.entries
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), T::max)
    }

    pub fn frobenius_norm(&self) -> T {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// `max |a_ij − b_ij|`; panics on dimension mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.dim == other.dim && self.max_abs_diff(other) <= tol
    }

    pub fn hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_defect(&self) -> T {
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.dim))
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        self.unitarity_defect() <= tol
    }

    /// Largest off-diagonal modulus.
    pub fn max_off_diagonal(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    worst = worst.max(self[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn diagonal(&self) -> Vec<C<T>> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn real_diagonal(&self) -> Vec<T> {
        (0..self.dim).map(|i| self[(i, i)].re).collect()
    }

    /// Converts to another scalar precision.
    pub fn cast<U: Real>(&self) -> DenseComplexMatrix<U> {
        DenseComplexMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|z| Complex::new(U::lit(z.re.as_f64()), U::lit(z.im.as_f64())))
                .collect(),
        }
    }
}

/// `a ⊗ b`, first factor most significant.
pub fn tensor<T: Real>(a: &DenseComplexMatrix<T>, b: &DenseComplexMatrix<T>) -> DenseComplexMatrix<T> {
    a.kron(b)
}

/// Kronecker product of a list of factors, left to right.
pub fn tensor_all<'a, T: Real>(
    factors: impl IntoIterator<Item = &'a DenseComplexMatrix<T>>,
) -> DenseComplexMatrix<T> {
    factors
        .into_iter()
        .fold(DenseComplexMatrix::identity(1), |acc, f| acc.kron(f))
}

impl<T: Real> Index<(usize, usize)> for DenseComplexMatrix<T> {
    type Output = C<T>;

    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.entries[i * self.dim + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for DenseComplexMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.entries[i * self.dim + j]
    }
}

impl<T: Real> Mul for &DenseComplexMatrix<T> {
    type Output = DenseComplexMatrix<T>;

    fn mul(self, rhs: Self) -> DenseComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let d = self.dim;
        let mut out = DenseComplexMatrix::zeros(d);
        for i in 0..d {
            let orow = i * d;
            for k in 0..d {
                let a = self.entries[i * d + k];
                if a.is_zero() {
                    continue;
                }
                let rrow = rhs.row(k);
                for (o, &b) in out.entries[orow..orow + d].iter_mut().zip(rrow) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }
}

impl<T: Real> Add for &DenseComplexMatrix<T> {
    type Output = DenseComplexMatrix<T>;

    fn add(self, rhs: Self) -> DenseComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        DenseComplexMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl<T: Real> Sub for &DenseComplexMatrix<T> {
    type Output = DenseComplexMatrix<T>;

    fn sub(self, rhs: Self) -> DenseComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        DenseComplexMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;

    type M = DenseComplexMatrix<f64>;

    #[test]
    fn identity_tensor_identity() {
        assert_eq!(tensor(&M::identity(2), &M::identity(2)), M::identity(4));
    }

    #[test]
    fn bit_flip_on_basis_vector() {
        let xx = tensor(&pauli::x::<f64>(), &pauli::x());
        let mut ket00 = vec![C::zero(); 4];
        ket00[0] = C::one();
        let out = xx.mat_vec(&ket00);
        assert_eq!(out[3], C::one());
        assert!(out[..3].iter().all(|z| z.is_zero()));
    }

    #[test]
    fn raising_operator_expansion() {
        // (σx + iσy) ⊗ (σx + iσy) against σxσx − σyσy + i(σxσy + σyσx)
        let i = C::new(0.0, 1.0);
        let x = pauli::x::<f64>();
        let y = pauli::y::<f64>();
        let raise = &x + &y.scale(i);
        let lhs = tensor(&raise, &raise);
        let cross = &tensor(&x, &y) + &tensor(&y, &x);
        let rhs = &(&tensor(&x, &x) - &tensor(&y, &y)) + &cross.scale(i);
        assert!(lhs.approx_eq(&rhs, 1e-15));
        // both equal 4|00⟩⟨11|
        assert!((lhs[(0, 3)] - C::new(4.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_wrong_entry_count() {
        assert!(M::from_entries(2, vec![C::zero(); 3]).is_err());
        assert!(M::from_entries(0, vec![]).is_err());
    }
}
