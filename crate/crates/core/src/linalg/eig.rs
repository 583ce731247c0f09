//! Cyclic Jacobi eigensolver for complex Hermitian matrices.

use num_traits::Zero;

use super::{DenseComplexMatrix, LinalgError};
use crate::scalar::{re, Real, C};

const MAX_SWEEPS: usize = 100;

/// Spectral decomposition `m = V diag(values) V†`, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: DenseComplexMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    pub fn reconstruct(&self) -> DenseComplexMatrix<T> {
        let d = self.values.len();
        let v = &self.vectors;
        DenseComplexMatrix::from_fn(d, |i, j| {
            (0..d).fold(C::zero(), |acc, k| {
                acc + v[(i, k)] * re(self.values[k]) * v[(j, k)].conj()
            })
        })
    }

    pub fn min_value(&self) -> T {
        self.values.first().copied().unwrap_or_else(T::zero)
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Fails when the input deviates from hermiticity by more than `EXACT_TOL`
/// or the sweeps do not reach `JACOBI_TOL` within 100 iterations.
pub fn hermitian_eig<T: Real>(m: &DenseComplexMatrix<T>) -> Result<HermitianEigen<T>, LinalgError> {
    let defect = m.hermiticity_defect();
    if defect > T::EXACT_TOL {
        return Err(LinalgError::NotHermitian {
            defect: defect.as_f64(),
        });
    }
    let d = m.dim();
    // symmetrize so the rotations act on an exactly Hermitian matrix
    let mut a = DenseComplexMatrix::from_fn(d, |i, j| {
        let avg = (m[(i, j)] + m[(j, i)].conj()).scale(T::lit(0.5));
        if i == j {
            re(avg.re)
        } else {
            avg
        }
    });
    let mut v = DenseComplexMatrix::identity(d);
    let scale = a.frobenius_norm().max(T::one());
    let threshold = T::JACOBI_TOL * scale;

    let off_norm = |a: &DenseComplexMatrix<T>| -> T {
        let mut s = T::zero();
        for i in 0..d {
            for j in (i + 1)..d {
                s = s + a[(i, j)].norm_sqr();
            }
        }
        (s + s).sqrt()
    };

    let mut converged = off_norm(&a) <= threshold;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        for p in 0..d {
            for q in (p + 1)..d {
                rotate(&mut a, &mut v, p, q);
            }
        }
        converged = off_norm(&a) <= threshold;
    }
    if !converged {
        return Err(LinalgError::NotConverged {
            sweeps,
            off_norm: off_norm(&a).as_f64(),
        });
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        a[(i, i)]
            .re
            .partial_cmp(&a[(j, j)].re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = DenseComplexMatrix::from_fn(d, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues only.
pub fn hermitian_eigenvalues<T: Real>(m: &DenseComplexMatrix<T>) -> Result<Vec<T>, LinalgError> {
    hermitian_eig(m).map(|e| e.values)
}

/// Annihilates `a[p][q]` with a unitary rotation `J` on columns `p, q`:
/// `a ← J† a J`, `v ← v J`.
fn rotate<T: Real>(a: &mut DenseComplexMatrix<T>, v: &mut DenseComplexMatrix<T>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag <= T::min_positive_value() {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // phase making the pivot real, then a real symmetric rotation
    let phase = apq.unscale(mag);
    let theta = (aqq - app) / (mag + mag);
    let t = {
        let sgn = if theta >= T::zero() { T::one() } else { -T::one() };
        sgn / (theta.abs() + (theta * theta + T::one()).sqrt())
    };
    let cs = T::one() / (t * t + T::one()).sqrt();
    let sn = t * cs;
    // J = diag(1, conj(phase)) · [[c, s], [-s, c]]
    let jpp = re(cs);
    let jpq = re(sn);
    let jqp = phase.conj().scale(-sn);
    let jqq = phase.conj().scale(cs);

    let d = a.dim();
    for k in 0..d {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    for k in 0..d {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = C::zero();
    a[(q, p)] = C::zero();
    a[(p, p)] = re(a[(p, p)].re);
    a[(q, q)] = re(a[(q, q)].re);
    for k in 0..d {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}

/// True when `m + shift·I` admits a Cholesky factorization, i.e. every
/// eigenvalue of the Hermitian matrix `m` exceeds `−shift`.
pub fn cholesky_succeeds<T: Real>(m: &DenseComplexMatrix<T>, shift: T) -> bool {
    let d = m.dim();
    let mut l = DenseComplexMatrix::<T>::zeros(d);
    for j in 0..d {
        let mut diag = m[(j, j)].re + shift;
        for k in 0..j {
            diag = diag - l[(j, k)].norm_sqr();
        }
        if diag <= T::zero() {
            return false;
        }
        let ljj = diag.sqrt();
        l[(j, j)] = re(ljj);
        for i in (j + 1)..d {
            let mut s = m[(i, j)];
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s.unscale(ljj);
        }
    }
    true
}

/// Eigenvectors of a unitary matrix.
///
/// The Hermitian combination `(U + U†)/2 + α (U − U†)/(2i)` shares its
/// eigenvectors with `U`; for a generic `α` its eigenvalues separate all
/// distinct eigenphases. Ties are ordered lexicographically by the
/// eigenvector components after fixing each vector's global phase.
pub fn unitary_eigenvectors<T: Real>(u: &DenseComplexMatrix<T>) -> Result<DenseComplexMatrix<T>, LinalgError> {
    let defect = u.unitarity_defect();
    if defect > T::SPECTRAL_TOL {
        return Err(LinalgError::NotUnitary {
            defect: defect.as_f64(),
        });
    }
    let alpha = T::lit(0.618_033_988_749_894_8);
    let adj = u.adjoint();
    let half = T::lit(0.5);
    let d = u.dim();
    let h = DenseComplexMatrix::from_fn(d, |i, j| {
        let sum = u[(i, j)] + adj[(i, j)];
        let diff = u[(i, j)] - adj[(i, j)];
        // (U − U†)/(2i) = −i (U − U†)/2
        sum.scale(half) + C::new(diff.im, -diff.re).scale(half * alpha)
    });
    let eig = hermitian_eig(&h)?;
    let mut cols: Vec<(T, Vec<C<T>>)> = (0..d)
        .map(|k| (eig.values[k], normalize_phase(eig.vectors.column(k))))
        .collect();
    cols.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let tie = T::SPECTRAL_TOL.sqrt();
    let mut start = 0;
    while start < cols.len() {
        let mut end = start + 1;
        while end < cols.len() && cols[end].0 - cols[end - 1].0 <= tie {
            end += 1;
        }
        cols[start..end].sort_by(|a, b| lexicographic(&a.1, &b.1));
        start = end;
    }
    let cols: Vec<Vec<C<T>>> = cols.into_iter().map(|(_, c)| c).collect();
    DenseComplexMatrix::from_columns(&cols)
}

fn normalize_phase<T: Real>(mut v: Vec<C<T>>) -> Vec<C<T>> {
    if let Some(lead) = v.iter().copied().find(|z| z.norm() > T::lit(1e-8)) {
        let ph = lead.unscale(lead.norm()).conj();
        for z in &mut v {
            *z = *z * ph;
        }
    }
    v
}

fn lexicographic<T: Real>(a: &[C<T>], b: &[C<T>]) -> std::cmp::Ordering {
    // components snapped to a 1e-8 grid so the comparison is a total order
    let key = |v: &[C<T>]| -> Vec<i64> {
        v.iter()
            .flat_map(|z| [z.re, z.im])
            .map(|x| (x.as_f64() * 1e8).round() as i64)
            .collect()
    };
    key(a).cmp(&key(b))
}

/// `exp`-free matrix function on the spectrum: `V f(Λ) V†`.
pub fn spectral_map<T: Real>(
    m: &DenseComplexMatrix<T>,
    f: impl Fn(T) -> T,
) -> Result<DenseComplexMatrix<T>, LinalgError> {
    let mut eig = hermitian_eig(m)?;
    for x in &mut eig.values {
        *x = f(*x);
    }
    Ok(eig.reconstruct())
}

/// `log₂ m` for a positive definite Hermitian matrix.
pub fn log2_hermitian<T: Real>(m: &DenseComplexMatrix<T>) -> Result<DenseComplexMatrix<T>, LinalgError> {
    let eig = hermitian_eig(m)?;
    if eig.min_value() <= T::zero() {
        return Err(LinalgError::NotPositiveDefinite {
            min_eigenvalue: eig.min_value().as_f64(),
        });
    }
    let mut eig = eig;
    for x in &mut eig.values {
        *x = x.log2();
    }
    Ok(eig.reconstruct())
}
