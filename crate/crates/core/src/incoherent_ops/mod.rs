//! Kraus channels and the incoherent-operation taxonomy.
//!
//! A Kraus operator is incoherent when, written in the computational basis,
//! every column has at most one non-zero entry (`F = Σ c_i |f(i)⟩⟨i|`). It is
//! strictly incoherent when it also commutes with dephasing,
//! `Δ[F ρ F†] = F Δ[ρ] F†`, which for a single operator is the same as at most
//! one non-zero entry per column *and* per row. Strictly incoherent channels
//! whose Kraus operators are permutations generate the symmetric group on the
//! basis and act on diagonal states exactly like stochastic maps act on
//! probability vectors; [`embed_classical`] and [`extract_classical`] realize
//! that correspondence.

mod classical;

use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use classical::{embed_classical, extract_classical, ClassicalState, StochasticMatrix};

use crate::coherence::{CoherenceError, ProductBasis};
use crate::linalg::{DenseComplexMatrix, DensityMatrix, LinalgError};
use crate::scalar::Real;

#[derive(Debug, thiserror::Error)]
pub enum ChannelError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Coherence(#[from] CoherenceError),
    #[error("channel has no Kraus operators")]
    Empty,
    #[error("Kraus operator {index} has dimension {found}, expected {expected}")]
    KrausDim { index: usize, expected: usize, found: usize },
    #[error("Kraus operators are not complete (defect {defect:e})")]
    Incomplete { defect: f64 },
    #[error("not a stochastic matrix: {0}")]
    NotStochastic(String),
    #[error("channel is not strictly incoherent: Kraus {kraus}, matrix unit |{k}⟩⟨{l}|")]
    NotStrict { kraus: usize, k: usize, l: usize },
    #[error("strictness tests disagree (definition: {definition}, sparsity: {sparsity})")]
    StrictnessDisagreement { definition: bool, sparsity: bool },
    #[error("basis dimension {basis} does not match channel dimension {channel}")]
    BasisMismatch { basis: usize, channel: usize },
}

/// Channel `ρ ↦ Σ F_i ρ F_i†` with `Σ F_i† F_i = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel<T: Real> {
    kraus: Vec<DenseComplexMatrix<T>>,
}

impl<T: Real> KrausChannel<T> {
    pub fn new(kraus: Vec<DenseComplexMatrix<T>>) -> Result<Self, ChannelError> {
        let ch = Self::from_kraus_unchecked(kraus)?;
        let defect = ch.completeness_defect();
        if defect > T::SPECTRAL_TOL {
            return Err(ChannelError::Incomplete {
                defect: defect.as_f64(),
            });
        }
        Ok(ch)
    }

    fn from_kraus_unchecked(kraus: Vec<DenseComplexMatrix<T>>) -> Result<Self, ChannelError> {
        let first = kraus.first().ok_or(ChannelError::Empty)?;
        let d = first.dim();
        if let Some((index, k)) = kraus.iter().enumerate().find(|(_, k)| k.dim() != d) {
            return Err(ChannelError::KrausDim {
                index,
                expected: d,
                found: k.dim(),
            });
        }
        Ok(Self { kraus })
    }

    pub fn unitary(u: DenseComplexMatrix<T>) -> Result<Self, ChannelError> {
        Self::new(vec![u])
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus: vec![DenseComplexMatrix::identity(dim)],
        }
    }

    /// Full dephasing `{|i⟩⟨i|}` in `basis`.
    pub fn dephasing(basis: &ProductBasis<T>) -> Self {
        let b = basis.global();
        let d = b.dim();
        let kraus = (0..d)
            .map(|i| DenseComplexMatrix::outer(&b.column(i)))
            .collect();
        Self { kraus }
    }

    /// Unitary permutation `|i⟩ ↦ |perm[i]⟩` in `basis`.
    pub fn permutation(perm: &[usize], basis: &ProductBasis<T>) -> Result<Self, ChannelError> {
        let d = perm.len();
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        if sorted != (0..d).collect::<Vec<_>>() {
            return Err(ChannelError::NotStochastic(format!("{perm:?} is not a permutation")));
        }
        let p = DenseComplexMatrix::from_fn(d, |i, j| {
            if perm[j] == i {
                num_traits::One::one()
            } else {
                num_complex::Complex::zero()
            }
        });
        let b = basis.global();
        if b.dim() != d {
            return Err(ChannelError::BasisMismatch {
                basis: b.dim(),
                channel: d,
            });
        }
        Self::unitary(basis.from_basis(&p))
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].dim()
    }

    pub fn kraus(&self) -> &[DenseComplexMatrix<T>] {
        &self.kraus
    }

    /// `‖Σ F_i† F_i − I‖_max`.
    pub fn completeness_defect(&self) -> T {
        let d = self.dim();
        let sum = self
            .kraus
            .iter()
            .fold(DenseComplexMatrix::zeros(d), |acc, f| &acc + &(&f.adjoint() * f));
        sum.max_abs_diff(&DenseComplexMatrix::identity(d))
    }

    /// `Σ F_i m F_i†` on an arbitrary operator.
    pub fn apply_operator(&self, m: &DenseComplexMatrix<T>) -> DenseComplexMatrix<T> {
        self.kraus
            .iter()
            .fold(DenseComplexMatrix::zeros(m.dim()), |acc, f| &acc + &f.conjugate(m))
    }

    /// `self ∘ first`: applies `first`, then `self`.
    pub fn after(&self, first: &Self) -> Result<Self, ChannelError> {
        if self.dim() != first.dim() {
            return Err(ChannelError::KrausDim {
                index: 0,
                expected: self.dim(),
                found: first.dim(),
            });
        }
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| first.kraus.iter().map(move |b| a * b))
            .collect();
        Ok(Self { kraus })
    }

    /// Kraus operators written in `basis`: `B† F B`.
    pub fn in_basis(&self, basis: &ProductBasis<T>) -> Result<Vec<DenseComplexMatrix<T>>, ChannelError> {
        let b = basis.global();
        if b.dim() != self.dim() {
            return Err(ChannelError::BasisMismatch {
                basis: b.dim(),
                channel: self.dim(),
            });
        }
        let badj = b.adjoint();
        Ok(self.kraus.iter().map(|f| &(&badj * f) * &b).collect())
    }
}

/// Applies a channel; the output is a state with the input's subsystem dims.
pub fn apply_channel<T: Real>(ch: &KrausChannel<T>, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>, ChannelError> {
    if ch.dim() != rho.dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: ch.dim(),
            found: rho.dim(),
        }
        .into());
    }
    Ok(DensityMatrix::from_parts_unchecked(
        ch.apply_operator(rho.matrix()),
        rho.dims().to_vec(),
    ))
}

/// Outcome of a structural check: `Ok(())` or the first violation found.
pub type Check<W> = Result<(), W>;

/// Column of a Kraus operator with more than one non-zero entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnWitness {
    pub kraus: usize,
    pub column: usize,
    pub rows: Vec<usize>,
}

/// Kraus index and matrix unit `|k⟩⟨l|` on which `Δ[F·F†] ≠ F Δ[·] F†`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrictWitness {
    pub kraus: usize,
    pub k: usize,
    pub l: usize,
}

fn is_structural_zero<T: Real>(z: num_complex::Complex<T>) -> bool {
    z.norm() <= T::EXACT_TOL
}

fn snapped<T: Real>(f: &DenseComplexMatrix<T>) -> DenseComplexMatrix<T> {
    f.map(|z| if is_structural_zero(z) { num_complex::Complex::zero() } else { z })
}

/// Every column of every Kraus operator (in `basis`) has at most one non-zero.
pub fn is_incoherent<T: Real>(
    ch: &KrausChannel<T>,
    basis: &ProductBasis<T>,
) -> Result<Check<ColumnWitness>, ChannelError> {
    for (kraus, f) in ch.in_basis(basis)?.iter().enumerate() {
        for column in 0..f.dim() {
            let rows: Vec<usize> = (0..f.dim()).filter(|&i| !is_structural_zero(f[(i, column)])).collect();
            if rows.len() > 1 {
                return Ok(Err(ColumnWitness { kraus, column, rows }));
            }
        }
    }
    Ok(Ok(()))
}

/// Strict incoherence by evaluating `Δ[F |k⟩⟨l| F†] = F Δ[|k⟩⟨l|] F†` on
/// every matrix unit. Entries with `|c| ≤ EXACT_TOL` are taken as zero
/// before the comparison.
pub fn strictness_by_definition<T: Real>(
    ch: &KrausChannel<T>,
    basis: &ProductBasis<T>,
) -> Result<Check<StrictWitness>, ChannelError> {
    for (kraus, f) in ch.in_basis(basis)?.iter().enumerate() {
        let f = snapped(f);
        let d = f.dim();
        // Entry (i, j) of F|k⟩⟨l|F† is F_ik conj(F_jl). Dephasing the output
        // keeps i = j; dephasing the input keeps k = l.
        for k in 0..d {
            for l in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        let v = f[(i, k)] * f[(j, l)].conj();
                        let lhs = if i == j { v } else { num_complex::Complex::zero() };
                        let rhs = if k == l { v } else { num_complex::Complex::zero() };
                        if lhs != rhs {
                            return Ok(Err(StrictWitness { kraus, k, l }));
                        }
                    }
                }
            }
        }
    }
    Ok(Ok(()))
}

/// Strict incoherence via sparsity: at most one non-zero per column and per row.
pub fn strictness_by_sparsity<T: Real>(
    ch: &KrausChannel<T>,
    basis: &ProductBasis<T>,
) -> Result<Check<StrictWitness>, ChannelError> {
    for (kraus, f) in ch.in_basis(basis)?.iter().enumerate() {
        let d = f.dim();
        for col in 0..d {
            let rows: Vec<usize> = (0..d).filter(|&i| !is_structural_zero(f[(i, col)])).collect();
            if rows.len() > 1 {
                // |col⟩⟨col| is mapped to a coherent operator
                return Ok(Err(StrictWitness { kraus, k: col, l: col }));
            }
        }
        for row in 0..d {
            let cols: Vec<usize> = (0..d).filter(|&j| !is_structural_zero(f[(row, j)])).collect();
            if cols.len() > 1 {
                // two inputs land on the same output: |k⟩⟨l| survives dephasing
                return Ok(Err(StrictWitness {
                    kraus,
                    k: cols[0],
                    l: cols[1],
                }));
            }
        }
    }
    Ok(Ok(()))
}

/// Runs both strictness tests and insists they agree.
pub fn is_strict_incoherent<T: Real>(
    ch: &KrausChannel<T>,
    basis: &ProductBasis<T>,
) -> Result<Check<StrictWitness>, ChannelError> {
    let definition = strictness_by_definition(ch, basis)?;
    let sparsity = strictness_by_sparsity(ch, basis)?;
    if definition.is_ok() != sparsity.is_ok() {
        return Err(ChannelError::StrictnessDisagreement {
            definition: definition.is_ok(),
            sparsity: sparsity.is_ok(),
        });
    }
    Ok(definition)
}

/// Adjacent transpositions `(i, i+1)` of the basis as unitary channels.
pub fn usi_generators<T: Real>(basis: &ProductBasis<T>) -> Result<Vec<KrausChannel<T>>, ChannelError> {
    let d: usize = basis.dims().iter().product();
    (0..d.saturating_sub(1))
        .map(|i| {
            let mut perm: Vec<usize> = (0..d).collect();
            perm.swap(i, i + 1);
            KrausChannel::permutation(&perm, basis)
        })
        .collect()
}

/// `Δ ∘ inner ∘ Δ` with Kraus set `{|k⟩⟨k| F_i |j⟩⟨j|}`, dropping members of
/// norm at most `1e-12`.
pub fn sandwich_dephase<T: Real>(
    inner: &KrausChannel<T>,
    basis: &ProductBasis<T>,
) -> Result<KrausChannel<T>, ChannelError> {
    let b = basis.global();
    let in_basis = inner.in_basis(basis)?;
    let d = b.dim();
    let mut kraus = Vec::new();
    for f in &in_basis {
        for k in 0..d {
            for j in 0..d {
                let c = f[(k, j)];
                if c.norm() <= T::lit(1e-12) {
                    continue;
                }
                let unit = DenseComplexMatrix::unit(d, k, j).scale(c);
                kraus.push(basis.from_basis(&unit));
            }
        }
    }
    KrausChannel::new(kraus)
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct ChannelWire(Vec<crate::linalg::MatrixFile>);

impl<T: Real> Serialize for KrausChannel<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ChannelWire(self.kraus.iter().map(crate::linalg::MatrixFile::from).collect()).serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for KrausChannel<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let wire = ChannelWire::deserialize(d)?;
        let kraus = wire
            .0
            .into_iter()
            .map(DenseComplexMatrix::try_from)
            .collect::<Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        KrausChannel::new(kraus).map_err(serde::de::Error::custom)
    }
}
