use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::coherence::ProductBasis;
use crate::linalg::{DenseComplexMatrix, DensityMatrix};
use crate::scalar::Real;

use super::{is_strict_incoherent, ChannelError, KrausChannel};

const NORMALIZATION_TOL: f64 = 1e-12;

/// Column-stochastic matrix, row-major: `entries[i][j]` is the probability of
/// moving from `j` to `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StochasticMatrix {
    dim: usize,
    entries: Vec<Vec<f64>>,
}

impl StochasticMatrix {
    pub fn new(entries: Vec<Vec<f64>>) -> Result<Self, ChannelError> {
        let dim = entries.len();
        if dim == 0 {
            return Err(ChannelError::NotStochastic("empty matrix".into()));
        }
        if let Some(i) = entries.iter().position(|r| r.len() != dim) {
            return Err(ChannelError::NotStochastic(format!("row {i} has the wrong length")));
        }
        for (i, row) in entries.iter().enumerate() {
            if let Some(j) = row.iter().position(|&x| !(x >= 0.0) || !x.is_finite()) {
                return Err(ChannelError::NotStochastic(format!(
                    "entry ({i}, {j}) = {} is not a probability",
                    row[j]
                )));
            }
        }
        for j in 0..dim {
            let sum: f64 = entries.iter().map(|r| r[j]).sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(ChannelError::NotStochastic(format!("column {j} sums to {sum}")));
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            entries: (0..dim)
                .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    /// `G · p`.
    pub fn apply(&self, p: &ClassicalState) -> ClassicalState {
        let probabilities = self
            .entries
            .iter()
            .map(|row| row.iter().zip(&p.probabilities).map(|(g, q)| g * q).sum())
            .collect();
        ClassicalState { probabilities }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .zip(other.entries.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Probability vector over the computational basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    probabilities: Vec<f64>,
}

impl ClassicalState {
    pub fn new(probabilities: Vec<f64>) -> Result<Self, ChannelError> {
        if probabilities.is_empty() || probabilities.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(ChannelError::NotStochastic(format!("{probabilities:?} is not a distribution")));
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(ChannelError::NotStochastic(format!("probabilities sum to {sum}")));
        }
        Ok(Self { probabilities })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// `Σ p_i |i⟩⟨i|` in `basis`.
    pub fn to_state<T: Real>(&self, basis: &ProductBasis<T>) -> Result<DensityMatrix<T>, ChannelError> {
        let dims = basis.dims();
        let d: usize = dims.iter().product();
        if d != self.probabilities.len() {
            return Err(ChannelError::BasisMismatch {
                basis: d,
                channel: self.probabilities.len(),
            });
        }
        let p: Vec<T> = self.probabilities.iter().map(|&x| T::lit(x)).collect();
        let diag = DenseComplexMatrix::diag(&p);
        Ok(DensityMatrix::from_parts_unchecked(basis.from_basis(&diag), dims))
    }
}

/// Channel with Kraus set `{√g_ij |i⟩⟨j|}` in `basis`. Zero entries of `g`
/// contribute no operator.
pub fn embed_classical<T: Real>(g: &StochasticMatrix, basis: &ProductBasis<T>) -> Result<KrausChannel<T>, ChannelError> {
    let d: usize = basis.dims().iter().product();
    if d != g.dim() {
        return Err(ChannelError::BasisMismatch { basis: d, channel: g.dim() });
    }
    let mut kraus = Vec::new();
    for i in 0..d {
        for j in 0..d {
            let gij = g.get(i, j);
            if gij > 0.0 {
                let unit = DenseComplexMatrix::unit(d, i, j).scale(Complex::new(T::lit(gij.sqrt()), T::zero()));
                kraus.push(basis.from_basis(&unit));
            }
        }
    }
    KrausChannel::new(kraus)
}

/// `G_ij = ⟨i| Λ(|j⟩⟨j|) |i⟩` for a strictly incoherent channel.
pub fn extract_classical<T: Real>(ch: &KrausChannel<T>, basis: &ProductBasis<T>) -> Result<StochasticMatrix, ChannelError> {
    if let Err(w) = is_strict_incoherent(ch, basis)? {
        return Err(ChannelError::NotStrict {
            kraus: w.kraus,
            k: w.k,
            l: w.l,
        });
    }
    let d = ch.dim();
    // Λ(|j⟩⟨j|) has diagonal Σ_F |F_ij|² in the basis.
    let mut entries = vec![vec![0.0; d]; d];
    for f in ch.in_basis(basis)? {
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e += f[(i, j)].norm_sqr().as_f64();
            }
        }
    }
    // completeness holds to SPECTRAL_TOL; renormalize columns onto the simplex
    for j in 0..d {
        let sum: f64 = entries.iter().map(|r| r[j]).sum();
        if (sum - 1.0).abs() > T::SPECTRAL_TOL.as_f64() {
            return Err(ChannelError::NotStochastic(format!("column {j} sums to {sum}")));
        }
        for r in entries.iter_mut() {
            r[j] /= sum;
        }
    }
    StochasticMatrix::new(entries)
}
