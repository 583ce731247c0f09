//! Dephasing, entropies, relative entropy of coherence, net global coherence
//! and basis-dependent discord. All quantities are in bits.

mod basis;
mod discord;

use serde::{Deserialize, Serialize};

pub use basis::ProductBasis;
pub use discord::{
    basis_dependent_discord, discord_objective, minimize_discord, minimize_discord_with, qubit_basis, Direction,
    DiscordMinimum, DiscordOptions,
};

use crate::linalg::{subsystem_offsets, DenseComplexMatrix, DensityMatrix, LinalgError};
use crate::scalar::{shannon_bits, Real};

#[derive(Debug, thiserror::Error)]
pub enum CoherenceError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("product basis needs at least one local basis")]
    EmptyBasis,
    #[error("local basis {subsystem} is not unitary (defect {defect:e})")]
    NonUnitaryBasis { subsystem: usize, defect: f64 },
    #[error("basis dims {basis:?} do not match state dims {state:?}")]
    BasisMismatch { basis: Vec<usize>, state: Vec<usize> },
    #[error("invalid bipartition {a:?} | {b:?} of {count} subsystems")]
    InvalidCut { a: Vec<usize>, b: Vec<usize>, count: usize },
    #[error("operation needs a bipartite state, got {0} subsystems")]
    NotBipartite(usize),
    #[error("net coherence routes disagree: {first} vs {second}")]
    RouteMismatch { first: f64, second: f64 },
}

/// Split of a state's subsystems into two non-empty groups.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl Bipartition {
    pub fn new(mut a: Vec<usize>, mut b: Vec<usize>) -> Self {
        a.sort_unstable();
        b.sort_unstable();
        Self { a, b }
    }

    /// `{0} | {1}`.
    pub fn pair() -> Self {
        Self::new(vec![0], vec![1])
    }

    /// First `k` subsystems against the rest.
    pub fn split_at(k: usize, count: usize) -> Self {
        Self::new((0..k).collect(), (k..count).collect())
    }

    pub fn validate(&self, count: usize) -> Result<(), CoherenceError> {
        let mut all: Vec<usize> = self.a.iter().chain(&self.b).copied().collect();
        all.sort_unstable();
        if self.a.is_empty() || self.b.is_empty() || all != (0..count).collect::<Vec<_>>() {
            return Err(CoherenceError::InvalidCut {
                a: self.a.clone(),
                b: self.b.clone(),
                count,
            });
        }
        Ok(())
    }
}

impl std::str::FromStr for Bipartition {
    type Err = String;

    /// `"0,1|2"` style.
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once('|').ok_or_else(|| format!("cut {s:?} lacks '|'"))?;
        let parse = |part: &str| -> Result<Vec<usize>, String> {
            part.split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| t.trim().parse::<usize>().map_err(|e| format!("cut {s:?}: {e}")))
                .collect()
        };
        Ok(Self::new(parse(a)?, parse(b)?))
    }
}

/// Dephases the listed subsystems in their local bases of `basis`.
pub fn dephase<T: Real>(
    rho: &DensityMatrix<T>,
    basis: &ProductBasis<T>,
    subsystems: &[usize],
) -> Result<DensityMatrix<T>, CoherenceError> {
    basis.check(rho.dims())?;
    let n = rho.subsystem_count();
    if subsystems.iter().any(|&k| k >= n) {
        return Err(LinalgError::InvalidSubsystems {
            requested: subsystems.to_vec(),
            count: n,
        }
        .into());
    }
    let in_basis = basis.to_basis(rho.matrix());
    let dims = rho.dims();
    // label of each flat index restricted to the dephased subsystems
    let offs = subsystem_offsets(dims, subsystems);
    let mut label = vec![0usize; rho.dim()];
    let rest: Vec<usize> = (0..n).filter(|k| !subsystems.contains(k)).collect();
    let rest_offs = subsystem_offsets(dims, &rest);
    for (l, &o) in offs.iter().enumerate() {
        for &r in &rest_offs {
            label[o + r] = l;
        }
    }
    let masked = DenseComplexMatrix::from_fn(rho.dim(), |i, j| {
        if label[i] == label[j] {
            in_basis[(i, j)]
        } else {
            num_traits::Zero::zero()
        }
    });
    Ok(DensityMatrix::from_parts_unchecked(basis.from_basis(&masked), dims.to_vec()))
}

/// Fully dephasing channel on every subsystem.
pub fn dephase_all<T: Real>(rho: &DensityMatrix<T>, basis: &ProductBasis<T>) -> Result<DensityMatrix<T>, CoherenceError> {
    let all: Vec<usize> = (0..rho.subsystem_count()).collect();
    dephase(rho, basis, &all)
}

/// `S(ρ) = −Tr ρ log₂ ρ`.
pub fn von_neumann_entropy<T: Real>(rho: &DensityMatrix<T>) -> Result<T, CoherenceError> {
    Ok(shannon_bits(rho.spectrum()?))
}

/// Entropy of the diagonal of `ρ` in `basis`, i.e. `S(Δ[ρ])`.
pub fn dephased_entropy<T: Real>(rho: &DensityMatrix<T>, basis: &ProductBasis<T>) -> Result<T, CoherenceError> {
    basis.check(rho.dims())?;
    Ok(shannon_bits(basis.to_basis(rho.matrix()).real_diagonal()))
}

/// Relative entropy of coherence `S(Δ[ρ]) − S(ρ)`.
pub fn rec<T: Real>(rho: &DensityMatrix<T>, basis: &ProductBasis<T>) -> Result<T, CoherenceError> {
    Ok(dephased_entropy(rho, basis)? - von_neumann_entropy(rho)?)
}

/// `I(A:B) = S(ρ_A) + S(ρ_B) − S(ρ_AB)`.
pub fn mutual_information<T: Real>(rho: &DensityMatrix<T>, cut: &Bipartition) -> Result<T, CoherenceError> {
    cut.validate(rho.subsystem_count())?;
    let sa = von_neumann_entropy(&rho.partial_trace(&cut.a)?)?;
    let sb = von_neumann_entropy(&rho.partial_trace(&cut.b)?)?;
    Ok(sa + sb - von_neumann_entropy(rho)?)
}

/// Global, local and net coherence of a bipartite split, with the
/// mutual-information route alongside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    #[serde(with = "crate::json::sig12")]
    pub rec_global: f64,
    #[serde(with = "crate::json::sig12_vec")]
    pub rec_local: Vec<f64>,
    #[serde(with = "crate::json::sig12")]
    pub rec_net: f64,
    #[serde(with = "crate::json::sig12")]
    pub mutual_info: f64,
    #[serde(with = "crate::json::sig12")]
    pub mutual_info_dephased: f64,
}

impl CoherenceReport {
    /// `I(ρ) − I(Δ_AB ρ)`.
    pub fn rec_net_via_mutual_info(&self) -> f64 {
        self.mutual_info - self.mutual_info_dephased
    }
}

/// Net global coherence `C_r(ρ_AB) − C_r(ρ_A) − C_r(ρ_B)`, cross-checked
/// against `I(ρ_AB) − I(Δ_AB[ρ_AB])`; the two routes must agree to
/// `SPECTRAL_TOL`.
pub fn net_global_coherence<T: Real>(
    rho: &DensityMatrix<T>,
    basis: &ProductBasis<T>,
    cut: &Bipartition,
) -> Result<CoherenceReport, CoherenceError> {
    basis.check(rho.dims())?;
    cut.validate(rho.subsystem_count())?;
    let global = rec(rho, basis)?;
    let ra = rec(&rho.partial_trace(&cut.a)?, &basis.restrict(&cut.a))?;
    let rb = rec(&rho.partial_trace(&cut.b)?, &basis.restrict(&cut.b))?;
    let net = global - ra - rb;

    let mi = mutual_information(rho, cut)?;
    let mi_deph = mutual_information(&dephase_all(rho, basis)?, cut)?;
    let via_mi = mi - mi_deph;
    if (net - via_mi).abs() > T::SPECTRAL_TOL {
        return Err(CoherenceError::RouteMismatch {
            first: net.as_f64(),
            second: via_mi.as_f64(),
        });
    }
    Ok(CoherenceReport {
        rec_global: global.as_f64(),
        rec_local: vec![ra.as_f64(), rb.as_f64()],
        rec_net: net.as_f64(),
        mutual_info: mi.as_f64(),
        mutual_info_dephased: mi_deph.as_f64(),
    })
}

/// Net global coherence only, through the coherence route.
pub fn rec_net<T: Real>(rho: &DensityMatrix<T>, basis: &ProductBasis<T>, cut: &Bipartition) -> Result<T, CoherenceError> {
    basis.check(rho.dims())?;
    cut.validate(rho.subsystem_count())?;
    let global = rec(rho, basis)?;
    let ra = rec(&rho.partial_trace(&cut.a)?, &basis.restrict(&cut.a))?;
    let rb = rec(&rho.partial_trace(&cut.b)?, &basis.restrict(&cut.b))?;
    Ok(global - ra - rb)
}

#[cfg(test)]
mod tests;
