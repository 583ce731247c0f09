//! Basis-dependent discord and its minimization over local bases.
//!
//! `D_{A→B}(ρ) = I(ρ) − I(Δ_A[ρ])` with `A` the dephased (measured) side.
//! Writing `p_i` and `ρ_{B|i}` for the outcome distribution and conditional
//! states of a measurement in basis `{|a_i⟩}`, this equals
//! `S(ρ_A) − S(ρ_AB) + Σ p_i S(ρ_{B|i})`, which is the objective the
//! optimizer evaluates. Only the measured side's basis enters; the other
//! side of a returned basis is the eigenbasis of its marginal.

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{dephase, mutual_information, von_neumann_entropy, Bipartition, CoherenceError, ProductBasis};
use crate::linalg::{hermitian_eig, DenseComplexMatrix, DensityMatrix};
use crate::random::{haar_unitary, stream_rng};
use crate::scalar::{shannon_bits, Real};
use crate::{Matrix, State, DEFAULT_SEED};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Dephase `A`, correlations seen by `B`.
    #[serde(rename = "A->B")]
    AToB,
    #[serde(rename = "B->A")]
    BToA,
}

impl Direction {
    pub fn measured(self) -> usize {
        match self {
            Direction::AToB => 0,
            Direction::BToA => 1,
        }
    }
}

fn require_bipartite(n: usize) -> Result<(), CoherenceError> {
    if n != 2 {
        return Err(CoherenceError::NotBipartite(n));
    }
    Ok(())
}

/// `I(ρ) − I(Δ_X[ρ])` with `X` the measured side of `direction`.
pub fn basis_dependent_discord<T: Real>(
    rho: &DensityMatrix<T>,
    basis: &ProductBasis<T>,
    direction: Direction,
) -> Result<T, CoherenceError> {
    require_bipartite(rho.subsystem_count())?;
    basis.check(rho.dims())?;
    let cut = Bipartition::pair();
    let dephased = dephase(rho, basis, &[direction.measured()])?;
    Ok(mutual_information(rho, &cut)? - mutual_information(&dephased, &cut)?)
}

#[derive(Clone, Debug)]
pub struct DiscordOptions {
    /// Haar-random restarts on top of the structured seeds.
    pub restarts: usize,
    pub seed: u64,
    /// Initial coordinate step (radians).
    pub initial_step: f64,
    /// Coordinate descent stops once the step falls below this.
    pub min_step: f64,
    /// Objective evaluations allowed per start.
    pub max_evals: usize,
}

impl Default for DiscordOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            seed: DEFAULT_SEED,
            initial_step: 0.4,
            min_step: 1e-9,
            max_evals: 20_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DiscordMinimum {
    /// Discord in bits at `basis`, evaluated through the mutual-information route.
    pub value: f64,
    pub basis: ProductBasis<f64>,
    pub direction: Direction,
    /// Best objective per starting point, seeds first then random restarts.
    pub starts: Vec<f64>,
}

/// Minimum of the basis-dependent discord over the measured side's local basis.
pub fn minimize_discord(rho: &State, direction: Direction) -> Result<DiscordMinimum, CoherenceError> {
    minimize_discord_with(rho, direction, &DiscordOptions::default())
}

pub fn minimize_discord_with(
    rho: &State,
    direction: Direction,
    opts: &DiscordOptions,
) -> Result<DiscordMinimum, CoherenceError> {
    require_bipartite(rho.subsystem_count())?;
    // work with the measured side first
    let oriented = match direction {
        Direction::AToB => rho.clone(),
        Direction::BToA => rho.permute_subsystems(&[1, 0])?,
    };
    let problem = Objective::new(&oriented)?;
    let da = oriented.dims()[0];

    let mut seeds: Vec<Matrix> = Vec::new();
    if da == 2 {
        seeds.push(problem.correlation_seed()?);
    }
    let rho_a = oriented.partial_trace(&[0])?;
    seeds.push(hermitian_eig(rho_a.matrix())?.vectors);
    seeds.push(DenseComplexMatrix::identity(da));
    seeds.extend((0..opts.restarts).map(|k| haar_unitary(da, &mut stream_rng(opts.seed, k as u64))));

    let results: Vec<(f64, Matrix)> = seeds
        .into_par_iter()
        .map(|start| problem.descend(start, opts))
        .collect();
    let starts: Vec<f64> = results.iter().map(|(v, _)| *v).collect();
    // first minimum wins ties, which keeps the result independent of scheduling
    let (_, best) = results
        .into_iter()
        .fold(None::<(f64, Matrix)>, |acc, (v, u)| match acc {
            Some((bv, bu)) if bv <= v => Some((bv, bu)),
            _ => Some((v, u)),
        })
        .expect("at least one start");

    let rho_b = oriented.partial_trace(&[1])?;
    let other = hermitian_eig(rho_b.matrix())?.vectors;
    let basis = match direction {
        Direction::AToB => ProductBasis::new(vec![best, other])?,
        Direction::BToA => ProductBasis::new(vec![other, best])?,
    };
    let value = basis_dependent_discord(rho, &basis, direction)?;
    Ok(DiscordMinimum {
        value,
        basis,
        direction,
        starts,
    })
}

/// `S(ρ_A) − S(ρ_AB) + Σ p_i S(ρ_{B|i})` for a measurement of `A` in the
/// columns of `local`.
pub fn discord_objective(rho: &State, local: &Matrix) -> Result<f64, CoherenceError> {
    require_bipartite(rho.subsystem_count())?;
    Objective::new(rho)?.eval(local)
}

struct Objective<'a> {
    rho: &'a State,
    da: usize,
    db: usize,
    constant: f64,
}

impl<'a> Objective<'a> {
    fn new(rho: &'a State) -> Result<Self, CoherenceError> {
        let sa = von_neumann_entropy(&rho.partial_trace(&[0])?)?;
        let sab = von_neumann_entropy(rho)?;
        Ok(Self {
            rho,
            da: rho.dims()[0],
            db: rho.dims()[1],
            constant: sa - sab,
        })
    }

    /// Unnormalized conditional state `⟨a|ρ|a⟩` on `B`.
    fn conditional(&self, a: &[Complex<f64>]) -> Matrix {
        let (da, db) = (self.da, self.db);
        let m = self.rho.matrix();
        DenseComplexMatrix::from_fn(db, |r, c| {
            let mut s = Complex::zero();
            for i in 0..da {
                if a[i].is_zero() {
                    continue;
                }
                for j in 0..da {
                    s += a[i].conj() * m[(i * db + r, j * db + c)] * a[j];
                }
            }
            s
        })
    }

    fn eval(&self, local: &Matrix) -> Result<f64, CoherenceError> {
        let mut total = self.constant;
        for k in 0..self.da {
            let cond = self.conditional(&local.column(k));
            let p = cond.trace().re;
            if p <= 1e-300 {
                continue;
            }
            let cond = cond.scale_real(1.0 / p);
            total += p * if self.db == 2 {
                qubit_entropy(&cond)
            } else {
                shannon_bits(hermitian_eig(&cond)?.values)
            };
        }
        Ok(total)
    }

    /// Measurement direction for a qubit `A` from the correlation operators
    /// `R_k = Tr_A[(σ_k ⊗ I) ρ]`: zero discord forces `R_k = n_k R`, and `n`
    /// is then the top eigenvector of the Gram matrix `Re Tr(R_k R_l)`.
    fn correlation_seed(&self) -> Result<Matrix, CoherenceError> {
        use crate::linalg::pauli;
        let paulis = [pauli::x::<f64>(), pauli::y(), pauli::z()];
        let eye = DenseComplexMatrix::identity(self.db);
        let rs: Vec<Matrix> = paulis
            .iter()
            .map(|s| {
                let op = s.kron(&eye);
                let prod = &op * self.rho.matrix();
                partial_trace_first(&prod, 2, self.db)
            })
            .collect();
        let gram = DenseComplexMatrix::from_fn(3, |k, l| {
            let v: f64 = (&rs[k] * &rs[l]).trace().re;
            Complex::new(v, 0.0)
        });
        let eig = hermitian_eig(&gram)?;
        let top = eig.vectors.column(2);
        let n = [top[0].re, top[1].re, top[2].re];
        Ok(qubit_basis(n))
    }

    fn descend(&self, start: Matrix, opts: &DiscordOptions) -> (f64, Matrix) {
        let pairs: Vec<(usize, usize)> = (0..self.da)
            .flat_map(|p| ((p + 1)..self.da).map(move |q| (p, q)))
            .collect();
        let mut params = vec![0.0f64; 2 * pairs.len()];
        let unitary = |params: &[f64]| -> Matrix {
            let mut u = start.clone();
            for (k, &(p, q)) in pairs.iter().enumerate() {
                u = &u * &givens(self.da, p, q, params[2 * k], params[2 * k + 1]);
            }
            u
        };
        let eval = |params: &[f64]| self.eval(&unitary(params)).unwrap_or(f64::INFINITY);
        let mut best = eval(&params);
        let mut step = opts.initial_step;
        let mut evals = 1;
        while step >= opts.min_step && evals < opts.max_evals {
            let mut improved = false;
            for i in 0..params.len() {
                for sign in [1.0, -1.0] {
                    let mut trial = params.clone();
                    trial[i] += sign * step;
                    let v = eval(&trial);
                    evals += 1;
                    // gains below this are eigensolver noise
                    if v < best - 1e-13 {
                        best = v;
                        params = trial;
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        (best, unitary(&params))
    }
}

/// Entropy of a unit-trace 2×2 Hermitian matrix from its closed-form spectrum.
fn qubit_entropy(m: &Matrix) -> f64 {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let r = ((a - d) * (a - d) + 4.0 * m[(0, 1)].norm_sqr()).sqrt();
    let t = a + d;
    shannon_bits([(t + r) / 2.0, (t - r) / 2.0])
}

/// Givens rotation on coordinates `(p, q)`.
fn givens(d: usize, p: usize, q: usize, theta: f64, phi: f64) -> Matrix {
    let mut g = DenseComplexMatrix::identity(d);
    let (s, c) = theta.sin_cos();
    let ph = Complex::from_polar(1.0, phi);
    g[(p, p)] = Complex::new(c, 0.0);
    g[(q, q)] = Complex::new(c, 0.0);
    g[(p, q)] = -ph.conj() * s;
    g[(q, p)] = ph * s;
    g
}

fn partial_trace_first(m: &Matrix, da: usize, db: usize) -> Matrix {
    DenseComplexMatrix::from_fn(db, |r, c| (0..da).fold(Complex::zero(), |acc, i| acc + m[(i * db + r, i * db + c)]))
}

/// Qubit basis `{|n⟩, |−n⟩}` for a (not necessarily normalized) Bloch vector.
pub fn qubit_basis(n: [f64; 3]) -> Matrix {
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if norm < 1e-300 {
        return DenseComplexMatrix::identity(2);
    }
    let z = (n[2] / norm).clamp(-1.0, 1.0);
    let theta = z.acos();
    let phi = n[1].atan2(n[0]);
    let (s, c) = (theta / 2.0).sin_cos();
    let e = Complex::from_polar(1.0, phi);
    let up = vec![Complex::new(c, 0.0), e * s];
    let down = vec![-e.conj() * s, Complex::new(c, 0.0)];
    DenseComplexMatrix::from_columns(&[up, down]).expect("2x2")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;

    #[test]
    fn qubit_basis_is_unitary_with_matching_bloch_vector() {
        let u = qubit_basis([0.3, -0.4, 0.5]);
        assert!(u.is_unitary(1e-14));
        let proj = DenseComplexMatrix::outer(&u.column(0));
        let x = proj.expectation_trace(&crate::linalg::pauli::x());
        let norm = (0.09f64 + 0.16 + 0.25).sqrt();
        assert!((x - 0.3 / norm).abs() < 1e-14);
    }

    #[test]
    fn objective_matches_mutual_information_route() {
        let mut rng = random::stream_rng(17, 0);
        for dims in [[2usize, 2], [2, 3], [3, 2]] {
            let rho = random::hilbert_schmidt_state(&dims, &mut rng);
            let ua = random::haar_unitary(dims[0], &mut rng);
            let basis = ProductBasis::new(vec![ua.clone(), DenseComplexMatrix::identity(dims[1])]).unwrap();
            let full = basis_dependent_discord(&rho, &basis, Direction::AToB).unwrap();
            let fast = discord_objective(&rho, &ua).unwrap();
            assert!((full - fast).abs() < 1e-10, "{dims:?}: {full} vs {fast}");
        }
    }

    trait TraceWith {
        fn expectation_trace(&self, op: &Matrix) -> f64;
    }

    impl TraceWith for Matrix {
        fn expectation_trace(&self, op: &Matrix) -> f64 {
            (self * op).trace().re
        }
    }
}
