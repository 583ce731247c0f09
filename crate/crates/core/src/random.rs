//! Seeded random ensembles.
//!
//! Generators are ChaCha20 streams: `stream_rng(seed, k)` is stream `k` of
//! the key derived from `seed`, so any number of independent substreams can
//! be split off a master seed by counter without coordination.

use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::linalg::{DenseComplexMatrix, DensityMatrix, Gate, GateKind, GateNetwork};
use crate::Matrix;

pub type SimRng = ChaCha20Rng;

/// Stream `stream` of the ChaCha20 key expanded from `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian_c<R: Rng + ?Sized>(rng: &mut R) -> Complex<f64> {
    Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Matrix {
    DenseComplexMatrix::from_fn(dim, |_, _| gaussian_c(rng))
}

/// Hilbert–Schmidt random state `GG†/Tr(GG†)`.
pub fn hilbert_schmidt_state<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> DensityMatrix<f64> {
    let d: usize = dims.iter().product();
    let g = ginibre(d, rng);
    let gg = &g * &g.adjoint();
    let tr = gg.trace().re;
    DensityMatrix::from_parts_unchecked(gg.scale_real(1.0 / tr), dims.to_vec())
}

/// Haar-random pure state vector.
pub fn haar_ket<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex<f64>> {
    let v: Vec<Complex<f64>> = (0..dim).map(|_| gaussian_c(rng)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

pub fn pure_state<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> DensityMatrix<f64> {
    let d: usize = dims.iter().product();
    DensityMatrix::pure(&haar_ket(d, rng), dims.to_vec()).expect("nonzero Gaussian vector")
}

/// Haar-random unitary: Gram–Schmidt on Ginibre columns (equivalent to QR
/// with a positive diagonal in `R`).
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Matrix {
    let g = ginibre(dim, rng);
    let mut cols: Vec<Vec<Complex<f64>>> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut v = g.column(j);
        for _ in 0..2 {
            for q in &cols {
                let proj = q
                    .iter()
                    .zip(&v)
                    .fold(Complex::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b);
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= proj * y;
                }
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|z| z / n).collect());
    }
    DenseComplexMatrix::from_columns(&cols).expect("square")
}

/// Column-stochastic matrix with uniform-Dirichlet columns.
pub fn stochastic_entries<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = (0..dim)
        .map(|_| {
            let w: Vec<f64> = (0..dim).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| x / s).collect()
        })
        .collect();
    // row-major: entries[i][j] = column j, row i
    let mut rows = vec![vec![0.0; dim]; dim];
    for (j, col) in cols.drain(..).enumerate() {
        for (i, x) in col.into_iter().enumerate() {
            rows[i][j] = x;
        }
    }
    rows
}

pub fn probability_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..dim).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Kraus set in incoherent form: each operator sends column `j` to a single
/// row `f(j)`. With `strict`, every `f` is a permutation, so rows are also
/// single-entry. Otherwise `f` is an arbitrary map and each operator is
/// replaced by `m` copies whose columns carry phases `ω^{k·r(j)}/√m`, where
/// `r(j)` ranks `j` among the columns sharing its row and `m` is the largest
/// such group; the phases cancel the cross terms of `Σ F†F`, which is then
/// diagonal and normalized column by column.
pub fn incoherent_kraus<R: Rng + ?Sized>(dim: usize, count: usize, strict: bool, rng: &mut R) -> Vec<Matrix> {
    let mut raw: Vec<(Vec<usize>, Vec<Complex<f64>>)> = Vec::new();
    for _ in 0..count {
        let f: Vec<usize> = if strict {
            let mut p: Vec<usize> = (0..dim).collect();
            for i in (1..dim).rev() {
                p.swap(i, rng.gen_range(0..=i));
            }
            p
        } else {
            (0..dim).map(|_| rng.gen_range(0..dim)).collect()
        };
        let c: Vec<Complex<f64>> = (0..dim).map(|_| gaussian_c(rng)).collect();
        let mut rank = vec![0usize; dim];
        let mut group = vec![0usize; dim];
        for j in 0..dim {
            rank[j] = group[f[j]];
            group[f[j]] += 1;
        }
        let m = group.into_iter().max().unwrap_or(1);
        for k in 0..m {
            let phased = (0..dim)
                .map(|j| c[j] * Complex::from_polar(1.0 / (m as f64).sqrt(), std::f64::consts::TAU * (k * rank[j]) as f64 / m as f64))
                .collect();
            raw.push((f.clone(), phased));
        }
    }
    let norms: Vec<f64> = (0..dim)
        .map(|j| raw.iter().map(|(_, c)| c[j].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    raw.iter()
        .map(|(f, c)| DenseComplexMatrix::from_fn(dim, |i, j| if f[j] == i { c[j] / norms[j] } else { Complex::new(0.0, 0.0) }))
        .collect()
}

/// Uniformly drawn gates from {H, T, S, X, Y, Z, CNOT, CZ}; two-qubit gates
/// need `qubits ≥ 2`.
pub fn gate_network<R: Rng + ?Sized>(qubits: usize, depth: usize, rng: &mut R) -> GateNetwork {
    let kinds: Vec<GateKind> = GateKind::ALL
        .into_iter()
        .filter(|k| k.arity() <= qubits)
        .collect();
    let gates = (0..depth)
        .map(|_| {
            let kind = kinds[rng.gen_range(0..kinds.len())];
            if kind.arity() == 1 {
                Gate::new(kind, &[rng.gen_range(0..qubits)])
            } else {
                let a = rng.gen_range(0..qubits);
                let mut b = rng.gen_range(0..qubits - 1);
                if b >= a {
                    b += 1;
                }
                Gate::new(kind, &[a, b])
            }
        })
        .collect();
    GateNetwork { qubit_count: qubits, gates }
}
