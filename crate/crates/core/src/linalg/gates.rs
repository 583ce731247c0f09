use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{DenseComplexMatrix, LinalgError};
use crate::scalar::{c, re, Real, C};

/// Named single-qubit matrices.
pub mod pauli {
    use super::*;

    pub fn x<T: Real>() -> DenseComplexMatrix<T> {
        DenseComplexMatrix::from_fn(2, |i, j| if i != j { C::one() } else { C::zero() })
    }

    pub fn y<T: Real>() -> DenseComplexMatrix<T> {
        let mut m = DenseComplexMatrix::zeros(2);
        m[(0, 1)] = c(T::zero(), -T::one());
        m[(1, 0)] = c(T::zero(), T::one());
        m
    }

    pub fn z<T: Real>() -> DenseComplexMatrix<T> {
        DenseComplexMatrix::diag(&[T::one(), -T::one()])
    }

    pub fn h<T: Real>() -> DenseComplexMatrix<T> {
        let s = T::FRAC_1_SQRT_2();
        DenseComplexMatrix::from_fn(2, |i, j| if i == 1 && j == 1 { re(-s) } else { re(s) })
    }

    pub fn s<T: Real>() -> DenseComplexMatrix<T> {
        let mut m = DenseComplexMatrix::identity(2);
        m[(1, 1)] = c(T::zero(), T::one());
        m
    }

    pub fn t<T: Real>() -> DenseComplexMatrix<T> {
        let mut m = DenseComplexMatrix::identity(2);
        let a = T::FRAC_PI_4();
        m[(1, 1)] = c(a.cos(), a.sin());
        m
    }

    /// `σx + iσy = 2|0⟩⟨1|`.
    pub fn raising<T: Real>() -> DenseComplexMatrix<T> {
        let mut m = DenseComplexMatrix::zeros(2);
        m[(0, 1)] = re(T::lit(2.0));
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    T,
    S,
    X,
    Y,
    Z,
    #[serde(rename = "CNOT")]
    Cnot,
    #[serde(rename = "CZ")]
    Cz,
}

impl GateKind {
    pub const ALL: [GateKind; 8] = [
        GateKind::H,
        GateKind::T,
        GateKind::S,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::Cnot,
        GateKind::Cz,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cz => 2,
            _ => 1,
        }
    }

    /// 2×2 matrix for single-qubit gates; the 4×4 matrix (control first) otherwise.
    pub fn matrix<T: Real>(self) -> DenseComplexMatrix<T> {
        match self {
            GateKind::H => pauli::h(),
            GateKind::T => pauli::t(),
            GateKind::S => pauli::s(),
            GateKind::X => pauli::x(),
            GateKind::Y => pauli::y(),
            GateKind::Z => pauli::z(),
            GateKind::Cnot => {
                let mut m = DenseComplexMatrix::zeros(4);
                m[(0, 0)] = C::one();
                m[(1, 1)] = C::one();
                m[(2, 3)] = C::one();
                m[(3, 2)] = C::one();
                m
            }
            GateKind::Cz => DenseComplexMatrix::diag(&[T::one(), T::one(), T::one(), -T::one()]),
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GateKind::H => "H",
            GateKind::T => "T",
            GateKind::S => "S",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
        };
        f.write_str(s)
    }
}

impl FromStr for GateKind {
    type Err = LinalgError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GateKind::ALL
            .into_iter()
            .find(|g| g.to_string() == s)
            .ok_or_else(|| LinalgError::InvalidGate(format!("unknown gate {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub name: GateKind,
    pub targets: Vec<usize>,
}

impl Gate {
    pub fn new(name: GateKind, targets: &[usize]) -> Self {
        Self {
            name,
            targets: targets.to_vec(),
        }
    }
}

/// Ordered list of gates on a qubit register; the first gate is applied first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateNetwork {
    #[serde(rename = "qubits")]
    pub qubit_count: usize,
    pub gates: Vec<Gate>,
}

impl GateNetwork {
    pub fn new(qubit_count: usize, gates: Vec<Gate>) -> Result<Self, LinalgError> {
        let g = Self { qubit_count, gates };
        g.validate()?;
        Ok(g)
    }

    pub fn empty(qubit_count: usize) -> Self {
        Self {
            qubit_count,
            gates: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), LinalgError> {
        if self.qubit_count == 0 {
            return Err(LinalgError::InvalidGate("network needs at least one qubit".into()));
        }
        for (k, g) in self.gates.iter().enumerate() {
            if g.targets.len() != g.name.arity() {
                return Err(LinalgError::InvalidGate(format!(
                    "gate {k} ({}) expects {} targets, got {}",
                    g.name,
                    g.name.arity(),
                    g.targets.len()
                )));
            }
            if let Some(&t) = g.targets.iter().find(|&&t| t >= self.qubit_count) {
                return Err(LinalgError::InvalidGate(format!(
                    "gate {k} ({}) targets qubit {t} of {}",
                    g.name, self.qubit_count
                )));
            }
            if g.targets.len() == 2 && g.targets[0] == g.targets[1] {
                return Err(LinalgError::InvalidGate(format!(
                    "gate {k} ({}) repeats target {}",
                    g.name, g.targets[0]
                )));
            }
        }
        Ok(())
    }
}

/// Unitary of a gate network: `U = G_last ⋯ G_first`, qubit 0 most significant.
pub fn compile_gate_network<T: Real>(g: &GateNetwork) -> Result<DenseComplexMatrix<T>, LinalgError> {
    g.validate()?;
    let n = g.qubit_count;
    let mut u = DenseComplexMatrix::identity(1 << n);
    for gate in &g.gates {
        left_apply(&mut u, n, gate.name, &gate.targets);
    }
    Ok(u)
}

/// `u ← G u` where `G` embeds a 1- or 2-qubit gate into an `n`-qubit register.
fn left_apply<T: Real>(u: &mut DenseComplexMatrix<T>, n: usize, kind: GateKind, targets: &[usize]) {
    let d = 1usize << n;
    let bit = |q: usize| 1usize << (n - 1 - q);
    let gm = kind.matrix::<T>();
    match targets {
        [q] => {
            let b = bit(*q);
            for col in 0..d {
                for i0 in (0..d).filter(|i| i & b == 0) {
                    let i1 = i0 | b;
                    let (a0, a1) = (u[(i0, col)], u[(i1, col)]);
                    u[(i0, col)] = gm[(0, 0)] * a0 + gm[(0, 1)] * a1;
                    u[(i1, col)] = gm[(1, 0)] * a0 + gm[(1, 1)] * a1;
                }
            }
        }
        [q0, q1] => {
            let (b0, b1) = (bit(*q0), bit(*q1));
            for col in 0..d {
                for base in (0..d).filter(|i| i & (b0 | b1) == 0) {
                    let idx = [base, base | b1, base | b0, base | b0 | b1];
                    let v: Vec<C<T>> = idx.iter().map(|&i| u[(i, col)]).collect();
                    for (r, &i) in idx.iter().enumerate() {
                        u[(i, col)] = (0..4).fold(C::zero(), |acc, k| acc + gm[(r, k)] * v[k]);
                    }
                }
            }
        }
        _ => unreachable!("validated arity"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = DenseComplexMatrix<f64>;

    #[test]
    fn empty_network_is_identity() {
        let u: M = compile_gate_network(&GateNetwork::empty(2)).unwrap();
        assert_eq!(u, M::identity(4));
    }

    #[test]
    fn hadamard_involution() {
        let g = GateNetwork::new(1, vec![Gate::new(GateKind::H, &[0]), Gate::new(GateKind::H, &[0])]).unwrap();
        let u: M = compile_gate_network(&g).unwrap();
        assert!(u.approx_eq(&M::identity(2), 1e-15));
    }

    #[test]
    fn bell_preparation_column() {
        let g = GateNetwork::new(2, vec![Gate::new(GateKind::H, &[0]), Gate::new(GateKind::Cnot, &[0, 1])]).unwrap();
        let u: M = compile_gate_network(&g).unwrap();
        let col = u.column(0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expected = [s, 0.0, 0.0, s];
        for (z, e) in col.iter().zip(expected) {
            assert!((z - C::new(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn matches_kron_embedding() {
        // CNOT with control 2, target 0 on three qubits against an explicit permutation
        let g = GateNetwork::new(3, vec![Gate::new(GateKind::Cnot, &[2, 0])]).unwrap();
        let u: M = compile_gate_network(&g).unwrap();
        for col in 0..8usize {
            let expected = if col & 1 == 1 { col ^ 4 } else { col };
            assert_eq!(u[(expected, col)], C::one());
        }
        let g = GateNetwork::new(2, vec![Gate::new(GateKind::T, &[1])]).unwrap();
        let u: M = compile_gate_network(&g).unwrap();
        assert!(u.approx_eq(&M::identity(2).kron(&pauli::t()), 1e-15));
    }

    #[test]
    fn malformed_networks() {
        assert!(GateNetwork::new(2, vec![Gate::new(GateKind::H, &[2])]).is_err());
        assert!(GateNetwork::new(2, vec![Gate::new(GateKind::Cz, &[1, 1])]).is_err());
        assert!(GateNetwork::new(2, vec![Gate::new(GateKind::X, &[0, 1])]).is_err());
        assert!(GateNetwork::new(0, vec![]).is_err());
    }

    #[test]
    fn network_json_shape() {
        let g: GateNetwork =
            serde_json::from_str(r#"{"qubits": 2, "gates": [{"name": "H", "targets": [0]}, {"name": "CNOT", "targets": [0, 1]}]}"#)
                .unwrap();
        assert_eq!(g.gates[1].name, GateKind::Cnot);
        assert!(serde_json::to_string(&g).unwrap().contains("\"CNOT\""));
    }
}
