//! Two-server trace estimation.
//!
//! Each server `X` holds a control qubit and `n_X` maximally mixed ancillas
//! and applies `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ U_X`. Tracing out the ancillas
//! multiplies the control's `|1⟩⟨0|` element by `t_X = Tr U_X / 2^{n_X}`,
//! so `⟨σx + iσy⟩ = 2ρ₁₀` reads off `t_X`. Charlie wants `ι = t_A t_B`.
//!
//! Task 1 prepares `|++⟩` and measures each server separately; task 2
//! prepares `½(|++⟩⟨++| + |−−⟩⟨−−|)`, whose marginals carry no information,
//! and reads `ι` from correlations:
//! `(σx + iσy)⊗(σx + iσy) = σxσx − σyσy + i(σxσy + σyσx)`.

mod privacy;
mod protocol;
mod sampling;

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

pub use privacy::{privacy_audit, privacy_audit_with, AuditVerdict, MarginalEstimate};
pub use protocol::{
    run_protocol, run_protocol_with, Action, Capability, Injection, Message, Party, Payload, PayloadKind,
    Preparation, ProtocolError, ProtocolOptions, ProtocolRun, ServerRecord, Transcript, TranscriptEntry, UnitarySpec,
};
pub use sampling::{sample_run, sample_run_with, Observable, SampleOptions, Setting, BATCHES};

use crate::coherence::{dephase_all, rec, rec_net, Bipartition, CoherenceError};
use crate::linalg::{ket, pauli, DenseComplexMatrix, DensityMatrix, LinalgError};
use crate::scalar::Real;
use crate::{Basis, Complex64, Matrix, State};

/// Largest ancilla register per side simulated on the full density matrix.
pub const MAX_DENSITY_ANCILLAS: usize = 5;

#[derive(Debug, thiserror::Error)]
pub enum Ndqc2Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Coherence(#[from] CoherenceError),
    #[error("unitary defect {defect:e} exceeds tolerance")]
    NotUnitary { defect: f64 },
    #[error("dimension {0} is not a power of two")]
    NotQubits(usize),
    #[error("no coherence resource (C_r = {0}): estimation impossible")]
    NoCoherence(f64),
    #[error("need at least {min} shots, got {got}")]
    TooFewShots { min: u64, got: u64 },
    #[error("density and closed-form control states differ by {0:e}")]
    PathMismatch(f64),
    #[error("unknown task {0}; expected 1 or 2")]
    UnknownTask(u8),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Task {
    /// `|++⟩` controls, per-server measurements.
    Product,
    /// Classically correlated controls, joint measurements.
    Correlated,
}

impl Task {
    pub fn number(self) -> u8 {
        match self {
            Task::Product => 1,
            Task::Correlated => 2,
        }
    }
}

impl TryFrom<u8> for Task {
    type Error = Ndqc2Error;

    fn try_from(n: u8) -> Result<Self, Ndqc2Error> {
        match n {
            1 => Ok(Task::Product),
            2 => Ok(Task::Correlated),
            n => Err(Ndqc2Error::UnknownTask(n)),
        }
    }
}

impl From<Task> for u8 {
    fn from(t: Task) -> u8 {
        t.number()
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.number())
    }
}

fn check_unitary<T: Real>(u: &DenseComplexMatrix<T>) -> Result<(), Ndqc2Error> {
    let defect = u.unitarity_defect();
    if defect > T::SPECTRAL_TOL {
        return Err(Ndqc2Error::NotUnitary {
            defect: defect.as_f64(),
        });
    }
    Ok(())
}

/// `log₂ dim` for a qubit register.
pub fn qubit_count(dim: usize) -> Result<usize, Ndqc2Error> {
    if !dim.is_power_of_two() {
        return Err(Ndqc2Error::NotQubits(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ U`, control first.
pub fn controlled_unitary<T: Real>(u: &DenseComplexMatrix<T>) -> Result<DenseComplexMatrix<T>, Ndqc2Error> {
    check_unitary(u)?;
    let d = u.dim();
    Ok(DenseComplexMatrix::from_fn(2 * d, |i, j| match (i < d, j < d) {
        (true, true) if i == j => Complex::one(),
        (false, false) => u[(i - d, j - d)],
        _ => Complex::zero(),
    }))
}

/// `Tr U / dim`.
pub fn normalized_trace<T: Real>(u: &DenseComplexMatrix<T>) -> Result<Complex<T>, Ndqc2Error> {
    check_unitary(u)?;
    Ok(u.trace() / T::lit(u.dim() as f64))
}

/// `ι = Tr U_A · Tr U_B / (dim_A dim_B)`.
pub fn exact_iota<T: Real>(u_a: &DenseComplexMatrix<T>, u_b: &DenseComplexMatrix<T>) -> Result<Complex<T>, Ndqc2Error> {
    Ok(normalized_trace(u_a)? * normalized_trace(u_b)?)
}

/// Joint control state `[c_A, c_B]` before the controlled unitaries.
pub fn control_input_state(task: Task) -> State {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = ket::<f64>(&[h, h]);
    let minus = ket::<f64>(&[h, -h]);
    let pp = DenseComplexMatrix::outer(&plus).kron(&DenseComplexMatrix::outer(&plus));
    match task {
        Task::Product => DensityMatrix::from_parts_unchecked(pp, vec![2, 2]),
        Task::Correlated => {
            let mm = DenseComplexMatrix::outer(&minus).kron(&DenseComplexMatrix::outer(&minus));
            DensityMatrix::from_parts_unchecked((&pp + &mm).scale_real(0.5), vec![2, 2])
        }
    }
}

/// Control plus ancillas, ordered `[c_A, a_A, c_B, a_B]`.
pub fn full_input_state(task: Task, dim_a: usize, dim_b: usize) -> State {
    let controls = control_input_state(task);
    let tau = State::maximally_mixed(vec![dim_a]).tensor(&State::maximally_mixed(vec![dim_b]));
    controls
        .tensor(&tau)
        .permute_subsystems(&[0, 2, 1, 3])
        .expect("four subsystems")
}

/// Evolves the full register with both controlled unitaries.
pub fn full_output_state(task: Task, u_a: &Matrix, u_b: &Matrix) -> Result<State, Ndqc2Error> {
    let ca = controlled_unitary(u_a)?;
    let cb = controlled_unitary(u_b)?;
    let rho = full_input_state(task, u_a.dim(), u_b.dim());
    Ok(rho.conjugate_on(&ca, &[0, 1])?.conjugate_on(&cb, &[2, 3])?)
}

/// `ρ ↦ ρ ∘ F` with `F[(a a'),(b b')] = f_A(a, b) f_B(a', b')`, `f(1,0) = t`,
/// `f(0,1) = t̄` and `f = 1` on the diagonal.
fn closed_form(input: &State, t_a: Complex64, t_b: Complex64) -> State {
    let f = |t: Complex64, a: usize, b: usize| match (a, b) {
        (1, 0) => t,
        (0, 1) => t.conj(),
        _ => Complex64::one(),
    };
    let m = input.matrix();
    let out = DenseComplexMatrix::from_fn(4, |i, j| m[(i, j)] * f(t_a, i >> 1, j >> 1) * f(t_b, i & 1, j & 1));
    DensityMatrix::from_parts_unchecked(out, vec![2, 2])
}

#[derive(Clone, Debug)]
pub struct ControlOutput {
    /// Joint control state `[c_A, c_B]` after the controlled unitaries.
    pub state: State,
    /// Whether the full density-matrix path ran and agreed with the closed form.
    pub density_path: bool,
}

/// Joint control state after evolution. The closed form always runs; the
/// full-register construction runs too when both sides have at most
/// [`MAX_DENSITY_ANCILLAS`] ancillas, and the two must agree to 1e-9.
pub fn control_output_state(task: Task, u_a: &Matrix, u_b: &Matrix) -> Result<ControlOutput, Ndqc2Error> {
    let t_a = normalized_trace(u_a)?;
    let t_b = normalized_trace(u_b)?;
    let closed = closed_form(&control_input_state(task), t_a, t_b);
    let small = qubit_count(u_a.dim())? <= MAX_DENSITY_ANCILLAS && qubit_count(u_b.dim())? <= MAX_DENSITY_ANCILLAS;
    if small {
        let full = full_output_state(task, u_a, u_b)?.partial_trace(&[0, 2])?;
        let diff = full.matrix().max_abs_diff(closed.matrix());
        if diff > 1e-9 {
            return Err(Ndqc2Error::PathMismatch(diff));
        }
    }
    Ok(ControlOutput {
        state: closed,
        density_path: small,
    })
}

/// `⟨(σx + iσy) ⊗ (σx + iσy)⟩` on a joint control state.
pub fn joint_raising_expectation(state: &State) -> Complex64 {
    let r = pauli::raising::<f64>();
    state.expectation(&r.kron(&r))
}

/// `⟨σx + iσy⟩` on subsystem `k` of a joint control state.
pub fn marginal_raising_expectation(state: &State, k: usize) -> Result<Complex64, Ndqc2Error> {
    Ok(state.partial_trace(&[k])?.expectation(&pauli::raising()))
}

/// Asymptotic standard error `√((4 − |ι_A|² − |ι_B|²)/(M C_r))`.
pub fn predicted_se(iota_a: Complex64, iota_b: Complex64, shots: u64, rec_control: f64) -> Result<f64, Ndqc2Error> {
    if !(rec_control > 0.0) {
        return Err(Ndqc2Error::NoCoherence(rec_control));
    }
    if shots == 0 {
        return Err(Ndqc2Error::TooFewShots { min: 1, got: 0 });
    }
    Ok(((4.0 - iota_a.norm_sqr() - iota_b.norm_sqr()) / (shots as f64 * rec_control)).sqrt())
}

/// Bits of precision `½ log₂ C_r`.
pub fn predicted_bp(rec_control: f64) -> Result<f64, Ndqc2Error> {
    if !(rec_control > 0.0) {
        return Err(Ndqc2Error::NoCoherence(rec_control));
    }
    Ok(0.5 * rec_control.log2())
}

/// Global and net coherence of the control input in the computational
/// basis. The ancillas are maximally mixed and so add nothing to either.
pub fn control_coherence(task: Task) -> Result<(f64, f64), Ndqc2Error> {
    let rho = control_input_state(task);
    let z = Basis::computational(&[2, 2]);
    Ok((rec(&rho, &z)?, rec_net(&rho, &z, &Bipartition::pair())?))
}

/// Product basis `{|c⟩ ⊗ |ξ_i⟩}` per side, `ξ` the eigenvectors of `U_X`,
/// ordered like [`full_input_state`].
pub fn eigenbasis_construction(u_a: &Matrix, u_b: &Matrix) -> Result<Basis, Ndqc2Error> {
    let xa = crate::linalg::unitary_eigenvectors(u_a)?;
    let xb = crate::linalg::unitary_eigenvectors(u_b)?;
    Ok(Basis::new(vec![Matrix::identity(2), xa, Matrix::identity(2), xb])?)
}

/// Global and local coherence of a full-register state in `basis`, cut
/// between the two servers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegisterCoherence {
    pub global: f64,
    pub local_a: f64,
    pub local_b: f64,
}

pub fn register_coherence(rho: &State, basis: &Basis) -> Result<RegisterCoherence, Ndqc2Error> {
    let side = |keep: &[usize]| -> Result<f64, Ndqc2Error> { Ok(rec(&rho.partial_trace(keep)?, &basis.restrict(keep))?) };
    Ok(RegisterCoherence {
        global: rec(rho, basis)?,
        local_a: side(&[0, 1])?,
        local_b: side(&[2, 3])?,
    })
}

/// Diagonal of the full register in `basis`, used to check that the
/// controlled unitaries leave it fixed.
pub fn register_populations(rho: &State, basis: &Basis) -> Result<Vec<f64>, Ndqc2Error> {
    Ok(dephase_all(rho, basis)?.matrix().real_diagonal())
}

/// Outcome of an estimation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub task: Task,
    pub shots: u64,
    #[serde(with = "crate::json::complex12")]
    pub iota_exact: Complex64,
    #[serde(with = "crate::json::complex12")]
    pub iota_est: Complex64,
    #[serde(with = "crate::json::complex12")]
    pub iota_a: Complex64,
    #[serde(with = "crate::json::complex12")]
    pub iota_b: Complex64,
    #[serde(with = "crate::json::sig12")]
    pub se_predicted: f64,
    /// Scatter of per-batch estimates; absent with fewer than two non-empty batches.
    #[serde(with = "crate::json::sig12_opt")]
    pub se_empirical: Option<f64>,
    #[serde(with = "crate::json::sig12")]
    pub rec_control: f64,
    #[serde(with = "crate::json::sig12")]
    pub rec_net: f64,
    #[serde(with = "crate::json::sig12")]
    pub bp_predicted: f64,
    pub seed: u64,
    /// Whether the full density-matrix simulation cross-checked the closed form.
    pub density_path: bool,
    /// Shots per measurement setting, in schedule order.
    pub settings: Vec<(Setting, u64)>,
}
