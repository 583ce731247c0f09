//! In-process harness for the client/server choreography.
//!
//! Charlie (client) may prepare at most two pure qubits per shot, anything
//! else he hands out must be maximally mixed, and he never applies a
//! unitary. Alice and Bob (servers) apply unitaries and measure, but cannot
//! prepare states of their own, cannot send quantum states, and cannot talk
//! to each other. Every action and message goes through [`Harness`], which
//! enforces those rules and records an ordered transcript.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::sampling::{allocate, batch_range, estimate, report, Observable, Setting, BATCHES};
use super::{controlled_unitary, normalized_trace, qubit_count, EstimateReport, Ndqc2Error, Task, MAX_DENSITY_ANCILLAS};
use crate::linalg::{compile_gate_network, pauli, GateNetwork};
use crate::random::{stream_rng, SimRng};
use crate::{Matrix, State};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    Charlie,
    Alice,
    Bob,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Capability {
    PreparePure,
    PrepareMixed,
    ApplyUnitary,
    Measure,
    SendClassical,
    SendState,
}

impl Party {
    pub fn capabilities(self) -> &'static [Capability] {
        use Capability::*;
        match self {
            Party::Charlie => &[PreparePure, PrepareMixed, SendClassical, SendState],
            Party::Alice | Party::Bob => &[ApplyUnitary, Measure, SendClassical],
        }
    }

    pub fn can(self, c: Capability) -> bool {
        self.capabilities().contains(&c)
    }

    fn is_server(self) -> bool {
        self != Party::Charlie
    }
}

/// Local action a party asks the harness to perform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Action {
    PreparePure { qubits: usize },
    PrepareMixed { qubits: usize },
    ApplyUnitary,
    Measure,
}

impl Action {
    fn capability(self) -> Capability {
        match self {
            Action::PreparePure { .. } => Capability::PreparePure,
            Action::PrepareMixed { .. } => Capability::PrepareMixed,
            Action::ApplyUnitary => Capability::ApplyUnitary,
            Action::Measure => Capability::Measure,
        }
    }
}

/// Unitary handed to a server, as a gate network or an explicit matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UnitarySpec {
    Network(GateNetwork),
    Matrix(Matrix),
}

impl UnitarySpec {
    pub fn compile(&self) -> Result<Matrix, Ndqc2Error> {
        match self {
            UnitarySpec::Network(g) => Ok(compile_gate_network(g)?),
            UnitarySpec::Matrix(m) => Ok(m.clone()),
        }
    }
}

impl From<GateNetwork> for UnitarySpec {
    fn from(g: GateNetwork) -> Self {
        UnitarySpec::Network(g)
    }
}

/// Pure control preparation for one shot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preparation {
    Plus,
    Minus,
}

impl Preparation {
    fn sign(self) -> f64 {
        match self {
            Preparation::Plus => 1.0,
            Preparation::Minus => -1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Payload {
    /// The server's unitary and, per block, the observable it measures.
    GateNetwork {
        unitary: UnitarySpec,
        schedule: Vec<(Option<Observable>, u64)>,
    },
    /// One control qubit per shot plus an ancilla register.
    State {
        block: usize,
        controls: Vec<Preparation>,
        ancilla_qubits: usize,
        ancilla_mixed: bool,
    },
    /// ±1 outcomes, one per shot of the block.
    Statistics {
        block: usize,
        observable: Observable,
        outcomes: Vec<i8>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayloadKind {
    State,
    GateNetwork,
    Statistics,
}

impl Payload {
    pub fn kind(&self) -> PayloadKind {
        match self {
            Payload::GateNetwork { .. } => PayloadKind::GateNetwork,
            Payload::State { .. } => PayloadKind::State,
            Payload::Statistics { .. } => PayloadKind::Statistics,
        }
    }

    /// SHA-256 of the payload's JSON encoding.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("payload serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Message {
    pub sender: Party,
    pub receiver: Party,
    pub payload: Payload,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub index: usize,
    pub sender: Party,
    pub receiver: Party,
    pub kind: PayloadKind,
    pub digest: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Transcript {
    pub entries: Vec<TranscriptEntry>,
}

impl Transcript {
    /// First entry breaking a routing rule, with the rule it breaks.
    pub fn violation(&self) -> Option<(usize, &'static str)> {
        self.entries.iter().find_map(|e| routing_rule(e.sender, e.receiver, e.kind).map(|r| (e.index, r)))
    }

    pub fn server_to_server_count(&self) -> usize {
        self.entries.iter().filter(|e| e.sender.is_server() && e.receiver.is_server()).count()
    }

    pub fn server_state_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.kind == PayloadKind::State && e.sender != Party::Charlie)
            .count()
    }
}

fn routing_rule(sender: Party, receiver: Party, kind: PayloadKind) -> Option<&'static str> {
    if sender == receiver {
        return Some("party messaging itself");
    }
    if sender.is_server() && receiver.is_server() {
        return Some("servers may not communicate");
    }
    if kind == PayloadKind::State && sender != Party::Charlie {
        return Some("only the client sends quantum states");
    }
    None
}

#[derive(Debug, thiserror::Error)]
pub enum ProtocolError {
    #[error("{party} broke a protocol rule at transcript index {index}: {rule}")]
    Violation { index: usize, party: Party, rule: String },
    #[error(transparent)]
    Ndqc2(#[from] Ndqc2Error),
}

impl ProtocolError {
    /// Process exit status for a rejected rule break.
    pub const VIOLATION_EXIT_CODE: u8 = 4;

    /// `Some(VIOLATION_EXIT_CODE)` for rule breaks, `None` for numerical or
    /// input errors.
    pub fn violation_exit_code(&self) -> Option<u8> {
        matches!(self, ProtocolError::Violation { .. }).then_some(Self::VIOLATION_EXIT_CODE)
    }
}

impl From<crate::linalg::LinalgError> for ProtocolError {
    fn from(e: crate::linalg::LinalgError) -> Self {
        ProtocolError::Ndqc2(e.into())
    }
}

/// Deliberate rule breaks, for exercising the harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Injection {
    /// Alice forwards her statistics to Bob.
    ServerToServer,
    /// Alice returns a quantum state to Charlie.
    ServerSendsState,
    /// Alice prepares a pure qubit of her own.
    ServerPrepares,
    /// Charlie applies a unitary himself.
    ClientAppliesUnitary,
    /// Charlie hands out pure ancillas.
    PureAncillas,
}

#[derive(Clone, Debug)]
pub struct ProtocolOptions {
    pub injection: Option<Injection>,
    pub min_shots: u64,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        Self {
            injection: None,
            min_shots: 4,
        }
    }
}

/// What one server measured in one block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ServerRecord {
    pub party: Party,
    pub task: Task,
    pub observable: Observable,
    pub outcomes: Vec<i8>,
}

#[derive(Clone, Debug)]
pub struct ProtocolRun {
    pub report: EstimateReport,
    pub transcript: Transcript,
    pub records: Vec<ServerRecord>,
}

/// Pure qubits Charlie may prepare per shot.
const MAX_PURE_PER_SHOT: usize = 2;
const STREAM_BASE: u64 = 1 << 32;

struct Harness {
    transcript: Transcript,
}

impl Harness {
    fn next_index(&self) -> usize {
        self.transcript.entries.len()
    }

    fn violation(&self, party: Party, rule: impl Into<String>) -> ProtocolError {
        ProtocolError::Violation {
            index: self.next_index(),
            party,
            rule: rule.into(),
        }
    }

    fn act(&self, party: Party, action: Action) -> Result<(), ProtocolError> {
        if !party.can(action.capability()) {
            return Err(self.violation(party, format!("lacks capability {:?}", action.capability())));
        }
        if let Action::PreparePure { qubits } = action {
            if qubits > MAX_PURE_PER_SHOT {
                return Err(self.violation(party, format!("prepares {qubits} pure qubits in one shot")));
            }
        }
        Ok(())
    }

    fn send(&mut self, msg: Message) -> Result<Payload, ProtocolError> {
        let kind = msg.payload.kind();
        if let Some(rule) = routing_rule(msg.sender, msg.receiver, kind) {
            return Err(self.violation(msg.sender, rule));
        }
        let needed = if kind == PayloadKind::State {
            Capability::SendState
        } else {
            Capability::SendClassical
        };
        if !msg.sender.can(needed) {
            return Err(self.violation(msg.sender, format!("lacks capability {needed:?}")));
        }
        if let Payload::State { ancilla_mixed: false, ancilla_qubits, .. } = &msg.payload {
            if *ancilla_qubits > 0 {
                return Err(self.violation(msg.sender, "sends non-maximally-mixed ancillas"));
            }
        }
        self.transcript.entries.push(TranscriptEntry {
            index: self.next_index(),
            sender: msg.sender,
            receiver: msg.receiver,
            kind,
            digest: msg.payload.digest(),
        });
        Ok(msg.payload)
    }
}

/// A server's view: its unitary, its schedule and its own randomness.
struct Server {
    party: Party,
    rng: SimRng,
    unitary: Matrix,
    schedule: Vec<(Option<Observable>, u64)>,
    /// `⟨σx⟩, ⟨σy⟩` of the evolved control for a `|+⟩` preparation; `|−⟩`
    /// flips both signs.
    plus_expectations: [f64; 2],
    density_path: bool,
}

impl Server {
    fn new(party: Party, seed: u64, payload: Payload) -> Result<Self, ProtocolError> {
        let Payload::GateNetwork { unitary, schedule } = payload else {
            unreachable!("servers are programmed with a gate network");
        };
        let unitary = unitary.compile()?;
        let n = qubit_count(unitary.dim())?;
        let stream = STREAM_BASE + if party == Party::Alice { 1 } else { 2 };
        let mut server = Self {
            party,
            rng: stream_rng(seed, stream),
            unitary,
            schedule,
            plus_expectations: [0.0; 2],
            density_path: n <= MAX_DENSITY_ANCILLAS,
        };
        server.plus_expectations = server.simulate_plus()?;
        Ok(server)
    }

    /// Control expectations after `U^cont (|+⟩⟨+| ⊗ τ) U^cont†`, from the
    /// full register when small and from `Tr U / 2^n` otherwise; both agree.
    fn simulate_plus(&self) -> Result<[f64; 2], ProtocolError> {
        let t = normalized_trace(&self.unitary)?;
        let closed = [t.re, t.im];
        if !self.density_path {
            return Ok(closed);
        }
        let d = self.unitary.dim();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = State::pure(&crate::linalg::ket(&[h, h]), vec![2])?.tensor(&State::maximally_mixed(vec![d]));
        let out = plus.conjugate_on(&controlled_unitary(&self.unitary)?, &[0, 1])?;
        let control = out.partial_trace(&[0])?;
        let full = [
            control.expectation(&pauli::x()).re,
            control.expectation(&pauli::y()).re,
        ];
        let diff = (full[0] - closed[0]).abs().max((full[1] - closed[1]).abs());
        if diff > 1e-9 {
            return Err(Ndqc2Error::PathMismatch(diff).into());
        }
        Ok(full)
    }

    fn run_block(
        &mut self,
        harness: &mut Harness,
        payload: Payload,
        injection: Option<Injection>,
    ) -> Result<(Message, ServerRecord), ProtocolError> {
        let Payload::State { block, controls, .. } = payload else {
            unreachable!("blocks start with a state payload");
        };
        let observable = self.schedule[block].0.expect("server scheduled for this block");
        if injection == Some(Injection::ServerPrepares) && self.party == Party::Alice {
            harness.act(self.party, Action::PreparePure { qubits: 1 })?;
        }
        harness.act(self.party, Action::ApplyUnitary)?;
        harness.act(self.party, Action::Measure)?;
        let e_plus = match observable {
            Observable::X => self.plus_expectations[0],
            Observable::Y => self.plus_expectations[1],
        };
        let outcomes: Vec<i8> = controls
            .iter()
            .map(|prep| {
                let p_up = (1.0 + prep.sign() * e_plus) / 2.0;
                if self.rng.gen::<f64>() < p_up {
                    1
                } else {
                    -1
                }
            })
            .collect();
        let record = ServerRecord {
            party: self.party,
            task: Task::Product,
            observable,
            outcomes: outcomes.clone(),
        };
        let payload = Payload::Statistics {
            block,
            observable,
            outcomes,
        };
        let receiver = match (injection, self.party) {
            (Some(Injection::ServerToServer), Party::Alice) => Party::Bob,
            _ => Party::Charlie,
        };
        let payload = match (injection, self.party) {
            (Some(Injection::ServerSendsState), Party::Alice) => Payload::State {
                block,
                controls: vec![],
                ancilla_qubits: 0,
                ancilla_mixed: true,
            },
            _ => payload,
        };
        Ok((
            Message {
                sender: self.party,
                receiver,
                payload,
            },
            record,
        ))
    }
}

pub fn run_protocol(
    task: Task,
    unitaries: (UnitarySpec, UnitarySpec),
    shots: u64,
    seed: u64,
) -> Result<ProtocolRun, ProtocolError> {
    run_protocol_with(task, unitaries, shots, seed, &ProtocolOptions::default())
}

pub fn run_protocol_with(
    task: Task,
    unitaries: (UnitarySpec, UnitarySpec),
    shots: u64,
    seed: u64,
    opts: &ProtocolOptions,
) -> Result<ProtocolRun, ProtocolError> {
    if shots < opts.min_shots {
        return Err(Ndqc2Error::TooFewShots {
            min: opts.min_shots,
            got: shots,
        }
        .into());
    }
    let mut harness = Harness {
        transcript: Transcript::default(),
    };
    let schedule = Setting::schedule(task);
    let alloc = allocate(shots);
    let mut charlie_rng = stream_rng(seed, STREAM_BASE);

    // programs
    let program = |side: fn(&Setting) -> Option<Observable>, u: UnitarySpec| Payload::GateNetwork {
        unitary: u,
        schedule: schedule.iter().map(side).zip(alloc.iter().copied()).collect(),
    };
    let (spec_a, spec_b) = unitaries;
    let pa = harness.send(Message {
        sender: Party::Charlie,
        receiver: Party::Alice,
        payload: program(|s| s.a, spec_a),
    })?;
    let pb = harness.send(Message {
        sender: Party::Charlie,
        receiver: Party::Bob,
        payload: program(|s| s.b, spec_b),
    })?;
    let mut alice = Server::new(Party::Alice, seed, pa)?;
    let mut bob = Server::new(Party::Bob, seed, pb)?;
    let ancillas = (qubit_count(alice.unitary.dim())?, qubit_count(bob.unitary.dim())?);

    if opts.injection == Some(Injection::ClientAppliesUnitary) {
        harness.act(Party::Charlie, Action::ApplyUnitary)?;
    }

    let mut records = Vec::new();
    let mut values: Vec<Vec<i64>> = Vec::with_capacity(4);
    for (block, setting) in schedule.iter().enumerate() {
        let n = alloc[block] as usize;
        let participants: Vec<Party> = [(setting.a, Party::Alice), (setting.b, Party::Bob)]
            .into_iter()
            .filter_map(|(o, p)| o.map(|_| p))
            .collect();
        // Task 2 draws one sign per shot and gives both servers the same pure qubit.
        let controls: Vec<Preparation> = (0..n)
            .map(|_| match task {
                Task::Product => Preparation::Plus,
                Task::Correlated => {
                    if charlie_rng.gen::<bool>() {
                        Preparation::Plus
                    } else {
                        Preparation::Minus
                    }
                }
            })
            .collect();
        let pure_per_shot = participants.len() + usize::from(opts.injection == Some(Injection::PureAncillas));
        harness.act(Party::Charlie, Action::PreparePure { qubits: pure_per_shot })?;
        harness.act(
            Party::Charlie,
            Action::PrepareMixed {
                qubits: ancillas.0 + ancillas.1,
            },
        )?;

        let mut per_party: Vec<Vec<i8>> = Vec::new();
        for &party in &participants {
            let ancilla_qubits = if party == Party::Alice { ancillas.0 } else { ancillas.1 };
            let delivered = harness.send(Message {
                sender: Party::Charlie,
                receiver: party,
                payload: Payload::State {
                    block,
                    controls: controls.clone(),
                    ancilla_qubits,
                    ancilla_mixed: opts.injection != Some(Injection::PureAncillas),
                },
            })?;
            let server = if party == Party::Alice { &mut alice } else { &mut bob };
            let (reply, mut record) = server.run_block(&mut harness, delivered, opts.injection)?;
            record.task = task;
            let Payload::Statistics { outcomes, .. } = harness.send(reply)? else {
                unreachable!("servers reply with statistics");
            };
            per_party.push(outcomes);
            records.push(record);
        }
        let shot_values: Vec<i64> = (0..n)
            .map(|i| per_party.iter().map(|o| i64::from(o[i])).product())
            .collect();
        values.push(shot_values);
    }

    let mut sums = [[0i64; BATCHES]; 4];
    let mut counts = [[0u64; BATCHES]; 4];
    for (k, v) in values.iter().enumerate() {
        for b in 0..BATCHES {
            let (lo, hi) = batch_range(v.len() as u64, BATCHES, b);
            sums[k][b] = v[lo as usize..hi as usize].iter().sum();
            counts[k][b] = hi - lo;
        }
    }
    let (iota_est, se_empirical) = estimate(task, &sums, &counts);
    let density_path = alice.density_path && bob.density_path;
    let report = report(
        task,
        &alice.unitary,
        &bob.unitary,
        shots,
        seed,
        iota_est,
        se_empirical,
        density_path,
        &alloc,
    )?;
    Ok(ProtocolRun {
        report,
        transcript: harness.transcript,
        records,
    })
}
