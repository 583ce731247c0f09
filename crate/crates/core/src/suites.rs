//! Seeded verification sweeps behind `netcoh verify`. Each suite samples an
//! ensemble, checks one property per instance and reports a row per check.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{cc_search, cc_state, ClassifyError, ClassifyOptions};
use crate::coherence::{
    minimize_discord, mutual_information, dephase_all, rec_net, von_neumann_entropy, Bipartition, CoherenceError,
    Direction,
};
use crate::incoherent_ops::{
    apply_channel, embed_classical, extract_classical, is_incoherent, is_strict_incoherent, sandwich_dephase,
    ChannelError, ClassicalState, StochasticMatrix,
};
use crate::linalg::{ket, pauli, DenseComplexMatrix, GateNetwork};
use crate::ndqc2::{
    self, control_input_state, eigenbasis_construction, exact_iota, full_input_state,
    full_output_state, joint_raising_expectation, privacy_audit, register_coherence, run_protocol, run_protocol_with,
    sample_run, AuditVerdict, Injection, Ndqc2Error, ProtocolError, ProtocolOptions, Task, UnitarySpec,
};
use crate::random::{self, stream_rng, SimRng};
use crate::{Basis, Channel, Complex64, Matrix, State};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Thm4,
    Thm5,
    Thm6,
    Lemma1,
    Isomorphism,
    SeScaling,
    Privacy,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Thm4,
        Suite::Thm5,
        Suite::Thm6,
        Suite::Lemma1,
        Suite::Isomorphism,
        Suite::SeScaling,
        Suite::Privacy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Thm4 => "thm4",
            Suite::Thm5 => "thm5",
            Suite::Thm6 => "thm6",
            Suite::Lemma1 => "lemma1",
            Suite::Isomorphism => "isomorphism",
            Suite::SeScaling => "se-scaling",
            Suite::Privacy => "privacy",
        }
    }

    /// Size of the suite's main ensemble when none is given.
    pub fn default_ensemble(self) -> usize {
        match self {
            Suite::Thm4 => 1000,
            Suite::Thm5 => 500,
            Suite::Thm6 => 200,
            Suite::Lemma1 => 1000,
            Suite::Isomorphism => 100,
            Suite::SeScaling => 100,
            Suite::Privacy => 1000,
        }
    }

    /// Suites selected by a command-line name; `all` expands to every suite.
    pub fn parse_selection(name: &str) -> Result<Vec<Suite>, UnknownSuite> {
        if name == "all" {
            Ok(Suite::ALL.to_vec())
        } else {
            Ok(vec![name.parse()?])
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown suite {0:?}; expected one of thm4, thm5, thm6, lemma1, isomorphism, se-scaling, privacy, all")]
pub struct UnknownSuite(pub String);

impl FromStr for Suite {
    type Err = UnknownSuite;

    fn from_str(s: &str) -> Result<Self, UnknownSuite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error(transparent)]
    Coherence(#[from] CoherenceError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Ndqc2(#[from] Ndqc2Error),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

impl From<crate::linalg::LinalgError> for SuiteError {
    fn from(e: crate::linalg::LinalgError) -> Self {
        SuiteError::Coherence(e.into())
    }
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Overrides the main ensemble size; side ensembles scale with it.
    pub ensemble: Option<usize>,
    /// Slack on equalities and sign conditions.
    pub tolerance: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: crate::DEFAULT_SEED,
            ensemble: None,
            tolerance: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = ">")]
    Above,
}

impl Relation {
    fn holds(self, value: f64, bound: f64) -> bool {
        match self {
            Relation::AtMost => value <= bound,
            Relation::AtLeast => value >= bound,
            Relation::Above => value > bound,
        }
    }
}

/// One check on one sampled instance. Rows with `required = false` are
/// informational: a statistical criterion aggregates them in its own row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub suite: Suite,
    pub instance: usize,
    pub check: String,
    #[serde(with = "crate::json::sig12")]
    pub value: f64,
    pub relation: Relation,
    #[serde(with = "crate::json::sig12")]
    pub bound: f64,
    pub required: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub rows: Vec<Row>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

struct Rows {
    suite: Suite,
    rows: Vec<Row>,
}

impl Rows {
    fn new(suite: Suite) -> Self {
        Self { suite, rows: Vec::new() }
    }

    fn push(&mut self, instance: usize, check: &str, value: f64, relation: Relation, bound: f64) {
        self.push_row(instance, check, value, relation, bound, true);
    }

    fn push_row(&mut self, instance: usize, check: &str, value: f64, relation: Relation, bound: f64, required: bool) {
        self.rows.push(Row {
            suite: self.suite,
            instance,
            check: check.to_string(),
            value,
            relation,
            bound,
            required,
            // NaN fails every relation
            pass: relation.holds(value, bound),
        });
    }

    /// Boolean check recorded as 1/0 against `>= 1`.
    fn flag(&mut self, instance: usize, check: &str, ok: bool) {
        self.push(instance, check, f64::from(u8::from(ok)), Relation::AtLeast, 1.0);
    }

    fn finish(self, seed: u64) -> SuiteReport {
        let failed = self.rows.iter().filter(|r| r.required && !r.pass).count();
        let passed = self.rows.iter().filter(|r| r.required && r.pass).count();
        SuiteReport {
            suite: self.suite,
            seed,
            passed,
            failed,
            rows: self.rows,
        }
    }
}

pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<SuiteReport, SuiteError> {
    let n = opts.ensemble.unwrap_or_else(|| suite.default_ensemble());
    let rows = match suite {
        Suite::Thm4 => thm4(n, opts)?,
        Suite::Thm5 => thm5(n, opts)?,
        Suite::Thm6 => thm6(n, opts)?,
        Suite::Lemma1 => lemma1(n, opts)?,
        Suite::Isomorphism => isomorphism(n, opts)?,
        Suite::SeScaling => se_scaling(n, opts)?,
        Suite::Privacy => privacy(n, opts)?,
    };
    Ok(rows.finish(opts.seed))
}

/// Side-ensemble size: `default_side` at the default main size, scaled with it.
fn side(n: usize, suite: Suite, default_side: usize) -> usize {
    (n * default_side).div_ceil(suite.default_ensemble()).max(1)
}

/// Substream for instance `i` of part `part` of a suite.
fn rng_for(opts: &SuiteOptions, suite: Suite, part: u64, i: usize) -> SimRng {
    let tag = Suite::ALL.iter().position(|&s| s == suite).unwrap_or(0) as u64;
    stream_rng(opts.seed, (tag << 40) | (part << 32) | i as u64)
}

fn par_rows<F>(count: usize, f: F) -> Result<Vec<Vec<(String, f64, Relation, f64, bool)>>, SuiteError>
where
    F: Fn(usize) -> Result<Vec<(String, f64, Relation, f64, bool)>, SuiteError> + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}

fn extend(rows: &mut Rows, offset: usize, batch: Vec<Vec<(String, f64, Relation, f64, bool)>>) {
    for (i, checks) in batch.into_iter().enumerate() {
        for (check, value, rel, bound, required) in checks {
            rows.push_row(offset + i, &check, value, rel, bound, required);
        }
    }
}

fn random_product_basis(dims: &[usize], rng: &mut SimRng) -> Basis {
    Basis::new(dims.iter().map(|&d| random::haar_unitary(d, rng)).collect()).expect("Haar matrices are unitary")
}

fn check(name: &str, value: f64, rel: Relation, bound: f64) -> (String, f64, Relation, f64, bool) {
    (name.to_string(), value, rel, bound, true)
}

fn info(name: &str, value: f64, rel: Relation, bound: f64) -> (String, f64, Relation, f64, bool) {
    (name.to_string(), value, rel, bound, false)
}

/// Both routes to the net coherence and their gap.
fn net_routes(rho: &State, basis: &Basis) -> Result<(f64, f64), SuiteError> {
    let cut = Bipartition::pair();
    let net = rec_net(rho, basis, &cut)?;
    let via_mi = mutual_information(rho, &cut)? - mutual_information(&dephase_all(rho, basis)?, &cut)?;
    Ok((net, (net - via_mi).abs()))
}

fn thm4(n: usize, opts: &SuiteOptions) -> Result<Rows, SuiteError> {
    let suite = Suite::Thm4;
    let tol = opts.tolerance;
    let mut rows = Rows::new(suite);
    let mut offset = 0;

    // golden values of the two task inputs and the mixture exhibit
    let z2 = Basis::computational(&[2, 2]);
    let cut = Bipartition::pair();
    let goldens = [
        (Task::Product, 2.0, [1.0, 1.0], 0.0),
        (Task::Correlated, 1.0, [0.0, 0.0], 1.0),
    ];
    for (task, global, local, net) in goldens {
        let rho = control_input_state(task);
        let r = crate::coherence::net_global_coherence(&rho, &z2, &cut)?;
        let tag = format!("task{}", task.number());
        rows.push(offset, &format!("{tag}-rec-global"), (r.rec_global - global).abs(), Relation::AtMost, tol);
        rows.push(offset, &format!("{tag}-rec-local-a"), (r.rec_local[0] - local[0]).abs(), Relation::AtMost, tol);
        rows.push(offset, &format!("{tag}-rec-local-b"), (r.rec_local[1] - local[1]).abs(), Relation::AtMost, tol);
        rows.push(offset, &format!("{tag}-rec-net"), (r.rec_net - net).abs(), Relation::AtMost, tol);
        offset += 1;
    }
    let pp = State::pure(&ket(&[0.5, 0.5, 0.5, 0.5]), vec![2, 2])?;
    let mm = State::pure(&ket(&[0.5, -0.5, -0.5, 0.5]), vec![2, 2])?;
    let mix = State::new((pp.matrix() + mm.matrix()).scale_real(0.5), vec![2, 2])?;
    for (name, state) in [("plus-plus", &pp), ("minus-minus", &mm)] {
        rows.push(offset, &format!("{name}-rec-net"), rec_net(state, &z2, &cut)?.abs(), Relation::AtMost, tol);
    }
    rows.push(offset, "mixture-rec-net", (rec_net(&mix, &z2, &cut)? - 1.0).abs(), Relation::AtMost, tol);
    offset += 1;

    // random states in random product bases: both routes agree, net is non-negative
    for (part, dims, count) in [(0u64, [2usize, 2], n), (1, [2, 4], side(n, suite, 100))] {
        let batch = par_rows(count, |i| {
            let mut rng = rng_for(opts, suite, part, i);
            let rho = random::hilbert_schmidt_state(&dims, &mut rng);
            let basis = random_product_basis(&dims, &mut rng);
            let (net, gap) = net_routes(&rho, &basis)?;
            let tag = format!("{}x{}", dims[0], dims[1]);
            Ok(vec![
                check(&format!("{tag}-routes-gap"), gap, Relation::AtMost, tol),
                check(&format!("{tag}-rec-net-nonneg"), net, Relation::AtLeast, -tol),
            ])
        })?;
        extend(&mut rows, offset, batch);
        offset += count;
    }

    // equality cases: products in random product bases, diagonal states in the
    // computational basis
    let k = side(n, suite, 200);
    let batch = par_rows(k, |i| {
        let mut rng = rng_for(opts, suite, 2, i);
        let da = 2 + i % 2;
        let db = 2 + (i / 2) % 3;
        let rho = random::hilbert_schmidt_state(&[da], &mut rng).tensor(&random::hilbert_schmidt_state(&[db], &mut rng));
        let basis = random_product_basis(&[da, db], &mut rng);
        let (net, _) = net_routes(&rho, &basis)?;
        Ok(vec![check("product-rec-net-zero", net.abs(), Relation::AtMost, tol)])
    })?;
    extend(&mut rows, offset, batch);
    offset += k;
    let batch = par_rows(k, |i| {
        let mut rng = rng_for(opts, suite, 3, i);
        let da = 2 + i % 2;
        let db = 2 + (i / 2) % 3;
        let rho = State::diagonal(&random::probability_vector(da * db, &mut rng), vec![da, db])?;
        let (net, _) = net_routes(&rho, &Basis::computational(&[da, db]))?;
        Ok(vec![check("diagonal-cc-rec-net-zero", net.abs(), Relation::AtMost, tol)])
    })?;
    extend(&mut rows, offset, batch);
    Ok(rows)
}

fn thm5(n: usize, opts: &SuiteOptions) -> Result<Rows, SuiteError> {
    const BASES: usize = 20;
    let suite = Suite::Thm5;
    let tol = opts.tolerance;
    let mut rows = Rows::new(suite);

    let batch = par_rows(n, |i| {
        let mut rng = rng_for(opts, suite, 0, i);
        let rho = random::pure_state(&[2, 2], &mut rng);
        let ent = von_neumann_entropy(&rho.partial_trace(&[0])?)?;
        let mut min_net = f64::INFINITY;
        for _ in 0..BASES {
            let basis = random_product_basis(&[2, 2], &mut rng);
            min_net = min_net.min(rec_net(&rho, &basis, &Bipartition::pair())?);
        }
        // positive net coherence in every basis exactly when entangled
        let entangled = ent > 1e-6;
        let positive = min_net > 1e-6;
        Ok(vec![
            info("entanglement-entropy", ent, Relation::AtLeast, 0.0),
            info("min-rec-net", min_net, Relation::AtLeast, -tol),
            check("positive-iff-entangled", f64::from(u8::from(entangled == positive)), Relation::AtLeast, 1.0),
        ])
    })?;
    extend(&mut rows, 0, batch);

    let k = side(n, suite, 100);
    let batch = par_rows(k, |i| {
        let mut rng = rng_for(opts, suite, 1, i);
        let psi = random::pure_state(&[2], &mut rng).tensor(&random::pure_state(&[2], &mut rng));
        let mut max_net = 0.0f64;
        for _ in 0..BASES {
            let basis = random_product_basis(&[2, 2], &mut rng);
            max_net = max_net.max(rec_net(&psi, &basis, &Bipartition::pair())?.abs());
        }
        Ok(vec![check("product-pure-rec-net-zero", max_net, Relation::AtMost, tol)])
    })?;
    extend(&mut rows, n, batch);
    Ok(rows)
}

fn thm6(n: usize, opts: &SuiteOptions) -> Result<Rows, SuiteError> {
    const BASES: usize = 50;
    let suite = Suite::Thm6;
    let mut rows = Rows::new(suite);
    let copts = ClassifyOptions::default();

    // rotated classical-classical states: some product basis has zero net coherence
    let batch = par_rows(n, |i| {
        let mut rng = rng_for(opts, suite, 0, i);
        let p = random::probability_vector(4, &mut rng);
        let joint = vec![p[..2].to_vec(), p[2..].to_vec()];
        let ua = random::haar_unitary(2, &mut rng);
        let ub = random::haar_unitary(2, &mut rng);
        let rho = cc_state(&joint, &ua, &ub)?;
        let search = cc_search(&rho, &copts)?;
        let net = match &search.witness {
            Some(basis) => rec_net(&rho, basis, &Bipartition::pair())?,
            None => f64::INFINITY,
        };
        Ok(vec![check("cc-recovered-rec-net", net, Relation::AtMost, 1e-6)])
    })?;
    extend(&mut rows, 0, batch);

    // discordant states: positive net coherence in every sampled basis
    let k = side(n, suite, 200);
    let batch = par_rows(k, |i| {
        let mut rng = rng_for(opts, suite, 1, i);
        let (rho, discord) = loop {
            let rho = random::hilbert_schmidt_state(&[2, 2], &mut rng);
            let d = minimize_discord(&rho, Direction::AToB)?.value;
            if d > 1e-4 {
                break (rho, d);
            }
        };
        let mut min_net = f64::INFINITY;
        for _ in 0..BASES {
            let basis = random_product_basis(&[2, 2], &mut rng);
            min_net = min_net.min(rec_net(&rho, &basis, &Bipartition::pair())?);
        }
        Ok(vec![
            info("discord-a-to-b", discord, Relation::Above, 1e-4),
            check("discordant-min-rec-net", min_net, Relation::Above, 1e-6),
        ])
    })?;
    extend(&mut rows, n, batch);
    Ok(rows)
}

/// `{|0⟩⟨+|, |1⟩⟨−|}`: incoherent, not strict.
pub fn plus_minus_channel() -> Channel {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = |x: f64| Complex64::new(x, 0.0);
    let f0 = Matrix::from_rows(&[vec![c(h), c(h)], vec![c(0.0), c(0.0)]]).expect("2x2");
    let f1 = Matrix::from_rows(&[vec![c(0.0), c(0.0)], vec![c(h), c(-h)]]).expect("2x2");
    Channel::new(vec![f0, f1]).expect("complete")
}

/// Normalized discrete Fourier transform.
pub fn fourier(d: usize) -> Matrix {
    let s = 1.0 / (d as f64).sqrt();
    DenseComplexMatrix::from_fn(d, |j, k| {
        Complex64::from_polar(s, std::f64::consts::TAU * (j * k) as f64 / d as f64)
    })
}

/// A random channel of one of four families, chosen by `i`.
fn random_channel(i: usize, rng: &mut SimRng) -> Result<Channel, SuiteError> {
    use rand::Rng;
    let d = 2 + i % 3;
    let count = rng.gen_range(1..=3);
    let kraus = match i % 4 {
        0 => random::incoherent_kraus(d, count, true, rng),
        1 => random::incoherent_kraus(d, count, false, rng),
        2 => vec![random::haar_unitary(d, rng)],
        _ => {
            let p = random::probability_vector(count, rng);
            p.iter().map(|&w| random::haar_unitary(d, rng).scale_real(w.sqrt())).collect()
        }
    };
    Ok(Channel::new(kraus)?)
}

fn lemma1(n: usize, opts: &SuiteOptions) -> Result<Rows, SuiteError> {
    let suite = Suite::Lemma1;
    let mut rows = Rows::new(suite);

    let z1 = Basis::computational(&[2]);
    let z3 = Basis::computational(&[3]);
    let z22 = Basis::computational(&[2, 2]);
    rows.flag(0, "not-strict", is_strict_incoherent(&Channel::permutation(&[1, 0], &z1)?, &z1)?.is_ok());
    rows.flag(0, "cycle3-strict", is_strict_incoherent(&Channel::permutation(&[1, 2, 0], &z3)?, &z3)?.is_ok());
    rows.flag(0, "swap-strict", is_strict_incoherent(&Channel::permutation(&[0, 2, 1, 3], &z22)?, &z22)?.is_ok());
    rows.flag(0, "dephasing-strict", is_strict_incoherent(&Channel::dephasing(&z22), &z22)?.is_ok());
    let had = Channel::unitary(pauli::h())?;
    rows.flag(0, "hadamard-not-strict", is_strict_incoherent(&had, &z1)?.is_err());
    rows.flag(0, "hadamard-not-incoherent", is_incoherent(&had, &z1)?.is_err());
    let pm = plus_minus_channel();
    rows.flag(0, "plus-minus-incoherent", is_incoherent(&pm, &z1)?.is_ok());
    rows.flag(0, "plus-minus-not-strict", is_strict_incoherent(&pm, &z1)?.is_err());

    // agreement of the two strictness tests; a disagreement surfaces as an error
    let batch = par_rows(n, |i| {
        let mut rng = rng_for(opts, suite, 0, i);
        let ch = random_channel(i, &mut rng)?;
        let basis = Basis::computational(&[ch.dim()]);
        let agree = match is_strict_incoherent(&ch, &basis) {
            Ok(_) => true,
            Err(ChannelError::StrictnessDisagreement { .. }) => false,
            Err(e) => return Err(e.into()),
        };
        let mut out = vec![check("strictness-tests-agree", f64::from(u8::from(agree)), Relation::AtLeast, 1.0)];
        if i % 4 == 0 {
            let strict = is_strict_incoherent(&ch, &basis)?.is_ok();
            out.push(check("permutation-kraus-strict", f64::from(u8::from(strict)), Relation::AtLeast, 1.0));
        }
        if i % 4 == 1 {
            let inc = is_incoherent(&ch, &basis)?.is_ok();
            out.push(check("map-kraus-incoherent", f64::from(u8::from(inc)), Relation::AtLeast, 1.0));
        }
        Ok(out)
    })?;
    extend(&mut rows, 1, batch);
    Ok(rows)
}

/// Largest entrywise gap between two channels over all matrix units.
fn map_distance(a: &Channel, b: &Channel) -> f64 {
    let d = a.dim();
    let mut worst = 0.0f64;
    for k in 0..d {
        for l in 0..d {
            let e = Matrix::unit(d, k, l);
            worst = worst.max(a.apply_operator(&e).max_abs_diff(&b.apply_operator(&e)));
        }
    }
    worst
}

fn isomorphism(n: usize, opts: &SuiteOptions) -> Result<Rows, SuiteError> {
    let suite = Suite::Isomorphism;
    let mut rows = Rows::new(suite);

    let batch = par_rows(n, |i| {
        let mut rng = rng_for(opts, suite, 0, i);
        let d = 2 + i % 7;
        let g = StochasticMatrix::new(random::stochastic_entries(d, &mut rng))?;
        let basis = if i % 2 == 0 {
            Basis::computational(&[d])
        } else {
            random_product_basis(&[d], &mut rng)
        };
        let ch = embed_classical(&g, &basis)?;
        let back = extract_classical(&ch, &basis)?;
        let p = ClassicalState::new(random::probability_vector(d, &mut rng))?;
        let out = apply_channel(&ch, &p.to_state(&basis)?)?;
        let expected = g.apply(&p).to_state(&basis)?;
        Ok(vec![
            check("extract-embed-identity", back.max_abs_diff(&g), Relation::AtMost, 1e-10),
            check("embedded-action", out.matrix().max_abs_diff(expected.matrix()), Relation::AtMost, 1e-10),
        ])
    })?;
    extend(&mut rows, 0, batch);

    // Δ ∘ inner ∘ Δ is strict and equals its Kraus construction
    let k = side(n, suite, 100);
    let batch = par_rows(k, |i| {
        let mut rng = rng_for(opts, suite, 1, i);
        let inner = match i % 4 {
            0 => Channel::unitary(if i % 8 == 0 { pauli::h() } else { pauli::h::<f64>().kron(&pauli::h()) })?,
            1 => Channel::unitary(fourier(2 + i % 5))?,
            2 => Channel::unitary(random::haar_unitary(2 + i % 3, &mut rng))?,
            _ => random_channel(i / 4, &mut rng)?,
        };
        let basis = Basis::computational(&[inner.dim()]);
        let sandwich = sandwich_dephase(&inner, &basis)?;
        let strict = is_strict_incoherent(&sandwich, &basis)?.is_ok();
        let deph = Channel::dephasing(&basis);
        let composed = deph.after(&inner)?.after(&deph)?;
        Ok(vec![
            check("sandwich-strict", f64::from(u8::from(strict)), Relation::AtLeast, 1.0),
            check("sandwich-matches-composition", map_distance(&sandwich, &composed), Relation::AtMost, 1e-10),
        ])
    })?;
    extend(&mut rows, n, batch);
    Ok(rows)
}

fn network_unitary(qubits: usize, rng: &mut SimRng) -> Result<(GateNetwork, Matrix), SuiteError> {
    let net = random::gate_network(qubits, 8 * qubits, rng);
    let u = crate::linalg::compile_gate_network(&net)?;
    Ok((net, u))
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn se_scaling(n: usize, opts: &SuiteOptions) -> Result<Rows, SuiteError> {
    const SHOTS: u64 = 100_000;
    let suite = Suite::SeScaling;
    let mut rows = Rows::new(suite);

    // correctness: estimates within 4 empirical SE in at least 95 % of trials
    let batch = par_rows(n, |i| {
        let mut rng = rng_for(opts, suite, 0, i);
        let (_, ua) = network_unitary(3, &mut rng)?;
        let (_, ub) = network_unitary(3, &mut rng)?;
        let task = if i % 2 == 0 { Task::Correlated } else { Task::Product };
        let r = sample_run(task, &ua, &ub, SHOTS, opts.seed.wrapping_add(i as u64))?;
        let se = r.se_empirical.unwrap_or(f64::INFINITY);
        let z = (r.iota_est - r.iota_exact).norm() / se;
        // joint control correlator of the full register against the trace product
        let full = full_output_state(task, &ua, &ub)?.partial_trace(&[0, 2])?;
        let identity_gap = (joint_raising_expectation(&full) - exact_iota(&ua, &ub)?).norm();
        Ok(vec![
            info("error-over-se", z, Relation::AtMost, 4.0),
            check("joint-correlator-identity", identity_gap, Relation::AtMost, 1e-9),
        ])
    })?;
    let within = batch.iter().filter(|c| c[0].1 <= 4.0).count();
    extend(&mut rows, 0, batch);
    let need = (n * 95).div_ceil(100);
    rows.push(n, "trials-within-4se", within as f64, Relation::AtLeast, need as f64);

    // precision law on the correlated task
    let trials = side(n, suite, 20);
    let grid = [1_000u64, 10_000, 100_000];
    let per_trial = par_rows(trials, |i| {
        let mut rng = rng_for(opts, suite, 1, i);
        let (_, ua) = network_unitary(3, &mut rng)?;
        let (_, ub) = network_unitary(3, &mut rng)?;
        let mut out = Vec::new();
        for (g, &m) in grid.iter().enumerate() {
            let r = sample_run(Task::Correlated, &ua, &ub, m, opts.seed.wrapping_add((i * grid.len() + g) as u64) ^ 0x5e)?;
            let emp = r.se_empirical.unwrap_or(f64::NAN);
            let pred = r.se_predicted;
            out.push(info(&format!("se-empirical-m{m}"), emp, Relation::Above, 0.0));
            out.push(check(&format!("se-ratio-m{m}"), (emp / pred).max(pred / emp), Relation::AtMost, 3.0));
        }
        Ok(out)
    })?;
    let mean_se: Vec<f64> = (0..grid.len())
        .map(|g| per_trial.iter().map(|c| c[2 * g].1).sum::<f64>() / trials as f64)
        .collect();
    extend(&mut rows, n + 1, per_trial);
    let xs: Vec<f64> = grid.iter().map(|&m| (m as f64).log10()).collect();
    let ys: Vec<f64> = mean_se.iter().map(|s| s.log10()).collect();
    let b = slope(&xs, &ys);
    rows.push(n + 1 + trials, "log-log-slope-offset", (b + 0.5).abs(), Relation::AtMost, 0.1);

    // coherence of the registers is unchanged by the controlled unitaries
    let pairs = n;
    let batch = par_rows(pairs, |i| {
        let mut rng = rng_for(opts, suite, 2, i);
        let da = 2 << (i % 2);
        let db = 2 << ((i / 2) % 2);
        let ua = random::haar_unitary(da, &mut rng);
        let ub = random::haar_unitary(db, &mut rng);
        let basis = eigenbasis_construction(&ua, &ub)?;
        let mut out = Vec::new();
        for task in [Task::Product, Task::Correlated] {
            let before = register_coherence(&full_input_state(task, da, db), &basis)?;
            let after = register_coherence(&full_output_state(task, &ua, &ub)?, &basis)?;
            let gap = (before.global - after.global)
                .abs()
                .max((before.local_a - after.local_a).abs())
                .max((before.local_b - after.local_b).abs());
            out.push(check(&format!("task{}-rec-invariance", task.number()), gap, Relation::AtMost, opts.tolerance));
        }
        Ok(out)
    })?;
    extend(&mut rows, n + 2 + trials, batch);
    Ok(rows)
}

fn privacy(n: usize, opts: &SuiteOptions) -> Result<Rows, SuiteError> {
    use rand::Rng;
    const SHOTS: u64 = 10_000;
    let suite = Suite::Privacy;
    let mut rows = Rows::new(suite);

    // correlated task: no marginal information at either server
    let k = side(n, suite, 50);
    let batch = par_rows(k, |i| {
        let mut rng = rng_for(opts, suite, 0, i);
        let (na, _) = network_unitary(2, &mut rng)?;
        let (nb, _) = network_unitary(2, &mut rng)?;
        let run = run_protocol(Task::Correlated, (na.into(), nb.into()), SHOTS, opts.seed.wrapping_add(i as u64))?;
        let worst = match privacy_audit(std::slice::from_ref(&run)) {
            AuditVerdict::Private { marginals } | AuditVerdict::Leaks { marginals, .. } => marginals
                .iter()
                .map(|m| m.mean.abs() / m.threshold)
                .fold(0.0, f64::max),
            AuditVerdict::InsufficientData => f64::INFINITY,
        };
        Ok(vec![check("task2-marginal-over-threshold", worst, Relation::AtMost, 1.0)])
    })?;
    extend(&mut rows, 0, batch);

    // product task with a large normalized trace on Alice's side: leak detected
    let batch = par_rows(k, |i| {
        let mut rng = rng_for(opts, suite, 1, i);
        let (na, t) = loop {
            let (na, ua) = network_unitary(2, &mut rng)?;
            let t = ndqc2::normalized_trace(&ua)?.norm();
            if t >= 0.5 {
                break (na, t);
            }
        };
        let (nb, _) = network_unitary(2, &mut rng)?;
        let run = run_protocol(Task::Product, (na.into(), nb.into()), SHOTS, opts.seed.wrapping_add(i as u64))?;
        let detected = match privacy_audit(std::slice::from_ref(&run)) {
            AuditVerdict::Leaks { leaks, .. } => leaks.iter().any(|m| m.party == ndqc2::Party::Alice),
            _ => false,
        };
        Ok(vec![
            info("task1-alice-trace-modulus", t, Relation::AtLeast, 0.5),
            check("task1-leak-detected", f64::from(u8::from(detected)), Relation::AtLeast, 1.0),
        ])
    })?;
    extend(&mut rows, k, batch);

    // transcripts of randomized honest runs follow the routing rules
    let batch = par_rows(n, |i| {
        let mut rng = rng_for(opts, suite, 2, i);
        let task = if rng.gen::<bool>() { Task::Product } else { Task::Correlated };
        let qa = rng.gen_range(1..=3);
        let qb = rng.gen_range(1..=3);
        let spec = |q: usize, rng: &mut SimRng| -> UnitarySpec {
            if rng.gen::<bool>() {
                random::gate_network(q, 8, rng).into()
            } else {
                UnitarySpec::Matrix(random::haar_unitary(1 << q, rng))
            }
        };
        let specs = (spec(qa, &mut rng), spec(qb, &mut rng));
        let shots = rng.gen_range(4..=256);
        let run = run_protocol(task, specs, shots, rng.gen())?;
        let t = &run.transcript;
        Ok(vec![
            check("server-to-server-messages", t.server_to_server_count() as f64, Relation::AtMost, 0.0),
            check("server-sent-states", t.server_state_count() as f64, Relation::AtMost, 0.0),
            check("rule-violations", f64::from(u8::from(t.violation().is_some())), Relation::AtMost, 0.0),
        ])
    })?;
    extend(&mut rows, 2 * k, batch);

    let mut idx = 2 * k + n;
    for inj in [
        Injection::ServerToServer,
        Injection::ServerSendsState,
        Injection::ServerPrepares,
        Injection::ClientAppliesUnitary,
        Injection::PureAncillas,
    ] {
        for task in [Task::Product, Task::Correlated] {
            let popts = ProtocolOptions {
                injection: Some(inj),
                ..ProtocolOptions::default()
            };
            let id = || UnitarySpec::Network(GateNetwork::empty(1));
            let rejected = matches!(
                run_protocol_with(task, (id(), id()), 64, opts.seed, &popts),
                Err(ProtocolError::Violation { .. })
            );
            let name = serde_json::to_value(inj).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
            rows.flag(idx, &format!("task{}-{name}-rejected", task.number()), rejected);
            idx += 1;
        }
    }
    Ok(rows)
}
