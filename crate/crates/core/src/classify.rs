//! Membership tests for the correlation hierarchy of bipartite states:
//! product, classical-classical, one-way quantum-classical, separable.
//!
//! Zero discord is decided by thresholding the optimizer's minimum, since
//! the minimizer floor sits around 1e-9 bits and generic discordant states
//! sit well above 1e-3.

use serde::{Deserialize, Serialize};

use crate::coherence::{
    minimize_discord_with, rec_net, Bipartition, CoherenceError, Direction, DiscordMinimum, DiscordOptions,
};
use crate::linalg::{hermitian_eig, hermitian_eigenvalues, DensityMatrix};
use crate::{Basis, Matrix, State};

#[derive(Debug, thiserror::Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Coherence(#[from] CoherenceError),
    #[error("PPT decides separability only for 2x2 and 2x3 systems, got {0:?}")]
    UnsupportedDims(Vec<usize>),
}

impl From<crate::linalg::LinalgError> for ClassifyError {
    fn from(e: crate::linalg::LinalgError) -> Self {
        ClassifyError::Coherence(e.into())
    }
}

#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    /// Discords at or below this many bits count as zero.
    pub discord_threshold: f64,
    /// Max off-diagonal modulus allowed for a CC witness basis.
    pub diagonal_tol: f64,
    /// `‖ρ − ρ_A ⊗ ρ_B‖_max` bound for product states.
    pub product_tol: f64,
    pub discord: DiscordOptions,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            discord_threshold: 1e-6,
            diagonal_tol: 1e-7,
            product_tol: 1e-9,
            discord: DiscordOptions::default(),
        }
    }
}

fn require_bipartite(rho: &State) -> Result<(), ClassifyError> {
    if rho.subsystem_count() != 2 {
        return Err(CoherenceError::NotBipartite(rho.subsystem_count()).into());
    }
    Ok(())
}

/// Regroups the state into the two sides of `cut`.
fn as_bipartite(rho: &State, cut: &Bipartition) -> Result<State, ClassifyError> {
    cut.validate(rho.subsystem_count())?;
    let order: Vec<usize> = cut.a.iter().chain(&cut.b).copied().collect();
    let permuted = rho.permute_subsystems(&order)?;
    let da: usize = cut.a.iter().map(|&k| rho.dims()[k]).product();
    let db: usize = cut.b.iter().map(|&k| rho.dims()[k]).product();
    Ok(permuted.with_dims(vec![da, db])?)
}

/// `‖ρ − ρ_A ⊗ ρ_B‖_max`.
pub fn product_distance(rho: &State, cut: &Bipartition) -> Result<f64, ClassifyError> {
    let r = as_bipartite(rho, cut)?;
    let prod = r.partial_trace(&[0])?.tensor(&r.partial_trace(&[1])?);
    Ok(r.matrix().max_abs_diff(prod.matrix()))
}

pub fn is_product(rho: &State, cut: &Bipartition) -> Result<bool, ClassifyError> {
    Ok(product_distance(rho, cut)? <= ClassifyOptions::default().product_tol)
}

/// Outcome of the CC search: both directional minima and, on success, a
/// product basis diagonalizing the state.
#[derive(Clone, Debug)]
pub struct CcSearch {
    pub a_to_b: DiscordMinimum,
    pub b_to_a: DiscordMinimum,
    pub witness: Option<Basis>,
}

impl CcSearch {
    pub fn is_cc(&self) -> bool {
        self.witness.is_some()
    }
}

/// Searches for a product basis in which `ρ` is diagonal.
///
/// The candidate local bases on each side are the measured basis from that
/// side's discord minimum and the eigenbasis of its marginal; the first
/// combination diagonalizing `ρ` is the witness. Tying both candidates in
/// matters when a side's optimal measurement is not unique (a pure marginal
/// leaves every basis optimal, for instance).
pub fn cc_search(rho: &State, opts: &ClassifyOptions) -> Result<CcSearch, ClassifyError> {
    require_bipartite(rho)?;
    let a_to_b = minimize_discord_with(rho, Direction::AToB, &opts.discord)?;
    let b_to_a = minimize_discord_with(rho, Direction::BToA, &opts.discord)?;
    let mut witness = None;
    if a_to_b.value <= opts.discord_threshold && b_to_a.value <= opts.discord_threshold {
        let eig_a = hermitian_eig(rho.partial_trace(&[0])?.matrix())?.vectors;
        let eig_b = hermitian_eig(rho.partial_trace(&[1])?.matrix())?.vectors;
        let cand_a = [a_to_b.basis.local(0).clone(), eig_a];
        let cand_b = [b_to_a.basis.local(1).clone(), eig_b];
        'search: for ua in &cand_a {
            for ub in &cand_b {
                let b = Basis::new(vec![ua.clone(), ub.clone()])?;
                if b.diagonalizes(rho, opts.diagonal_tol) {
                    witness = Some(b);
                    break 'search;
                }
            }
        }
    }
    Ok(CcSearch { a_to_b, b_to_a, witness })
}

/// Classical-classical test with its witness basis.
pub fn is_cc(rho: &State) -> Result<(bool, Option<Basis>), ClassifyError> {
    let s = cc_search(rho, &ClassifyOptions::default())?;
    Ok((s.is_cc(), s.witness))
}

/// Zero discord in `direction`, i.e. quantum-classical with the measured side
/// classical.
pub fn is_one_way_qc(rho: &State, direction: Direction) -> Result<bool, ClassifyError> {
    let opts = ClassifyOptions::default();
    require_bipartite(rho)?;
    Ok(minimize_discord_with(rho, direction, &opts.discord)?.value <= opts.discord_threshold)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PptResult {
    pub is_ppt: bool,
    #[serde(with = "crate::json::sig12")]
    pub min_eigenvalue: f64,
}

const PPT_TOL: f64 = 1e-9;

fn ppt_unchecked(rho: &State) -> Result<PptResult, ClassifyError> {
    let pt = rho.partial_transpose(1)?;
    let min = hermitian_eigenvalues(&pt)?.into_iter().fold(f64::INFINITY, f64::min);
    Ok(PptResult {
        is_ppt: min >= -PPT_TOL,
        min_eigenvalue: min,
    })
}

fn ppt_decides(dims: &[usize]) -> bool {
    matches!(dims, [2, 2] | [2, 3] | [3, 2])
}

/// Peres–Horodecki test; at 2×2 and 2×3 a positive partial transpose is
/// equivalent to separability.
pub fn ppt_separability(rho: &State) -> Result<PptResult, ClassifyError> {
    if !ppt_decides(rho.dims()) {
        return Err(ClassifyError::UnsupportedDims(rho.dims().to_vec()));
    }
    ppt_unchecked(rho)
}

/// Every predicate at once, plus net coherence in a reference basis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrelationVerdict {
    pub is_product: bool,
    pub is_cc: bool,
    pub is_qc_a_to_b: bool,
    pub is_qc_b_to_a: bool,
    pub is_ppt: bool,
    /// Whether `is_ppt` is also a separability verdict (2×2 and 2×3 only).
    pub separability_decided: bool,
    /// `Some(true)` for any NPT state, `Some(false)` for PPT states where the
    /// test is decisive, `None` otherwise.
    pub entangled: Option<bool>,
    #[serde(with = "crate::json::sig12")]
    pub ppt_min_eigenvalue: f64,
    #[serde(with = "crate::json::sig12")]
    pub discord_a_to_b: f64,
    #[serde(with = "crate::json::sig12")]
    pub discord_b_to_a: f64,
    #[serde(with = "crate::json::sig12")]
    pub rec_net_in_basis: f64,
    /// `rec_net_in_basis` above the discord threshold.
    pub quantum_correlated: bool,
    pub witness_basis: Option<Basis>,
}

pub fn classify(rho: &State, basis: &Basis) -> Result<CorrelationVerdict, ClassifyError> {
    classify_with(rho, basis, &ClassifyOptions::default())
}

pub fn classify_with(rho: &State, basis: &Basis, opts: &ClassifyOptions) -> Result<CorrelationVerdict, ClassifyError> {
    require_bipartite(rho)?;
    let cut = Bipartition::pair();
    let net = rec_net(rho, basis, &cut)?;
    let search = cc_search(rho, opts)?;
    let ppt = ppt_unchecked(rho)?;
    Ok(CorrelationVerdict {
        is_product: product_distance(rho, &cut)? <= opts.product_tol,
        is_cc: search.is_cc(),
        is_qc_a_to_b: search.a_to_b.value <= opts.discord_threshold,
        is_qc_b_to_a: search.b_to_a.value <= opts.discord_threshold,
        is_ppt: ppt.is_ppt,
        separability_decided: ppt_decides(rho.dims()),
        entangled: match (ppt.is_ppt, ppt_decides(rho.dims())) {
            (false, _) => Some(true),
            (true, true) => Some(false),
            (true, false) => None,
        },
        ppt_min_eigenvalue: ppt.min_eigenvalue,
        discord_a_to_b: search.a_to_b.value,
        discord_b_to_a: search.b_to_a.value,
        rec_net_in_basis: net,
        quantum_correlated: net > opts.discord_threshold,
        witness_basis: search.witness,
    })
}

/// `Σ p_ij |a_i⟩⟨a_i| ⊗ |b_j⟩⟨b_j|` for local bases `ua`, `ub` (columns).
pub fn cc_state(p: &[Vec<f64>], ua: &Matrix, ub: &Matrix) -> Result<State, ClassifyError> {
    let (da, db) = (ua.dim(), ub.dim());
    let diag: Vec<f64> = (0..da).flat_map(|i| (0..db).map(move |j| (i, j))).map(|(i, j)| p[i][j]).collect();
    let d = DensityMatrix::diagonal(&diag, vec![da, db])?;
    let basis = Basis::new(vec![ua.clone(), ub.clone()])?;
    Ok(DensityMatrix::new(basis.from_basis(d.matrix()), vec![da, db])?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherence::{basis_dependent_discord, net_global_coherence, rec};
    use crate::linalg::ket;
    use crate::random::{self, stream_rng};

    fn bell() -> State {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        State::pure(&ket(&[s, 0.0, 0.0, s]), vec![2, 2]).unwrap()
    }

    fn correlated_control() -> State {
        // ½(|++⟩⟨++| + |−−⟩⟨−−|)
        let h = Basis::hadamard(2);
        let d = DensityMatrix::diagonal(&[0.5, 0.0, 0.0, 0.5], vec![2, 2]).unwrap();
        State::new(h.from_basis(d.matrix()), vec![2, 2]).unwrap()
    }

    fn plus_plus() -> State {
        State::pure(&ket(&[0.5, 0.5, 0.5, 0.5]), vec![2, 2]).unwrap()
    }

    fn werner(p: f64) -> State {
        let m = &bell().matrix().scale_real(p) + &Matrix::identity(4).scale_real((1.0 - p) / 4.0);
        State::new(m, vec![2, 2]).unwrap()
    }

    fn one_way_state() -> State {
        // ½|0⟩⟨0| ⊗ |0⟩⟨0| + ½|1⟩⟨1| ⊗ |+⟩⟨+|
        let zero = DensityMatrix::diagonal(&[1.0, 0.0], vec![2]).unwrap();
        let one = DensityMatrix::diagonal(&[0.0, 1.0], vec![2]).unwrap();
        let plus = State::pure(&ket(&[0.5f64.sqrt(), 0.5f64.sqrt()]), vec![2]).unwrap();
        let m = &zero.tensor(&zero).matrix().scale_real(0.5) + &one.tensor(&plus).matrix().scale_real(0.5);
        State::new(m, vec![2, 2]).unwrap()
    }

    #[test]
    fn product_examples() {
        let mut rng = stream_rng(1, 0);
        let a = random::hilbert_schmidt_state(&[2], &mut rng);
        let b = random::hilbert_schmidt_state(&[3], &mut rng);
        assert!(is_product(&a.tensor(&b), &Bipartition::pair()).unwrap());
        let d = product_distance(&correlated_control(), &Bipartition::pair()).unwrap();
        assert!((d - 0.25).abs() < 1e-12);
        assert!(!is_product(&bell(), &Bipartition::pair()).unwrap());
    }

    #[test]
    fn product_over_grouped_cut() {
        let mut rng = stream_rng(2, 0);
        let ab = random::hilbert_schmidt_state(&[2, 2], &mut rng);
        let c = random::hilbert_schmidt_state(&[2], &mut rng);
        // (A B) ⊗ C, tested with C placed between A and B
        let acb = ab.tensor(&c).permute_subsystems(&[0, 2, 1]).unwrap();
        assert!(is_product(&acb, &Bipartition::new(vec![0, 2], vec![1])).unwrap());
        assert!(!is_product(&acb, &Bipartition::new(vec![0], vec![1, 2])).unwrap());
    }

    #[test]
    fn correlated_control_is_cc_in_x_basis() {
        let rho = correlated_control();
        let (cc, witness) = is_cc(&rho).unwrap();
        assert!(cc);
        let w = witness.unwrap();
        assert!(w.diagonalizes(&rho, 1e-7));
        // each witness vector is |+⟩ or |−⟩ up to phase
        for k in 0..2 {
            for j in 0..2 {
                let v = w.local(k).column(j);
                let overlap = (v[0] + v[1]).norm() / 2f64.sqrt();
                assert!(overlap < 1e-6 || (overlap - 1.0).abs() < 1e-6, "{overlap}");
            }
        }
        assert!(!Basis::computational(&[2, 2]).diagonalizes(&rho, 1e-7));
    }

    #[test]
    fn bell_is_not_cc() {
        let (cc, w) = is_cc(&bell()).unwrap();
        assert!(!cc && w.is_none());
    }

    #[test]
    fn rotated_cc_states_recovered() {
        for k in 0..10u64 {
            let mut rng = stream_rng(3, k);
            let db = if k % 2 == 0 { 2 } else { 3 };
            let pv = random::probability_vector(2 * db, &mut rng);
            let p: Vec<Vec<f64>> = pv.chunks(db).map(<[f64]>::to_vec).collect();
            let ua = random::haar_unitary(2, &mut rng);
            let ub = random::haar_unitary(db, &mut rng);
            let rho = cc_state(&p, &ua, &ub).unwrap();
            let (cc, w) = is_cc(&rho).unwrap();
            assert!(cc, "sample {k}");
            let w = w.unwrap();
            let net = rec_net(&rho, &w, &Bipartition::pair()).unwrap();
            assert!(net.abs() <= 1e-6);
        }
    }

    #[test]
    fn pure_marginal_still_finds_witness() {
        // |0⟩⟨0| ⊗ ρ_B: every basis of A measures with zero discord
        let zero = DensityMatrix::diagonal(&[1.0, 0.0], vec![2]).unwrap();
        let mut rng = stream_rng(4, 0);
        let rho = zero.tensor(&random::hilbert_schmidt_state(&[2], &mut rng));
        assert!(is_cc(&rho).unwrap().0);
    }

    #[test]
    fn one_way_examples() {
        let rho = one_way_state();
        assert!(is_one_way_qc(&rho, Direction::AToB).unwrap());
        assert!(!is_one_way_qc(&rho, Direction::BToA).unwrap());
        assert!(!is_cc(&rho).unwrap().0);

        let cc = correlated_control();
        assert!(is_one_way_qc(&cc, Direction::AToB).unwrap());
        assert!(is_one_way_qc(&cc, Direction::BToA).unwrap());
        assert!(!is_one_way_qc(&bell(), Direction::AToB).unwrap());
        assert!(!is_one_way_qc(&bell(), Direction::BToA).unwrap());
    }

    #[test]
    fn ppt_examples() {
        assert!(ppt_separability(&correlated_control()).unwrap().is_ppt);
        let b = ppt_separability(&bell()).unwrap();
        assert!(!b.is_ppt);
        assert!((b.min_eigenvalue + 0.5).abs() < 1e-12);
        assert!(!ppt_separability(&werner(0.5)).unwrap().is_ppt);
        assert!(ppt_separability(&werner(0.25)).unwrap().is_ppt);
        // (1 − 3p)/4 closed form
        for p in [0.0, 0.2, 1.0 / 3.0, 0.6, 0.9] {
            let r = ppt_separability(&werner(p)).unwrap();
            let expect = ((1.0 - 3.0 * p) / 4.0).min((1.0 + p) / 4.0);
            assert!((r.min_eigenvalue - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn ppt_rejects_large_dims() {
        let rho = State::maximally_mixed(vec![3, 3]);
        assert!(matches!(ppt_separability(&rho), Err(ClassifyError::UnsupportedDims(_))));
        let rho = State::maximally_mixed(vec![2, 3]);
        assert!(ppt_separability(&rho).unwrap().is_ppt);
    }

    #[test]
    fn verdict_for_correlated_control() {
        let v = classify(&correlated_control(), &Basis::computational(&[2, 2])).unwrap();
        assert!(v.quantum_correlated);
        assert!((v.rec_net_in_basis - 1.0).abs() < 1e-9);
        assert!(v.is_ppt && v.separability_decided && v.is_cc && !v.is_product);
        assert!(v.discord_a_to_b <= 1e-6 && v.discord_b_to_a <= 1e-6);
    }

    #[test]
    fn verdict_for_plus_plus() {
        let v = classify(&plus_plus(), &Basis::computational(&[2, 2])).unwrap();
        assert!(!v.quantum_correlated);
        assert!(v.rec_net_in_basis.abs() < 1e-9);
        let a = plus_plus().partial_trace(&[0]).unwrap();
        assert!((rec(&a, &Basis::computational(&[2])).unwrap() - 1.0).abs() < 1e-9);
        assert!(v.is_product && v.is_cc);
    }

    #[test]
    fn verdict_for_maximally_mixed() {
        let v = classify(&State::maximally_mixed(vec![2, 2]), &Basis::computational(&[2, 2])).unwrap();
        assert!(v.is_product && v.is_cc && v.is_qc_a_to_b && v.is_qc_b_to_a && v.is_ppt);
        assert!(!v.quantum_correlated);
        assert!(v.discord_a_to_b.abs() < 1e-9);
        assert_eq!(v.entangled, Some(false));
        let big = classify(&State::maximally_mixed(vec![3, 3]), &Basis::computational(&[3, 3])).unwrap();
        assert_eq!(big.entangled, None);
    }

    #[test]
    fn hierarchy_nesting_on_random_states() {
        for k in 0..12u64 {
            let mut rng = stream_rng(5, k);
            let rho = if k % 3 == 0 {
                random::pure_state(&[2, 2], &mut rng)
            } else {
                random::hilbert_schmidt_state(&[2, 2], &mut rng)
            };
            let v = classify(&rho, &Basis::computational(&[2, 2])).unwrap();
            if v.is_cc {
                assert!(v.is_qc_a_to_b && v.is_qc_b_to_a);
            }
            if !v.is_ppt {
                assert!(v.discord_a_to_b > 1e-6 && v.discord_b_to_a > 1e-6);
            }
            assert!(v.rec_net_in_basis >= -1e-9);
        }
    }

    #[test]
    fn mixture_of_products_has_net_coherence() {
        // |++⟩ and |−−⟩ are product states, their equal mixture is not uncorrelated
        let z = Basis::computational(&[2, 2]);
        let cut = Bipartition::pair();
        let mm = State::pure(&ket(&[0.5, -0.5, -0.5, 0.5]), vec![2, 2]).unwrap();
        assert!(rec_net(&plus_plus(), &z, &cut).unwrap().abs() < 1e-9);
        assert!(rec_net(&mm, &z, &cut).unwrap().abs() < 1e-9);
        let mix = State::new(&plus_plus().matrix().scale_real(0.5) + &mm.matrix().scale_real(0.5), vec![2, 2]).unwrap();
        assert!(mix.matrix().approx_eq(correlated_control().matrix(), 1e-15));
        let r = net_global_coherence(&mix, &z, &cut).unwrap();
        assert!((r.rec_net - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_net_with_incoherent_marginals_means_diagonal() {
        let z = Basis::computational(&[2, 2]);
        let cut = Bipartition::pair();
        for k in 0..20u64 {
            let mut rng = stream_rng(6, k);
            // diagonal states: net zero, incoherent marginals
            let p = random::probability_vector(4, &mut rng);
            let diag = DensityMatrix::diagonal(&p, vec![2, 2]).unwrap();
            assert!(rec_net(&diag, &z, &cut).unwrap().abs() < 1e-9);
            assert!(z.diagonalizes(&diag, 0.0));
            // adding coherence that keeps the marginals incoherent forces net > 0
            let mut m = diag.matrix().clone();
            let c = 0.5 * (p[0] * p[3]).sqrt().min((p[1] * p[2]).sqrt());
            m[(0, 3)] = crate::Complex64::new(c, 0.0);
            m[(3, 0)] = crate::Complex64::new(c, 0.0);
            let rho = State::new(m, vec![2, 2]).unwrap();
            assert!(rec(&rho.partial_trace(&[0]).unwrap(), &Basis::computational(&[2])).unwrap().abs() < 1e-12);
            assert!(rec_net(&rho, &z, &cut).unwrap() > 1e-6);
        }
    }

    #[test]
    fn bell_discord_matches_basis_choice() {
        let z = Basis::computational(&[2, 2]);
        let d = basis_dependent_discord(&bell(), &z, Direction::AToB).unwrap();
        assert!((d - 1.0).abs() < 1e-9);
        let v = classify(&bell(), &z).unwrap();
        assert!((v.discord_a_to_b - 1.0).abs() < 1e-6);
        assert!(!v.is_ppt && v.witness_basis.is_none());
        assert_eq!(v.entangled, Some(true));
    }

    #[test]
    fn verdict_json_shape() {
        let v = classify(&correlated_control(), &Basis::computational(&[2, 2])).unwrap();
        let j = serde_json::to_value(&v).unwrap();
        assert_eq!(j["is_cc"], true);
        assert_eq!(j["witness_basis"].as_array().unwrap().len(), 2);
        assert_eq!(j["rec_net_in_basis"], 1.0);
    }
}
