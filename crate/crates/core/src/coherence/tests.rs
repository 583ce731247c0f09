use super::*;
use crate::linalg::{ket, pauli, DenseComplexMatrix};
use crate::random::{self, stream_rng};
use crate::{Basis, Matrix, State};

const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn plus() -> State {
    State::pure(&ket(&[S, S]), vec![2]).unwrap()
}

fn minus() -> State {
    State::pure(&ket(&[S, -S]), vec![2]).unwrap()
}

fn bell() -> State {
    State::pure(&ket(&[S, 0.0, 0.0, S]), vec![2, 2]).unwrap()
}

/// `½ Σ_{x=±} |x⟩⟨x| ⊗ |x⟩⟨x|`.
fn correlated_control() -> State {
    let pp = plus().tensor(&plus());
    let mm = minus().tensor(&minus());
    State::new((&pp.matrix().scale_real(0.5)) + &mm.matrix().scale_real(0.5), vec![2, 2]).unwrap()
}

fn z2() -> Basis {
    Basis::computational(&[2, 2])
}

fn random_product_basis(dims: &[usize], rng: &mut random::SimRng) -> Basis {
    Basis::new(dims.iter().map(|&d| random::haar_unitary(d, rng)).collect()).unwrap()
}

#[test]
fn dephasing_fixed_point_and_plus_state() {
    let diag = State::diagonal(&[0.1, 0.2, 0.3, 0.4], vec![2, 2]).unwrap();
    let out = dephase_all(&diag, &z2()).unwrap();
    assert!(out.matrix().approx_eq(diag.matrix(), 1e-15));

    let out = dephase_all(&plus(), &Basis::computational(&[2])).unwrap();
    assert!(out.matrix().approx_eq(&Matrix::identity(2).scale_real(0.5), 1e-15));
}

#[test]
fn one_sided_dephasings_commute_and_compose() {
    let mut rng = stream_rng(101, 0);
    for _ in 0..100 {
        let rho = random::hilbert_schmidt_state(&[2, 2], &mut rng);
        let basis = random_product_basis(&[2, 2], &mut rng);
        let ab = dephase(&dephase(&rho, &basis, &[1]).unwrap(), &basis, &[0]).unwrap();
        let ba = dephase(&dephase(&rho, &basis, &[0]).unwrap(), &basis, &[1]).unwrap();
        let both = dephase(&rho, &basis, &[0, 1]).unwrap();
        assert!(ab.matrix().approx_eq(both.matrix(), 1e-12));
        assert!(ba.matrix().approx_eq(both.matrix(), 1e-12));
    }
}

#[test]
fn dephasing_is_idempotent() {
    let mut rng = stream_rng(102, 0);
    for _ in 0..50 {
        let rho = random::hilbert_schmidt_state(&[2, 3], &mut rng);
        let basis = random_product_basis(&[2, 3], &mut rng);
        let once = dephase_all(&rho, &basis).unwrap();
        let twice = dephase_all(&once, &basis).unwrap();
        assert!(once.matrix().approx_eq(twice.matrix(), 1e-12));
        assert!((once.matrix().trace().re - 1.0).abs() < 1e-12);
        assert!(basis.diagonalizes(&once, 1e-12));
    }
}

#[test]
fn partial_trace_commutes_with_dephasing() {
    let mut rng = stream_rng(103, 0);
    for _ in 0..100 {
        let rho = random::hilbert_schmidt_state(&[2, 2], &mut rng);
        let basis = random_product_basis(&[2, 2], &mut rng);
        let lhs = dephase_all(&rho, &basis).unwrap().partial_trace(&[0]).unwrap();
        let rhs = dephase_all(&rho.partial_trace(&[0]).unwrap(), &basis.restrict(&[0])).unwrap();
        assert!(lhs.matrix().approx_eq(rhs.matrix(), 1e-12));
    }
}

#[test]
fn dephase_rejects_mismatched_basis() {
    assert!(matches!(
        dephase_all(&bell(), &Basis::computational(&[4])),
        Err(CoherenceError::BasisMismatch { .. })
    ));
}

#[test]
fn entropy_examples() {
    assert!(von_neumann_entropy(&plus()).unwrap().abs() < 1e-12);
    let mixed = State::maximally_mixed(vec![2]);
    assert!((von_neumann_entropy(&mixed).unwrap() - 1.0).abs() < 1e-12);
    let rho = State::diagonal(&[0.25, 0.75], vec![2]).unwrap();
    let oracle = -(0.25f64 * 0.25f64.log2()) - 0.75 * 0.75f64.log2();
    assert!((von_neumann_entropy(&rho).unwrap() - oracle).abs() < 1e-12);
    assert!((oracle - 0.811278).abs() < 1e-6);
}

#[test]
fn rec_examples() {
    let diag = State::diagonal(&[0.7, 0.3], vec![2]).unwrap();
    assert!(rec(&diag, &Basis::computational(&[2])).unwrap().abs() < 1e-12);
    assert!((rec(&plus(), &Basis::computational(&[2])).unwrap() - 1.0).abs() < 1e-12);
    let task1 = plus().tensor(&plus());
    assert!((rec(&task1, &z2()).unwrap() - 2.0).abs() < 1e-12);
    assert!((rec(&correlated_control(), &z2()).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn rec_is_additive() {
    let mut rng = stream_rng(104, 0);
    for _ in 0..50 {
        let a = random::hilbert_schmidt_state(&[2], &mut rng);
        let b = random::hilbert_schmidt_state(&[3], &mut rng);
        let basis = random_product_basis(&[2, 3], &mut rng);
        let joint = rec(&a.tensor(&b), &basis).unwrap();
        let sum = rec(&a, &basis.restrict(&[0])).unwrap() + rec(&b, &basis.restrict(&[1])).unwrap();
        assert!((joint - sum).abs() < 1e-9);
    }
}

#[test]
fn rec_does_not_increase_under_permutations_and_dephasing() {
    let mut rng = stream_rng(105, 0);
    let basis = Basis::computational(&[4]);
    for _ in 0..50 {
        let rho = random::hilbert_schmidt_state(&[4], &mut rng);
        let before = rec(&rho, &basis).unwrap();
        let perm = DenseComplexMatrix::from_fn(4, |i, j| {
            if i == (j + 1) % 4 {
                num_complex::Complex::new(1.0, 0.0)
            } else {
                num_complex::Complex::new(0.0, 0.0)
            }
        });
        let permuted = State::new(perm.conjugate(rho.matrix()), vec![4]).unwrap();
        assert!(rec(&permuted, &basis).unwrap() <= before + 1e-9);
        let deph = dephase_all(&rho, &basis).unwrap();
        assert!(rec(&deph, &basis).unwrap() <= before + 1e-9);
    }
}

#[test]
fn mutual_information_examples() {
    let mut rng = stream_rng(106, 0);
    let prod = random::hilbert_schmidt_state(&[2], &mut rng).tensor(&random::hilbert_schmidt_state(&[2], &mut rng));
    assert!(mutual_information(&prod, &Bipartition::pair()).unwrap().abs() < 1e-10);
    assert!((mutual_information(&bell(), &Bipartition::pair()).unwrap() - 2.0).abs() < 1e-10);
    assert!((mutual_information(&correlated_control(), &Bipartition::pair()).unwrap() - 1.0).abs() < 1e-10);
    assert!(mutual_information(&bell(), &Bipartition::new(vec![0], vec![])).is_err());
    assert!(mutual_information(&bell(), &Bipartition::new(vec![0], vec![0])).is_err());
}

#[test]
fn net_coherence_examples() {
    let r = net_global_coherence(&correlated_control(), &z2(), &Bipartition::pair()).unwrap();
    assert!((r.rec_net - 1.0).abs() < 1e-9);
    assert!((r.rec_global - 1.0).abs() < 1e-9);
    assert!(r.rec_local.iter().all(|x| x.abs() < 1e-9));
    assert!((r.rec_net - r.rec_net_via_mutual_info()).abs() < 1e-9);

    let task1 = plus().tensor(&plus());
    let r = net_global_coherence(&task1, &z2(), &Bipartition::pair()).unwrap();
    assert!(r.rec_net.abs() < 1e-9);
    assert!((r.rec_global - 2.0).abs() < 1e-9);

    let r = net_global_coherence(&bell(), &z2(), &Bipartition::pair()).unwrap();
    assert!((r.rec_net - 1.0).abs() < 1e-9);
    assert!((r.mutual_info - 2.0).abs() < 1e-9);
    assert!((r.mutual_info_dephased - 1.0).abs() < 1e-9);
}

#[test]
fn net_coherence_on_grouped_cut() {
    // three subsystems, cut {0,2} | {1}
    let mut rng = stream_rng(107, 0);
    let rho = random::hilbert_schmidt_state(&[2, 2, 2], &mut rng);
    let basis = random_product_basis(&[2, 2, 2], &mut rng);
    let r = net_global_coherence(&rho, &basis, &"0,2|1".parse().unwrap()).unwrap();
    assert!(r.rec_net >= -1e-9);
}

#[test]
fn report_json_uses_twelve_digits() {
    let r = CoherenceReport {
        rec_global: 0.811_278_124_459_132_8,
        rec_local: vec![1.0 / 3.0],
        rec_net: 0.0,
        mutual_info: 2.0,
        mutual_info_dephased: 1.0,
    };
    let s = serde_json::to_string(&r).unwrap();
    assert!(s.contains("0.811278124459,"), "{s}");
    assert!(s.contains("0.333333333333]"), "{s}");
}

#[test]
fn basis_discord_examples() {
    let mut rng = stream_rng(108, 0);
    let prod = random::hilbert_schmidt_state(&[2], &mut rng).tensor(&random::hilbert_schmidt_state(&[2], &mut rng));
    let basis = random_product_basis(&[2, 2], &mut rng);
    for dir in [Direction::AToB, Direction::BToA] {
        assert!(basis_dependent_discord(&prod, &basis, dir).unwrap().abs() < 1e-10);
        let b = basis_dependent_discord(&bell(), &z2(), dir).unwrap();
        assert!((b - 1.0).abs() < 1e-10);
    }
    // the correlated control state is diagonal in X⊗X, not Z⊗Z
    let xx = Basis::hadamard(2);
    let ctrl = correlated_control();
    for dir in [Direction::AToB, Direction::BToA] {
        assert!(basis_dependent_discord(&ctrl, &xx, dir).unwrap().abs() < 1e-10);
        // in Z⊗Z the one-sided dephasing destroys all correlation: I = 1 → 0
        let z = basis_dependent_discord(&ctrl, &z2(), dir).unwrap();
        assert!((z - 1.0).abs() < 1e-10);
    }
}

#[test]
fn discord_of_qc_state_vanishes_for_matching_basis() {
    let zero = State::pure(&ket(&[1.0, 0.0]), vec![2]).unwrap();
    let one = State::pure(&ket(&[0.0, 1.0]), vec![2]).unwrap();
    let mut rng = stream_rng(109, 0);
    let b0 = random::hilbert_schmidt_state(&[2], &mut rng);
    let b1 = random::hilbert_schmidt_state(&[2], &mut rng);
    let m = &zero.tensor(&b0).matrix().scale_real(0.3) + &one.tensor(&b1).matrix().scale_real(0.7);
    let rho = State::new(m, vec![2, 2]).unwrap();
    let basis = Basis::new(vec![Matrix::identity(2), random::haar_unitary(2, &mut rng)]).unwrap();
    assert!(basis_dependent_discord(&rho, &basis, Direction::AToB).unwrap().abs() < 1e-10);
}

fn rotated_cc_state(rng: &mut random::SimRng) -> (State, Basis) {
    let p = random::probability_vector(4, rng);
    let basis = random_product_basis(&[2, 2], rng);
    let diag = DenseComplexMatrix::diag(&p);
    let rho = State::new(basis.from_basis(&diag), vec![2, 2]).unwrap();
    (rho, basis)
}

#[test]
fn minimize_recovers_cc_basis() {
    let mut rng = stream_rng(110, 0);
    for _ in 0..10 {
        let (rho, _) = rotated_cc_state(&mut rng);
        for dir in [Direction::AToB, Direction::BToA] {
            let m = minimize_discord(&rho, dir).unwrap();
            assert!(m.value.abs() < 1e-6, "{}", m.value);
            assert!(m.basis.diagonalizes(&rho, 1e-7));
        }
    }
}

/// Brute-force grid over measurement directions at resolution π/200.
fn grid_min_discord(rho: &State) -> f64 {
    let n = 200;
    let mut best = f64::INFINITY;
    for i in 0..=n {
        let theta = std::f64::consts::PI * i as f64 / n as f64;
        for j in 0..(2 * n) {
            let phi = std::f64::consts::PI * j as f64 / n as f64;
            let dir = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
            let u = qubit_basis(dir);
            let basis = Basis::new(vec![u, Matrix::identity(2)]).unwrap();
            best = best.min(basis_dependent_discord(rho, &basis, Direction::AToB).unwrap());
        }
    }
    best
}

#[test]
fn bell_discord_is_one_bit() {
    let oracle = grid_min_discord(&bell());
    assert!((oracle - 1.0).abs() < 1e-9);
    let m = minimize_discord(&bell(), Direction::AToB).unwrap();
    assert!((m.value - 1.0).abs() < 1e-6);
}

#[test]
fn minimizer_beats_grid_on_random_states() {
    let mut rng = stream_rng(111, 0);
    for _ in 0..3 {
        let rho = random::hilbert_schmidt_state(&[2, 2], &mut rng);
        let oracle = grid_min_discord(&rho);
        let m = minimize_discord(&rho, Direction::AToB).unwrap();
        assert!(m.value <= oracle + 1e-9, "{} vs grid {}", m.value, oracle);
        assert!(m.value >= -1e-9);
        let seeds = m.starts.iter().take(3).fold(f64::INFINITY, |a, &b| a.min(b));
        assert!(m.value <= seeds + 1e-12);
    }
}

#[test]
fn one_way_state_is_asymmetric() {
    let zero = State::pure(&ket(&[1.0, 0.0]), vec![2]).unwrap();
    let one = State::pure(&ket(&[0.0, 1.0]), vec![2]).unwrap();
    let m = &zero.tensor(&zero).matrix().scale_real(0.5) + &one.tensor(&plus()).matrix().scale_real(0.5);
    let rho = State::new(m, vec![2, 2]).unwrap();
    let ab = minimize_discord(&rho, Direction::AToB).unwrap();
    let ba = minimize_discord(&rho, Direction::BToA).unwrap();
    assert!(ab.value.abs() < 1e-6);
    assert!(ba.value > 1e-3, "{}", ba.value);
}

#[test]
fn minimization_handles_qutrit_side() {
    let mut rng = stream_rng(112, 0);
    let p = random::probability_vector(6, &mut rng);
    let basis = random_product_basis(&[3, 2], &mut rng);
    let rho = State::new(basis.from_basis(&DenseComplexMatrix::diag(&p)), vec![3, 2]).unwrap();
    let m = minimize_discord(&rho, Direction::AToB).unwrap();
    assert!(m.value.abs() < 1e-6, "{}", m.value);
}

#[test]
fn works_in_single_precision() {
    let plus32 = crate::StateF32::pure(&ket(&[S, S]), vec![2]).unwrap();
    let r = rec(&plus32, &ProductBasis::<f32>::computational(&[2])).unwrap();
    assert!((r - 1.0).abs() < 1e-5);
    let rho = bell().cast::<f32>();
    let r = net_global_coherence(&rho, &ProductBasis::<f32>::hadamard(2), &Bipartition::pair()).unwrap();
    assert!((r.rec_net - 1.0).abs() < 1e-4);
    let _ = pauli::x::<f32>();
}
