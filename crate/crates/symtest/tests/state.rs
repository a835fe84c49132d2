use proptest::prelude::*;
use symtest::groups::{self, FiniteGroup, PermutationRep, UnitaryRepTable};
use symtest::linalg::{self, CMat, DensityMatrix, PureState};
use symtest::models;
use symtest::state_symmetry::{self as ss, ProverConfig, SymmetryMode};

fn swap_rep(d: usize) -> PermutationRep {
    PermutationRep::new(FiniteGroup::symmetric(2).unwrap(), d).unwrap()
}

fn two_qubit_density(seed: u64, rank: usize) -> DensityMatrix {
    let r = linalg::random_density(4, rank, seed).unwrap();
    DensityMatrix::new(r.matrix().clone(), vec![2, 2]).unwrap()
}

fn quick() -> ProverConfig {
    ProverConfig {
        restarts: 4,
        ..ProverConfig::default()
    }
}

#[test]
fn bose_test_examples() {
    let phi = linalg::random_pure(3, 4);
    let pp = phi.tensor(&phi).unwrap();
    let r = ss::bose_acceptance(&pp.density(), &swap_rep(3)).unwrap();
    assert!((r.simulated - 1.0).abs() < 1e-12 && r.abs_diff().unwrap() < 1e-10);

    let r = ss::bose_acceptance(&models::singlet().density(), &swap_rep(2)).unwrap();
    assert!(r.simulated.abs() < 1e-12 && r.abs_diff().unwrap() < 1e-10);

    let mixed = DensityMatrix::maximally_mixed(vec![2, 2]).unwrap();
    let r = ss::bose_acceptance(&mixed, &swap_rep(2)).unwrap();
    // Tr[(I + SWAP)/2 · I/4] = (4 + 2)/8
    assert!((r.closed_form.unwrap() - 0.75).abs() < 1e-14);
    assert!(r.abs_diff().unwrap() < 1e-10);
}

#[test]
fn bose_sampling_examples() {
    let phi = linalg::random_pure(2, 1);
    let pp = phi.tensor(&phi).unwrap();
    let r = ss::bose_circuit_sample(&pp, &swap_rep(2), 500, 3).unwrap();
    assert_eq!(r.simulated, 1.0);
    let r = ss::bose_circuit_sample(&models::singlet(), &swap_rep(2), 500, 3).unwrap();
    assert_eq!(r.simulated, 0.0);

    let mixed = DensityMatrix::maximally_mixed(vec![2, 2]).unwrap();
    let shots = 100_000;
    let r = ss::bose_circuit_sample_mixed(&mixed, &swap_rep(2), shots, 11).unwrap();
    assert!((r.simulated - 0.75).abs() <= 0.005, "{}", r.simulated);
    assert!(r.std_error.unwrap() <= 0.5 / (shots as f64).sqrt());
    let again = ss::bose_circuit_sample_mixed(&mixed, &swap_rep(2), shots, 11).unwrap();
    assert_eq!(r, again);
}

#[test]
fn bose_circuit_agrees_with_projector_for_table_reps() {
    for seed in 0..5 {
        let rho = two_qubit_density(seed, 3);
        for rep in [
            groups::d3_cnot_swap().unwrap(),
            groups::z2xz2_pauli().unwrap(),
            groups::trivial_rep(vec![2, 2]).unwrap(),
        ] {
            let r = ss::bose_acceptance(&rho, &rep).unwrap();
            assert!(r.abs_diff().unwrap() <= 1e-10);
        }
    }
}

#[test]
fn bose_test_rejects_projective_representations() {
    let rho = two_qubit_density(1, 2);
    assert!(ss::bose_acceptance(&rho, &groups::pauli_group(2).unwrap()).is_err());
}

#[test]
fn max_fidelity_trivial_cases() {
    let rep = groups::d3_cnot_swap().unwrap();
    let mixed = DensityMatrix::maximally_mixed(vec![2, 2]).unwrap();
    let r = ss::max_symmetric_fidelity(&mixed, &rep, SymmetryMode::GSym, &quick()).unwrap();
    assert!((r.value - 1.0).abs() < 1e-6);

    let sym = DensityMatrix::new(rep.twirl(two_qubit_density(3, 4).matrix()).unwrap(), vec![2, 2])
        .unwrap();
    let r = ss::max_symmetric_fidelity(&sym, &rep, SymmetryMode::GSym, &quick()).unwrap();
    assert!((r.value - 1.0).abs() < 1e-6, "{}", r.value);
}

#[test]
fn incoherence_of_plus_state_is_one_half() {
    let plus = models::qubit_state('+').unwrap().density();
    let r = ss::incoherence_acceptance(&plus, &quick()).unwrap();
    assert!((r.value - 0.5).abs() < 1e-6, "{}", r.value);

    let diag = DensityMatrix::new(linalg::from_real_diagonal(&[0.2, 0.5, 0.3]), vec![3]).unwrap();
    let r = ss::incoherence_acceptance(&diag, &quick()).unwrap();
    assert!((r.value - 1.0).abs() < 1e-6);
}

#[test]
fn incoherence_beats_dephased_state() {
    for seed in 0..4 {
        let rho = linalg::random_density(3, 2, seed).unwrap();
        let dephased = DensityMatrix::new(
            CMat::from_diagonal(&rho.matrix().diagonal()),
            vec![3],
        )
        .unwrap();
        let lower = linalg::fidelity(&rho, &dephased).unwrap();
        let r = ss::incoherence_acceptance(&rho, &quick()).unwrap();
        assert!(r.value >= lower - 1e-9);
    }
}

#[test]
fn pure_state_closed_forms_match_ascent() {
    let rep = groups::d3_cnot_swap().unwrap();
    for seed in 0..4 {
        let psi = PureState::new(linalg::random_pure(4, seed).vector().clone(), vec![2, 2]).unwrap();
        let closed = ss::max_symmetric_fidelity_pure(&psi, &rep, SymmetryMode::GSym).unwrap();
        let r = ss::max_symmetric_fidelity(&psi.density(), &rep, SymmetryMode::GSym, &quick())
            .unwrap();
        assert!((closed - r.value).abs() < 1e-4, "{closed} vs {}", r.value);
    }
}

#[test]
fn prover_on_symmetric_state_accepts() {
    let rep = groups::d3_cnot_swap().unwrap();
    let sym = DensityMatrix::new(rep.twirl(two_qubit_density(8, 3).matrix()).unwrap(), vec![2, 2])
        .unwrap();
    let r = ss::prover_acceptance(&sym, &rep, SymmetryMode::GSym, &quick()).unwrap();
    assert!((r.value - 1.0).abs() < 1e-5, "{}", r.value);
}

#[test]
fn prover_matches_closed_form_on_pure_states() {
    let rep = groups::d3_cnot_swap().unwrap();
    for seed in 0..3 {
        let psi = PureState::new(linalg::random_pure(4, 50 + seed).vector().clone(), vec![2, 2])
            .unwrap();
        let closed = ss::max_symmetric_fidelity_pure(&psi, &rep, SymmetryMode::GSym).unwrap();
        let r = ss::prover_acceptance(&psi.density(), &rep, SymmetryMode::GSym, &quick()).unwrap();
        assert!((closed - r.value).abs() < 1e-3, "{closed} vs {}", r.value);
    }
}

#[test]
fn product_state_is_two_bose_extendible() {
    // S = A ⊗ B₁, R = B₂
    let rep = groups::k_extension_rep(2, 2, 2).unwrap();
    let psi = models::product("0+").unwrap();
    let r = ss::prover_acceptance(&psi.density(), &rep, SymmetryMode::Bse, &quick()).unwrap();
    assert!((r.value - 1.0).abs() < 1e-5, "{}", r.value);
    let f = ss::max_symmetric_fidelity(&psi.density(), &rep, SymmetryMode::Bse, &quick()).unwrap();
    assert!((f.value - 1.0).abs() < 1e-5, "{}", f.value);
}

#[test]
fn bell_state_is_not_two_extendible() {
    let rep = groups::k_extension_rep(2, 2, 2).unwrap();
    let bell = models::bell().density();
    let closed = ss::max_symmetric_fidelity_pure(&models::bell(), &rep, SymmetryMode::Bse).unwrap();
    let r = ss::prover_acceptance(&bell, &rep, SymmetryMode::Bse, &quick()).unwrap();
    assert!(closed < 0.9);
    assert!((r.value - closed).abs() < 1e-3, "{} vs {closed}", r.value);
}

#[test]
fn bose_value_equals_max_fidelity_over_bose_symmetric_states() {
    // a one-dimensional reference turns the BSE set into the Bose-symmetric set
    let reps: Vec<UnitaryRepTable> = vec![
        groups::d3_cnot_swap().unwrap(),
        groups::z2xz2_pauli().unwrap(),
        PermutationRep::new(FiniteGroup::symmetric(2).unwrap(), 2).unwrap().to_table().unwrap(),
    ];
    for (i, rep) in reps.iter().enumerate() {
        let rho = two_qubit_density(40 + i as u64, 3);
        let bose = ss::bose_acceptance(&rho, rep).unwrap().simulated;
        let padded = rep.pad_identity(&[1], &[]).unwrap();
        let f = ss::max_symmetric_fidelity(&rho, &padded, SymmetryMode::Bse, &quick()).unwrap();
        assert!((bose - f.value).abs() < 1e-3, "{bose} vs {}", f.value);
    }
}

#[test]
fn bse_acceptance_never_exceeds_se() {
    let rep = groups::k_extension_rep(2, 2, 2).unwrap();
    for seed in 0..3 {
        let rho = two_qubit_density(70 + seed, 2);
        let b = ss::prover_acceptance(&rho, &rep, SymmetryMode::Bse, &quick()).unwrap();
        let s = ss::prover_acceptance(&rho, &rep, SymmetryMode::Se, &quick()).unwrap();
        assert!(b.value <= s.value + 1e-3, "{} > {}", b.value, s.value);
        let fs = ss::max_symmetric_fidelity(&rho, &rep, SymmetryMode::Se, &quick()).unwrap();
        assert!((fs.value - s.value).abs() < 1e-3, "{} vs {}", fs.value, s.value);
    }
}

#[test]
fn purification_check_examples() {
    let rep = groups::d3_cnot_swap().unwrap();
    let mixed = DensityMatrix::maximally_mixed(vec![2, 2]).unwrap();
    let c = ss::symmetric_purification_check(&mixed, &rep).unwrap();
    assert!(c.symmetric && c.defect < 1e-12);

    let inv = DensityMatrix::new(rep.twirl(two_qubit_density(2, 4).matrix()).unwrap(), vec![2, 2])
        .unwrap();
    let c = ss::symmetric_purification_check(&inv, &rep).unwrap();
    assert!(c.symmetric && c.defect <= 1e-8);

    let c = ss::symmetric_purification_check(&two_qubit_density(2, 4), &rep).unwrap();
    assert!(!c.symmetric && c.defect > 1e-3);
}

/// Dense product of symmetric projectors on the factor groups of ψ ⊗ ψ.
fn multipartite_oracle(psi: &PureState) -> f64 {
    let m = psi.dims().len();
    let dims: Vec<usize> = psi.dims().iter().chain(psi.dims()).copied().collect();
    let n = linalg::product(&dims);
    let v = linalg::tensor_vec(psi.vector(), psi.vector());
    let mut proj = linalg::identity(n);
    for i in 0..m {
        let mut perm: Vec<usize> = (0..2 * m).collect();
        perm.swap(i, i + m);
        let (map, _) = linalg::factor_permutation_map(&dims, &perm).unwrap();
        let mut w = CMat::zeros(n, n);
        for (x, &y) in map.iter().enumerate() {
            w[(y, x)] = linalg::ONE;
        }
        proj = (linalg::identity(n) + w).unscale(2.0) * proj;
    }
    (proj * v).norm_squared()
}

#[test]
fn multipartite_examples() {
    let prod = models::product("0+r").unwrap();
    for k in 1..=3 {
        assert!((ss::multipartite_bose_acceptance(&prod, k).unwrap() - 1.0).abs() < 1e-12);
    }
    let ghz = models::ghz(3).unwrap();
    let v = ss::multipartite_bose_acceptance(&ghz, 2).unwrap();
    assert!((v - multipartite_oracle(&ghz)).abs() < 1e-12);
    assert!(v < 1.0);

    let psi = PureState::new(linalg::random_pure(6, 3).vector().clone(), vec![2, 3]).unwrap();
    let v = ss::multipartite_bose_acceptance(&psi, 2).unwrap();
    let rho_b = psi.density().reduce(&[1]).unwrap();
    let b = ss::bose_acceptance(&rho_b.tensor(&rho_b).unwrap(), &swap_rep(3)).unwrap();
    assert!((v - b.simulated).abs() < 1e-12);
}

#[test]
fn channel_examples() {
    let rep = groups::pauli_group(1).unwrap();
    let cfg = quick();
    let id = ss::channel_covariance_acceptance(&linalg::identity(2), (1, 1), &rep, &rep, &cfg)
        .unwrap();
    assert!((id.fidelity - 1.0).abs() < 1e-12 && (id.bose - 1.0).abs() < 1e-12);

    let z = linalg::pauli('Z').unwrap();
    let r = ss::channel_covariance_acceptance(&z, (1, 1), &rep, &rep, &cfg).unwrap();
    assert!((r.fidelity - 1.0).abs() < 1e-12);

    let h = {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CMat::from_row_slice(2, 2, &[linalg::c(s, 0.0), linalg::c(s, 0.0), linalg::c(0.0, s), linalg::c(0.0, -s)])
    };
    let r = ss::channel_covariance_acceptance(&h, (1, 1), &rep, &rep, &cfg).unwrap();
    assert!(r.fidelity < 1.0 - 1e-6);
    assert!(r.fidelity >= r.bose - 1e-12);
}

#[test]
fn dephasing_channel_is_covariant_under_phases() {
    // CNOT-like dilation: system controls a flip of the environment
    let w = groups::cnot();
    let rep = groups::phase_group(2).unwrap();
    let r = ss::channel_covariance_acceptance(&w, (2, 2), &rep, &rep, &quick()).unwrap();
    assert!((r.fidelity - 1.0).abs() < 1e-6, "{}", r.fidelity);
    assert!(r.converged);
}

#[test]
fn twirl_channel_preserves_bose_value_and_replacement_increases_it() {
    let rep = groups::d3_cnot_swap().unwrap();
    for seed in 0..10 {
        let rho = two_qubit_density(seed, 4);
        let p = ss::bose_acceptance(&rho, &rep).unwrap().closed_form.unwrap();
        let tw = DensityMatrix::new(rep.twirl(rho.matrix()).unwrap(), vec![2, 2]).unwrap();
        let q = ss::bose_acceptance(&tw, &rep).unwrap().closed_form.unwrap();
        assert!((p - q).abs() <= 1e-12);
        // replace with a fixed Bose-symmetric state
        let pi = rep.projector().unwrap();
        let sym = DensityMatrix::from_unnormalized(pi.clone(), vec![2, 2]).unwrap();
        let s = ss::bose_acceptance(&sym, &rep).unwrap().closed_form.unwrap();
        assert!(s >= p - 1e-12);
    }
}

#[test]
fn random_projector_is_projector() {
    let p = ss::random_projector(5, 2, 1).unwrap();
    assert!(linalg::max_abs(&(&p * &p - &p)) < 1e-12);
    assert!((linalg::trace(&p).re - 2.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn gentle_measurement_bounds(seed in 0u64..100_000, d in 2usize..6, rank in 1usize..5) {
        let rho = linalg::random_density(d, d, seed).unwrap();
        let p = ss::random_projector(d, rank.min(d), seed ^ 0xABCD).unwrap();
        let g = ss::gentle_measurement_check(&rho, &p).unwrap();
        prop_assert!(g.holds, "{g:?}");
        prop_assert!(g.reverse_holds, "{g:?}");
    }

    #[test]
    fn bose_circuit_matches_projector(seed in 0u64..100_000) {
        let rho = linalg::random_density(4, 2, seed).unwrap();
        let rho = DensityMatrix::new(rho.matrix().clone(), vec![2, 2]).unwrap();
        let r = ss::bose_acceptance(&rho, &swap_rep(2)).unwrap();
        prop_assert!(r.abs_diff().unwrap() <= 1e-10);
        prop_assert!(r.simulated >= -1e-9 && r.simulated <= 1.0 + 1e-9);
    }

    #[test]
    fn prover_never_exceeds_one(seed in 0u64..1000) {
        let rho = two_qubit_density(seed, 2);
        let rep = groups::z2xz2_pauli().unwrap();
        let cfg = ProverConfig { restarts: 2, max_iters: 200, ..ProverConfig::default() };
        let r = ss::prover_acceptance(&rho, &rep, SymmetryMode::GSym, &cfg).unwrap();
        prop_assert!(r.value <= 1.0 + 1e-12);
        prop_assert!(r.restart_values.iter().all(|&v| v <= r.value));
    }
}
