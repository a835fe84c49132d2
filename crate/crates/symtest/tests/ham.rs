use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use symtest::groups::{self, FiniteGroup, PermutationRep, UnitaryRepTable};
use symtest::ham_symmetry::{self as hs, HamiltonianSpec};
use symtest::linalg::{self, c, CMat, DensityMatrix, PureState};

fn dense(m: CMat) -> HamiltonianSpec {
    let d = m.nrows();
    HamiltonianSpec::dense(m, vec![d]).unwrap()
}

fn two_qubit(m: CMat) -> HamiltonianSpec {
    HamiltonianSpec::dense(m, vec![2, 2]).unwrap()
}

fn x_group() -> UnitaryRepTable {
    UnitaryRepTable::from_matrices(
        "x",
        vec!["I".into(), "X".into()],
        vec![linalg::identity(2), linalg::pauli('X').unwrap()],
        vec![2],
    )
    .unwrap()
}

/// Trace form written out directly, no shared helpers.
fn trace_form_oracle(h: &CMat, rep: &UnitaryRepTable, t: f64) -> f64 {
    let e = linalg::eigh(h).unwrap();
    let fwd = e.apply_function(|x| Complex64::from_polar(1.0, -x * t));
    let back = e.apply_function(|x| Complex64::from_polar(1.0, x * t));
    let d = h.nrows() as f64;
    let mut s = 0.0;
    for u in rep.matrices() {
        s += (u.adjoint() * &back * u * &fwd).trace().re;
    }
    s / (d * rep.order() as f64)
}

#[test]
fn acceptance_is_one_at_time_zero() {
    let h = two_qubit(linalg::random_hermitian(4, 1));
    let rep = groups::d3_cnot_swap().unwrap();
    let r = hs::covariance_acceptance(&h, &rep, 0.0).unwrap();
    assert!((r.simulated - 1.0).abs() < 1e-14);
    assert!((r.closed_form.unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn nmr_matrix_matches_diagonal_display() {
    let (w1, w2, j) = (1.3, 0.4, 0.25);
    let h = hs::nmr(w1, w2, j).unwrap().matrix();
    let avg = (w1 + w2) / 2.0;
    let dw = w2 - w1;
    let want = [
        -avg + PI * j / 2.0,
        (dw - PI * j) / 2.0,
        -(dw + PI * j) / 2.0,
        avg + PI * j / 2.0,
    ];
    for i in 0..4 {
        assert!((h[(i, i)].re - want[i]).abs() < 1e-14, "entry {i}");
        for k in 0..4 {
            if k != i {
                assert_eq!(h[(i, k)], c(0.0, 0.0));
            }
        }
    }
}

#[test]
fn model_hamiltonians_commute_with_their_symmetries() {
    let comm = |h: &CMat, u: &CMat| linalg::frobenius(&linalg::commutator(h, u));
    let tim = hs::transverse_ising(3).unwrap().matrix();
    let shift = PermutationRep::new(FiniteGroup::cyclic(3).unwrap(), 2)
        .unwrap()
        .to_table()
        .unwrap();
    for u in shift.matrices() {
        assert!(comm(&tim, u) <= 1e-12);
    }
    for u in groups::global_pauli('X', 3).unwrap().matrices() {
        assert!(comm(&tim, u) <= 1e-12);
    }
    let xy = hs::heisenberg_xy(3, 0.7).unwrap().matrix();
    for u in groups::global_xyz(3).unwrap().matrices() {
        assert!(comm(&xy, u) <= 1e-12);
    }
    let nmr = hs::nmr(1.0, 2.0, 0.5).unwrap().matrix();
    for u in groups::z2xz2_pauli().unwrap().matrices() {
        assert!(comm(&nmr, u) <= 1e-12);
    }
}

#[test]
fn nmr_against_d3_decays_initially() {
    let h = hs::nmr(1.0, 2.0, 0.5).unwrap();
    let rep = groups::d3_cnot_swap().unwrap();
    let p1 = hs::covariance_acceptance(&h, &rep, 0.1).unwrap().simulated;
    let p2 = hs::covariance_acceptance(&h, &rep, 0.2).unwrap().simulated;
    assert!(p1 < 1.0 && p2 < p1);
}

#[test]
fn commuting_terms_trotterize_exactly() {
    let h = hs::nmr(0.3, 0.9, 0.2).unwrap();
    let exact = linalg::expm_hermitian(&h.matrix(), 0.8).unwrap();
    let tr = hs::trotter_evolution(&h, 0.8, 1).unwrap();
    assert!(linalg::max_abs(&(exact - tr)) < 1e-13);
}

#[test]
fn single_term_trotter_equals_exponential() {
    let x = linalg::random_hermitian(4, 3);
    let h = HamiltonianSpec::local(
        vec![hs::LocalTerm {
            matrix: x.clone(),
            support: vec![0, 1],
        }],
        vec![2, 2],
    )
    .unwrap();
    let exact = linalg::expm_hermitian(&x, 1.1).unwrap();
    for r in [1, 3, 7] {
        let tr = hs::trotter_evolution(&h, 1.1, r).unwrap();
        assert!(linalg::max_abs(&(&exact - tr)) < 1e-12);
    }
}

#[test]
fn trotter_rejects_dense_input() {
    let h = dense(linalg::random_hermitian(2, 0));
    assert!(hs::trotter_evolution(&h, 1.0, 2).is_err());
    let tim = hs::transverse_ising(3).unwrap();
    assert!(hs::trotter_evolution(&tim, 1.0, 0).is_err());
}

#[test]
fn symmetric_hamiltonian_series_is_flat() {
    let h = hs::nmr(1.0, 2.0, 0.5).unwrap();
    let rep = groups::z2xz2_pauli().unwrap();
    let s = hs::commutator_series(&h, &rep, 0.7, 4).unwrap();
    assert!((s.coefficients[0] - 1.0).abs() < 1e-14);
    for n in 1..=4 {
        assert!(s.coefficients[n].abs() < 1e-24);
        assert!((s.partial_sums[n] - 1.0).abs() < 1e-14);
    }
}

#[test]
fn first_series_coefficient_matches_second_order_form() {
    let hm = linalg::random_hermitian(4, 8);
    let h = two_qubit(hm.clone());
    let rep = groups::pauli_group(2).unwrap();
    let c1 = hs::series_coefficients(&h, &rep, 1).unwrap()[1];
    let th = rep.twirl(&hm).unwrap();
    let want = 2.0 / 4.0
        * (linalg::trace_of_product(&hm, &hm).re - linalg::trace_of_product(&th, &hm).re);
    assert!((c1 - want).abs() < 1e-10);
}

#[test]
fn twirl_form_coefficients_match_nested_commutators() {
    for seed in 0..5 {
        let h = two_qubit(linalg::random_hermitian(4, 100 + seed));
        for rep in [groups::d3_cnot_swap().unwrap(), groups::pauli_group(2).unwrap()] {
            let a = hs::series_coefficients(&h, &rep, 3).unwrap();
            let b = hs::series_coefficients_twirl(&h, &rep, 3).unwrap();
            for n in 0..=3 {
                let scale = a[n].abs().max(1.0);
                assert!((a[n] - b[n]).abs() <= 1e-9 * scale, "n={n}: {} vs {}", a[n], b[n]);
            }
        }
    }
}

#[test]
fn series_converges_for_large_t() {
    let h = two_qubit(linalg::random_hermitian(4, 21));
    let h = hs::normalized(&h, 1.0).unwrap();
    let rep = groups::d3_cnot_swap().unwrap();
    for t in [0.5, 1.5, PI] {
        let s = hs::commutator_series(&h, &rep, t, 40).unwrap();
        assert!(s.residuals[40] < 1e-6, "t={t}: {}", s.residuals[40]);
    }
}

#[test]
fn fixed_state_average_over_basis_is_covariance_acceptance() {
    let h = two_qubit(linalg::random_hermitian(4, 5));
    let rep = groups::d3_cnot_swap().unwrap();
    let t = 0.9;
    let mut avg = 0.0;
    for x in 0..4 {
        let psi = PureState::new(PureState::basis(4, x).unwrap().vector().clone(), vec![2, 2])
            .unwrap();
        avg += hs::fixed_state_acceptance(&h, &rep, t, &psi).unwrap().value;
    }
    avg /= 4.0;
    let p = hs::covariance_acceptance(&h, &rep, t).unwrap().simulated;
    assert!((avg - p).abs() < 1e-12);
}

#[test]
fn fixed_state_second_order_error_is_small() {
    let h = two_qubit(linalg::random_hermitian(4, 6));
    let rep = groups::pauli_group(2).unwrap();
    let psi = PureState::new(linalg::random_pure(4, 3).vector().clone(), vec![2, 2]).unwrap();
    let errs: Vec<f64> = [1e-2, 5e-3]
        .iter()
        .map(|&t| {
            let r = hs::fixed_state_acceptance(&h, &rep, t, &psi).unwrap();
            (r.value - r.second_order).abs()
        })
        .collect();
    // halving t must shrink the error by at least 2³
    assert!(errs[1] <= errs[0] / 8.0 + 1e-15, "{errs:?}");
}

#[test]
fn max_over_states_dominates_fixed_states_and_bounds() {
    let h = two_qubit(linalg::random_hermitian(4, 12));
    let rep = groups::pauli_group(2).unwrap();
    for t in [0.05, 0.2, 0.8] {
        let m = hs::max_over_states_acceptance(&h, &rep, t).unwrap();
        for seed in 0..100 {
            let psi =
                PureState::new(linalg::random_pure(4, seed).vector().clone(), vec![2, 2]).unwrap();
            let f = hs::fixed_state_acceptance(&h, &rep, t, &psi).unwrap().value;
            assert!(f <= m.value + 1e-10);
        }
        assert!(m.bound_unitary_commutator <= m.value + 1e-10);
        assert!(m.bound_nested <= m.value + 1e-10);
        if let Some(b) = m.bound_small_t {
            assert!(m.tau < 1.0);
            assert!(b <= m.value + 1e-10);
        }
        let cov = hs::covariance_acceptance(&h, &rep, t).unwrap().simulated;
        assert!(cov <= m.value + 1e-10);
    }
}

#[test]
fn symmetric_hamiltonian_maximum_is_one() {
    let h = hs::heisenberg_xy(3, 1.0).unwrap();
    let rep = groups::global_xyz(3).unwrap();
    let m = hs::max_over_states_acceptance(&h, &rep, 0.6).unwrap();
    assert!((m.value - 1.0).abs() < 1e-10);
    assert!(m.bound_unitary_commutator <= 1.0 + 1e-12);
    assert!(m.bound_nested <= 1.0 + 1e-12);
}

#[test]
fn dqc1_identity_and_t_gate() {
    let r = hs::dqc1_reduction_check(&linalg::identity(2)).unwrap();
    assert!((r.lhs - 0.5).abs() < 1e-12 && (r.rhs - 0.5).abs() < 1e-15);
    let t = CMat::from_diagonal(&linalg::CVec::from_vec(vec![
        c(1.0, 0.0),
        Complex64::from_polar(1.0, PI / 4.0),
    ]));
    let r = hs::dqc1_reduction_check(&t).unwrap();
    assert!((r.rhs - 0.375).abs() < 1e-15);
    assert!((r.lhs - 0.375).abs() < 1e-12);
}

#[test]
fn dqc1_rejects_non_unitary() {
    let m = linalg::identity(2).scale(2.0);
    assert!(matches!(
        hs::dqc1_reduction_check(&m),
        Err(symtest::SymError::NotUnitary(_))
    ));
}

#[test]
fn block_encoding_examples() {
    let z = linalg::pauli('Z').unwrap();
    let r = hs::block_encoding_acceptance(&z, &x_group()).unwrap();
    assert!(r.simulated.abs() < 1e-14 && r.closed_form.unwrap().abs() < 1e-14);

    let h = linalg::random_hermitian(3, 4);
    let h = h.unscale(linalg::spectral_norm(&h) * 1.2);
    let triv = groups::trivial_rep(vec![3]).unwrap();
    let r = hs::block_encoding_acceptance(&h, &triv).unwrap();
    let want = linalg::trace_of_product(&h, &h).re / 3.0;
    assert!((r.simulated - want).abs() < 1e-12);
    assert!((r.closed_form.unwrap() - want).abs() < 1e-12);
}

#[test]
fn block_encoding_is_unitary_and_norm_checked() {
    let h = linalg::random_hermitian(4, 2);
    let h = h.unscale(linalg::spectral_norm(&h));
    let b = hs::block_encode(&h).unwrap();
    assert!(linalg::unitarity_defect(&b) < 1e-12);
    assert!(hs::block_encode(&h.scale(1.01)).is_err());
}

#[test]
fn block_encoding_circuit_matches_trace_on_random_inputs() {
    let rep = groups::pauli_group(2).unwrap();
    for seed in 0..10 {
        let h = linalg::random_hermitian(4, seed);
        let h = h.unscale(linalg::spectral_norm(&h));
        let r = hs::block_encoding_acceptance(&h, &rep).unwrap();
        assert!(r.abs_diff().unwrap() < 1e-10);
    }
}

#[test]
fn otoc_symmetric_hamiltonian_concentrates_on_zero() {
    let h = dense(linalg::from_real_diagonal(&[0.3, -1.0, 0.7, 2.0]));
    let rep = groups::phase_group(4).unwrap();
    let r = hs::abelian_otoc(&h, &rep, 0.9).unwrap();
    assert!((r.probabilities[0] - 1.0).abs() < 1e-12);
    for p in &r.probabilities[1..] {
        assert!(p.abs() < 1e-12);
    }
}

#[test]
fn otoc_identity_label_is_one_and_circuit_agrees() {
    let h = dense(linalg::random_hermitian(4, 9));
    let rep = groups::phase_group(4).unwrap();
    let r = hs::abelian_otoc(&h, &rep, 0.6).unwrap();
    assert!((r.otoc[0].0 - 1.0).abs() < 1e-12 && r.otoc[0].1.abs() < 1e-12);
    assert!(r.circuit_error < 1e-12);
    assert!(r.max_imaginary < 1e-12);
    assert!(r.probabilities.iter().all(|&p| p > -1e-12));
}

#[test]
fn otoc_rejects_non_abelian_and_unlabelled_groups() {
    let h = two_qubit(linalg::random_hermitian(4, 1));
    assert!(hs::abelian_otoc(&h, &groups::d3_cnot_swap().unwrap(), 0.5).is_err());
    assert!(hs::abelian_otoc(&h, &groups::z2xz2_pauli().unwrap(), 0.5).is_err());
}

#[test]
fn otoc_sampling_respects_hoeffding() {
    let h = dense(linalg::random_hermitian(4, 31));
    let rep = groups::phase_group(4).unwrap();
    let eps = 0.05;
    let n = hs::hoeffding_shots(eps, 0.01).unwrap();
    assert_eq!(n, (4.0 / (eps * eps) * (400.0f64).ln()).ceil() as u64);
    let s = hs::abelian_otoc_sample(&h, &rep, 0.7, n, 5).unwrap();
    assert!(s.max_error < eps, "{}", s.max_error);
    let again = hs::abelian_otoc_sample(&h, &rep, 0.7, n, 5).unwrap();
    assert_eq!(s.counts, again.counts);
}

#[test]
fn dme_commuting_state_has_no_deficit() {
    let rho = DensityMatrix::new(linalg::from_real_diagonal(&[0.5, 0.2, 0.2, 0.1]), vec![2, 2])
        .unwrap();
    let rep = groups::z2xz2_pauli().unwrap();
    let r = hs::dme_acceptance(&rho, &rep, 1e-2).unwrap();
    assert!((r.acceptance - 1.0).abs() < 1e-12);
    assert!(r.residual <= 1e-8);
    assert!((r.delta - 1e-8).abs() < 1e-20);
}

#[test]
fn dme_residual_scales_as_fourth_power() {
    let rho = linalg::random_density(4, 4, 17).unwrap();
    let rho = DensityMatrix::new(rho.matrix().clone(), vec![2, 2]).unwrap();
    let rep = groups::pauli_group(2).unwrap();
    let ts: Vec<f64> = (0..8).map(|i| 0.2 * 0.7f64.powi(i)).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = ts
        .iter()
        .map(|&t| {
            let r = hs::dme_acceptance(&rho, &rep, t).unwrap();
            (t.ln(), r.residual.ln())
        })
        .unzip();
    let slope = fit_slope(&xs, &ys);
    assert!((slope - 4.0).abs() <= 0.2, "slope {slope}");
}

fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[test]
fn pauli_sum_parsing() {
    let h = HamiltonianSpec::from_pauli_sum("ZZ+XI+IX", &[1.0, 0.5, 0.5]).unwrap();
    let want = linalg::pauli_string("ZZ").unwrap()
        + linalg::pauli_string("XI").unwrap().scale(0.5)
        + linalg::pauli_string("IX").unwrap().scale(0.5);
    assert!(linalg::max_abs(&(h.matrix() - want)) < 1e-15);
    assert!(HamiltonianSpec::from_pauli_sum("ZZ+X", &[1.0, 1.0]).is_err());
}

#[test]
fn non_hermitian_hamiltonian_is_rejected() {
    let mut m = linalg::identity(2);
    m[(0, 1)] = c(1e-3, 0.0);
    assert!(matches!(
        HamiltonianSpec::dense(m, vec![2]),
        Err(symtest::SymError::NotHermitian(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn choi_and_trace_forms_agree(seed in 0u64..100_000, t in 0.0f64..2.0) {
        let hm = linalg::random_hermitian(4, seed);
        let h = two_qubit(hm.clone());
        let rep = groups::pauli_group(2).unwrap();
        let r = hs::covariance_acceptance(&h, &rep, t).unwrap();
        prop_assert!(r.abs_diff().unwrap() <= 1e-10);
        prop_assert!((r.simulated - trace_form_oracle(&hm, &rep, t)).abs() <= 1e-10);
        prop_assert!(r.simulated <= 1.0 + 1e-10 && r.simulated >= -1e-10);
    }

    #[test]
    fn acceptance_is_even_in_time(seed in 0u64..100_000, t in 0.0f64..3.0) {
        let h = two_qubit(linalg::random_hermitian(4, seed));
        let rep = groups::d3_cnot_swap().unwrap();
        let a = hs::covariance_acceptance(&h, &rep, t).unwrap().simulated;
        let b = hs::covariance_acceptance(&h, &rep, -t).unwrap().simulated;
        prop_assert!((a - b).abs() <= 1e-10);
    }

    #[test]
    fn deficit_form_matches_direct_difference(seed in 0u64..100_000, t in 0.1f64..2.0) {
        let h = two_qubit(linalg::random_hermitian(4, seed));
        let rep = groups::d3_cnot_swap().unwrap();
        let p = hs::covariance_acceptance(&h, &rep, t).unwrap().simulated;
        let d = hs::covariance_deficit(&h, &rep, t).unwrap();
        prop_assert!((1.0 - p - d).abs() <= 1e-12);
    }

    #[test]
    fn kadison_schwarz_bracket_is_non_negative(seed in 0u64..100_000) {
        let h = two_qubit(linalg::random_hermitian(4, seed));
        let rep = groups::d3_cnot_swap().unwrap();
        let psi = PureState::new(linalg::random_pure(4, seed + 1).vector().clone(), vec![2, 2]).unwrap();
        let r = hs::fixed_state_acceptance(&h, &rep, 0.3, &psi).unwrap();
        prop_assert!(r.bracket >= -1e-12);
    }

    #[test]
    fn dqc1_identity_holds(seed in 0u64..100_000, d in 1usize..9) {
        let u = linalg::random_unitary(d, seed).unwrap();
        let r = hs::dqc1_reduction_check(&u).unwrap();
        prop_assert!(r.abs_diff <= 1e-10);
        prop_assert!((r.trace_form - r.rhs).abs() <= 1e-10);
    }

    #[test]
    fn otoc_fourier_round_trip(seed in 0u64..100_000, t in 0.0f64..2.0) {
        let h = dense(linalg::random_hermitian(4, seed));
        let rep = groups::phase_group(4).unwrap();
        let r = hs::abelian_otoc(&h, &rep, t).unwrap();
        prop_assert!(r.roundtrip_error <= 1e-10);
        prop_assert!((r.sum_probabilities - 1.0).abs() <= 1e-12);
    }
}
