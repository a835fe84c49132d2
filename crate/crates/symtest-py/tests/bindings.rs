use num_complex::Complex64;
use symtest_py::*;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn state_from_lists_and_specs() {
    let s = PyState::new(vec![vec![c(0.5), c(0.0)], vec![c(0.0), c(0.5)]], None).unwrap();
    assert_eq!(s.dims(), vec![2]);
    assert!((s.purity() - 0.5).abs() < 1e-15);
    assert!(PyState::new(vec![vec![c(1.0), c(1.0)], vec![c(0.0), c(1.0)]], None).is_err());

    let bell = PyState::load("bell", 0).unwrap();
    assert!(bell.is_pure());
    assert_eq!(bell.reduce(vec![0]).unwrap().dims(), vec![2]);
}

#[test]
fn bose_through_bindings() {
    let st = PyState::load("singlet", 0).unwrap();
    let g = PyGroup::load("sym:2", Some(st.dims())).unwrap();
    assert!(g.is_linear());
    let r = bose_acceptance(&st, &g).unwrap();
    assert!(r.simulated.abs() < 1e-12);
    assert!(r.abs_diff.unwrap() < 1e-10);
}

#[test]
fn hamiltonian_functions() {
    let h = PyHamiltonian::load("nmr:1,2,0.5", 0).unwrap();
    let z = PyGroup::load("z2xz2-pauli", None).unwrap();
    let r = covariance_acceptance(&h, &z, 0.5).unwrap();
    assert!((r.simulated - 1.0).abs() < 1e-12);
    let d3 = PyGroup::load("d3-cnot-swap", None).unwrap();
    assert!(covariance_deficit(&h, &d3, 0.5).unwrap() > 0.0);
    let (sums, exact) = commutator_series(&h, &d3, 0.3, 12).unwrap();
    assert!((sums[12] - exact).abs() < 1e-10);
    let tim = PyHamiltonian::load("tim:3", 0).unwrap();
    assert!(trotter_error(&tim, 1.0, 16).unwrap() < trotter_error(&tim, 1.0, 4).unwrap());
}

#[test]
fn dqc1_and_separability() {
    let t = vec![
        vec![c(1.0), c(0.0)],
        vec![c(0.0), Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)],
    ];
    let (lhs, rhs) = dqc1_check(t).unwrap();
    assert!((lhs - rhs).abs() < 1e-12);
    let w = PyState::load("w:3-reduced", 0).unwrap();
    let p = separability_acceptance(&w, 2, "sym").unwrap();
    assert!((p - 7.0 / 9.0).abs() < 1e-14);
    assert_eq!(gate_count("sym", 5).unwrap(), 10);
    assert!((resources_to_rejection(&w, "sym", 2).unwrap() - 4.5).abs() < 1e-12);
    assert_eq!(cycle_index("sym", 2).unwrap(), "(1/2)(x1^2 + x2)");
    assert!(separability_acceptance(&w, 2, "bogus").is_err());
}

#[test]
fn optimizers_agree() {
    let st = PyState::load("random:4,2,2", 3).unwrap();
    let g = PyGroup::load("d3-cnot-swap", None).unwrap();
    let a = max_symmetric_fidelity(&st, &g, "gsym", 4, 3000, 1e-7, 0).unwrap();
    let b = prover_acceptance(&st, &g, "gsym", 4, 3000, 1e-7, 0, None).unwrap();
    assert!(a.converged && b.converged);
    assert!((a.value - b.value).abs() < 1e-3);
    assert!(max_symmetric_fidelity(&st, &g, "nope", 1, 10, 1e-7, 0).is_err());
}
