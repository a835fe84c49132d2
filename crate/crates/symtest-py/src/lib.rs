//! Python bindings for symtest.
//!
//! Matrices cross the boundary as nested lists of complex numbers; states,
//! Hamiltonians and groups can also be loaded from the same spec strings the
//! command-line tool accepts (`bell`, `w:3-reduced`, `tim:3`, `sym:2`, ...).

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use symtest::cli;
use symtest::groups::{CycleIndexPolynomial, FiniteGroup, UnitaryRepTable};
use symtest::ham_symmetry::{self as hs, HamiltonianSpec};
use symtest::linalg::{self, CMat, CVec, DensityMatrix, PureState};
use symtest::separability::{self as sep, GroupKind};
use symtest::state_symmetry::{self as ss, OptimResult, ProverConfig, SymmetryMode};
use symtest::SymError;

fn to_py(e: SymError) -> PyErr {
    match e {
        SymError::NonConvergence(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn mat_from(rows: Vec<Vec<Complex64>>) -> PyResult<CMat> {
    let n = rows.len();
    let m = rows.first().map(Vec::len).unwrap_or(0);
    if n == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("expected a non-empty rectangular matrix"));
    }
    let flat: Vec<Complex64> = rows.into_iter().flatten().collect();
    Ok(CMat::from_row_slice(n, m, &flat))
}

fn mat_to(m: &CMat) -> Vec<Vec<Complex64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn mode_from(s: &str) -> PyResult<SymmetryMode> {
    match s {
        "gsym" | "sym" => Ok(SymmetryMode::GSym),
        "gbse" | "bse" => Ok(SymmetryMode::Bse),
        "gse" | "se" => Ok(SymmetryMode::Se),
        _ => Err(PyValueError::new_err(format!("unknown mode {s:?}; use gsym, gbse or gse"))),
    }
}

/// A density matrix with its tensor-factor dimensions.
#[pyclass(name = "State", module = "symtest_py", skip_from_py_object)]
#[derive(Clone)]
pub struct PyState {
    rho: DensityMatrix,
    pure: Option<PureState>,
}

#[pymethods]
impl PyState {
    #[new]
    #[pyo3(signature = (matrix, dims=None))]
    pub fn new(matrix: Vec<Vec<Complex64>>, dims: Option<Vec<usize>>) -> PyResult<Self> {
        let m = mat_from(matrix)?;
        let dims = dims.unwrap_or_else(|| vec![m.nrows()]);
        Ok(Self {
            rho: DensityMatrix::new(m, dims).map_err(to_py)?,
            pure: None,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (vector, dims=None))]
    pub fn from_vector(vector: Vec<Complex64>, dims: Option<Vec<usize>>) -> PyResult<Self> {
        let dims = dims.unwrap_or_else(|| vec![vector.len()]);
        let psi = PureState::new(CVec::from_vec(vector), dims).map_err(to_py)?;
        Ok(Self {
            rho: psi.density(),
            pure: Some(psi),
        })
    }

    /// Fixture name, `random:d[,rank[,q]]` or `file:<path>`.
    #[staticmethod]
    #[pyo3(signature = (spec, seed=0))]
    pub fn load(spec: &str, seed: u64) -> PyResult<Self> {
        let s = cli::load_state(spec, seed).map_err(to_py)?;
        Ok(Self {
            rho: s.rho,
            pure: s.pure,
        })
    }

    #[getter]
    pub fn dims(&self) -> Vec<usize> {
        self.rho.dims().to_vec()
    }

    #[getter]
    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    #[getter]
    pub fn purity(&self) -> f64 {
        self.rho.purity()
    }

    #[getter]
    pub fn is_pure(&self) -> bool {
        self.pure.is_some()
    }

    pub fn matrix(&self) -> Vec<Vec<Complex64>> {
        mat_to(self.rho.matrix())
    }

    /// Partial trace keeping the listed factors.
    pub fn reduce(&self, keep: Vec<usize>) -> PyResult<Self> {
        Ok(Self {
            rho: self.rho.reduce(&keep).map_err(to_py)?,
            pure: None,
        })
    }

    fn __repr__(&self) -> String {
        format!("State(dims={:?}, purity={:.6})", self.rho.dims(), self.rho.purity())
    }
}

#[pyclass(name = "Hamiltonian", module = "symtest_py", skip_from_py_object)]
#[derive(Clone)]
pub struct PyHamiltonian {
    h: HamiltonianSpec,
}

#[pymethods]
impl PyHamiltonian {
    #[new]
    #[pyo3(signature = (matrix, dims=None))]
    pub fn new(matrix: Vec<Vec<Complex64>>, dims: Option<Vec<usize>>) -> PyResult<Self> {
        let m = mat_from(matrix)?;
        let dims = dims.unwrap_or_else(|| vec![m.nrows()]);
        Ok(Self {
            h: HamiltonianSpec::dense(m, dims).map_err(to_py)?,
        })
    }

    /// Fixture (`tim:n`, `nmr:w1,w2,J`, `xy:n[,J]`), `pauli:<strings>:<coeffs>`,
    /// `random:d` or `file:<path>`.
    #[staticmethod]
    #[pyo3(signature = (spec, seed=0))]
    pub fn load(spec: &str, seed: u64) -> PyResult<Self> {
        Ok(Self {
            h: cli::load_hamiltonian(spec, seed).map_err(to_py)?,
        })
    }

    /// Sum of coefficient × Pauli string, e.g. `pauli("ZZ,XI,IX", [1.0, 0.5, 0.5])`.
    #[staticmethod]
    pub fn pauli(strings: &str, coefficients: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            h: HamiltonianSpec::from_pauli_sum(strings, &coefficients).map_err(to_py)?,
        })
    }

    /// Rescaled to the given spectral norm.
    #[pyo3(signature = (target=1.0))]
    pub fn normalized(&self, target: f64) -> PyResult<Self> {
        Ok(Self {
            h: hs::normalized(&self.h, target).map_err(to_py)?,
        })
    }

    #[getter]
    pub fn dims(&self) -> Vec<usize> {
        self.h.dims().to_vec()
    }

    #[getter]
    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    #[getter]
    pub fn norm(&self) -> f64 {
        self.h.norm()
    }

    pub fn matrix(&self) -> Vec<Vec<Complex64>> {
        mat_to(&self.h.matrix())
    }

    fn __repr__(&self) -> String {
        format!("Hamiltonian(dims={:?}, local_terms={})", self.h.dims(), self.h.terms().map_or(0, |t| t.len()))
    }
}

/// A finite group given by its unitary representation matrices.
#[pyclass(name = "Group", module = "symtest_py", skip_from_py_object)]
#[derive(Clone)]
pub struct PyGroup {
    rep: UnitaryRepTable,
}

#[pymethods]
impl PyGroup {
    /// `sym:k`, `cyc:k`, `dih:k`, `zpow:m^n` (acting on `dims`), `kext:k` (dims = [d_A, d_B]),
    /// a named representation such as `d3-cnot-swap`, or `table:<path>`.
    #[staticmethod]
    #[pyo3(signature = (spec, dims=None))]
    pub fn load(spec: &str, dims: Option<Vec<usize>>) -> PyResult<Self> {
        let dims = dims.unwrap_or_default();
        let rep = cli::load_group(spec, &dims).map_err(to_py)?;
        Ok(Self {
            rep: rep.table().map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (matrices, dims=None, labels=None, cyclic_labels=None))]
    pub fn from_matrices(
        matrices: Vec<Vec<Vec<Complex64>>>,
        dims: Option<Vec<usize>>,
        labels: Option<Vec<String>>,
        cyclic_labels: Option<Vec<usize>>,
    ) -> PyResult<Self> {
        let mats = matrices.into_iter().map(mat_from).collect::<PyResult<Vec<_>>>()?;
        let d = mats.first().map(|m| m.nrows()).unwrap_or(0);
        let labels = labels.unwrap_or_else(|| (0..mats.len()).map(|i| format!("g{i}")).collect());
        let mut rep = UnitaryRepTable::from_matrices("table", labels, mats, dims.unwrap_or(vec![d]))
            .map_err(to_py)?;
        if let Some(l) = cyclic_labels {
            rep = rep.with_cyclic_labels(l).map_err(to_py)?;
        }
        Ok(Self { rep })
    }

    #[getter]
    pub fn order(&self) -> usize {
        self.rep.order()
    }

    #[getter]
    pub fn dim(&self) -> usize {
        self.rep.dim()
    }

    #[getter]
    pub fn dims(&self) -> Vec<usize> {
        self.rep.dims().to_vec()
    }

    #[getter]
    pub fn labels(&self) -> Vec<String> {
        self.rep.labels().to_vec()
    }

    /// False for projective representations, which the Bose test rejects.
    #[getter]
    pub fn is_linear(&self) -> bool {
        self.rep.phase_trivial()
    }

    pub fn projector(&self) -> PyResult<Vec<Vec<Complex64>>> {
        Ok(mat_to(&self.rep.projector().map_err(to_py)?))
    }

    fn __repr__(&self) -> String {
        format!("Group({}, order={}, dims={:?})", self.rep.name(), self.rep.order(), self.rep.dims())
    }
}

/// A simulated value with its closed-form counterpart.
#[pyclass(name = "Report", module = "symtest_py", skip_from_py_object, get_all)]
#[derive(Clone, Debug)]
pub struct PyReport {
    pub simulated: f64,
    pub closed_form: Option<f64>,
    pub abs_diff: Option<f64>,
    pub std_error: Option<f64>,
    pub method: String,
}

impl From<ss::AcceptanceReport> for PyReport {
    fn from(r: ss::AcceptanceReport) -> Self {
        Self {
            simulated: r.simulated,
            closed_form: r.closed_form,
            abs_diff: r.abs_diff(),
            std_error: r.std_error,
            method: r.method,
        }
    }
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        format!("Report({:?})", self)
    }
}

#[pyclass(name = "Optimum", module = "symtest_py", skip_from_py_object, get_all)]
#[derive(Clone, Debug)]
pub struct PyOptimum {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub best_restart: usize,
    pub restart_values: Vec<f64>,
    pub method: String,
}

impl From<OptimResult> for PyOptimum {
    fn from(r: OptimResult) -> Self {
        Self {
            value: r.value,
            converged: r.converged,
            iterations: r.iterations,
            best_restart: r.best_restart,
            restart_values: r.restart_values,
            method: r.method,
        }
    }
}

#[pymethods]
impl PyOptimum {
    fn __repr__(&self) -> String {
        format!("Optimum(value={}, converged={}, method={})", self.value, self.converged, self.method)
    }
}

/// Acceptance of the G-Bose symmetry test, circuit against projector.
#[pyfunction]
pub fn bose_acceptance(state: &PyState, group: &PyGroup) -> PyResult<PyReport> {
    Ok(ss::bose_acceptance(&state.rho, &group.rep).map_err(to_py)?.into())
}

/// Sampled Bose test with a binomial standard error.
#[pyfunction]
#[pyo3(signature = (state, group, shots, seed=0))]
pub fn bose_sample(state: &PyState, group: &PyGroup, shots: u64, seed: u64) -> PyResult<PyReport> {
    let r = match &state.pure {
        Some(p) => ss::bose_circuit_sample(p, &group.rep, shots, seed),
        None => ss::bose_circuit_sample_mixed(&state.rho, &group.rep, shots, seed),
    };
    Ok(r.map_err(to_py)?.into())
}

fn prover_config(restarts: usize, max_iters: usize, tol: f64, seed: u64, ancilla: Option<usize>) -> ProverConfig {
    ProverConfig {
        ancilla_dim: ancilla,
        restarts,
        max_iters,
        tolerance: tol,
        seed,
        ..ProverConfig::default()
    }
}

/// Maximum fidelity with G-symmetric (`gsym`), G-BSE (`gbse`) or G-SE (`gse`) states.
#[pyfunction]
#[pyo3(signature = (state, group, mode="gsym", restarts=8, max_iters=3000, tol=1e-7, seed=0))]
pub fn max_symmetric_fidelity(
    state: &PyState,
    group: &PyGroup,
    mode: &str,
    restarts: usize,
    max_iters: usize,
    tol: f64,
    seed: u64,
) -> PyResult<PyOptimum> {
    let cfg = prover_config(restarts, max_iters, tol, seed, None);
    let r = ss::max_symmetric_fidelity(&state.rho, &group.rep, mode_from(mode)?, &cfg).map_err(to_py)?;
    Ok(r.into())
}

/// The same optimum reached by optimizing the prover's unitary.
#[pyfunction]
#[pyo3(signature = (state, group, mode="gsym", restarts=8, max_iters=3000, tol=1e-7, seed=0, ancilla=None))]
#[allow(clippy::too_many_arguments)]
pub fn prover_acceptance(
    state: &PyState,
    group: &PyGroup,
    mode: &str,
    restarts: usize,
    max_iters: usize,
    tol: f64,
    seed: u64,
    ancilla: Option<usize>,
) -> PyResult<PyOptimum> {
    let cfg = prover_config(restarts, max_iters, tol, seed, ancilla);
    let r = ss::prover_acceptance(&state.rho, &group.rep, mode_from(mode)?, &cfg).map_err(to_py)?;
    Ok(r.into())
}

/// Hamiltonian covariance acceptance at time t.
#[pyfunction]
pub fn covariance_acceptance(h: &PyHamiltonian, group: &PyGroup, t: f64) -> PyResult<PyReport> {
    Ok(hs::covariance_acceptance(&h.h, &group.rep, t).map_err(to_py)?.into())
}

/// 1 − acceptance, computed without cancellation.
#[pyfunction]
pub fn covariance_deficit(h: &PyHamiltonian, group: &PyGroup, t: f64) -> PyResult<f64> {
    hs::covariance_deficit(&h.h, &group.rep, t).map_err(to_py)
}

/// Partial sums of the nested-commutator series (orders 0..=order) and the exact value.
#[pyfunction]
pub fn commutator_series(h: &PyHamiltonian, group: &PyGroup, t: f64, order: usize) -> PyResult<(Vec<f64>, f64)> {
    let s = hs::commutator_series(&h.h, &group.rep, t, order).map_err(to_py)?;
    Ok((s.partial_sums, s.exact))
}

/// Spectral-norm error of first-order Trotterization with r steps.
#[pyfunction]
pub fn trotter_error(h: &PyHamiltonian, t: f64, r: usize) -> PyResult<f64> {
    let exact = linalg::expm_hermitian(&h.h.matrix(), t).map_err(to_py)?;
    let u = hs::trotter_evolution(&h.h, t, r).map_err(to_py)?;
    Ok(linalg::spectral_norm(&(u - exact)))
}

/// (acceptance of the DQC1 reduction, 1/4 + Re Tr[U²]/4d).
#[pyfunction]
pub fn dqc1_check(unitary: Vec<Vec<Complex64>>) -> PyResult<(f64, f64)> {
    let r = hs::dqc1_reduction_check(&mat_from(unitary)?).map_err(to_py)?;
    Ok((r.lhs, r.rhs))
}

#[pyfunction]
pub fn block_encoding_acceptance(h: &PyHamiltonian, group: &PyGroup) -> PyResult<PyReport> {
    Ok(hs::block_encoding_acceptance(&h.h.matrix(), &group.rep).map_err(to_py)?.into())
}

/// Fourier-label distribution and the group-averaged OTOCs, indexed by cyclic label.
#[pyfunction]
pub fn otoc(h: &PyHamiltonian, group: &PyGroup, t: f64) -> PyResult<(Vec<f64>, Vec<Complex64>)> {
    let r = hs::abelian_otoc(&h.h, &group.rep, t).map_err(to_py)?;
    Ok((
        r.probabilities,
        r.otoc.into_iter().map(|(re, im)| Complex64::new(re, im)).collect(),
    ))
}

/// Acceptance of the k-copy separability test for `sym`, `cyc` or `dih`.
#[pyfunction]
#[pyo3(signature = (state, k, group="sym"))]
pub fn separability_acceptance(state: &PyState, k: usize, group: &str) -> PyResult<f64> {
    let kind = GroupKind::parse(group).map_err(to_py)?;
    Ok(sep::acceptance_kind(&state.rho, kind, k).map_err(to_py)?.p)
}

/// Exact controlled-SWAP count of the test construction.
#[pyfunction]
pub fn gate_count(group: &str, k: usize) -> PyResult<u64> {
    let kind = GroupKind::parse(group).map_err(to_py)?;
    Ok(sep::gate_count(kind, k).map_err(to_py)?.cswap_count)
}

/// Controlled-SWAPs per expected rejection.
#[pyfunction]
pub fn resources_to_rejection(state: &PyState, group: &str, k: usize) -> PyResult<f64> {
    let kind = GroupKind::parse(group).map_err(to_py)?;
    Ok(sep::resources_to_rejection(&state.rho, kind, k).map_err(to_py)?.ratio)
}

/// Cycle index polynomial as text, e.g. `(1/2)(x1^2 + x2)`.
#[pyfunction]
pub fn cycle_index(group: &str, k: usize) -> PyResult<String> {
    let z = match GroupKind::parse(group).map_err(to_py)? {
        GroupKind::Symmetric => CycleIndexPolynomial::symmetric(k).map_err(to_py)?,
        GroupKind::Cyclic => FiniteGroup::cyclic(k).map_err(to_py)?.cycle_index(),
        GroupKind::Dihedral => FiniteGroup::dihedral(k).map_err(to_py)?.cycle_index(),
    };
    Ok(z.to_string())
}

#[pymodule]
fn symtest_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyState>()?;
    m.add_class::<PyHamiltonian>()?;
    m.add_class::<PyGroup>()?;
    m.add_class::<PyReport>()?;
    m.add_class::<PyOptimum>()?;
    m.add_function(wrap_pyfunction!(bose_acceptance, m)?)?;
    m.add_function(wrap_pyfunction!(bose_sample, m)?)?;
    m.add_function(wrap_pyfunction!(max_symmetric_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(prover_acceptance, m)?)?;
    m.add_function(wrap_pyfunction!(covariance_acceptance, m)?)?;
    m.add_function(wrap_pyfunction!(covariance_deficit, m)?)?;
    m.add_function(wrap_pyfunction!(commutator_series, m)?)?;
    m.add_function(wrap_pyfunction!(trotter_error, m)?)?;
    m.add_function(wrap_pyfunction!(dqc1_check, m)?)?;
    m.add_function(wrap_pyfunction!(block_encoding_acceptance, m)?)?;
    m.add_function(wrap_pyfunction!(otoc, m)?)?;
    m.add_function(wrap_pyfunction!(separability_acceptance, m)?)?;
    m.add_function(wrap_pyfunction!(gate_count, m)?)?;
    m.add_function(wrap_pyfunction!(resources_to_rejection, m)?)?;
    m.add_function(wrap_pyfunction!(cycle_index, m)?)?;
    Ok(())
}
