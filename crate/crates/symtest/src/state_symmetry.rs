//! State symmetry tests: the G-Bose symmetry test (projector and control-register
//! circuit), prover-assisted tests as optimizations over the prover's unitary,
//! state-side maximum symmetric fidelities, and related checks.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SymError};
use crate::groups::{phase_group, PermutationRep, UnitaryRepTable};
use crate::linalg::{
    self, eigh, eigh_unchecked, frobenius, identity, purify, sqrt_psd, CMat, CVec, DensityMatrix,
    PureState, ZERO,
};

/// Result of simulating one acceptance probability, with an optional closed form.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct AcceptanceReport {
    pub simulated: f64,
    pub closed_form: Option<f64>,
    /// 0 for exact simulation
    pub shots: u64,
    pub seed: u64,
    pub method: String,
    pub std_error: Option<f64>,
}

impl AcceptanceReport {
    pub fn exact(method: &str, simulated: f64, closed_form: Option<f64>) -> Self {
        Self {
            simulated,
            closed_form,
            shots: 0,
            seed: 0,
            method: method.to_string(),
            std_error: None,
        }
    }

    pub fn abs_diff(&self) -> Option<f64> {
        self.closed_form.map(|c| (c - self.simulated).abs())
    }
}

/// Zero out probabilities below 1e-14 (and negatives from rounding), then renormalize.
pub fn clean_distribution(p: &[f64]) -> Vec<f64> {
    let mut q: Vec<f64> = p.iter().map(|&x| if x < 1e-14 { 0.0 } else { x }).collect();
    let s: f64 = q.iter().sum();
    if s > 0.0 {
        for x in q.iter_mut() {
            *x /= s;
        }
    }
    q
}

/// Inverse-CDF draw for a uniform u ∈ [0, 1).
pub fn sample_index(p: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &x) in p.iter().enumerate() {
        if x > 0.0 {
            last = i;
            acc += x;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// A unitary action of a finite group, either by tensor-factor permutations or by
/// an explicit table of matrices.
pub trait GroupAction: Sync {
    fn dims(&self) -> Vec<usize>;
    fn order(&self) -> usize;
    fn projector(&self) -> Result<CMat>;
    fn twirl(&self, x: &CMat) -> Result<CMat>;
    /// U(g_i) M for a matrix whose rows index the representation space.
    fn apply_left(&self, i: usize, m: &CMat) -> Result<CMat>;
    /// False for projective representations, whose group average is not a projector.
    fn is_linear(&self) -> bool;

    fn dim(&self) -> usize {
        linalg::product(&self.dims())
    }
}

impl GroupAction for UnitaryRepTable {
    fn dims(&self) -> Vec<usize> {
        UnitaryRepTable::dims(self).to_vec()
    }
    fn order(&self) -> usize {
        UnitaryRepTable::order(self)
    }
    fn projector(&self) -> Result<CMat> {
        UnitaryRepTable::projector(self)
    }
    fn twirl(&self, x: &CMat) -> Result<CMat> {
        UnitaryRepTable::twirl(self, x)
    }
    fn apply_left(&self, i: usize, m: &CMat) -> Result<CMat> {
        if m.nrows() != self.dim() {
            return Err(SymError::Dimension("operand size mismatch".into()));
        }
        Ok(self.matrix(i) * m)
    }
    fn is_linear(&self) -> bool {
        self.phase_trivial()
    }
}

impl GroupAction for PermutationRep {
    fn dims(&self) -> Vec<usize> {
        PermutationRep::dims(self)
    }
    fn order(&self) -> usize {
        self.group().order()
    }
    fn projector(&self) -> Result<CMat> {
        PermutationRep::projector(self)
    }
    fn twirl(&self, x: &CMat) -> Result<CMat> {
        PermutationRep::twirl(self, x)
    }
    fn apply_left(&self, i: usize, m: &CMat) -> Result<CMat> {
        if m.nrows() != self.dim() {
            return Err(SymError::Dimension("operand size mismatch".into()));
        }
        let map = self.index_map(self.group().element(i))?;
        let mut out = CMat::zeros(m.nrows(), m.ncols());
        for (x, &y) in map.iter().enumerate() {
            out.row_mut(y).copy_from(&m.row(x));
        }
        Ok(out)
    }
    fn is_linear(&self) -> bool {
        true
    }
}

fn require_linear<R: GroupAction + ?Sized>(rep: &R) -> Result<()> {
    if !rep.is_linear() {
        return Err(SymError::Group(
            "projective representation: the group average is not a projector".into(),
        ));
    }
    Ok(())
}

fn check_same_space<R: GroupAction + ?Sized>(d: usize, rep: &R) -> Result<()> {
    if rep.dim() != d {
        return Err(SymError::Dimension(format!(
            "representation acts on dimension {}, state has dimension {d}",
            rep.dim()
        )));
    }
    Ok(())
}

/// Purification as a matrix Ψ[r, s] (reference rows, system columns).
fn purification_matrix(rho: &DensityMatrix) -> CMat {
    let psi = purify(rho);
    let d = rho.dim();
    let r = psi.dim() / d;
    CMat::from_fn(r, d, |i, s| psi.vector()[i * d + s])
}

fn pure_matrix(psi: &PureState) -> CMat {
    CMat::from_fn(1, psi.dim(), |_, s| psi.vector()[s])
}

/// Outcome distribution of the control register after F, controlled-U(g), F†, for a
/// state given by its purification matrix Ψ (columns = system). Control outcome 0
/// accepts.
fn control_register_distribution<R: GroupAction + ?Sized>(psi: &CMat, rep: &R) -> Result<Vec<f64>> {
    let n = rep.order();
    let d = rep.dim();
    linalg::check_dim(n * d, "control register circuit")?;
    // system-major columns: B = Ψᵀ so that U acts on rows
    let b = psi.transpose();
    let branches = (0..n)
        .map(|g| rep.apply_left(g, &b))
        .collect::<Result<Vec<_>>>()?;
    let probs = (0..n)
        .into_par_iter()
        .map(|c| {
            let mut acc = CMat::zeros(b.nrows(), b.ncols());
            for (g, m) in branches.iter().enumerate() {
                let ang = -2.0 * std::f64::consts::PI * ((c * g) % n) as f64 / n as f64;
                acc += m * Complex64::from_polar(1.0, ang);
            }
            frobenius(&acc).powi(2) / (n * n) as f64
        })
        .collect();
    Ok(probs)
}

/// Tr[Π ρ] by the projector formula and by simulating the control-register circuit.
pub fn bose_acceptance<R: GroupAction + ?Sized>(
    rho: &DensityMatrix,
    rep: &R,
) -> Result<AcceptanceReport> {
    check_same_space(rho.dim(), rep)?;
    require_linear(rep)?;
    let pi = rep.projector()?;
    let closed = linalg::trace_of_product(&pi, rho.matrix()).re;
    let probs = control_register_distribution(&purification_matrix(rho), rep)?;
    Ok(AcceptanceReport::exact(
        "circuit-vs-projector",
        probs[0],
        Some(closed),
    ))
}

/// Monte Carlo estimate of the Bose test on a pure input.
pub fn bose_circuit_sample<R: GroupAction + ?Sized>(
    psi: &PureState,
    rep: &R,
    shots: u64,
    seed: u64,
) -> Result<AcceptanceReport> {
    check_same_space(psi.dim(), rep)?;
    require_linear(rep)?;
    if shots == 0 {
        return Err(SymError::Invalid("shots must be >= 1".into()));
    }
    let probs = clean_distribution(&control_register_distribution(&pure_matrix(psi), rep)?);
    bose_sample_from(&probs, shots, seed, psi.density(), rep)
}

/// Monte Carlo estimate of the Bose test on a mixed input (purified internally).
pub fn bose_circuit_sample_mixed<R: GroupAction + ?Sized>(
    rho: &DensityMatrix,
    rep: &R,
    shots: u64,
    seed: u64,
) -> Result<AcceptanceReport> {
    check_same_space(rho.dim(), rep)?;
    require_linear(rep)?;
    if shots == 0 {
        return Err(SymError::Invalid("shots must be >= 1".into()));
    }
    let probs = clean_distribution(&control_register_distribution(
        &purification_matrix(rho),
        rep,
    )?);
    bose_sample_from(&probs, shots, seed, rho.clone(), rep)
}

fn bose_sample_from<R: GroupAction + ?Sized>(
    probs: &[f64],
    shots: u64,
    seed: u64,
    rho: DensityMatrix,
    rep: &R,
) -> Result<AcceptanceReport> {
    let mut rng = linalg::rng_from_seed(seed);
    let mut accepted = 0u64;
    for _ in 0..shots {
        let u: f64 = rng.random();
        if sample_index(probs, u) == 0 {
            accepted += 1;
        }
    }
    let p = accepted as f64 / shots as f64;
    let closed = linalg::trace_of_product(&rep.projector()?, rho.matrix()).re;
    Ok(AcceptanceReport {
        simulated: p,
        closed_form: Some(closed),
        shots,
        seed,
        method: "circuit-sample-vs-projector".into(),
        std_error: Some((p * (1.0 - p) / shots as f64).sqrt()),
    })
}

/// Which symmetric set a fidelity or prover optimization targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SymmetryMode {
    /// states invariant under the representation
    GSym,
    /// reductions of states in the range of the Bose projector on R ⊗ S
    Bse,
    /// reductions of G-invariant states on R ⊗ S
    Se,
}

impl SymmetryMode {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::GSym => "gsym",
            Self::Bse => "gbse",
            Self::Se => "gse",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProverConfig {
    /// ancilla dimension E′; None picks the mode default
    pub ancilla_dim: Option<usize>,
    pub restarts: usize,
    pub max_iters: usize,
    pub initial_step: f64,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for ProverConfig {
    fn default() -> Self {
        Self {
            ancilla_dim: None,
            restarts: 8,
            max_iters: 3000,
            initial_step: 0.5,
            tolerance: 1e-7,
            seed: 0,
        }
    }
}

impl ProverConfig {
    fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(SymError::Invalid("restarts must be >= 1".into()));
        }
        if self.ancilla_dim == Some(0) {
            return Err(SymError::Invalid("ancilla dimension must be >= 1".into()));
        }
        if !(self.initial_step > 0.0) || !(self.tolerance > 0.0) {
            return Err(SymError::Invalid("step and tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Best value over restarts with convergence diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct OptimResult {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub best_restart: usize,
    pub restart_values: Vec<f64>,
    /// last accepted objective change of the best run
    pub last_change: f64,
    pub method: String,
}

struct RunResult {
    value: f64,
    converged: bool,
    iterations: usize,
    last_change: f64,
}

fn merge_runs(runs: Vec<RunResult>, method: &str) -> OptimResult {
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.value > runs[best].value {
            best = i;
        }
    }
    OptimResult {
        value: runs[best].value,
        converged: runs[best].converged,
        iterations: runs[best].iterations,
        best_restart: best,
        restart_values: runs.iter().map(|r| r.value).collect(),
        last_change: runs[best].last_change,
        method: method.to_string(),
    }
}

/// Seed for restart i, spread so that neighbouring seeds do not share streams.
fn restart_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(i as u64)
        .rotate_left(17)
}

/// Map X ↦ σ onto the candidate set and its adjoint, for the state-side ascent.
struct CandidateMap<'a, R: GroupAction + ?Sized> {
    mode: SymmetryMode,
    rep: &'a R,
    d_r: usize,
    d_s: usize,
    projector: Option<CMat>,
}

impl<'a, R: GroupAction + ?Sized> CandidateMap<'a, R> {
    fn domain_dim(&self) -> usize {
        match self.mode {
            SymmetryMode::GSym => self.d_s,
            _ => self.d_r * self.d_s,
        }
    }

    fn forward(&self, x: &CMat) -> Result<CMat> {
        let dims = [self.d_r, self.d_s];
        match self.mode {
            SymmetryMode::GSym => self.rep.twirl(x),
            SymmetryMode::Bse => {
                let p = self.projector.as_ref().expect("projector");
                linalg::partial_trace(&(p * x * p), &dims, &[1])
            }
            SymmetryMode::Se => linalg::partial_trace(&self.rep.twirl(x)?, &dims, &[1]),
        }
    }

    fn adjoint(&self, y: &CMat) -> Result<CMat> {
        match self.mode {
            SymmetryMode::GSym => self.rep.twirl(y),
            SymmetryMode::Bse => {
                let p = self.projector.as_ref().expect("projector");
                Ok(p * linalg::tensor(&identity(self.d_r), y) * p)
            }
            SymmetryMode::Se => self.rep.twirl(&linalg::tensor(&identity(self.d_r), y)),
        }
    }

    fn adjoint_identity(&self) -> CMat {
        match self.mode {
            SymmetryMode::Bse => self.projector.clone().expect("projector"),
            _ => identity(self.domain_dim()),
        }
    }
}

/// √F(ρ, σ) with its gradient with respect to σ, given √ρ.
fn root_fidelity_and_gradient(sqrt_rho: &CMat, sigma: &CMat) -> (f64, CMat) {
    let m = linalg::hermitize(&(sqrt_rho * sigma * sqrt_rho));
    let e = eigh_unchecked(&m);
    let scale = e.values.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(1e-300);
    let root = e
        .values
        .iter()
        .map(|&x| x.max(0.0).sqrt())
        .sum::<f64>();
    let inv_sqrt = e.apply_function(|x| {
        if x > 1e-12 * scale {
            Complex64::new(1.0 / x.sqrt(), 0.0)
        } else {
            ZERO
        }
    });
    let grad = (sqrt_rho * inv_sqrt * sqrt_rho).scale(0.5);
    (root, linalg::hermitize(&grad))
}

fn normalize_frobenius(m: &CMat) -> CMat {
    let n = frobenius(m);
    m.unscale(n)
}

fn state_side_run<R: GroupAction + ?Sized>(
    map: &CandidateMap<'_, R>,
    sqrt_rho: &CMat,
    start: CMat,
    cfg: &ProverConfig,
) -> Result<RunResult> {
    let eval = |g: &CMat| -> Result<(f64, CMat, CMat)> {
        let x = g * g.adjoint();
        let l = map.forward(&x)?;
        let tr = linalg::trace(&l).re;
        if !(tr > 1e-14) {
            return Ok((0.0, CMat::zeros(1, 1), l));
        }
        let sigma = l.unscale(tr);
        let (root, grad) = root_fidelity_and_gradient(sqrt_rho, &sigma);
        Ok((root, grad, sigma))
    };
    let mut gamma = normalize_frobenius(&start);
    let (mut f, mut gs, mut sigma) = eval(&gamma)?;
    let mut step = cfg.initial_step;
    let mut converged = false;
    let mut last_change = f64::NAN;
    let mut iterations = 0;
    let l_star_i = map.adjoint_identity();
    for it in 0..cfg.max_iters {
        iterations = it + 1;
        if gs.nrows() != sigma.nrows() {
            break;
        }
        let tgs = linalg::trace_of_product(&gs, &sigma).re;
        let ghat = map.adjoint(&gs)? - l_star_i.scale(tgs);
        let dir = &ghat * &gamma;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = normalize_frobenius(&(&gamma + dir.scale(step)));
            let (fc, gc, sc) = eval(&cand)?;
            if fc > f {
                last_change = fc * fc - f * f;
                gamma = cand;
                f = fc;
                gs = gc;
                sigma = sc;
                step = (step * 1.5).min(1e3);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted || last_change.abs() < cfg.tolerance * 1e-3 {
            converged = true;
            if !accepted {
                last_change = 0.0;
            }
            break;
        }
    }
    Ok(RunResult {
        value: (f * f).min(1.0),
        converged,
        iterations,
        last_change,
    })
}

fn reference_dim<R: GroupAction + ?Sized>(
    rho: &DensityMatrix,
    rep: &R,
    mode: SymmetryMode,
) -> Result<usize> {
    let d_s = rho.dim();
    match mode {
        SymmetryMode::GSym => {
            check_same_space(d_s, rep)?;
            Ok(1)
        }
        _ => {
            if mode == SymmetryMode::Bse {
                require_linear(rep)?;
            }
            let d = rep.dim();
            if d % d_s != 0 {
                return Err(SymError::Dimension(format!(
                    "representation dimension {d} is not a multiple of the state dimension {d_s}"
                )));
            }
            Ok(d / d_s)
        }
    }
}

/// max F(ρ, σ) over the symmetric set of the given mode, by ascent on σ = L(ΓΓ†)/Tr.
/// For BSE and SE the representation acts on R ⊗ S with S last.
pub fn max_symmetric_fidelity<R: GroupAction + ?Sized>(
    rho: &DensityMatrix,
    rep: &R,
    mode: SymmetryMode,
    cfg: &ProverConfig,
) -> Result<OptimResult> {
    cfg.validate()?;
    let d_r = reference_dim(rho, rep, mode)?;
    let d_s = rho.dim();
    let map = CandidateMap {
        mode,
        rep,
        d_r,
        d_s,
        projector: if mode == SymmetryMode::Bse {
            Some(rep.projector()?)
        } else {
            None
        },
    };
    let sqrt_rho = sqrt_psd(rho.matrix())?;
    let n = map.domain_dim();
    // first start: X = (I_R / d_R) ⊗ ρ, then Gaussian starts
    let first = linalg::tensor(&identity(d_r), &sqrt_rho);
    let runs = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let start = if i == 0 {
                if mode == SymmetryMode::GSym {
                    sqrt_rho.clone()
                } else {
                    first.clone()
                }
            } else {
                let mut rng = linalg::rng_from_seed(restart_seed(cfg.seed, i));
                linalg::gaussian_matrix(n, n, &mut rng)
            };
            state_side_run(&map, &sqrt_rho, start, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merge_runs(runs, &format!("state-ascent-{}", mode.tag())))
}

/// Closed forms on pure inputs: λmax of 𝒯(ψ), Π(I⊗ψ)Π or 𝒯(I⊗ψ).
pub fn max_symmetric_fidelity_pure<R: GroupAction + ?Sized>(
    psi: &PureState,
    rep: &R,
    mode: SymmetryMode,
) -> Result<f64> {
    let rho = psi.density();
    let d_r = reference_dim(&rho, rep, mode)?;
    let m = match mode {
        SymmetryMode::GSym => rep.twirl(rho.matrix())?,
        SymmetryMode::Bse => {
            let p = rep.projector()?;
            &p * linalg::tensor(&identity(d_r), rho.matrix()) * &p
        }
        SymmetryMode::Se => rep.twirl(&linalg::tensor(&identity(d_r), rho.matrix()))?,
    };
    let e = eigh(&linalg::hermitize(&m))?;
    Ok(*e.values.last().unwrap_or(&0.0))
}

/// The prover's register layout and the verifier's projection for one mode.
struct ProverProblem<'a> {
    mode: SymmetryMode,
    rep: &'a UnitaryRepTable,
    projector: Option<CMat>,
    d_r: usize,
    d_s: usize,
    /// dimension of the register a handed to the verifier
    a_dim: usize,
    e_dim: usize,
}

impl ProverProblem<'_> {
    fn n(&self) -> usize {
        self.a_dim * self.e_dim
    }

    /// Q acting on Φ with rows (a, e′) and columns s.
    fn apply_q(&self, phi: &CMat) -> Result<CMat> {
        let (ad, ed, ds) = (self.a_dim, self.e_dim, self.d_s);
        let mut out = CMat::zeros(phi.nrows(), phi.ncols());
        for e in 0..ed {
            let block = CMat::from_fn(ad, ds, |a, s| phi[(a * ed + e, s)]);
            let moved = match self.mode {
                SymmetryMode::GSym => {
                    // (Ū ⊗ U) on Ŝ ⊗ S: M ↦ avg Ū M Uᵀ
                    let mut acc = CMat::zeros(ad, ds);
                    for u in self.rep.matrices() {
                        acc += u.map(|z| z.conj()) * &block * u.transpose();
                    }
                    acc.unscale(self.rep.order() as f64)
                }
                SymmetryMode::Bse => {
                    let p = self.projector.as_ref().expect("projector");
                    let v = CVec::from_fn(ad * ds, |i, _| block[(i / ds, i % ds)]);
                    let w = p * v;
                    CMat::from_fn(ad, ds, |a, s| w[a * ds + s])
                }
                SymmetryMode::Se => {
                    // a = (r, r̂, ŝ); K[(r, s), (r̂, ŝ)] ↦ 𝒯(K)
                    let (dr, dsv) = (self.d_r, self.d_s);
                    let rs = dr * dsv;
                    let k = CMat::from_fn(rs, rs, |x, y| {
                        let (r, s) = (x / dsv, x % dsv);
                        block[(r * rs + y, s)]
                    });
                    let tk = self.rep.twirl(&k)?;
                    CMat::from_fn(ad, ds, |a, s| {
                        let (r, y) = (a / rs, a % rs);
                        tk[(r * dsv + s, y)]
                    })
                }
            };
            for a in 0..ad {
                for s in 0..ds {
                    out[(a * ed + e, s)] = moved[(a, s)];
                }
            }
        }
        Ok(out)
    }
}

fn prover_run(
    problem: &ProverProblem<'_>,
    b: &CMat,
    start: CMat,
    cfg: &ProverConfig,
) -> Result<RunResult> {
    let eval = |v: &CMat| -> Result<(f64, CMat)> {
        let phi = v * b;
        let q = problem.apply_q(&phi)?;
        let f = linalg::hs_inner(&phi, &q).re;
        Ok((f, q))
    };
    let mut v = start;
    let (mut f, mut q) = eval(&v)?;
    let mut step = cfg.initial_step;
    let mut converged = false;
    let mut last_change = f64::NAN;
    let mut iterations = 0;
    for it in 0..cfg.max_iters {
        iterations = it + 1;
        let g = &q * b.adjoint();
        let omega = &g * v.adjoint() - &v * g.adjoint();
        // e^{η Ω} = exp(−i (iΩ) η)
        let h = linalg::hermitize(&omega.map(|z| z * Complex64::i()));
        let e = eigh_unchecked(&h);
        let mut accepted = false;
        for _ in 0..40 {
            let u = e.apply_function(|x| Complex64::from_polar(1.0, -x * step));
            let cand = &u * &v;
            let (fc, qc) = eval(&cand)?;
            if fc > f {
                last_change = fc - f;
                v = cand;
                f = fc;
                q = qc;
                step = (step * 1.5).min(1e3);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted || last_change.abs() < cfg.tolerance * 1e-3 {
            converged = true;
            if !accepted {
                last_change = 0.0;
            }
            break;
        }
    }
    Ok(RunResult {
        value: f.min(1.0),
        converged,
        iterations,
        last_change,
    })
}

/// Acceptance of the prover-assisted test maximized over the prover's unitary on
/// the purifying reference plus ancilla.
pub fn prover_acceptance(
    rho: &DensityMatrix,
    rep: &UnitaryRepTable,
    mode: SymmetryMode,
    cfg: &ProverConfig,
) -> Result<OptimResult> {
    cfg.validate()?;
    let d_r = reference_dim(rho, rep, mode)?;
    let d_s = rho.dim();
    let psi = purification_matrix(rho);
    let rank = psi.nrows();
    let a_dim = match mode {
        SymmetryMode::GSym => d_s,
        SymmetryMode::Bse => d_r,
        SymmetryMode::Se => d_r * d_r * d_s,
    };
    let default_e = match mode {
        SymmetryMode::Bse => d_r * d_s,
        _ => rank,
    };
    let mut e_dim = cfg.ancilla_dim.unwrap_or(default_e);
    // the reference must fit into a ⊗ E′
    while a_dim * e_dim < rank {
        e_dim += 1;
    }
    let problem = ProverProblem {
        mode,
        rep,
        projector: if mode == SymmetryMode::Bse {
            Some(rep.projector()?)
        } else {
            None
        },
        d_r,
        d_s,
        a_dim,
        e_dim,
    };
    let n = problem.n();
    linalg::check_dim(n * d_s, "prover register")?;
    let mut b = CMat::zeros(n, d_s);
    b.view_mut((0, 0), (rank, d_s)).copy_from(&psi);
    let runs = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let start = if i == 0 {
                identity(n)
            } else {
                let mut rng = linalg::rng_from_seed(restart_seed(cfg.seed, i));
                linalg::random_unitary_with(n, &mut rng)
            };
            prover_run(&problem, &b, start, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merge_runs(runs, &format!("prover-ascent-{}", mode.tag())))
}

/// Maximum fidelity with incoherent (diagonal) states, as G-symmetry under the phase group.
pub fn incoherence_acceptance(rho: &DensityMatrix, cfg: &ProverConfig) -> Result<OptimResult> {
    let rep = phase_group(rho.dim())?;
    let mut whole = rho.clone();
    if whole.dims().len() != 1 {
        whole = DensityMatrix::new(rho.matrix().clone(), vec![rho.dim()])?;
    }
    max_symmetric_fidelity(&whole, &rep, SymmetryMode::GSym, cfg)
}

#[derive(Clone, Debug, Serialize)]
pub struct PurificationCheck {
    pub symmetric: bool,
    /// max_g ‖|ψ⟩ − (U(g) ⊗ Ū(g))|ψ⟩‖₂ for |ψ⟩ = (√ω ⊗ I)|Γ⟩
    pub defect: f64,
}

pub fn symmetric_purification_check<R: GroupAction + ?Sized>(
    omega: &DensityMatrix,
    rep: &R,
) -> Result<PurificationCheck> {
    check_same_space(omega.dim(), rep)?;
    let s = sqrt_psd(omega.matrix())?;
    let mut defect: f64 = 0.0;
    for g in 0..rep.order() {
        // (U ⊗ Ū)(√ω ⊗ I)|Γ⟩ = (U √ω U† ⊗ I)|Γ⟩
        let us = rep.apply_left(g, &s)?;
        let usu = rep.apply_left(g, &us.adjoint())?.adjoint();
        defect = defect.max(frobenius(&(&s - usu)));
    }
    Ok(PurificationCheck {
        symmetric: defect <= 1e-8,
        defect,
    })
}

/// ‖(⊗_i Π^Sym_i) |ψ⟩‖², each party's symmetric projector acting on the listed factors.
pub fn multipartite_symmetric_weight(
    vector: &CVec,
    dims: &[usize],
    parties: &[Vec<usize>],
) -> Result<f64> {
    let n = linalg::checked_product(dims, "multipartite state")?;
    if vector.len() != n {
        return Err(SymError::Dimension("vector does not match dims".into()));
    }
    let mut seen = vec![false; dims.len()];
    for p in parties {
        for &f in p {
            if f >= dims.len() || seen[f] {
                return Err(SymError::Invalid("party factors must be distinct and in range".into()));
            }
            seen[f] = true;
            if dims[f] != dims[p[0]] {
                return Err(SymError::Dimension("copies of a party must share a dimension".into()));
            }
        }
    }
    let mut v = vector.clone();
    for p in parties {
        let k = p.len();
        if k < 2 {
            continue;
        }
        let sk = crate::groups::FiniteGroup::symmetric(k)?;
        let mut acc = CVec::zeros(n);
        for perm in sk.elements() {
            let mut full: Vec<usize> = (0..dims.len()).collect();
            for (c, &f) in p.iter().enumerate() {
                full[f] = p[perm.apply(c)];
            }
            let (map, _) = linalg::factor_permutation_map(dims, &full)?;
            for (x, &y) in map.iter().enumerate() {
                acc[y] += v[x];
            }
        }
        v = acc.unscale(sk.order() as f64);
    }
    Ok(v.norm_squared())
}

/// Tr[(⊗_i Π^Sym_i) ψ^{⊗k}] where ψ has one factor per party and each party's k
/// copies are symmetrized.
pub fn multipartite_bose_acceptance(psi: &PureState, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(SymError::Invalid("k must be >= 1".into()));
    }
    let m = psi.dims().len();
    let mut dims = Vec::with_capacity(m * k);
    for _ in 0..k {
        dims.extend_from_slice(psi.dims());
    }
    linalg::checked_product(&dims, "multipartite copies")?;
    let mut v = psi.vector().clone();
    for _ in 1..k {
        v = linalg::tensor_vec(&v, psi.vector());
    }
    // party i occupies factors i, i + m, ..., i + (k−1) m
    let parties: Vec<Vec<usize>> = (0..m).map(|i| (0..k).map(|c| i + c * m).collect()).collect();
    multipartite_symmetric_weight(&v, &dims, &parties)
}

#[derive(Clone, Debug, Serialize)]
pub struct ChannelReport {
    /// max fidelity of the Choi state with Ū_R ⊗ V_B-symmetric states
    pub fidelity: f64,
    /// Tr[Π Choi] for the same representation
    pub bose: f64,
    pub method: String,
    pub converged: bool,
}

/// Choi state of ρ ↦ Tr_Eout[W (ρ ⊗ |0⟩⟨0|) W†] with W: A ⊗ E_in → B ⊗ E_out.
pub fn channel_choi(
    w: &CMat,
    d_a: usize,
    d_ein: usize,
    d_b: usize,
    d_eout: usize,
) -> Result<DensityMatrix> {
    if w.ncols() != d_a * d_ein || w.nrows() != d_b * d_eout {
        return Err(SymError::Dimension(format!(
            "channel unitary is {}x{}, expected {}x{}",
            w.nrows(),
            w.ncols(),
            d_b * d_eout,
            d_a * d_ein
        )));
    }
    let iso = w.adjoint() * w - identity(d_a * d_ein);
    let defect = linalg::max_abs(&iso);
    if defect > 1e-8 {
        return Err(SymError::NotUnitary(defect));
    }
    linalg::check_dim(d_a * d_b * d_eout, "Choi state")?;
    // columns with E_in = 0
    let k = CMat::from_fn(d_b * d_eout, d_a, |o, a| w[(o, a * d_ein)]);
    // |v⟩ = (1/√d_A) Σ_a |a⟩_R ⊗ K|a⟩, on R ⊗ B ⊗ E_out
    let mut v = CVec::zeros(d_a * d_b * d_eout);
    for a in 0..d_a {
        for o in 0..d_b * d_eout {
            v[a * d_b * d_eout + o] = k[(o, a)] / (d_a as f64).sqrt();
        }
    }
    let full = PureState::new(v, vec![d_a, d_b, d_eout])?;
    full.density().reduce(&[0, 1])
}

pub fn channel_covariance_acceptance(
    w: &CMat,
    env: (usize, usize),
    in_rep: &UnitaryRepTable,
    out_rep: &UnitaryRepTable,
    cfg: &ProverConfig,
) -> Result<ChannelReport> {
    let (d_ein, d_eout) = env;
    let (d_a, d_b) = (in_rep.dim(), out_rep.dim());
    let choi = channel_choi(w, d_a, d_ein, d_b, d_eout)?;
    let rep = in_rep.conjugate().tensor_with(out_rep)?;
    let bose = linalg::trace_of_product(&rep.projector()?, choi.matrix()).re;
    if choi.is_pure() {
        let e = choi.eigh();
        let top = e.vectors.column(e.values.len() - 1).into_owned();
        let psi = PureState::normalized(top, choi.dims().to_vec())?;
        let fidelity = max_symmetric_fidelity_pure(&psi, &rep, SymmetryMode::GSym)?;
        Ok(ChannelReport {
            fidelity,
            bose,
            method: "choi-pure-closed-form".into(),
            converged: true,
        })
    } else {
        let r = max_symmetric_fidelity(&choi, &rep, SymmetryMode::GSym, cfg)?;
        Ok(ChannelReport {
            fidelity: r.value,
            bose,
            method: r.method,
            converged: r.converged,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GentleReport {
    /// ε = 1 − Tr[Πρ]
    pub eps: f64,
    pub bound: f64,
    /// ‖ρ − ΠρΠ‖₁
    pub unnormalized: f64,
    /// ‖ρ − ΠρΠ / Tr[Πρ]‖₁
    pub normalized: f64,
    pub acceptance: f64,
    pub holds: bool,
    /// P ≥ 1 − ‖ρ − ΠρΠ‖₁
    pub reverse_holds: bool,
}

/// Both gentle-measurement bounds and the reverse inequality for a projector Π.
pub fn gentle_measurement_check(rho: &DensityMatrix, pi: &CMat) -> Result<GentleReport> {
    if pi.nrows() != rho.dim() || !pi.is_square() {
        return Err(SymError::Dimension("projector size mismatch".into()));
    }
    let m = rho.matrix();
    let p = linalg::trace_of_product(pi, m).re;
    let eps = (1.0 - p).max(0.0);
    let prp = pi * m * pi;
    let unnormalized = linalg::trace_norm(&(m - &prp));
    let normalized = if p > 1e-300 {
        linalg::trace_norm(&(m - prp.unscale(p)))
    } else {
        f64::INFINITY
    };
    let bound = 2.0 * eps.sqrt();
    let slack = 1e-10;
    Ok(GentleReport {
        eps,
        bound,
        unnormalized,
        normalized,
        acceptance: p,
        holds: unnormalized <= bound + slack && normalized <= bound + slack,
        reverse_holds: p >= 1.0 - unnormalized - slack,
    })
}

/// Projector onto the span of `rank` columns of a Haar unitary.
pub fn random_projector(d: usize, rank: usize, seed: u64) -> Result<CMat> {
    if rank > d {
        return Err(SymError::Invalid("rank exceeds dimension".into()));
    }
    let u = linalg::random_unitary(d, seed)?;
    let cols = u.columns(0, rank).into_owned();
    Ok(&cols * cols.adjoint())
}
