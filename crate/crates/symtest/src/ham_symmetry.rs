//! Hamiltonian covariance tests: acceptance in Choi and trace form, Trotterization,
//! the commutator series, fixed-state and optimized acceptance with lower bounds,
//! the DQC1 reduction identity, density-matrix exponentiation, Abelian Fourier
//! measurement (OTOC recovery) and block-encoded Hamiltonians.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Result, SymError};
use crate::groups::UnitaryRepTable;
use crate::linalg::{
    self, c, eigh, embed_operator, expm_hermitian, frobenius, hermitian_defect, hermitize,
    identity, spectral_norm, tensor, CMat, DensityMatrix, PureState, HERMITIAN_INPUT_TOL, ZERO,
};
use crate::state_symmetry::AcceptanceReport;

/// A k-local term acting on the listed factors.
#[derive(Clone, Debug)]
pub struct LocalTerm {
    pub matrix: CMat,
    pub support: Vec<usize>,
}

/// Either a dense Hermitian matrix or a sum of local terms.
#[derive(Clone, Debug)]
pub enum HamiltonianSpec {
    Dense { matrix: CMat, dims: Vec<usize> },
    Local { terms: Vec<LocalTerm>, dims: Vec<usize> },
}

fn check_hermitian(m: &CMat) -> Result<CMat> {
    if !m.is_square() {
        return Err(SymError::Dimension("Hamiltonian must be square".into()));
    }
    let defect = hermitian_defect(m);
    if !(defect <= HERMITIAN_INPUT_TOL) {
        return Err(SymError::NotHermitian(defect));
    }
    Ok(hermitize(m))
}

impl HamiltonianSpec {
    pub fn dense(matrix: CMat, dims: Vec<usize>) -> Result<Self> {
        let matrix = check_hermitian(&matrix)?;
        let d = linalg::checked_product(&dims, "Hamiltonian")?;
        if matrix.nrows() != d {
            return Err(SymError::Dimension(format!(
                "Hamiltonian is {}x{} but dims {dims:?}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self::Dense { matrix, dims })
    }

    pub fn local(terms: Vec<LocalTerm>, dims: Vec<usize>) -> Result<Self> {
        linalg::checked_product(&dims, "Hamiltonian")?;
        let mut checked = Vec::with_capacity(terms.len());
        for t in terms {
            let matrix = check_hermitian(&t.matrix)?;
            // validates the support and the size
            embed_operator(&matrix, &t.support, &dims)?;
            checked.push(LocalTerm {
                matrix,
                support: t.support,
            });
        }
        if checked.is_empty() {
            return Err(SymError::Invalid("Hamiltonian has no terms".into()));
        }
        Ok(Self::Local {
            terms: checked,
            dims,
        })
    }

    /// Sum of Pauli strings such as "ZZ+XI+IX" (or comma-separated) with one real coefficient per string.
    /// Each string becomes a local term supported on its non-identity letters.
    pub fn from_pauli_sum(expr: &str, coeffs: &[f64]) -> Result<Self> {
        let strings: Vec<&str> = expr.split(['+', ',']).map(|s| s.trim()).collect();
        if strings.len() != coeffs.len() {
            return Err(SymError::Parse(format!(
                "{} Pauli strings but {} coefficients",
                strings.len(),
                coeffs.len()
            )));
        }
        let n = strings[0].len();
        if n == 0 || strings.iter().any(|s| s.len() != n) {
            return Err(SymError::Parse("Pauli strings must share one length".into()));
        }
        let mut terms = Vec::new();
        for (s, &w) in strings.iter().zip(coeffs) {
            let letters: Vec<char> = s.chars().collect();
            let mut support: Vec<usize> = (0..n).filter(|&j| letters[j] != 'I').collect();
            if support.is_empty() {
                support.push(0);
            }
            let local: String = support.iter().map(|&j| letters[j]).collect();
            terms.push(LocalTerm {
                matrix: linalg::pauli_string(&local)?.scale(w),
                support,
            });
        }
        Self::local(terms, vec![2; n])
    }

    pub fn dims(&self) -> &[usize] {
        match self {
            Self::Dense { dims, .. } | Self::Local { dims, .. } => dims,
        }
    }

    pub fn dim(&self) -> usize {
        linalg::product(self.dims())
    }

    pub fn terms(&self) -> Option<&[LocalTerm]> {
        match self {
            Self::Local { terms, .. } => Some(terms),
            Self::Dense { .. } => None,
        }
    }

    /// Full matrix on the whole space.
    pub fn matrix(&self) -> CMat {
        match self {
            Self::Dense { matrix, .. } => matrix.clone(),
            Self::Local { terms, dims } => {
                let d = linalg::product(dims);
                let mut m = CMat::zeros(d, d);
                for t in terms {
                    m += embed_operator(&t.matrix, &t.support, dims)
                        .expect("validated at construction");
                }
                m
            }
        }
    }

    pub fn norm(&self) -> f64 {
        spectral_norm(&self.matrix())
    }
}

fn check_rep(h_dim: usize, rep: &UnitaryRepTable) -> Result<()> {
    if rep.dim() != h_dim {
        return Err(SymError::Dimension(format!(
            "representation acts on dimension {}, Hamiltonian on {h_dim}",
            rep.dim()
        )));
    }
    Ok(())
}

/// (1/(d|G|)) Σ_g Re Tr[U†(g) W† U(g) W] for a unitary W.
fn trace_form_from_unitary(w: &CMat, rep: &UnitaryRepTable) -> f64 {
    let d = w.nrows() as f64;
    let wd = w.adjoint();
    let mut s = 0.0;
    for u in rep.matrices() {
        s += linalg::trace_of_product(&(u.adjoint() * &wd), &(u * w)).re;
    }
    s / (d * rep.order() as f64)
}

/// Tr[Π Φ^W] with Π = (1/|G|) Σ Ū(g) ⊗ U(g) and Φ^W = (I ⊗ W) Φ (I ⊗ W)†,
/// using the matrix form of the state on R ⊗ B.
fn choi_form_from_unitary(w: &CMat, rep: &UnitaryRepTable) -> f64 {
    let d = w.nrows();
    // |Φ^W⟩ = Σ_{r,b} M[r,b] |r⟩|b⟩ with M = Wᵀ/√d
    let m = w.transpose().unscale((d as f64).sqrt());
    let mut s = 0.0;
    for u in rep.matrices() {
        // (Ū ⊗ U)|v⟩ has matrix Ū M Uᵀ
        let moved = u.map(|z| z.conj()) * &m * u.transpose();
        s += linalg::hs_inner(&m, &moved).re;
    }
    s / rep.order() as f64
}

/// Acceptance probability of the covariance test: Choi form as `simulated`,
/// trace form as `closed_form`.
pub fn covariance_acceptance(
    h: &HamiltonianSpec,
    rep: &UnitaryRepTable,
    t: f64,
) -> Result<AcceptanceReport> {
    check_rep(h.dim(), rep)?;
    let w = expm_hermitian(&h.matrix(), t)?;
    Ok(covariance_from_unitary(&w, rep))
}

pub(crate) fn covariance_from_unitary(w: &CMat, rep: &UnitaryRepTable) -> AcceptanceReport {
    AcceptanceReport::exact(
        "choi-vs-trace",
        choi_form_from_unitary(w, rep),
        Some(trace_form_from_unitary(w, rep)),
    )
}

/// 1 − P_acc evaluated in the eigenbasis of H without cancellation:
/// (1/(d|G|)) Σ_g Σ_{ab} |⟨a|U(g)|b⟩|² 2 sin²((E_a − E_b) t / 2).
pub fn covariance_deficit(h: &HamiltonianSpec, rep: &UnitaryRepTable, t: f64) -> Result<f64> {
    check_rep(h.dim(), rep)?;
    let e = eigh(&h.matrix())?;
    let d = e.values.len();
    let v = &e.vectors;
    let mut s = 0.0;
    for u in rep.matrices() {
        let up = v.adjoint() * u * v;
        for a in 0..d {
            for b in 0..d {
                let x = (e.values[a] - e.values[b]) * t / 2.0;
                s += up[(a, b)].norm_sqr() * 2.0 * x.sin().powi(2);
            }
        }
    }
    Ok(s / (d as f64 * rep.order() as f64))
}

/// First-order product formula (Π_j e^{-i H_j t/r})^r, term 1 applied first.
pub fn trotter_evolution(h: &HamiltonianSpec, t: f64, r: usize) -> Result<CMat> {
    if r == 0 {
        return Err(SymError::Invalid("Trotter steps must be >= 1".into()));
    }
    let HamiltonianSpec::Local { terms, dims } = h else {
        return Err(SymError::Invalid(
            "Trotterization needs a Hamiltonian given as local terms".into(),
        ));
    };
    let d = linalg::product(dims);
    let mut step = identity(d);
    for term in terms {
        let local = expm_hermitian(&term.matrix, t / r as f64)?;
        step = embed_operator(&local, &term.support, dims)? * step;
    }
    let mut out = identity(d);
    for _ in 0..r {
        out = &step * out;
    }
    Ok(out)
}

/// Coefficients c_n = (1/(d|G|)) Σ_g ‖[(H)^n, U(g)]‖₂², n = 0..=n_max.
pub fn series_coefficients(
    h: &HamiltonianSpec,
    rep: &UnitaryRepTable,
    n_max: usize,
) -> Result<Vec<f64>> {
    check_rep(h.dim(), rep)?;
    let hm = h.matrix();
    let d = hm.nrows() as f64;
    let mut c = vec![0.0; n_max + 1];
    for u in rep.matrices() {
        let mut k = u.clone();
        c[0] += frobenius(&k).powi(2);
        for n in 1..=n_max {
            k = linalg::commutator(&hm, &k);
            c[n] += frobenius(&k).powi(2);
        }
    }
    let norm = d * rep.order() as f64;
    Ok(c.into_iter().map(|x| x / norm).collect())
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// The same coefficients through the twirl:
/// c_n = (1/d) Σ_{k=0}^{n} C(2n,k) (2 − δ_{kn}) (−1)^k Tr[𝒯_G(H^{2n−k}) H^k].
pub fn series_coefficients_twirl(
    h: &HamiltonianSpec,
    rep: &UnitaryRepTable,
    n_max: usize,
) -> Result<Vec<f64>> {
    check_rep(h.dim(), rep)?;
    let hm = h.matrix();
    let d = hm.nrows();
    let mut powers = vec![identity(d)];
    for p in 1..=2 * n_max {
        let next = &powers[p - 1] * &hm;
        powers.push(next);
    }
    let twirled = powers
        .iter()
        .map(|p| rep.twirl(p))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut s = 0.0;
        for k in 0..=n {
            let w = binomial(2 * n, k) * if k == n { 1.0 } else { 2.0 };
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * w * linalg::trace_of_product(&twirled[2 * n - k], &powers[k]).re;
        }
        out.push(s / d as f64);
    }
    Ok(out)
}

/// Partial sums of the exact series in t² with nested-commutator coefficients.
#[derive(Clone, Debug, Serialize)]
pub struct SeriesReport {
    pub t: f64,
    pub order: usize,
    pub coefficients: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub exact: f64,
    /// |s_n − exact|
    pub residuals: Vec<f64>,
    /// |(1 − s_n) − (1 − exact)| with both deficits computed without cancellation
    pub deficit_residuals: Vec<f64>,
}

pub fn commutator_series(
    h: &HamiltonianSpec,
    rep: &UnitaryRepTable,
    t: f64,
    n: usize,
) -> Result<SeriesReport> {
    let coefficients = series_coefficients(h, rep, n)?;
    let exact = covariance_acceptance(h, rep, t)?.closed_form.unwrap_or(f64::NAN);
    let exact_deficit = covariance_deficit(h, rep, t)?;
    let mut partial_sums = Vec::with_capacity(n + 1);
    let mut residuals = Vec::with_capacity(n + 1);
    let mut deficit_residuals = Vec::with_capacity(n + 1);
    let mut s = 0.0;
    let mut deficit = 0.0;
    let mut w = 1.0; // t^{2m}/(2m)!
    for (m, &cm) in coefficients.iter().enumerate() {
        if m > 0 {
            w *= t * t / ((2 * m - 1) * (2 * m)) as f64;
        }
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * w * cm;
        if m > 0 {
            deficit -= sign * w * cm;
        }
        partial_sums.push(s);
        residuals.push((s - exact).abs());
        deficit_residuals.push((deficit - exact_deficit).abs());
    }
    Ok(SeriesReport {
        t,
        order: n,
        coefficients,
        partial_sums,
        exact,
        residuals,
        deficit_residuals,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FixedStateReport {
    pub value: f64,
    /// 1 − t² ⟨𝒯(H²) − 𝒯(H)²⟩_ψ
    pub second_order: f64,
    /// ⟨𝒯(H²) − 𝒯(H)²⟩_ψ, non-negative by Kadison–Schwarz
    pub bracket: f64,
}

/// ‖𝒯_G(e^{-iHt})|ψ⟩‖² with its second-order approximation.
pub fn fixed_state_acceptance(
    h: &HamiltonianSpec,
    rep: &UnitaryRepTable,
    t: f64,
    psi: &PureState,
) -> Result<FixedStateReport> {
    check_rep(h.dim(), rep)?;
    if psi.dim() != h.dim() {
        return Err(SymError::Dimension("state and Hamiltonian sizes differ".into()));
    }
    let hm = h.matrix();
    let w = expm_hermitian(&hm, t)?;
    let tw = rep.twirl(&w)?;
    let value = (&tw * psi.vector()).norm_squared();
    let th = rep.twirl(&hm)?;
    let th2 = rep.twirl(&(&hm * &hm))?;
    let x = th2 - &th * &th;
    let v = psi.vector();
    let bracket = v.dotc(&(&x * v)).re;
    Ok(FixedStateReport {
        value,
        second_order: 1.0 - t * t * bracket,
        bracket,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MaxStateReport {
    /// ‖𝒯_G(e^{-iHt})‖∞²
    pub value: f64,
    /// 1 − (2/|G|) Σ ‖[U(g), e^{-iHt}]‖∞
    pub bound_unitary_commutator: f64,
    /// 1 − (2t/|G|) Σ ‖[U(g), H]‖∞ − 4τ², only when τ = ‖H‖∞ t < 1
    pub bound_small_t: Option<f64>,
    /// (1 − Σ_n tⁿ/n! (1/|G|) Σ ‖[(H)ⁿ, U(g)]‖∞)², base clamped at 0
    pub bound_nested: f64,
    pub tau: f64,
    pub nested_terms: usize,
}

pub fn max_over_states_acceptance(
    h: &HamiltonianSpec,
    rep: &UnitaryRepTable,
    t: f64,
) -> Result<MaxStateReport> {
    check_rep(h.dim(), rep)?;
    let hm = h.matrix();
    let w = expm_hermitian(&hm, t)?;
    let value = spectral_norm(&rep.twirl(&w)?).powi(2);
    let g = rep.order() as f64;
    let hn = spectral_norm(&hm);
    let tau = hn * t.abs();

    let comm_w: f64 = rep
        .matrices()
        .iter()
        .map(|u| spectral_norm(&linalg::commutator(u, &w)))
        .sum();
    let bound_unitary_commutator = 1.0 - 2.0 * comm_w / g;

    let bound_small_t = if tau < 1.0 {
        let comm_h: f64 = rep
            .matrices()
            .iter()
            .map(|u| spectral_norm(&linalg::commutator(u, &hm)))
            .sum();
        Some(1.0 - 2.0 * t.abs() * comm_h / g - 4.0 * tau * tau)
    } else {
        None
    };

    // Σ_n tⁿ/n! · mean_g ‖[(H)ⁿ, U(g)]‖∞, summed until the terms are negligible
    let mut nested: Vec<CMat> = rep.matrices().to_vec();
    let mut total = 0.0;
    let mut weight = 1.0;
    let mut terms = 0;
    let n_min = (2.0 * std::f64::consts::E * tau).ceil() as usize + 2;
    for n in 1..=600 {
        weight *= t.abs() / n as f64;
        let mut mean = 0.0;
        for k in nested.iter_mut() {
            *k = linalg::commutator(&hm, k);
            mean += spectral_norm(k);
        }
        mean /= g;
        let term = weight * mean;
        total += term;
        terms = n;
        if n >= n_min && term <= 1e-17 * total.max(1e-300) {
            break;
        }
        if mean == 0.0 && n >= 1 {
            break;
        }
    }
    let base = (1.0 - total).max(0.0);
    Ok(MaxStateReport {
        value,
        bound_unitary_commutator,
        bound_small_t,
        bound_nested: base * base,
        tau,
        nested_terms: terms,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Dqc1Report {
    pub d: usize,
    /// covariance acceptance (Choi form) of the reduction
    pub lhs: f64,
    /// 1/4 + Re Tr[U²]/(4d)
    pub rhs: f64,
    /// covariance acceptance (trace form)
    pub trace_form: f64,
    pub abs_diff: f64,
}

/// The Hadamard gate.
pub fn hadamard() -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)])
}

/// V = |0⟩⟨1| ⊗ U + |1⟩⟨0| ⊗ U†.
pub fn dqc1_v(u: &CMat) -> CMat {
    let d = u.nrows();
    let mut v = CMat::zeros(2 * d, 2 * d);
    v.view_mut((0, d), (d, d)).copy_from(u);
    v.view_mut((d, 0), (d, d)).copy_from(&u.adjoint());
    v
}

/// Covariance test of Z_2 = {I, V} under the evolution H₂ ⊗ I, compared with
/// the normalized-trace expression.
pub fn dqc1_reduction_check(u: &CMat) -> Result<Dqc1Report> {
    if !u.is_square() {
        return Err(SymError::Dimension("unitary must be square".into()));
    }
    let defect = linalg::unitarity_defect(u);
    if defect > 1e-10 {
        return Err(SymError::NotUnitary(defect));
    }
    let d = u.nrows();
    linalg::check_dim(4 * d * d, "DQC1 reduction")?;
    let v = dqc1_v(u);
    let rep = UnitaryRepTable::from_matrices(
        "dqc1",
        vec!["I".into(), "V".into()],
        vec![identity(2 * d), v],
        vec![2, d],
    )?;
    // (π/2)(I − H₂) ⊗ I generates H₂ ⊗ I at t = 1
    let gen = tensor(&(identity(2) - hadamard()).scale(PI / 2.0), &identity(d));
    let h = HamiltonianSpec::dense(gen, vec![2, d])?;
    let rep_out = covariance_acceptance(&h, &rep, 1.0)?;
    let u2 = u * u;
    let rhs = 0.25 + linalg::trace(&u2).re / (4.0 * d as f64);
    Ok(Dqc1Report {
        d,
        lhs: rep_out.simulated,
        rhs,
        trace_form: rep_out.closed_form.unwrap_or(f64::NAN),
        abs_diff: (rep_out.simulated - rhs).abs(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DmeReport {
    pub t: f64,
    /// Choi-form acceptance with ideal exponentiation e^{-iρt}
    pub acceptance: f64,
    pub trace_form: f64,
    /// 1 − (t²/(2d|G|)) Σ_g ‖[U(g), ρ]‖₂²
    pub expansion: f64,
    /// |acceptance − expansion|, evaluated without cancellation
    pub residual: f64,
    /// (1/(d|G|)) Σ_g ‖[U(g), ρ]‖₂²
    pub commutator_norm: f64,
    /// exponentiation error budget δ = t⁴ (metadata only; simulation uses δ = 0)
    pub delta: f64,
    /// O(t²/δ) copies at that budget
    pub copies_estimate: f64,
}

/// Covariance test where the evolution is generated by the state itself.
pub fn dme_acceptance(rho: &DensityMatrix, rep: &UnitaryRepTable, t: f64) -> Result<DmeReport> {
    let h = HamiltonianSpec::dense(rho.matrix().clone(), rho.dims().to_vec())?;
    let rep_out = covariance_acceptance(&h, rep, t)?;
    let c1 = series_coefficients(&h, rep, 1)?[1];
    let expansion = 1.0 - t * t * c1 / 2.0;
    let deficit = covariance_deficit(&h, rep, t)?;
    let residual = (deficit - t * t * c1 / 2.0).abs();
    let delta = t.powi(4);
    Ok(DmeReport {
        t,
        acceptance: rep_out.simulated,
        trace_form: rep_out.closed_form.unwrap_or(f64::NAN),
        expansion,
        residual,
        commutator_norm: c1,
        delta,
        copies_estimate: if delta > 0.0 { t * t / delta } else { f64::INFINITY },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct OtocReport {
    pub t: f64,
    /// Pr[g̃] from the closed form, indexed by the label g̃ ∈ Z_|G|
    pub probabilities: Vec<f64>,
    /// Pr[g̃] from simulating the Fourier-basis measurement
    pub circuit_probabilities: Vec<f64>,
    /// (1/d) Tr[U†(h) e^{iHt} U(h) e^{-iHt}] as (re, im), indexed by label h
    pub otoc: Vec<(f64, f64)>,
    /// inverse Fourier transform of the distribution
    pub recovered: Vec<(f64, f64)>,
    pub roundtrip_error: f64,
    pub circuit_error: f64,
    pub sum_probabilities: f64,
    /// largest |Im| in the closed-form probabilities
    pub max_imaginary: f64,
}

fn require_labels(rep: &UnitaryRepTable) -> Result<Vec<usize>> {
    if !rep.is_abelian() {
        return Err(SymError::Group(
            "Fourier measurement needs an Abelian group".into(),
        ));
    }
    rep.cyclic_labels().map(|l| l.to_vec()).ok_or_else(|| {
        SymError::Group("no labelling onto Z_|G| declared for this representation".into())
    })
}

/// Probabilities of Fourier-basis outcomes and the group-averaged OTOCs they encode.
pub fn abelian_otoc(h: &HamiltonianSpec, rep: &UnitaryRepTable, t: f64) -> Result<OtocReport> {
    check_rep(h.dim(), rep)?;
    let labels = require_labels(rep)?;
    let n = rep.order();
    let w = expm_hermitian(&h.matrix(), t)?; // e^{-iHt}
    let wd = w.adjoint();
    let d = w.nrows() as f64;
    let mut by_label = vec![0; n];
    for (i, &l) in labels.iter().enumerate() {
        by_label[l] = i;
    }
    let otoc: Vec<Complex64> = (0..n)
        .map(|l| {
            let u = rep.matrix(by_label[l]);
            linalg::trace_of_product(&(u.adjoint() * &wd), &(u * &w)) / d
        })
        .collect();
    let omega = |x: usize| Complex64::from_polar(1.0, 2.0 * PI * (x % n) as f64 / n as f64);
    let mut probs = Vec::with_capacity(n);
    let mut max_imaginary: f64 = 0.0;
    for gt in 0..n {
        let mut s = ZERO;
        for (l, o) in otoc.iter().enumerate() {
            s += omega(gt * l) * o;
        }
        s /= n as f64;
        max_imaginary = max_imaginary.max(s.im.abs());
        probs.push(s.re);
    }
    let recovered: Vec<Complex64> = (0..n)
        .map(|l| {
            (0..n)
                .map(|gt| omega(gt * l).conj() * probs[gt])
                .sum::<Complex64>()
        })
        .collect();
    let roundtrip_error = otoc
        .iter()
        .zip(&recovered)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);

    // circuit: (1/√n) Σ_g |g⟩ (U†(g) W U(g) ⊗ I)|Φ⟩ measured in the Fourier basis
    let mut circuit = Vec::with_capacity(n);
    let ms: Vec<CMat> = (0..n)
        .map(|l| {
            let u = rep.matrix(by_label[l]);
            u.adjoint() * &w * u
        })
        .collect();
    for gt in 0..n {
        let dim = w.nrows();
        let mut acc = CMat::zeros(dim, dim);
        for (l, m) in ms.iter().enumerate() {
            acc += m * omega(gt * l).conj();
        }
        // amplitude matrix (1/n) acc · (I/√d)
        circuit.push(frobenius(&acc).powi(2) / (n * n) as f64 / d);
    }
    let circuit_error = probs
        .iter()
        .zip(&circuit)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(OtocReport {
        t,
        sum_probabilities: probs.iter().sum(),
        probabilities: probs,
        circuit_probabilities: circuit,
        otoc: otoc.iter().map(|z| (z.re, z.im)).collect(),
        recovered: recovered.iter().map(|z| (z.re, z.im)).collect(),
        roundtrip_error,
        circuit_error,
        max_imaginary,
    })
}

/// Shots N ≥ (4/ε²) ln(4/δ) for estimating each OTOC to ±ε with probability ≥ 1 − δ.
pub fn hoeffding_shots(eps: f64, delta: f64) -> Result<u64> {
    if !(eps > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(SymError::Invalid("need eps > 0 and 0 < delta < 1".into()));
    }
    Ok((4.0 / (eps * eps) * (4.0 / delta).ln()).ceil() as u64)
}

#[derive(Clone, Debug, Serialize)]
pub struct OtocSampleReport {
    pub shots: u64,
    pub seed: u64,
    /// sample means of Y^h = e^{-2πi g̃ h/|G|}, as (re, im)
    pub estimates: Vec<(f64, f64)>,
    pub exact: Vec<(f64, f64)>,
    pub max_error: f64,
    pub counts: Vec<u64>,
}

/// Sample Fourier-basis outcomes and form the unbiased OTOC estimators.
pub fn abelian_otoc_sample(
    h: &HamiltonianSpec,
    rep: &UnitaryRepTable,
    t: f64,
    shots: u64,
    seed: u64,
) -> Result<OtocSampleReport> {
    if shots == 0 {
        return Err(SymError::Invalid("shots must be >= 1".into()));
    }
    let rep_exact = abelian_otoc(h, rep, t)?;
    let n = rep_exact.probabilities.len();
    let probs = crate::state_symmetry::clean_distribution(&rep_exact.probabilities);
    let mut rng = linalg::rng_from_seed(seed);
    let mut counts = vec![0u64; n];
    for _ in 0..shots {
        let u: f64 = rng.random();
        counts[crate::state_symmetry::sample_index(&probs, u)] += 1;
    }
    let estimates: Vec<(f64, f64)> = (0..n)
        .map(|l| {
            let mut s = ZERO;
            for (gt, &cnt) in counts.iter().enumerate() {
                let ang = -2.0 * PI * ((gt * l) % n) as f64 / n as f64;
                s += Complex64::from_polar(1.0, ang) * cnt as f64;
            }
            s /= shots as f64;
            (s.re, s.im)
        })
        .collect();
    let max_error = estimates
        .iter()
        .zip(&rep_exact.otoc)
        .map(|(a, b)| (c(a.0, a.1) - c(b.0, b.1)).norm())
        .fold(0.0, f64::max);
    Ok(OtocSampleReport {
        shots,
        seed,
        estimates,
        exact: rep_exact.otoc,
        max_error,
        counts,
    })
}

/// Unitary B = [[h, √(I−h²)], [√(I−h²), −h]] with h in the top-left block
/// (ancilla is the first factor).
pub fn block_encode(h: &CMat) -> Result<CMat> {
    let e = eigh(h)?;
    let norm = e
        .values
        .iter()
        .fold(0.0f64, |acc, &x| acc.max(x.abs()));
    if norm > 1.0 + 1e-10 {
        return Err(SymError::Invalid(format!(
            "block encoding needs ‖h‖∞ ≤ 1, got {norm}"
        )));
    }
    let d = h.nrows();
    let hs = hermitize(h);
    let s = e.apply_function(|x| c((1.0 - x * x).max(0.0).sqrt(), 0.0));
    let mut b = CMat::zeros(2 * d, 2 * d);
    b.view_mut((0, 0), (d, d)).copy_from(&hs);
    b.view_mut((0, d), (d, d)).copy_from(&s);
    b.view_mut((d, 0), (d, d)).copy_from(&s);
    b.view_mut((d, d), (d, d)).copy_from(&(-&hs));
    Ok(b)
}

/// Symmetry test with a block-encoded Hamiltonian: circuit simulation with the
/// control register, ancilla and maximally entangled input, against
/// (1/(d|G|)) Σ_g Tr[U†(g) h U(g) h].
pub fn block_encoding_acceptance(h: &CMat, rep: &UnitaryRepTable) -> Result<AcceptanceReport> {
    let b = block_encode(h)?;
    let d = h.nrows();
    if rep.dim() != d {
        return Err(SymError::Dimension(
            "representation and Hamiltonian sizes differ".into(),
        ));
    }
    let n = rep.order();
    let hs = hermitize(h);
    let blk = |i: usize, j: usize| b.view((i * d, j * d), (d, d)).into_owned();
    let (b00, b01) = (blk(0, 0), blk(0, 1));

    // state: for each control value, the (ancilla 0, ancilla 1) blocks on S ⊗ R
    let start = identity(d).unscale(((n * d) as f64).sqrt());
    let mut out = CMat::zeros(d, d);
    for u in rep.matrices() {
        // controlled Û: ancilla-0 branch gets U, ancilla 1 starts empty
        let m0 = u * &start;
        let m1 = CMat::zeros(d, d);
        // B on ancilla ⊗ S
        let n0 = &b00 * &m0 + &b01 * &m1;
        // Û† and projection onto ⟨0|_A
        out += u.adjoint() * n0;
    }
    // ⟨+|_C contributes 1/√n
    let simulated = frobenius(&out).powi(2) / n as f64;
    let mut closed = 0.0;
    for u in rep.matrices() {
        closed += linalg::trace_of_product(&(u.adjoint() * &hs * u), &hs).re;
    }
    closed /= d as f64 * n as f64;
    Ok(AcceptanceReport::exact(
        "circuit-vs-trace",
        simulated,
        Some(closed),
    ))
}

/// Transverse-field Ising ring: Z_N Z_1 + Σ_{i<N} Z_i Z_{i+1} + Σ_i X_i.
pub fn transverse_ising(n: usize) -> Result<HamiltonianSpec> {
    if n < 2 {
        return Err(SymError::Invalid("transverse Ising needs N >= 2".into()));
    }
    linalg::check_dim(1usize.checked_shl(n as u32).unwrap_or(usize::MAX), "TIM")?;
    let zz = linalg::pauli_string("ZZ")?;
    let x = linalg::pauli('X')?;
    let mut terms = vec![LocalTerm {
        matrix: zz.clone(),
        support: vec![n - 1, 0],
    }];
    for i in 0..n - 1 {
        terms.push(LocalTerm {
            matrix: zz.clone(),
            support: vec![i, i + 1],
        });
    }
    for i in 0..n {
        terms.push(LocalTerm {
            matrix: x.clone(),
            support: vec![i],
        });
    }
    HamiltonianSpec::local(terms, vec![2; n])
}

/// Weakly J-coupled two-spin NMR Hamiltonian in its diagonal form
/// diag(−ω_avg + πJ/2, (Δω − πJ)/2, −(Δω + πJ)/2, ω_avg + πJ/2),
/// with ω_avg = (ω₁ + ω₂)/2 and Δω = ω₂ − ω₁; as local terms
/// −(ω₁/2) Z₁ − (ω₂/2) Z₂ + (πJ/2) Z₁Z₂.
pub fn nmr(omega1: f64, omega2: f64, j: f64) -> Result<HamiltonianSpec> {
    let z = linalg::pauli('Z')?;
    let zz = linalg::pauli_string("ZZ")?;
    HamiltonianSpec::local(
        vec![
            LocalTerm {
                matrix: z.scale(-omega1 / 2.0),
                support: vec![0],
            },
            LocalTerm {
                matrix: z.scale(-omega2 / 2.0),
                support: vec![1],
            },
            LocalTerm {
                matrix: zz.scale(PI * j / 2.0),
                support: vec![0, 1],
            },
        ],
        vec![2, 2],
    )
}

/// Open-chain Heisenberg XY model J Σ_{i<N} (X_i X_{i+1} + Y_i Y_{i+1}).
pub fn heisenberg_xy(n: usize, j: f64) -> Result<HamiltonianSpec> {
    if n < 2 {
        return Err(SymError::Invalid("XY chain needs N >= 2".into()));
    }
    linalg::check_dim(1usize.checked_shl(n as u32).unwrap_or(usize::MAX), "XY")?;
    let xx = linalg::pauli_string("XX")?.scale(j);
    let yy = linalg::pauli_string("YY")?.scale(j);
    let mut terms = Vec::new();
    for i in 0..n - 1 {
        terms.push(LocalTerm {
            matrix: xx.clone(),
            support: vec![i, i + 1],
        });
        terms.push(LocalTerm {
            matrix: yy.clone(),
            support: vec![i, i + 1],
        });
    }
    HamiltonianSpec::local(terms, vec![2; n])
}

/// Scale so that ‖H‖∞ = target (no-op for the zero matrix).
pub fn normalized(h: &HamiltonianSpec, target: f64) -> Result<HamiltonianSpec> {
    let n = h.norm();
    if n == 0.0 {
        return Ok(h.clone());
    }
    let s = target / n;
    match h {
        HamiltonianSpec::Dense { matrix, dims } => {
            HamiltonianSpec::dense(matrix.scale(s), dims.clone())
        }
        HamiltonianSpec::Local { terms, dims } => HamiltonianSpec::local(
            terms
                .iter()
                .map(|t| LocalTerm {
                    matrix: t.matrix.scale(s),
                    support: t.support.clone(),
                })
                .collect(),
            dims.clone(),
        ),
    }
}
