//! Separability tests of a state ρ through k copies: acceptance probabilities from
//! cycle index polynomials, the trace recurrence, complete Bell polynomials and a
//! dense projector oracle, plus controlled-SWAP resource models.

use serde::Serialize;

use crate::error::{Result, SymError};
use crate::groups::{partitions, CycleType, FiniteGroup, PermutationRep};
use crate::linalg::{self, CMat, DensityMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    CycleIndex,
    Recurrence,
    Bell,
    Direct,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::CycleIndex => "cycle-index",
            Self::Recurrence => "recurrence",
            Self::Bell => "bell",
            Self::Direct => "direct",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparabilityResult {
    pub k: usize,
    pub group: String,
    pub p: f64,
    pub method: Method,
    /// Tr[ρ^j] for j = 1..=k
    pub traces: Vec<f64>,
}

fn require_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(SymError::Invalid("k must be >= 1".into()));
    }
    Ok(())
}

/// Σ over partitions of k of Π_j x_j^{a_j} / (j^{a_j} a_j!).
pub fn acceptance_sym(rho: &DensityMatrix, k: usize) -> Result<SeparabilityResult> {
    require_k(k)?;
    let x = rho.trace_powers(k);
    let mut p = 0.0;
    let mut kfact = 1.0f64;
    for i in 2..=k {
        kfact *= i as f64;
    }
    for parts in partitions(k) {
        let ct = CycleType::from_partition(k, &parts);
        // exact count when it fits, the float product otherwise
        let weight = match ct.symmetric_class_size() {
            Some(n) => n as f64 / kfact,
            None => {
                let mut w = 1.0;
                for (j, &a) in ct.0.iter().enumerate() {
                    let len = (j + 1) as f64;
                    for i in 1..=a {
                        w /= len * i as f64;
                    }
                }
                w
            }
        };
        let mut term = weight;
        for (j, &a) in ct.0.iter().enumerate() {
            term *= x[j].powi(a as i32);
        }
        p += term;
    }
    Ok(SeparabilityResult {
        k,
        group: format!("S{k}"),
        p,
        method: Method::CycleIndex,
        traces: x,
    })
}

/// p^(k) = (1/k) Σ_{j=1}^{k} Tr[ρ^j] p^(k−j), p^(0) = 1.
pub fn acceptance_recurrence(rho: &DensityMatrix, k: usize) -> Result<SeparabilityResult> {
    require_k(k)?;
    let x = rho.trace_powers(k);
    let p = recurrence_values(&x, k);
    Ok(SeparabilityResult {
        k,
        group: format!("S{k}"),
        p: p[k],
        method: Method::Recurrence,
        traces: x,
    })
}

/// p^(0..=k) from x_j = Tr[ρ^j].
pub fn recurrence_values(x: &[f64], k: usize) -> Vec<f64> {
    let mut p = vec![1.0; k + 1];
    for n in 1..=k {
        let mut s = 0.0;
        for j in 1..=n {
            s += x[j - 1] * p[n - j];
        }
        p[n] = s / n as f64;
    }
    p
}

/// Complete Bell polynomial B_k(y_1, ..., y_k) by B_{n+1} = Σ_i C(n, i) B_{n−i} y_{i+1}.
pub fn complete_bell(y: &[f64], k: usize) -> f64 {
    let mut b = vec![1.0; k + 1];
    for n in 0..k {
        let mut s = 0.0;
        let mut binom = 1.0;
        for i in 0..=n {
            s += binom * b[n - i] * y[i];
            binom = binom * (n - i) as f64 / (i + 1) as f64;
        }
        b[n + 1] = s;
    }
    b[k]
}

/// (1/k!) B_k(x_1, 1! x_2, 2! x_3, ..., (k−1)! x_k).
pub fn acceptance_bell(rho: &DensityMatrix, k: usize) -> Result<SeparabilityResult> {
    require_k(k)?;
    let x = rho.trace_powers(k);
    let mut y = Vec::with_capacity(k);
    let mut fact = 1.0;
    for (j, &xj) in x.iter().enumerate() {
        if j > 0 {
            fact *= j as f64;
        }
        y.push(fact * xj);
    }
    let mut kfact = 1.0;
    for i in 2..=k {
        kfact *= i as f64;
    }
    Ok(SeparabilityResult {
        k,
        group: format!("S{k}"),
        p: complete_bell(&y, k) / kfact,
        method: Method::Bell,
        traces: x,
    })
}

/// Z(G) evaluated at x_j = Tr[ρ^j].
pub fn acceptance_group(rho: &DensityMatrix, g: &FiniteGroup) -> Result<SeparabilityResult> {
    let k = g.degree();
    require_k(k)?;
    let x = rho.trace_powers(k);
    let p = g.cycle_index().eval(&x)?;
    Ok(SeparabilityResult {
        k,
        group: g.name().to_string(),
        p,
        method: Method::CycleIndex,
        traces: x,
    })
}

/// Tr[Π_G ρ^{⊗k}] from the dense projector; requires d^k ≤ 4096.
pub fn acceptance_direct(rho: &DensityMatrix, g: &FiniteGroup) -> Result<f64> {
    let d = rho.dim();
    let rep = PermutationRep::new(g.clone(), d)?;
    let big = rep.dim();
    linalg::check_dim(big, "direct acceptance")?;
    let mut state: CMat = rho.matrix().clone();
    for _ in 1..g.degree() {
        state = linalg::tensor(&state, rho.matrix());
    }
    // Tr[W(π) ρ^{⊗k}] = Σ_x ⟨W(π)x| ... | x⟩ summed over the index map
    let mut total = 0.0;
    for p in g.elements() {
        let map = rep.index_map(p)?;
        let mut s = 0.0;
        for (x, &y) in map.iter().enumerate() {
            s += state[(x, y)].re;
        }
        total += s;
    }
    Ok(total / g.order() as f64)
}

fn euler_phi(n: usize) -> usize {
    (1..=n).filter(|&i| crate::groups::num_gcd(i, n) == 1).count()
}

/// (1/m^k) Σ_{n | m} (n^k − (n − φ(n))^k) Tr[ρ^n]^{m^k/n} for Z_m^k acting regularly on m^k letters.
pub fn acceptance_zpow_formula(rho: &DensityMatrix, m: usize, k: usize) -> Result<f64> {
    if m == 0 || k == 0 {
        return Err(SymError::Invalid("need m, k >= 1".into()));
    }
    let letters = (m as f64).powi(k as i32);
    let x = rho.trace_powers(m);
    let mut s = 0.0;
    for n in (1..=m).filter(|n| m % n == 0) {
        let count = (n as f64).powi(k as i32) - ((n - euler_phi(n)) as f64).powi(k as i32);
        s += count * x[n - 1].powf(letters / n as f64);
    }
    Ok(s / letters)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Cyclic,
    Symmetric,
    Dihedral,
}

impl GroupKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "cyc" | "cyclic" => Ok(Self::Cyclic),
            "sym" | "symmetric" => Ok(Self::Symmetric),
            "dih" | "dihedral" => Ok(Self::Dihedral),
            _ => Err(SymError::Unknown(format!("group kind {s}"))),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Self::Cyclic => "cyc",
            Self::Symmetric => "sym",
            Self::Dihedral => "dih",
        }
    }

    pub fn group(&self, k: usize) -> Result<FiniteGroup> {
        match self {
            Self::Cyclic => FiniteGroup::cyclic(k),
            Self::Symmetric => FiniteGroup::symmetric(k),
            Self::Dihedral => FiniteGroup::dihedral(k),
        }
    }
}

/// Acceptance of the S_k, C_k or D_k test; S_k goes through partitions, so large k
/// never enumerates the group.
pub fn acceptance_kind(rho: &DensityMatrix, kind: GroupKind, k: usize) -> Result<SeparabilityResult> {
    match kind {
        GroupKind::Symmetric => acceptance_sym(rho, k),
        _ => acceptance_group(rho, &kind.group(k)?),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ResourceCount {
    pub kind: GroupKind,
    pub k: usize,
    /// exact count of the construction
    pub cswap_count: u64,
    pub control_qubits: u64,
    /// controlled cycle-power gates (cyclic and dihedral)
    pub controlled_powers: Option<u64>,
    /// (k−1) log₂ k, the headline estimate for the cyclic test
    pub formula_estimate: Option<f64>,
    /// (k−1)(⌊log₂(k−1)⌋ + 1)
    pub upper_bound: Option<u64>,
    pub depth_class: String,
}

fn floor_log2(n: usize) -> u32 {
    usize::BITS - 1 - n.leading_zeros()
}

/// SWAPs realizing the cyclic shift by s on k letters: k − gcd(k, s).
fn shift_swaps(k: usize, s: usize) -> u64 {
    (k - crate::groups::num_gcd(k, s % k)) as u64
}

fn cyclic_count(k: usize) -> (u64, u64) {
    let powers = floor_log2(k - 1) + 1;
    let swaps = (0..powers).map(|j| shift_swaps(k, 1 << j)).sum();
    (swaps, powers as u64)
}

pub fn gate_count(kind: GroupKind, k: usize) -> Result<ResourceCount> {
    let min = if kind == GroupKind::Dihedral { 3 } else { 2 };
    if k < min {
        return Err(SymError::Invalid(format!(
            "{} test needs k >= {min}",
            kind.tag()
        )));
    }
    let kk = k as u64;
    Ok(match kind {
        GroupKind::Symmetric => ResourceCount {
            kind,
            k,
            cswap_count: kk * (kk - 1) / 2,
            control_qubits: kk * (kk - 1) / 2,
            controlled_powers: None,
            formula_estimate: None,
            upper_bound: None,
            depth_class: "O(k^2)".into(),
        },
        GroupKind::Cyclic => {
            let (swaps, powers) = cyclic_count(k);
            ResourceCount {
                kind,
                k,
                cswap_count: swaps,
                control_qubits: powers,
                controlled_powers: Some(powers),
                formula_estimate: Some((k - 1) as f64 * (k as f64).log2()),
                upper_bound: Some((kk - 1) * powers),
                depth_class: "O(k log k)".into(),
            }
        }
        GroupKind::Dihedral => {
            let (swaps, powers) = cyclic_count(k);
            let flip = ((k - 1) / 2) as u64;
            ResourceCount {
                kind,
                k,
                cswap_count: 2 * swaps + flip,
                control_qubits: powers + 1,
                controlled_powers: Some(2 * powers),
                formula_estimate: Some(2.0 * k as f64 * (k as f64).log2()),
                upper_bound: Some(2 * (kk - 1) * powers + flip),
                depth_class: "O(k log k)".into(),
            }
        }
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RejectionReport {
    pub kind: GroupKind,
    pub k: usize,
    pub p: f64,
    pub cswaps: u64,
    /// cswaps / (1 − p)
    pub ratio: f64,
    /// formula_estimate / (1 − p) where a headline estimate exists
    pub formula_ratio: Option<f64>,
}

/// Expected controlled-SWAP cost per rejection.
pub fn resources_to_rejection(
    rho: &DensityMatrix,
    kind: GroupKind,
    k: usize,
) -> Result<RejectionReport> {
    let count = gate_count(kind, k)?;
    let p = acceptance_kind(rho, kind, k)?.p;
    let gap = 1.0 - p;
    if gap <= 1e-12 {
        return Err(SymError::Separable);
    }
    Ok(RejectionReport {
        kind,
        k,
        p,
        cswaps: count.cswap_count,
        ratio: count.cswap_count as f64 / gap,
        formula_ratio: count.formula_estimate.map(|f| f / gap),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_real_diagonal, random_density};

    fn mixed(d: usize) -> DensityMatrix {
        DensityMatrix::maximally_mixed(vec![d]).unwrap()
    }

    #[test]
    fn maximally_mixed_qubit_values() {
        let r = mixed(2);
        assert!((acceptance_sym(&r, 2).unwrap().p - 0.75).abs() < 1e-15);
        assert!((acceptance_sym(&r, 3).unwrap().p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bell_polynomial_at_ones() {
        // B_k(1, 1, 2!, ..., (k−1)!) = k!
        let r = DensityMatrix::new(from_real_diagonal(&[1.0, 0.0]), vec![2]).unwrap();
        for k in 1..=10 {
            assert!((acceptance_bell(&r, k).unwrap().p - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn four_methods_agree() {
        let r = random_density(2, 2, 3).unwrap();
        for k in 1..=5 {
            let s = acceptance_sym(&r, k).unwrap().p;
            let rec = acceptance_recurrence(&r, k).unwrap().p;
            let b = acceptance_bell(&r, k).unwrap().p;
            let d = acceptance_direct(&r, &FiniteGroup::symmetric(k).unwrap()).unwrap();
            assert!((s - rec).abs() < 1e-12 && (s - b).abs() < 1e-12 && (s - d).abs() < 1e-10);
        }
    }

    #[test]
    fn cyclic_power_counts() {
        assert_eq!(gate_count(GroupKind::Cyclic, 5).unwrap().controlled_powers, Some(3));
        assert_eq!(gate_count(GroupKind::Cyclic, 4).unwrap().cswap_count, 3 + 2);
        assert_eq!(gate_count(GroupKind::Cyclic, 8).unwrap().cswap_count, 7 + 6 + 4);
    }

    #[test]
    fn separable_rejection_is_an_error() {
        let r = DensityMatrix::new(from_real_diagonal(&[1.0, 0.0]), vec![2]).unwrap();
        assert_eq!(
            resources_to_rejection(&r, GroupKind::Symmetric, 3).unwrap_err(),
            SymError::Separable
        );
    }
}
