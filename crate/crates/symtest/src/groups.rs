//! Finite groups as permutation groups, their representations on tensor factors,
//! unitary representation tables, projectors, twirls and cycle index polynomials.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, SymError};
use crate::linalg::{
    self, check_dim, factor_permutation_map, identity, pauli, tensor, tensor_all, CMat, CVec,
    DensityMatrix, PureState, ONE,
};

pub const MAX_GROUP_ORDER: usize = 1_000_000;
/// Cap on order × degree for explicitly stored permutation groups.
pub const MAX_GROUP_STORAGE: usize = 50_000_000;

/// A permutation in one-line notation: `image[i]` is where `i` goes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let k = image.len();
        let mut seen = vec![false; k];
        for &x in &image {
            if x >= k || seen[x] {
                return Err(SymError::Invalid(format!("{image:?} is not a bijection")));
            }
            seen[x] = true;
        }
        Ok(Self { image })
    }

    pub fn identity(k: usize) -> Self {
        Self {
            image: (0..k).collect(),
        }
    }

    /// Build from disjoint cycles on 0..k (letters not mentioned are fixed).
    pub fn from_cycles(k: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut image: Vec<usize> = (0..k).collect();
        let mut used = vec![false; k];
        for cyc in cycles {
            for (pos, &x) in cyc.iter().enumerate() {
                if x >= k || used[x] {
                    return Err(SymError::Invalid(format!("bad cycle list {cycles:?}")));
                }
                used[x] = true;
                image[x] = cyc[(pos + 1) % cyc.len()];
            }
        }
        Ok(Self { image })
    }

    /// i -> i + shift (mod k).
    pub fn shift(k: usize, shift: usize) -> Self {
        Self {
            image: (0..k).map(|i| (i + shift) % k).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.image.len()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    /// self ∘ other: first other, then self.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            image: other.image.iter().map(|&i| self.image[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.image.len()];
        for (i, &x) in self.image.iter().enumerate() {
            inv[x] = i;
        }
        Self { image: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// Disjoint cycles including fixed points, each starting at its smallest letter.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let k = self.image.len();
        let mut seen = vec![false; k];
        let mut out = Vec::new();
        for start in 0..k {
            if seen[start] {
                continue;
            }
            let mut cyc = vec![start];
            seen[start] = true;
            let mut x = self.image[start];
            while x != start {
                seen[x] = true;
                cyc.push(x);
                x = self.image[x];
            }
            out.push(cyc);
        }
        out
    }

    pub fn cycle_type(&self) -> CycleType {
        let k = self.image.len();
        let mut a = vec![0; k];
        for cyc in self.cycles() {
            a[cyc.len() - 1] += 1;
        }
        CycleType(a)
    }

    pub fn order(&self) -> usize {
        self.cycles()
            .iter()
            .fold(1, |acc, c| num_lcm(acc, c.len()))
    }

    /// Minimal number of transpositions (SWAPs) whose product is this permutation.
    pub fn transposition_count(&self) -> usize {
        self.image.len() - self.cycles().len()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nontrivial: Vec<Vec<usize>> =
            self.cycles().into_iter().filter(|c| c.len() > 1).collect();
        if nontrivial.is_empty() {
            return write!(f, "e");
        }
        for c in nontrivial {
            let s: Vec<String> = c.iter().map(|x| (x + 1).to_string()).collect();
            write!(f, "({})", s.join(" "))?;
        }
        Ok(())
    }
}

pub(crate) fn num_gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        num_gcd(b, a % b)
    }
}

fn num_lcm(a: usize, b: usize) -> usize {
    a / num_gcd(a, b) * b
}

/// Cycle type (a_1, ..., a_k): `a[j-1]` is the number of j-cycles.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CycleType(pub Vec<usize>);

impl CycleType {
    pub fn degree(&self) -> usize {
        self.0.iter().enumerate().map(|(j, a)| (j + 1) * a).sum()
    }

    pub fn from_partition(k: usize, parts: &[usize]) -> Self {
        let mut a = vec![0; k];
        for &p in parts {
            a[p - 1] += 1;
        }
        CycleType(a)
    }

    /// Size of the conjugacy class in S_k: k! / Π_j (j^{a_j} a_j!), exact.
    pub fn symmetric_class_size(&self) -> Option<u128> {
        let k = self.degree() as u128;
        let mut num: u128 = 1;
        for i in 2..=k {
            num = num.checked_mul(i)?;
        }
        let mut den: u128 = 1;
        for (j, &a) in self.0.iter().enumerate() {
            let j = (j + 1) as u128;
            for m in 1..=a as u128 {
                den = den.checked_mul(j)?.checked_mul(m)?;
            }
        }
        Some(num / den)
    }
}

/// Partitions of k as descending part lists, in lexicographic descent: [k], [k-1,1], ...
pub fn partitions(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut cur = vec![k];
    loop {
        out.push(cur.clone());
        // rightmost part greater than 1
        let Some(pos) = cur.iter().rposition(|&p| p > 1) else {
            break;
        };
        let mut rem: usize = cur[pos + 1..].iter().sum::<usize>() + 1;
        let v = cur[pos] - 1;
        cur.truncate(pos);
        cur.push(v);
        while rem > v {
            cur.push(v);
            rem -= v;
        }
        if rem > 0 {
            cur.push(rem);
        }
    }
    out
}

/// A finite group stored as an explicit list of permutations of `degree` letters.
/// Element 0 is always the identity.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    name: String,
    degree: usize,
    elements: Vec<Permutation>,
    index: HashMap<Permutation, usize>,
    cyclic_labels: Option<Vec<usize>>,
}

impl FiniteGroup {
    fn check_size(order: usize, degree: usize) -> Result<()> {
        if order > MAX_GROUP_ORDER {
            return Err(SymError::Oversize(format!(
                "group order {order} exceeds {MAX_GROUP_ORDER}"
            )));
        }
        if order.saturating_mul(degree.max(1)) > MAX_GROUP_STORAGE {
            return Err(SymError::Oversize(format!(
                "group with {order} elements on {degree} letters is too large to store"
            )));
        }
        Ok(())
    }

    fn from_list(name: String, degree: usize, elements: Vec<Permutation>) -> Self {
        let index = elements
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        Self {
            name,
            degree,
            elements,
            index,
            cyclic_labels: None,
        }
    }

    /// Closure of the generators under composition, in breadth-first order from the identity.
    pub fn from_generators(name: &str, degree: usize, gens: &[Permutation]) -> Result<Self> {
        if gens.iter().any(|g| g.degree() != degree) {
            return Err(SymError::Group("generator degree mismatch".into()));
        }
        let mut elements = vec![Permutation::identity(degree)];
        let mut index: HashMap<Permutation, usize> = HashMap::new();
        index.insert(elements[0].clone(), 0);
        let mut head = 0;
        while head < elements.len() {
            let x = elements[head].clone();
            head += 1;
            for g in gens {
                let y = g.compose(&x);
                if !index.contains_key(&y) {
                    index.insert(y.clone(), elements.len());
                    elements.push(y);
                    Self::check_size(elements.len(), degree)?;
                }
            }
        }
        Ok(Self {
            name: name.to_string(),
            degree,
            elements,
            index,
            cyclic_labels: None,
        })
    }

    /// Validates closure, identity and inverses of an explicit element list.
    pub fn from_elements(name: &str, elements: Vec<Permutation>) -> Result<Self> {
        let degree = elements.first().map(|p| p.degree()).unwrap_or(0);
        Self::check_size(elements.len(), degree)?;
        if elements.iter().any(|p| p.degree() != degree) {
            return Err(SymError::Group("mixed degrees".into()));
        }
        let mut elements = elements;
        let id = Permutation::identity(degree);
        let Some(pos) = elements.iter().position(|p| *p == id) else {
            return Err(SymError::Group("identity missing".into()));
        };
        elements.swap(0, pos);
        let g = Self::from_list(name.to_string(), degree, elements);
        if g.index.len() != g.elements.len() {
            return Err(SymError::Group("duplicate elements".into()));
        }
        if !g.is_closed() {
            return Err(SymError::Group("element list is not closed".into()));
        }
        Ok(g)
    }

    pub fn trivial(k: usize) -> Self {
        Self::from_list("trivial".into(), k, vec![Permutation::identity(k)])
    }

    /// S_k, elements in lexicographic order of their one-line images.
    pub fn symmetric(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(SymError::Invalid("symmetric group needs k >= 1".into()));
        }
        let mut order: usize = 1;
        for i in 2..=k {
            order = order.saturating_mul(i);
        }
        Self::check_size(order, k)?;
        let mut elements = Vec::with_capacity(order);
        let mut cur: Vec<usize> = (0..k).collect();
        loop {
            elements.push(Permutation { image: cur.clone() });
            if !next_permutation(&mut cur) {
                break;
            }
        }
        Ok(Self::from_list(format!("S{k}"), k, elements))
    }

    /// C_k generated by the cycle (1 2 ... k); element i is the i-th power.
    pub fn cyclic(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(SymError::Invalid("cyclic group needs k >= 1".into()));
        }
        Self::check_size(k, k)?;
        let elements = (0..k).map(|s| Permutation::shift(k, s)).collect();
        let mut g = Self::from_list(format!("C{k}"), k, elements);
        g.cyclic_labels = Some((0..k).collect());
        Ok(g)
    }

    /// D_k on the vertices of a k-gon: rotations r^a then reflections r^a f.
    pub fn dihedral(k: usize) -> Result<Self> {
        if k < 3 {
            return Err(SymError::Invalid("dihedral group needs k >= 3".into()));
        }
        Self::check_size(2 * k, k)?;
        let flip = Permutation {
            image: (0..k).map(|i| (k - i) % k).collect(),
        };
        let mut elements: Vec<Permutation> = (0..k).map(|s| Permutation::shift(k, s)).collect();
        for s in 0..k {
            elements.push(Permutation::shift(k, s).compose(&flip));
        }
        Ok(Self::from_list(format!("D{k}"), k, elements))
    }

    /// Z_m^n embedded in S_{m^n} by its left-regular (Cayley) action.
    pub fn cyclic_power(m: usize, n: usize) -> Result<Self> {
        if m < 2 || n == 0 {
            return Err(SymError::Invalid("cyclic power needs m >= 2, n >= 1".into()));
        }
        let order = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if order > MAX_GROUP_ORDER as u128 {
            return Err(SymError::Oversize(format!("|Z_{m}^{n}| exceeds {MAX_GROUP_ORDER}")));
        }
        let order = order as usize;
        Self::check_size(order, order)?;
        let digits_of = |mut x: usize| {
            let mut d = vec![0; n];
            for j in (0..n).rev() {
                d[j] = x % m;
                x /= m;
            }
            d
        };
        let from_digits = |d: &[usize]| d.iter().fold(0, |acc, &v| acc * m + v);
        let labels: Vec<Vec<usize>> = (0..order).map(digits_of).collect();
        let elements = labels
            .iter()
            .map(|g| Permutation {
                image: labels
                    .iter()
                    .map(|y| {
                        let s: Vec<usize> = g.iter().zip(y).map(|(a, b)| (a + b) % m).collect();
                        from_digits(&s)
                    })
                    .collect(),
            })
            .collect();
        let mut grp = Self::from_list(format!("Z{m}^{n}"), order, elements);
        if n == 1 {
            grp.cyclic_labels = Some((0..m).collect());
        }
        Ok(grp)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Permutation {
        &self.elements[i]
    }

    pub fn index_of(&self, p: &Permutation) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// Index of elements[i] ∘ elements[j].
    pub fn multiply(&self, i: usize, j: usize) -> usize {
        self.index[&self.elements[i].compose(&self.elements[j])]
    }

    pub fn is_closed(&self) -> bool {
        self.elements.iter().all(|a| {
            self.index.contains_key(&a.inverse())
                && self
                    .elements
                    .iter()
                    .all(|b| self.index.contains_key(&a.compose(b)))
        })
    }

    pub fn is_abelian(&self) -> bool {
        self.elements
            .iter()
            .enumerate()
            .all(|(i, a)| self.elements[..i].iter().all(|b| a.compose(b) == b.compose(a)))
    }

    /// Labels in Z_|G| making the group isomorphic to the additive cyclic group,
    /// when the construction provides them.
    pub fn cyclic_labels(&self) -> Option<&[usize]> {
        self.cyclic_labels.as_deref()
    }

    pub fn cycle_index(&self) -> CycleIndexPolynomial {
        CycleIndexPolynomial::of_group(self)
    }
}

fn next_permutation(a: &mut [usize]) -> bool {
    let n = a.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// Z(G) = (1/|G|) Σ_types count · x_1^{a_1} ... x_k^{a_k}, with exact integer counts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleIndexPolynomial {
    pub degree: usize,
    pub order: u128,
    pub terms: BTreeMap<CycleType, u128>,
}

impl CycleIndexPolynomial {
    pub fn of_group(g: &FiniteGroup) -> Self {
        let mut terms = BTreeMap::new();
        for p in g.elements() {
            *terms.entry(p.cycle_type()).or_insert(0u128) += 1;
        }
        Self {
            degree: g.degree(),
            order: g.order() as u128,
            terms,
        }
    }

    /// Z(S_k) from partitions, without enumerating the group.
    pub fn symmetric(k: usize) -> Result<Self> {
        let mut order: u128 = 1;
        for i in 2..=k as u128 {
            order = order
                .checked_mul(i)
                .ok_or_else(|| SymError::Oversize(format!("{k}! overflows exact arithmetic")))?;
        }
        let mut terms = BTreeMap::new();
        for p in partitions(k) {
            let ct = CycleType::from_partition(k, &p);
            let n = ct
                .symmetric_class_size()
                .ok_or_else(|| SymError::Oversize(format!("class size overflow at k={k}")))?;
            terms.insert(ct, n);
        }
        Ok(Self {
            degree: k,
            order,
            terms,
        })
    }

    pub fn coefficient(&self, ct: &CycleType) -> u128 {
        self.terms.get(ct).copied().unwrap_or(0)
    }

    /// (1/|G|) Σ count · Π_j values[j-1]^{a_j}.
    pub fn eval(&self, values: &[f64]) -> Result<f64> {
        if values.len() < self.degree {
            return Err(SymError::Dimension(format!(
                "cycle index of degree {} needs {} values, got {}",
                self.degree,
                self.degree,
                values.len()
            )));
        }
        let mut s = 0.0;
        for (ct, &count) in &self.terms {
            let mut term = count as f64;
            for (j, &a) in ct.0.iter().enumerate() {
                if a > 0 {
                    term *= values[j].powi(a as i32);
                }
            }
            s += term;
        }
        Ok(s / self.order as f64)
    }
}

impl fmt::Display for CycleIndexPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(1/{})(", self.order)?;
        let mut first = true;
        for (ct, n) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if *n != 1 {
                write!(f, "{n}")?;
            }
            let mut mono = Vec::new();
            for (j, &a) in ct.0.iter().enumerate() {
                match a {
                    0 => {}
                    1 => mono.push(format!("x{}", j + 1)),
                    _ => mono.push(format!("x{}^{}", j + 1, a)),
                }
            }
            write!(f, "{}", mono.join(" "))?;
        }
        write!(f, ")")
    }
}

/// Representation of a permutation group on (C^d)^{⊗k} by permuting tensor factors:
/// the content of factor j moves to factor π(j).
#[derive(Clone, Debug)]
pub struct PermutationRep {
    group: FiniteGroup,
    local_dim: usize,
}

impl PermutationRep {
    pub fn new(group: FiniteGroup, local_dim: usize) -> Result<Self> {
        if local_dim == 0 {
            return Err(SymError::Invalid("local dimension must be positive".into()));
        }
        let dims = vec![local_dim; group.degree()];
        linalg::checked_product(&dims, "permutation representation")?;
        Ok(Self { group, local_dim })
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn k(&self) -> usize {
        self.group.degree()
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![self.local_dim; self.k()]
    }

    pub fn dim(&self) -> usize {
        linalg::product(&self.dims())
    }

    /// Basis-index map x -> W(π)x.
    pub fn index_map(&self, p: &Permutation) -> Result<Vec<usize>> {
        if p.degree() != self.k() {
            return Err(SymError::Dimension(format!(
                "permutation on {} letters for {} factors",
                p.degree(),
                self.k()
            )));
        }
        Ok(factor_permutation_map(&self.dims(), p.image())?.0)
    }

    pub fn apply_vec(&self, p: &Permutation, v: &CVec) -> Result<CVec> {
        if v.len() != self.dim() {
            return Err(SymError::Dimension("state size does not match d^k".into()));
        }
        let map = self.index_map(p)?;
        let mut out = CVec::zeros(v.len());
        for (x, &y) in map.iter().enumerate() {
            out[y] = v[x];
        }
        Ok(out)
    }

    pub fn apply_pure(&self, p: &Permutation, psi: &PureState) -> Result<PureState> {
        PureState::new(self.apply_vec(p, psi.vector())?, psi.dims().to_vec())
    }

    /// W(π) ρ W(π)†.
    pub fn apply_density(&self, p: &Permutation, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim() {
            return Err(SymError::Dimension("state size does not match d^k".into()));
        }
        let map = self.index_map(p)?;
        let n = rho.dim();
        let m = rho.matrix();
        let mut out = CMat::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                out[(map[a], map[b])] = m[(a, b)];
            }
        }
        DensityMatrix::new(out, rho.dims().to_vec())
    }

    pub fn matrix(&self, p: &Permutation) -> Result<CMat> {
        let map = self.index_map(p)?;
        let n = map.len();
        let mut m = CMat::zeros(n, n);
        for (x, &y) in map.iter().enumerate() {
            m[(y, x)] = ONE;
        }
        Ok(m)
    }

    /// Π = (1/|G|) Σ_g W(g).
    pub fn projector(&self) -> Result<CMat> {
        let n = self.dim();
        check_dim(n, "projector")?;
        let mut m = CMat::zeros(n, n);
        let w = 1.0 / self.group.order() as f64;
        for p in self.group.elements() {
            let map = self.index_map(p)?;
            for (x, &y) in map.iter().enumerate() {
                m[(y, x)] += w;
            }
        }
        Ok(m)
    }

    pub fn twirl(&self, x: &CMat) -> Result<CMat> {
        let n = self.dim();
        if !x.is_square() || x.nrows() != n {
            return Err(SymError::Dimension("twirl: operator size mismatch".into()));
        }
        let mut out = CMat::zeros(n, n);
        let w = 1.0 / self.group.order() as f64;
        for p in self.group.elements() {
            let map = self.index_map(p)?;
            for a in 0..n {
                for b in 0..n {
                    out[(map[a], map[b])] += x[(a, b)] * w;
                }
            }
        }
        Ok(out)
    }

    /// Materialize as a unitary table (linear, with the group's multiplication table).
    pub fn to_table(&self) -> Result<UnitaryRepTable> {
        let g = &self.group;
        let matrices = g
            .elements()
            .iter()
            .map(|p| self.matrix(p))
            .collect::<Result<Vec<_>>>()?;
        let n = g.order();
        let table = (0..n)
            .map(|i| (0..n).map(|j| g.multiply(i, j)).collect())
            .collect();
        Ok(UnitaryRepTable {
            name: format!("{}@d{}", g.name(), self.local_dim),
            labels: g.elements().iter().map(|p| p.to_string()).collect(),
            matrices,
            dims: self.dims(),
            table,
            phases: vec![vec![ONE; n]; n],
            phase_trivial: true,
            cyclic_labels: g.cyclic_labels().map(|l| l.to_vec()),
        })
    }
}

/// Unitaries indexed by group elements, closed under multiplication up to phase.
#[derive(Clone, Debug)]
pub struct UnitaryRepTable {
    name: String,
    labels: Vec<String>,
    matrices: Vec<CMat>,
    dims: Vec<usize>,
    /// table[i][j] = index k with U_i U_j = phases[i][j] U_k
    table: Vec<Vec<usize>>,
    phases: Vec<Vec<Complex64>>,
    phase_trivial: bool,
    cyclic_labels: Option<Vec<usize>>,
}

const UNITARY_TOL: f64 = 1e-9;
const PHASE_TOL: f64 = 1e-8;

fn match_up_to_phase(mats: &[CMat], p: &CMat) -> Option<(usize, Complex64)> {
    let d = p.nrows() as f64;
    for (k, m) in mats.iter().enumerate() {
        let ov = linalg::hs_inner(m, p) / d;
        if (ov.norm() - 1.0).abs() < PHASE_TOL {
            let diff = p - m * ov;
            if linalg::max_abs(&diff) < PHASE_TOL {
                return Some((k, ov));
            }
        }
    }
    None
}

impl UnitaryRepTable {
    /// Validates unitarity and closure up to phase and records the multiplication table.
    pub fn from_matrices(
        name: &str,
        labels: Vec<String>,
        matrices: Vec<CMat>,
        dims: Vec<usize>,
    ) -> Result<Self> {
        let n = matrices.len();
        if n == 0 {
            return Err(SymError::Group("empty representation".into()));
        }
        if labels.len() != n {
            return Err(SymError::Group("label count mismatch".into()));
        }
        let d = linalg::checked_product(&dims, "representation")?;
        for (i, m) in matrices.iter().enumerate() {
            if !m.is_square() || m.nrows() != d {
                return Err(SymError::Dimension(format!(
                    "matrix {i} is {}x{}, expected {d}x{d}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let defect = linalg::unitarity_defect(m);
            if defect > UNITARY_TOL {
                return Err(SymError::NotUnitary(defect));
            }
        }
        let mut table = vec![vec![0; n]; n];
        let mut phases = vec![vec![ONE; n]; n];
        let mut trivial = true;
        for i in 0..n {
            for j in 0..n {
                let p = &matrices[i] * &matrices[j];
                let (k, ph) = match_up_to_phase(&matrices, &p).ok_or_else(|| {
                    SymError::Group(format!(
                        "product of elements {i} and {j} is not in the table"
                    ))
                })?;
                table[i][j] = k;
                phases[i][j] = ph;
                if (ph - ONE).norm() > PHASE_TOL {
                    trivial = false;
                }
            }
        }
        if match_up_to_phase(&matrices, &identity(d)).is_none() {
            return Err(SymError::Group("identity (up to phase) missing".into()));
        }
        Ok(Self {
            name: name.to_string(),
            labels,
            matrices,
            dims,
            table,
            phases,
            phase_trivial: trivial,
            cyclic_labels: None,
        })
    }

    /// Closure of generators under multiplication, identifying matrices equal up to phase.
    pub fn from_generators(name: &str, gens: &[CMat], dims: Vec<usize>) -> Result<Self> {
        let d = linalg::checked_product(&dims, "representation")?;
        let mut mats = vec![identity(d)];
        let mut head = 0;
        while head < mats.len() {
            let x = mats[head].clone();
            head += 1;
            for g in gens {
                if g.nrows() != d || !g.is_square() {
                    return Err(SymError::Dimension("generator size mismatch".into()));
                }
                let y = g * &x;
                if match_up_to_phase(&mats, &y).is_none() {
                    mats.push(y);
                    if mats.len() > MAX_DIM_CLOSURE {
                        return Err(SymError::Oversize(format!(
                            "closure exceeds {MAX_DIM_CLOSURE} elements"
                        )));
                    }
                }
            }
        }
        let labels = (0..mats.len()).map(|i| format!("g{i}")).collect();
        Self::from_matrices(name, labels, mats, dims)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn order(&self) -> usize {
        self.matrices.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        linalg::product(&self.dims)
    }

    pub fn matrices(&self) -> &[CMat] {
        &self.matrices
    }

    pub fn matrix(&self, i: usize) -> &CMat {
        &self.matrices[i]
    }

    pub fn product_index(&self, i: usize, j: usize) -> usize {
        self.table[i][j]
    }

    pub fn product_phase(&self, i: usize, j: usize) -> Complex64 {
        self.phases[i][j]
    }

    /// True when U(g)U(h) = U(gh) exactly (no projective phases).
    pub fn phase_trivial(&self) -> bool {
        self.phase_trivial
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|i| (0..i).all(|j| self.table[i][j] == self.table[j][i]))
    }

    pub fn cyclic_labels(&self) -> Option<&[usize]> {
        self.cyclic_labels.as_deref()
    }

    /// Attach an explicit isomorphism onto Z_|G| (element i has label labels[i]).
    pub fn with_cyclic_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        let n = self.order();
        if labels.len() != n {
            return Err(SymError::Group("cyclic label count mismatch".into()));
        }
        let mut by_label = vec![usize::MAX; n];
        for (i, &l) in labels.iter().enumerate() {
            if l >= n || by_label[l] != usize::MAX {
                return Err(SymError::Group("labels are not a bijection onto Z_n".into()));
            }
            by_label[l] = i;
        }
        for i in 0..n {
            for j in 0..n {
                if self.table[i][j] != by_label[(labels[i] + labels[j]) % n] {
                    return Err(SymError::Group(
                        "labels are not a homomorphism onto Z_n".into(),
                    ));
                }
            }
        }
        self.cyclic_labels = Some(labels);
        Ok(self)
    }

    pub fn rename(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    /// Π = (1/|G|) Σ_g U(g).
    pub fn projector(&self) -> Result<CMat> {
        let d = self.dim();
        check_dim(d, "projector")?;
        let mut m = CMat::zeros(d, d);
        for u in &self.matrices {
            m += u;
        }
        Ok(m.unscale(self.order() as f64))
    }

    /// 𝒯(X) = (1/|G|) Σ_g U(g) X U(g)†.
    pub fn twirl(&self, x: &CMat) -> Result<CMat> {
        let d = self.dim();
        if !x.is_square() || x.nrows() != d {
            return Err(SymError::Dimension("twirl: operator size mismatch".into()));
        }
        let mut m = CMat::zeros(d, d);
        for u in &self.matrices {
            m += u * x * u.adjoint();
        }
        Ok(m.unscale(self.order() as f64))
    }

    /// Complex-conjugate representation Ū(g).
    pub fn conjugate(&self) -> Self {
        let mut out = self.clone();
        out.name = format!("conj({})", self.name);
        out.matrices = self.matrices.iter().map(|m| m.map(|z| z.conj())).collect();
        out.phases = self
            .phases
            .iter()
            .map(|row| row.iter().map(|z| z.conj()).collect())
            .collect();
        out
    }

    /// U(g) ⊗ V(g) for two tables over the same abstract group (same multiplication table).
    pub fn tensor_with(&self, other: &Self) -> Result<Self> {
        if self.order() != other.order() || self.table != other.table {
            return Err(SymError::Group(
                "representations are not indexed by the same group".into(),
            ));
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        linalg::checked_product(&dims, "tensor representation")?;
        let n = self.order();
        let phases: Vec<Vec<Complex64>> = (0..n)
            .map(|i| (0..n).map(|j| self.phases[i][j] * other.phases[i][j]).collect())
            .collect();
        let trivial = phases
            .iter()
            .flatten()
            .all(|p| (p - ONE).norm() <= PHASE_TOL);
        Ok(Self {
            name: format!("{}x{}", self.name, other.name),
            labels: self.labels.clone(),
            matrices: self
                .matrices
                .iter()
                .zip(&other.matrices)
                .map(|(a, b)| tensor(a, b))
                .collect(),
            dims,
            table: self.table.clone(),
            phases,
            phase_trivial: trivial,
            cyclic_labels: self.cyclic_labels.clone(),
        })
    }

    /// I_before ⊗ U(g) ⊗ I_after.
    pub fn pad_identity(&self, before: &[usize], after: &[usize]) -> Result<Self> {
        let mut dims = before.to_vec();
        dims.extend_from_slice(&self.dims);
        dims.extend_from_slice(after);
        linalg::checked_product(&dims, "padded representation")?;
        let ib = identity(linalg::product(before));
        let ia = identity(linalg::product(after));
        let mut out = self.clone();
        out.matrices = self
            .matrices
            .iter()
            .map(|m| tensor(&tensor(&ib, m), &ia))
            .collect();
        out.dims = dims;
        Ok(out)
    }
}

const MAX_DIM_CLOSURE: usize = 4096;

fn diag_phase_matrix(d: usize, z: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    for j in 0..d {
        let ang = 2.0 * std::f64::consts::PI * ((j * z) % d) as f64 / d as f64;
        m[(j, j)] = Complex64::from_polar(1.0, ang);
    }
    m
}

/// Phase group {Z(z) = Σ_j e^{2πi jz/d} |j⟩⟨j|}, labelled by z ∈ Z_d.
pub fn phase_group(d: usize) -> Result<UnitaryRepTable> {
    if d == 0 {
        return Err(SymError::Invalid("phase group needs d >= 1".into()));
    }
    let mats: Vec<CMat> = (0..d).map(|z| diag_phase_matrix(d, z)).collect();
    let labels = (0..d).map(|z| format!("Z^{z}")).collect();
    UnitaryRepTable::from_matrices(&format!("phase{d}"), labels, mats, vec![d])?
        .with_cyclic_labels((0..d).collect())
}

/// The Z_2 × Z_2 Pauli-Z representation {II, ZI, IZ, ZZ} on two qubits.
pub fn z2xz2_pauli() -> Result<UnitaryRepTable> {
    let labels = ["II", "ZI", "IZ", "ZZ"];
    let mats = labels
        .iter()
        .map(|s| linalg::pauli_string(s))
        .collect::<Result<Vec<_>>>()?;
    UnitaryRepTable::from_matrices(
        "z2xz2-pauli",
        labels.iter().map(|s| s.to_string()).collect(),
        mats,
        vec![2, 2],
    )
}

pub fn cnot() -> CMat {
    let mut m = CMat::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    m[(2, 3)] = ONE;
    m[(3, 2)] = ONE;
    m
}

pub fn swap_gate() -> CMat {
    let mut m = CMat::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 2)] = ONE;
    m[(2, 1)] = ONE;
    m[(3, 3)] = ONE;
    m
}

/// D_3 generated by CNOT and SWAP on two qubits (permutes |01⟩, |10⟩, |11⟩).
pub fn d3_cnot_swap() -> Result<UnitaryRepTable> {
    Ok(UnitaryRepTable::from_generators("d3-cnot-swap", &[cnot(), swap_gate()], vec![2, 2])?
        .rename("d3-cnot-swap"))
}

/// n-qubit Pauli operators {I, X, Y, Z}^{⊗n}, a projective representation of Z_2^{2n}.
pub fn pauli_group(n: usize) -> Result<UnitaryRepTable> {
    if n == 0 || n > 4 {
        return Err(SymError::Invalid("pauli group supported for 1..=4 qubits".into()));
    }
    let mut labels = vec![String::new()];
    for _ in 0..n {
        labels = labels
            .iter()
            .flat_map(|s| ["I", "X", "Y", "Z"].iter().map(move |p| format!("{s}{p}")))
            .collect();
    }
    let mats = labels
        .iter()
        .map(|s| linalg::pauli_string(s))
        .collect::<Result<Vec<_>>>()?;
    UnitaryRepTable::from_matrices(&format!("pauli{n}"), labels, mats, vec![2; n])
}

/// {I, P^{⊗n}} for a single Pauli letter P.
pub fn global_pauli(letter: char, n: usize) -> Result<UnitaryRepTable> {
    let p = pauli(letter)?;
    let big = tensor_all(&vec![p; n]);
    UnitaryRepTable::from_matrices(
        &format!("{letter}^{n}"),
        vec!["I".into(), format!("{letter}^{n}")],
        vec![identity(1 << n), big],
        vec![2; n],
    )
}

/// {I, X^{⊗n}, Y^{⊗n}, Z^{⊗n}}; X^{⊗n} Y^{⊗n} = i^n Z^{⊗n}, so linear only when 4 divides n.
pub fn global_xyz(n: usize) -> Result<UnitaryRepTable> {
    let mut mats = vec![identity(1 << n)];
    let mut labels = vec!["I".to_string()];
    for l in ['X', 'Y', 'Z'] {
        mats.push(tensor_all(&vec![pauli(l)?; n]));
        labels.push(format!("{l}^{n}"));
    }
    UnitaryRepTable::from_matrices(&format!("xyz^{n}"), labels, mats, vec![2; n])
}

pub fn trivial_rep(dims: Vec<usize>) -> Result<UnitaryRepTable> {
    let d = linalg::checked_product(&dims, "trivial representation")?;
    UnitaryRepTable::from_matrices("trivial", vec!["e".into()], vec![identity(d)], dims)
}

/// S_k acting on R ⊗ S with R = B_2 ⋯ B_k and S = A ⊗ B_1, permuting the k copies of B.
/// Factor order is [B_2, ..., B_k, A, B_1].
pub fn k_extension_rep(d_a: usize, d_b: usize, k: usize) -> Result<UnitaryRepTable> {
    if k < 1 {
        return Err(SymError::Invalid("k must be at least 1".into()));
    }
    let sk = FiniteGroup::symmetric(k)?;
    let mut dims = vec![d_b; k - 1];
    dims.push(d_a);
    dims.push(d_b);
    let n = linalg::checked_product(&dims, "k-extension representation")?;
    // B copy c (0-based, copy 0 = B_1) sits at factor position pos[c]
    let mut pos: Vec<usize> = vec![k];
    pos.extend(0..k - 1);
    let mut mats = Vec::with_capacity(sk.order());
    for p in sk.elements() {
        let mut full = vec![0; k + 1];
        full[k - 1] = k - 1;
        for c in 0..k {
            full[pos[c]] = pos[p.apply(c)];
        }
        let (map, _) = factor_permutation_map(&dims, &full)?;
        let mut m = CMat::zeros(n, n);
        for (x, &y) in map.iter().enumerate() {
            m[(y, x)] = ONE;
        }
        mats.push(m);
    }
    let labels = sk.elements().iter().map(|p| p.to_string()).collect();
    UnitaryRepTable::from_matrices(&format!("ext{k}"), labels, mats, dims)
}

/// Named representations usable from the command line.
pub fn named_rep(name: &str) -> Result<UnitaryRepTable> {
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (name, None),
    };
    let num = |a: Option<&str>| -> Result<usize> {
        a.ok_or_else(|| SymError::Parse(format!("{head} needs a size argument")))?
            .trim()
            .parse::<usize>()
            .map_err(|e| SymError::Parse(format!("{name}: {e}")))
    };
    match head {
        "z2xz2-pauli" => z2xz2_pauli(),
        "d3-cnot-swap" => d3_cnot_swap(),
        "pauli" => pauli_group(num(arg)?),
        "phase" => phase_group(num(arg)?),
        "xglobal" => global_pauli('X', num(arg)?),
        "yglobal" => global_pauli('Y', num(arg)?),
        "zglobal" => global_pauli('Z', num(arg)?),
        "xyz" => global_xyz(num(arg)?),
        "trivial" => trivial_rep(vec![num(arg)?]),
        _ => Err(SymError::Unknown(format!("group {name}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions_of_four() {
        assert_eq!(
            partitions(4),
            vec![vec![4], vec![3, 1], vec![2, 2], vec![2, 1, 1], vec![1, 1, 1, 1]]
        );
        assert_eq!(partitions(1), vec![vec![1]]);
    }

    #[test]
    fn d3_has_six_elements() {
        let g = d3_cnot_swap().unwrap();
        assert_eq!(g.order(), 6);
        assert!(g.phase_trivial());
        assert!(!g.is_abelian());
    }

    #[test]
    fn pauli_group_is_projective() {
        let g = pauli_group(1).unwrap();
        assert_eq!(g.order(), 4);
        assert!(!g.phase_trivial());
        assert!(g.is_abelian());
    }

    #[test]
    fn display_cycles_one_based() {
        let p = Permutation::from_cycles(4, &[vec![0, 2], vec![1, 3]]).unwrap();
        assert_eq!(p.to_string(), "(1 3)(2 4)");
        assert_eq!(Permutation::identity(3).to_string(), "e");
    }

    #[test]
    fn k_extension_k2_is_swap_of_b_copies() {
        let rep = k_extension_rep(1, 2, 2).unwrap();
        assert_eq!(rep.order(), 2);
        assert_eq!(rep.dims(), &[2, 1, 2]);
        let sw = rep.matrix(1);
        assert!(linalg::max_abs(&(sw - swap_gate())) < 1e-15);
    }
}
