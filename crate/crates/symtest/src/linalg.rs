//! Dense complex linear algebra used by every other module.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Tensor products follow the
//! Kronecker convention: factor 0 is the most significant digit of a basis index.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, SymError};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Largest total Hilbert-space dimension accepted anywhere.
pub const MAX_DIM: usize = 1 << 12;
/// Hermiticity tolerance for operator inputs before symmetrization.
pub const HERMITIAN_INPUT_TOL: f64 = 1e-8;
/// Tolerance for state invariants (Hermitian, trace, PSD, norm).
pub const STATE_TOL: f64 = 1e-10;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn check_dim(d: usize, what: &str) -> Result<()> {
    if d > MAX_DIM {
        return Err(SymError::Oversize(format!(
            "{what} has dimension {d}, above the cap {MAX_DIM}"
        )));
    }
    Ok(())
}

pub fn product(dims: &[usize]) -> usize {
    dims.iter().product()
}

/// Product of dims with an overflow and cap check.
pub fn checked_product(dims: &[usize], what: &str) -> Result<usize> {
    let mut p: usize = 1;
    for &d in dims {
        p = p
            .checked_mul(d)
            .filter(|&v| v <= MAX_DIM)
            .ok_or_else(|| SymError::Oversize(format!("{what}: dims {dims:?} exceed {MAX_DIM}")))?;
    }
    Ok(p)
}

pub fn tensor(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn tensor_all(ms: &[CMat]) -> CMat {
    let mut out = identity(1);
    for m in ms {
        out = out.kronecker(m);
    }
    out
}

pub fn tensor_vec(a: &CVec, b: &CVec) -> CVec {
    a.kronecker(b)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermitian_defect(m: &CMat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(m - m.adjoint()))
}

pub fn unitarity_defect(m: &CMat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(m.adjoint() * m - identity(m.nrows())))
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Hilbert-Schmidt inner product Tr[a† b].
pub fn hs_inner(a: &CMat, b: &CMat) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Tr[a b] without forming the product.
pub fn trace_of_product(a: &CMat, b: &CMat) -> Complex64 {
    let n = a.nrows();
    let mut s = ZERO;
    for i in 0..n {
        for k in 0..a.ncols() {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

fn require_square_pair(a: &CMat, b: &CMat, what: &str) -> Result<()> {
    if !a.is_square() || !b.is_square() || a.nrows() != b.nrows() {
        return Err(SymError::Dimension(format!(
            "{what}: {}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

/// Left-nested commutator [(h)^n, u] = [h, [h, ..., [h, u]]], with [(h)^0, u] = u.
pub fn nested_commutator(h: &CMat, u: &CMat, n: usize) -> Result<CMat> {
    require_square_pair(h, u, "nested_commutator")?;
    let mut out = u.clone();
    for _ in 0..n {
        out = commutator(h, &out);
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl Eigh {
    pub fn apply_function(&self, f: impl Fn(f64) -> Complex64) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let fj = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

pub fn eigh(m: &CMat) -> Result<Eigh> {
    if !m.is_square() {
        return Err(SymError::Dimension(format!(
            "eigh needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let defect = hermitian_defect(m);
    if !(defect <= HERMITIAN_INPUT_TOL) {
        return Err(SymError::NotHermitian(defect));
    }
    Ok(eigh_unchecked(&hermitize(m)))
}

pub(crate) fn eigh_unchecked(h: &CMat) -> Eigh {
    let n = h.nrows();
    let se = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[a]
            .partial_cmp(&se.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut vectors = CMat::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (col, &k) in order.iter().enumerate() {
        values.push(se.eigenvalues[k]);
        let v = se.eigenvectors.column(k);
        // fix the phase so the largest component is real positive
        let mut best = 0;
        for i in 0..n {
            if v[i].norm() > v[best].norm() + 1e-14 {
                best = i;
            }
        }
        let phase = if v[best].norm() > 0.0 {
            v[best].conj() / v[best].norm()
        } else {
            ONE
        };
        for i in 0..n {
            vectors[(i, col)] = v[i] * phase;
        }
    }
    Eigh { values, vectors }
}

pub fn hermitian_function(m: &CMat, f: impl Fn(f64) -> Complex64) -> Result<CMat> {
    Ok(eigh(m)?.apply_function(f))
}

/// e^{-i h t} by eigendecomposition.
pub fn expm_hermitian(h: &CMat, t: f64) -> Result<CMat> {
    hermitian_function(h, |x| Complex64::from_polar(1.0, -x * t))
}

/// Principal square root of a PSD matrix; small negative eigenvalues are clipped.
pub fn sqrt_psd(m: &CMat) -> Result<CMat> {
    hermitian_function(m, |x| c(x.max(0.0).sqrt(), 0.0))
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Schatten p-norm; pass `f64::INFINITY` for the spectral norm.
pub fn schatten_norm(m: &CMat, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(SymError::Invalid(format!("Schatten norm needs p >= 1, got {p}")));
    }
    let s = singular_values(m);
    if p.is_infinite() {
        return Ok(s.first().copied().unwrap_or(0.0));
    }
    if p == 1.0 {
        return Ok(s.iter().sum());
    }
    Ok(s.iter().map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p))
}

pub fn trace_norm(m: &CMat) -> f64 {
    singular_values(m).iter().sum()
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for j in (0..dims.len().saturating_sub(1)).rev() {
        s[j] = s[j + 1] * dims[j + 1];
    }
    s
}

fn digits(mut x: usize, dims: &[usize], out: &mut [usize]) {
    for j in (0..dims.len()).rev() {
        out[j] = x % dims[j];
        x /= dims[j];
    }
}

/// Partial trace keeping the listed factors (they keep their original order).
pub fn partial_trace(m: &CMat, dims: &[usize], keep: &[usize]) -> Result<CMat> {
    let n = product(dims);
    if !m.is_square() || m.nrows() != n {
        return Err(SymError::Dimension(format!(
            "partial_trace: matrix {}x{} vs dims {dims:?}",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(SymError::Dimension(format!(
            "partial_trace: factor {bad} out of range for {} factors",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|j| !keep.contains(j)).collect();
    let kdims: Vec<usize> = keep.iter().map(|&j| dims[j]).collect();
    let tdims: Vec<usize> = traced.iter().map(|&j| dims[j]).collect();
    let dk = product(&kdims);
    let dt = product(&tdims);
    let ks = strides(&kdims);
    let ts = strides(&tdims);

    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(dk); dt];
    let mut dig = vec![0; dims.len()];
    for x in 0..n {
        digits(x, dims, &mut dig);
        let ki: usize = keep.iter().zip(&ks).map(|(&j, &s)| dig[j] * s).sum();
        let ti: usize = traced.iter().zip(&ts).map(|(&j, &s)| dig[j] * s).sum();
        groups[ti].push((x, ki));
    }
    let mut out = CMat::zeros(dk, dk);
    for g in &groups {
        for &(a, ka) in g {
            for &(b, kb) in g {
                out[(ka, kb)] += m[(a, b)];
            }
        }
    }
    Ok(out)
}

/// Index map for moving factor j to position `perm[j]`: returns, for each input
/// basis index, the output basis index, plus the output dims.
pub fn factor_permutation_map(dims: &[usize], perm: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    let k = dims.len();
    if perm.len() != k {
        return Err(SymError::Dimension(format!(
            "permutation of length {} for {k} factors",
            perm.len()
        )));
    }
    let mut seen = vec![false; k];
    for &p in perm {
        if p >= k || seen[p] {
            return Err(SymError::Invalid(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    let mut out_dims = vec![0; k];
    for j in 0..k {
        out_dims[perm[j]] = dims[j];
    }
    let os = strides(&out_dims);
    let n = product(dims);
    let mut map = vec![0; n];
    let mut dig = vec![0; k];
    for (x, slot) in map.iter_mut().enumerate() {
        digits(x, dims, &mut dig);
        *slot = (0..k).map(|j| dig[j] * os[perm[j]]).sum();
    }
    Ok((map, out_dims))
}

/// Permute tensor factors of a vector: factor j moves to position `perm[j]`.
pub fn permute_subsystems_vec(v: &CVec, dims: &[usize], perm: &[usize]) -> Result<CVec> {
    if v.len() != product(dims) {
        return Err(SymError::Dimension(format!(
            "vector of length {} vs dims {dims:?}",
            v.len()
        )));
    }
    let (map, _) = factor_permutation_map(dims, perm)?;
    let mut out = CVec::zeros(v.len());
    for (x, &y) in map.iter().enumerate() {
        out[y] = v[x];
    }
    Ok(out)
}

/// W m W† where W moves factor j to position `perm[j]`.
pub fn permute_subsystems(m: &CMat, dims: &[usize], perm: &[usize]) -> Result<CMat> {
    let n = product(dims);
    if !m.is_square() || m.nrows() != n {
        return Err(SymError::Dimension(format!(
            "matrix {}x{} vs dims {dims:?}",
            m.nrows(),
            m.ncols()
        )));
    }
    let (map, _) = factor_permutation_map(dims, perm)?;
    let mut out = CMat::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            out[(map[a], map[b])] = m[(a, b)];
        }
    }
    Ok(out)
}

/// Embed an operator acting on the factors `support` (in that order) into the full space.
pub fn embed_operator(op: &CMat, support: &[usize], dims: &[usize]) -> Result<CMat> {
    let k = dims.len();
    let mut seen = vec![false; k];
    for &s in support {
        if s >= k || seen[s] {
            return Err(SymError::Dimension(format!(
                "support {support:?} invalid for {k} factors"
            )));
        }
        seen[s] = true;
    }
    let sdims: Vec<usize> = support.iter().map(|&j| dims[j]).collect();
    let ds = product(&sdims);
    if !op.is_square() || op.nrows() != ds {
        return Err(SymError::Dimension(format!(
            "operator {}x{} vs support dims {sdims:?}",
            op.nrows(),
            op.ncols()
        )));
    }
    let n = checked_product(dims, "embed_operator")?;
    let fs = strides(dims);
    let ss = strides(&sdims);
    let mut out = CMat::zeros(n, n);
    let mut dig = vec![0; k];
    let mut sdig = vec![0; support.len()];
    for x in 0..n {
        digits(x, dims, &mut dig);
        let sx: usize = support.iter().zip(&ss).map(|(&j, &s)| dig[j] * s).sum();
        let base: usize = x - support.iter().map(|&j| dig[j] * fs[j]).sum::<usize>();
        for sy in 0..ds {
            let val = op[(sy, sx)];
            if val == ZERO {
                continue;
            }
            digits(sy, &sdims, &mut sdig);
            let y = base + support.iter().zip(&sdig).map(|(&j, &d)| d * fs[j]).sum::<usize>();
            out[(y, x)] += val;
        }
    }
    Ok(out)
}

/// Uhlmann fidelity of two PSD matrices, (Tr|√a √b|)², clipped to [0, 1].
pub fn fidelity_matrices(a: &CMat, b: &CMat) -> Result<f64> {
    require_square_pair(a, b, "fidelity")?;
    let sa = sqrt_psd(a)?;
    let sb = sqrt_psd(b)?;
    let f = trace_norm(&(sa * sb)).powi(2);
    Ok(f.clamp(0.0, 1.0))
}

pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(SymError::Dimension(format!(
            "fidelity: {} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    fidelity_matrices(rho.matrix(), sigma.matrix())
}

fn validate_dims(dims: &[usize], n: usize, what: &str) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) || product(dims) != n {
        return Err(SymError::Dimension(format!(
            "{what}: dims {dims:?} do not multiply to {n}"
        )));
    }
    Ok(())
}

/// A validated density operator with its subsystem structure.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMat,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (all within 1e-10).
    pub fn new(matrix: CMat, dims: Vec<usize>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(SymError::InvalidState("density matrix must be square".into()));
        }
        validate_dims(&dims, matrix.nrows(), "density matrix")?;
        check_dim(matrix.nrows(), "density matrix")?;
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(SymError::InvalidState("non-finite entry".into()));
        }
        let defect = hermitian_defect(&matrix);
        if defect > STATE_TOL {
            return Err(SymError::NotHermitian(defect));
        }
        let matrix = hermitize(&matrix);
        let tr = trace(&matrix).re;
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(SymError::InvalidState(format!("trace {tr} != 1")));
        }
        let min = eigh_unchecked(&matrix).values.first().copied().unwrap_or(0.0);
        if min < -STATE_TOL {
            return Err(SymError::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { matrix, dims })
    }

    /// Normalizes the trace of a PSD matrix before validating.
    pub fn from_unnormalized(matrix: CMat, dims: Vec<usize>) -> Result<Self> {
        let tr = trace(&matrix).re;
        if !(tr > 0.0) {
            return Err(SymError::InvalidState(format!("trace {tr} is not positive")));
        }
        Self::new(matrix.unscale(tr), dims)
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let v = &psi.vector;
        Self {
            matrix: v * v.adjoint(),
            dims: psi.dims.clone(),
        }
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let d = checked_product(&dims, "maximally mixed state")?;
        Self::new(identity(d).unscale(d as f64), dims)
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigh(&self) -> Eigh {
        eigh_unchecked(&self.matrix)
    }

    /// Eigenvalues clipped at zero, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        self.eigh().values.into_iter().map(|x| x.max(0.0)).collect()
    }

    /// Tr[ρ^j] for j = 1..=k, from the spectrum.
    pub fn trace_powers(&self, k: usize) -> Vec<f64> {
        let spec = self.spectrum();
        (1..=k)
            .map(|j| spec.iter().map(|l| l.powi(j as i32)).sum())
            .collect()
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_pure(&self) -> bool {
        self.purity() > 1.0 - STATE_TOL
    }

    pub fn reduce(&self, keep: &[usize]) -> Result<Self> {
        let m = partial_trace(&self.matrix, &self.dims, keep)?;
        let mut keep: Vec<usize> = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let dims = keep.iter().map(|&j| self.dims[j]).collect();
        Self::new(m, dims)
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        checked_product(&dims, "tensor product")?;
        Ok(Self {
            matrix: tensor(&self.matrix, &other.matrix),
            dims,
        })
    }

    /// U ρ U†, assuming U unitary.
    pub fn conjugate_by(&self, u: &CMat) -> Result<Self> {
        if u.nrows() != self.dim() || !u.is_square() {
            return Err(SymError::Dimension("conjugate_by: size mismatch".into()));
        }
        Ok(Self {
            matrix: hermitize(&(u * &self.matrix * u.adjoint())),
            dims: self.dims.clone(),
        })
    }
}

/// A unit vector with its subsystem structure.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    vector: CVec,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(vector: CVec, dims: Vec<usize>) -> Result<Self> {
        validate_dims(&dims, vector.len(), "pure state")?;
        check_dim(vector.len(), "pure state")?;
        let norm = vector.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(SymError::InvalidState(format!("norm {norm} != 1")));
        }
        Ok(Self { vector, dims })
    }

    pub fn normalized(vector: CVec, dims: Vec<usize>) -> Result<Self> {
        let norm = vector.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(SymError::InvalidState("zero or non-finite vector".into()));
        }
        Self::new(vector.unscale(norm), dims)
    }

    pub fn basis(d: usize, i: usize) -> Result<Self> {
        if i >= d {
            return Err(SymError::Invalid(format!("basis index {i} >= {d}")));
        }
        let mut v = CVec::zeros(d);
        v[i] = ONE;
        Self::new(v, vec![d])
    }

    pub fn vector(&self) -> &CVec {
        &self.vector
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        checked_product(&dims, "tensor product")?;
        Ok(Self {
            vector: tensor_vec(&self.vector, &other.vector),
            dims,
        })
    }

    pub fn overlap(&self, other: &Self) -> Complex64 {
        self.vector.dotc(&other.vector)
    }
}

/// Spectral purification on reference ⊗ system: Σ_i √λ_i |i⟩ ⊗ |φ_i⟩, eigenvalues
/// descending. The reference has dimension equal to the rank of ρ.
pub fn purify(rho: &DensityMatrix) -> PureState {
    let e = rho.eigh();
    let d = rho.dim();
    let mut idx: Vec<usize> = (0..d).rev().collect();
    idx.retain(|&i| e.values[i] > 1e-14);
    if idx.is_empty() {
        idx.push(d - 1);
    }
    let r = idx.len();
    let mut v = CVec::zeros(r * d);
    for (row, &i) in idx.iter().enumerate() {
        let s = e.values[i].max(0.0).sqrt();
        for k in 0..d {
            v[row * d + k] = e.vectors[(k, i)] * s;
        }
    }
    let norm = v.norm();
    let mut dims = vec![r];
    dims.extend_from_slice(rho.dims());
    PureState {
        vector: v.unscale(norm),
        dims,
    }
}

/// Deterministic generator for a seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix of i.i.d. standard complex Gaussians (E|z|² = 1).
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * s, im * s)
    })
}

/// Haar unitary via QR of a Gaussian matrix with the phase correction of R's diagonal.
pub fn random_unitary_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let g = gaussian_matrix(d, d, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let ph = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { ONE };
        for i in 0..d {
            q[(i, j)] *= ph;
        }
    }
    q
}

pub fn random_unitary(d: usize, seed: u64) -> Result<CMat> {
    if d == 0 {
        return Err(SymError::Invalid("dimension must be positive".into()));
    }
    check_dim(d, "random unitary")?;
    Ok(random_unitary_with(d, &mut rng_from_seed(seed)))
}

pub fn random_density_with<R: Rng + ?Sized>(
    d: usize,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    if rank == 0 || rank > d {
        return Err(SymError::Invalid(format!("rank {rank} outside 1..={d}")));
    }
    check_dim(d, "random density")?;
    let g = gaussian_matrix(d, rank, rng);
    let m = &g * g.adjoint();
    DensityMatrix::from_unnormalized(hermitize(&m), vec![d])
}

pub fn random_density(d: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_with(d, rank, &mut rng_from_seed(seed))
}

pub fn random_pure_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> PureState {
    let g = gaussian_matrix(d, 1, rng);
    PureState::normalized(g.column(0).into_owned(), vec![d]).expect("gaussian vector is nonzero")
}

pub fn random_pure(d: usize, seed: u64) -> PureState {
    random_pure_with(d, &mut rng_from_seed(seed))
}

/// GUE-distributed Hermitian matrix (G + G†)/2.
pub fn random_hermitian_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    hermitize(&gaussian_matrix(d, d, rng))
}

pub fn random_hermitian(d: usize, seed: u64) -> CMat {
    random_hermitian_with(d, &mut rng_from_seed(seed))
}

pub fn pauli(label: char) -> Result<CMat> {
    let m = match label.to_ascii_uppercase() {
        'I' => [ONE, ZERO, ZERO, ONE],
        'X' => [ZERO, ONE, ONE, ZERO],
        'Y' => [ZERO, c(0.0, -1.0), I, ZERO],
        'Z' => [ONE, ZERO, ZERO, c(-1.0, 0.0)],
        other => return Err(SymError::Parse(format!("unknown Pauli letter {other:?}"))),
    };
    Ok(CMat::from_row_slice(2, 2, &m))
}

/// Tensor product of single-qubit Paulis, e.g. "XZI".
pub fn pauli_string(s: &str) -> Result<CMat> {
    if s.is_empty() {
        return Err(SymError::Parse("empty Pauli string".into()));
    }
    let ms = s.chars().map(pauli).collect::<Result<Vec<_>>>()?;
    Ok(tensor_all(&ms))
}

pub fn from_real_diagonal(diag: &[f64]) -> CMat {
    CMat::from_diagonal(&DVector::from_iterator(
        diag.len(),
        diag.iter().map(|&x| c(x, 0.0)),
    ))
}

/// Promote a real matrix.
pub fn from_real(m: &DMatrix<f64>) -> CMat {
    m.map(|x| c(x, 0.0))
}
