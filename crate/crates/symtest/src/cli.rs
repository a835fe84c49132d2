//! Command-line front end: runs one test per invocation and writes a JSON or CSV
//! report with every computed value, its closed-form counterpart and their difference.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{Result, SymError};
use crate::groups::{self, FiniteGroup, PermutationRep, UnitaryRepTable};
use crate::ham_symmetry::{self as hs, HamiltonianSpec, LocalTerm};
use crate::linalg::{self, CMat, CVec, DensityMatrix, PureState};
use crate::models;
use crate::separability::{self as sep, GroupKind};
use crate::state_symmetry::{self as ss, GroupAction, OptimResult, ProverConfig, SymmetryMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser, Serialize)]
#[command(name = "symtest", version, about = "Simulate quantum symmetry tests and cross-check them against closed forms")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Write the report here instead of stdout
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Emit floats as C99 hex literals (lossless)
    #[arg(long, global = true)]
    pub hex: bool,
    /// Seed for random inputs, restarts and sampling (0 when omitted; required with --shots)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// Checks what clap cannot: sampled runs must name their seed.
    pub fn validate(&self) -> Result<()> {
        let shots = match &self.command {
            Command::Bose(a) => a.shots,
            Command::Otoc(a) => a.shots,
            _ => 0,
        };
        if shots > 0 && self.seed.is_none() {
            return Err(SymError::Invalid("--seed is required when --shots > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// G-Bose symmetry test: projector formula vs control-register circuit
    Bose(BoseArgs),
    /// Maximum fidelity with G-symmetric states (state side and prover side)
    Gsym(OptArgs),
    /// Maximum fidelity with G-Bose-symmetric-extendible states
    Gbse(OptArgs),
    /// Maximum fidelity with G-symmetric-extendible states
    Gse(OptArgs),
    /// Hamiltonian covariance test over a time grid
    Ham(HamArgs),
    /// DQC1 reduction identity for a unitary
    Dqc1(Dqc1Args),
    /// Covariance test with the evolution generated by a state
    Dme(DmeArgs),
    /// Fourier-basis measurement and group-averaged OTOCs for a labelled cyclic group
    Otoc(OtocArgs),
    /// Symmetry test with a block-encoded Hamiltonian
    Blockenc(BlockencArgs),
    /// Separability test acceptance over a k-grid
    Sep(SepArgs),
    /// Controlled-SWAP counts of the test constructions
    Resources(ResourcesArgs),
    /// Data series behind the standard figures
    Sweep(SweepArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct BoseArgs {
    /// State: fixture name, random:d[,rank] or file:<path>
    #[arg(long)]
    pub state: String,
    /// Group: sym:k, cyc:k, dih:k, zpow:m^n, a named representation or table:<path>
    #[arg(long)]
    pub group: String,
    /// Monte Carlo shots in addition to the exact evaluation (0 = exact only)
    #[arg(long, default_value_t = 0)]
    pub shots: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct OptArgs {
    #[arg(long)]
    pub state: String,
    /// For gbse/gse: kext:k (state dims [d_A, d_B]) or a table acting on R ⊗ S
    #[arg(long)]
    pub group: String,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 3000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    /// Prover ancilla dimension E′ (default depends on the mode)
    #[arg(long)]
    pub ancilla: Option<usize>,
    /// Skip the prover-side optimization
    #[arg(long)]
    pub no_prover: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct HamArgs {
    /// Hamiltonian: fixture (tim:n, nmr:w1,w2,J, xy:n[,J]), pauli:<strings>:<coeffs>, random:d or file:<path>
    #[arg(long)]
    pub ham: String,
    #[arg(long)]
    pub group: String,
    /// Time grid start..end:count, a list, or one value
    #[arg(long, default_value = "0..1:11")]
    pub t: String,
    /// Also report the commutator series truncated at this order
    #[arg(long)]
    pub series: Option<usize>,
    /// Also report first-order Trotterization with this many steps
    #[arg(long)]
    pub trotter: Option<usize>,
    /// Also report the optimum over input states and its lower bounds
    #[arg(long)]
    pub max: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct Dqc1Args {
    /// Unitary: random:d, identity:d, t, h, x, z or file:<path>
    #[arg(long)]
    pub unitary: String,
}

#[derive(Debug, Args, Serialize)]
pub struct DmeArgs {
    #[arg(long)]
    pub state: String,
    #[arg(long)]
    pub group: String,
    #[arg(long, default_value = "0.01..0.2:5")]
    pub t: String,
}

#[derive(Debug, Args, Serialize)]
pub struct OtocArgs {
    #[arg(long)]
    pub ham: String,
    /// A labelled cyclic group (phase:d, cyc:k) or table:<path> with cyclic_labels
    #[arg(long)]
    pub group: String,
    #[arg(long, default_value = "1")]
    pub t: String,
    /// Sample this many shots (0 = exact only)
    #[arg(long, default_value_t = 0)]
    pub shots: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct BlockencArgs {
    #[arg(long)]
    pub ham: String,
    #[arg(long)]
    pub group: String,
    /// Rescale to spectral norm 1 before block encoding
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SepArgs {
    #[arg(long)]
    pub state: String,
    /// Comma-separated group kinds (sym, cyc, dih) or zpow:m^n
    #[arg(long, default_value = "sym")]
    pub group: String,
    /// k-grid a..b, a list, or one value
    #[arg(long, default_value = "2..6")]
    pub k: String,
    /// Cross-check with recurrence, Bell polynomial and (when feasible) the dense projector
    #[arg(long)]
    pub all_methods: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ResourcesArgs {
    #[arg(long, default_value = "sym,cyc,dih")]
    pub group: String,
    #[arg(long, default_value = "3..10")]
    pub k: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Figure {
    /// symmetric-test acceptance of the reduced W state and I/2 against k
    SepDecrease,
    /// resources-to-rejection of the symmetric, cyclic and dihedral tests
    Rejection,
    /// NMR acceptance against time for a symmetric and an asymmetric group
    NmrDecay,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub figure: Figure,
    #[arg(long, default_value = "2..10")]
    pub k: String,
    #[arg(long, default_value = "0..2:21")]
    pub t: String,
}

/// Formats a float as a C99 hexadecimal literal, e.g. 0.75 → 0x1.8p-1.
pub fn format_hex(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1u64 << 52) - 1);
    if exp == 0 && mant == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, e) = if exp == 0 { (0, -1022) } else { (1, exp - 1023) };
    let mut frac = format!("{mant:013x}");
    while frac.ends_with('0') {
        frac.pop();
    }
    let es = if e >= 0 { format!("+{e}") } else { e.to_string() };
    if frac.is_empty() {
        format!("{sign}0x{lead}p{es}")
    } else {
        format!("{sign}0x{lead}.{frac}p{es}")
    }
}

/// Parses a C99 hexadecimal float literal.
pub fn parse_hex(s: &str) -> Result<f64> {
    let bad = || SymError::Parse(format!("bad hex float {s:?}"));
    let t = s.trim();
    let (neg, t) = match t.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let body = t
        .strip_prefix("0x")
        .or_else(|| t.strip_prefix("0X"))
        .ok_or_else(bad)?;
    let (mantissa, exp) = body.split_once(['p', 'P']).ok_or_else(bad)?;
    let exp: i32 = exp.parse().map_err(|_| bad())?;
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let mut value = 0.0f64;
    for ch in int_part.chars() {
        value = value * 16.0 + ch.to_digit(16).ok_or_else(bad)? as f64;
    }
    let mut scale = 1.0 / 16.0;
    for ch in frac_part.chars() {
        value += ch.to_digit(16).ok_or_else(bad)? as f64 * scale;
        scale /= 16.0;
    }
    let v = value * 2f64.powi(exp);
    Ok(if neg { -v } else { v })
}

fn parse_number(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| SymError::Parse(format!("bad number {n}"))),
        Value::String(s) => {
            if s.contains("0x") || s.contains("0X") {
                parse_hex(s)
            } else {
                s.trim()
                    .parse()
                    .map_err(|_| SymError::Parse(format!("bad number {s:?}")))
            }
        }
        _ => Err(SymError::Parse(format!("expected a number, got {v}"))),
    }
}

fn parse_complex(v: &Value) -> Result<Complex64> {
    match v {
        Value::Array(a) if a.len() == 2 => Ok(Complex64::new(parse_number(&a[0])?, parse_number(&a[1])?)),
        Value::Array(_) => Err(SymError::Parse("complex entries are [re, im] pairs".into())),
        other => Ok(Complex64::new(parse_number(other)?, 0.0)),
    }
}

/// Nested arrays of [re, im] pairs.
pub fn parse_matrix(v: &Value) -> Result<CMat> {
    let rows = v
        .as_array()
        .ok_or_else(|| SymError::Parse("matrix must be an array of rows".into()))?;
    let n = rows.len();
    if n == 0 {
        return Err(SymError::Parse("empty matrix".into()));
    }
    let mut entries = Vec::new();
    let mut cols = None;
    for r in rows {
        let r = r
            .as_array()
            .ok_or_else(|| SymError::Parse("matrix rows must be arrays".into()))?;
        if *cols.get_or_insert(r.len()) != r.len() {
            return Err(SymError::Parse("ragged matrix".into()));
        }
        for e in r {
            entries.push(parse_complex(e)?);
        }
    }
    Ok(CMat::from_row_slice(n, cols.unwrap_or(0), &entries))
}

fn parse_vector(v: &Value) -> Result<CVec> {
    let a = v
        .as_array()
        .ok_or_else(|| SymError::Parse("vector must be an array".into()))?;
    Ok(CVec::from_vec(a.iter().map(parse_complex).collect::<Result<_>>()?))
}

fn parse_dims(v: Option<&Value>, d: usize) -> Result<Vec<usize>> {
    match v {
        None => Ok(vec![d]),
        Some(Value::Array(a)) => a
            .iter()
            .map(|x| {
                x.as_u64()
                    .map(|u| u as usize)
                    .ok_or_else(|| SymError::Parse("dims must be positive integers".into()))
            })
            .collect(),
        Some(_) => Err(SymError::Parse("dims must be an array".into())),
    }
}

fn read_json(path: &str) -> Result<Value> {
    let text = fs::read_to_string(path)
        .map_err(|e| SymError::Parse(format!("cannot read {path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| SymError::Parse(format!("{path}: {e}")))
}

fn split_num(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| SymError::Parse(format!("expected integers, got {s:?}")))
        })
        .collect()
}

/// A state input, with the pure vector kept when known.
pub struct StateInput {
    pub rho: DensityMatrix,
    pub pure: Option<PureState>,
}

pub fn load_state(spec: &str, seed: u64) -> Result<StateInput> {
    if let Some(path) = spec.strip_prefix("file:") {
        let v = read_json(path)?;
        if let Some(m) = v.get("matrix") {
            let m = parse_matrix(m)?;
            let dims = parse_dims(v.get("dims"), m.nrows())?;
            return Ok(StateInput {
                rho: DensityMatrix::new(m, dims)?,
                pure: None,
            });
        }
        if let Some(vec) = v.get("vector") {
            let vec = parse_vector(vec)?;
            let dims = parse_dims(v.get("dims"), vec.len())?;
            let psi = PureState::new(vec, dims)?;
            return Ok(StateInput {
                rho: psi.density(),
                pure: Some(psi),
            });
        }
        return Err(SymError::Parse(format!(
            "{path}: expected a \"matrix\" or \"vector\" field"
        )));
    }
    if let Some(arg) = spec.strip_prefix("random:") {
        let v = split_num(arg)?;
        let d = v[0];
        let rank = v.get(1).copied().unwrap_or(d);
        let dims = match v.get(2) {
            Some(&q) if q > 0 => {
                let mut dims = Vec::new();
                let mut rest = d;
                while rest > 1 && rest % q == 0 {
                    dims.push(q);
                    rest /= q;
                }
                if rest != 1 {
                    return Err(SymError::Parse(format!("{d} is not a power of {q}")));
                }
                dims
            }
            _ => vec![d],
        };
        let r = linalg::random_density(d, rank, seed)?;
        return Ok(StateInput {
            rho: DensityMatrix::new(r.matrix().clone(), dims)?,
            pure: None,
        });
    }
    let f = models::fixture(spec)?;
    Ok(StateInput {
        rho: f.density()?,
        pure: f.pure().cloned(),
    })
}

pub fn load_hamiltonian(spec: &str, seed: u64) -> Result<HamiltonianSpec> {
    if let Some(path) = spec.strip_prefix("file:") {
        let v = read_json(path)?;
        if let Some(m) = v.get("dense") {
            let m = parse_matrix(m)?;
            let dims = parse_dims(v.get("dims"), m.nrows())?;
            return HamiltonianSpec::dense(m, dims);
        }
        if let Some(terms) = v.get("terms").and_then(|t| t.as_array()) {
            let dims = parse_dims(v.get("dims"), 0)?;
            let terms = terms
                .iter()
                .map(|t| {
                    let matrix = parse_matrix(
                        t.get("matrix")
                            .ok_or_else(|| SymError::Parse("term without matrix".into()))?,
                    )?;
                    let support = parse_dims(t.get("support"), 0)?;
                    Ok(LocalTerm { matrix, support })
                })
                .collect::<Result<Vec<_>>>()?;
            return HamiltonianSpec::local(terms, dims);
        }
        return Err(SymError::Parse(format!(
            "{path}: expected a \"dense\" or \"terms\" field"
        )));
    }
    if let Some(arg) = spec.strip_prefix("pauli:") {
        let (strings, coeffs) = arg
            .split_once(':')
            .ok_or_else(|| SymError::Parse("pauli:<strings>:<coefficients>".into()))?;
        let coeffs = coeffs
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|_| SymError::Parse(format!("bad coefficient {c:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        return HamiltonianSpec::from_pauli_sum(strings, &coeffs);
    }
    if let Some(arg) = spec.strip_prefix("random:") {
        let d = split_num(arg)?[0];
        linalg::check_dim(d, "random Hamiltonian")?;
        let mut dims = Vec::new();
        let mut rest = d;
        while rest > 1 && rest % 2 == 0 {
            dims.push(2);
            rest /= 2;
        }
        if rest != 1 {
            dims = vec![d];
        }
        return HamiltonianSpec::dense(linalg::random_hermitian(d, seed), dims);
    }
    models::fixture(spec)?.hamiltonian()
}

pub fn load_unitary(spec: &str, seed: u64) -> Result<CMat> {
    if let Some(path) = spec.strip_prefix("file:") {
        let v = read_json(path)?;
        let m = v.get("matrix").unwrap_or(&v);
        return parse_matrix(m);
    }
    let (head, arg) = match spec.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (spec, None),
    };
    let num = || -> Result<usize> {
        let a = arg.ok_or_else(|| SymError::Parse(format!("{head} needs a dimension")))?;
        Ok(split_num(a)?[0])
    };
    match head {
        "random" => linalg::random_unitary(num()?, seed),
        "identity" => {
            let d = num()?;
            linalg::check_dim(d, "identity")?;
            Ok(linalg::identity(d))
        }
        "t" => Ok(CMat::from_diagonal(&CVec::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4),
        ]))),
        "h" => Ok(hs::hadamard()),
        "x" | "y" | "z" => linalg::pauli(head.chars().next().unwrap_or('x').to_ascii_uppercase()),
        _ => Err(SymError::Unknown(format!("unitary {spec}"))),
    }
}

/// A parsed group argument.
pub enum RepInput {
    Perm(PermutationRep),
    Table(UnitaryRepTable),
}

impl RepInput {
    pub fn action(&self) -> &dyn GroupAction {
        match self {
            Self::Perm(p) => p,
            Self::Table(t) => t,
        }
    }

    pub fn table(&self) -> Result<UnitaryRepTable> {
        match self {
            Self::Perm(p) => p.to_table(),
            Self::Table(t) => Ok(t.clone()),
        }
    }
}

fn permutation_group(spec: &str) -> Result<Option<FiniteGroup>> {
    let Some((head, arg)) = spec.split_once(':') else {
        return Ok(None);
    };
    let k = || -> Result<usize> {
        arg.trim()
            .parse()
            .map_err(|_| SymError::Parse(format!("{spec}: expected an integer")))
    };
    Ok(Some(match head {
        "sym" => FiniteGroup::symmetric(k()?)?,
        "cyc" => FiniteGroup::cyclic(k()?)?,
        "dih" => FiniteGroup::dihedral(k()?)?,
        "zpow" => {
            let (m, n) = arg
                .split_once('^')
                .ok_or_else(|| SymError::Parse("zpow:m^n".into()))?;
            let m = split_num(m)?[0];
            let n = split_num(n)?[0];
            FiniteGroup::cyclic_power(m, n)?
        }
        _ => return Ok(None),
    }))
}

fn load_table(path: &str) -> Result<UnitaryRepTable> {
    let v = read_json(path)?;
    let mats = v
        .get("matrices")
        .and_then(|m| m.as_array())
        .ok_or_else(|| SymError::Parse(format!("{path}: missing \"matrices\"")))?
        .iter()
        .map(parse_matrix)
        .collect::<Result<Vec<_>>>()?;
    let d = mats.first().map(|m| m.nrows()).unwrap_or(0);
    let dims = parse_dims(v.get("dims"), d)?;
    let labels = match v.get("labels").and_then(|l| l.as_array()) {
        Some(l) => l
            .iter()
            .map(|x| x.as_str().map(String::from).unwrap_or_else(|| x.to_string()))
            .collect(),
        None => (0..mats.len()).map(|i| format!("g{i}")).collect(),
    };
    let name = v.get("name").and_then(|n| n.as_str()).unwrap_or("table");
    let table = UnitaryRepTable::from_matrices(name, labels, mats, dims)?;
    match v.get("cyclic_labels") {
        Some(l) => table.with_cyclic_labels(parse_dims(Some(l), 0)?),
        None => Ok(table),
    }
}

/// Resolves a group argument against the dimensions of the space it acts on.
pub fn load_group(spec: &str, dims: &[usize]) -> Result<RepInput> {
    if let Some(path) = spec.strip_prefix("table:") {
        return Ok(RepInput::Table(load_table(path)?));
    }
    if let Some(k) = spec.strip_prefix("kext:") {
        if dims.len() != 2 {
            return Err(SymError::Dimension(
                "kext needs a bipartite state with dims [d_A, d_B]".into(),
            ));
        }
        let k = split_num(k)?[0];
        return Ok(RepInput::Table(groups::k_extension_rep(dims[0], dims[1], k)?));
    }
    if let Some(g) = permutation_group(spec)? {
        let k = g.degree();
        let d = linalg::product(dims);
        let local = (1..=d).find(|&q| q.checked_pow(k as u32) == Some(d)).ok_or_else(|| {
            SymError::Dimension(format!("dimension {d} is not a {k}-th power"))
        })?;
        return Ok(RepInput::Perm(PermutationRep::new(g, local)?));
    }
    Ok(RepInput::Table(groups::named_rep(spec)?))
}

/// `start..end:count`, a comma list, or one value.
pub fn parse_t_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || SymError::Parse(format!("bad grid {s:?}; use start..end:count"));
    let num = |x: &str| -> Result<f64> {
        let x = x.trim();
        if x.contains("0x") {
            parse_hex(x)
        } else {
            x.parse().map_err(|_| bad())
        }
    };
    if let Some((range, count)) = s.split_once(':') {
        let (a, b) = range.split_once("..").ok_or_else(bad)?;
        let (a, b) = (num(a)?, num(b)?);
        let n: usize = count.trim().parse().map_err(|_| bad())?;
        return Ok(match n {
            0 => vec![],
            1 => vec![a],
            _ => (0..n)
                .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
                .collect(),
        });
    }
    s.split(',').map(num).collect()
}

/// `a..b` inclusive, a comma list, or one value.
pub fn parse_k_grid(s: &str) -> Result<Vec<usize>> {
    let bad = || SymError::Parse(format!("bad k grid {s:?}; use a..b"));
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if b < a {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    split_num(s)
}

/// Report rows under construction.
#[derive(Default)]
struct Rows {
    rows: Vec<Map<String, Value>>,
}

struct Row(Map<String, Value>);

impl Row {
    fn new(method: &str) -> Self {
        let mut m = Map::new();
        m.insert("method".into(), Value::String(method.into()));
        Row(m)
    }
    fn f(mut self, k: &str, x: f64) -> Self {
        self.0.insert(k.into(), float(x));
        self
    }
    fn of(mut self, k: &str, x: Option<f64>) -> Self {
        self.0.insert(k.into(), x.map(float).unwrap_or(Value::Null));
        self
    }
    fn u(mut self, k: &str, x: u64) -> Self {
        self.0.insert(k.into(), json!(x));
        self
    }
    fn s(mut self, k: &str, x: &str) -> Self {
        self.0.insert(k.into(), Value::String(x.into()));
        self
    }
    fn b(mut self, k: &str, x: bool) -> Self {
        self.0.insert(k.into(), Value::Bool(x));
        self
    }
    fn front(self, k: &str, v: Value) -> Self {
        let mut m = Map::new();
        m.insert(k.into(), v);
        for (a, b) in self.0 {
            m.insert(a, b);
        }
        Row(m)
    }
}

fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

impl Rows {
    fn push(&mut self, r: Row) {
        self.rows.push(r.0);
    }
}

fn hexify(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => Value::String(format_hex(n.as_f64().unwrap_or(f64::NAN))),
        Value::Array(a) => Value::Array(a.into_iter().map(hexify).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, hexify(v))).collect()),
        other => other,
    }
}

fn csv_cell(v: &Value) -> String {
    let s = match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:e}"),
            _ => n.to_string(),
        },
        other => other.to_string(),
    };
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

fn render(cfg: &RunConfig, command: &str, rows: Rows) -> String {
    let rows: Vec<Value> = rows
        .rows
        .into_iter()
        .map(|r| {
            let v = Value::Object(r);
            if cfg.hex {
                hexify(v)
            } else {
                v
            }
        })
        .collect();
    match cfg.format {
        Format::Json => {
            let config = serde_json::to_value(cfg).unwrap_or(Value::Null);
            let report = json!({
                "schema": 1,
                "command": command,
                "config": config,
                "rows": rows,
            });
            let mut s = serde_json::to_string_pretty(&report).unwrap_or_default();
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut header: Vec<String> = Vec::new();
            for r in &rows {
                if let Value::Object(o) = r {
                    for k in o.keys() {
                        if !header.contains(k) {
                            header.push(k.clone());
                        }
                    }
                }
            }
            let mut out = header.join(",");
            out.push('\n');
            for r in &rows {
                let cells: Vec<String> = header
                    .iter()
                    .map(|h| r.get(h).map(csv_cell).unwrap_or_default())
                    .collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            out
        }
    }
}

fn opt_row(r: &OptimResult) -> Row {
    Row::new(&r.method)
        .f("value", r.value)
        .b("converged", r.converged)
        .u("iterations", r.iterations as u64)
        .u("best_restart", r.best_restart as u64)
        .f("last_change", r.last_change)
}

fn cmd_bose(cfg: &RunConfig, a: &BoseArgs, rows: &mut Rows) -> Result<bool> {
    let st = load_state(&a.state, cfg.seed())?;
    let rep = load_group(&a.group, st.rho.dims())?;
    let r = ss::bose_acceptance(&st.rho, rep.action())?;
    rows.push(
        Row::new(&r.method)
            .f("simulated", r.simulated)
            .of("closed_form", r.closed_form)
            .of("abs_diff", r.abs_diff()),
    );
    if a.shots > 0 {
        let r = match &st.pure {
            Some(p) => ss::bose_circuit_sample(p, rep.action(), a.shots, cfg.seed())?,
            None => ss::bose_circuit_sample_mixed(&st.rho, rep.action(), a.shots, cfg.seed())?,
        };
        rows.push(
            Row::new(&r.method)
                .f("simulated", r.simulated)
                .of("closed_form", r.closed_form)
                .of("abs_diff", r.abs_diff())
                .of("std_error", r.std_error)
                .u("shots", r.shots)
                .u("seed", r.seed),
        );
    }
    Ok(true)
}

fn cmd_opt(cfg: &RunConfig, a: &OptArgs, mode: SymmetryMode, rows: &mut Rows) -> Result<bool> {
    let st = load_state(&a.state, cfg.seed())?;
    let rep = load_group(&a.group, st.rho.dims())?.table()?;
    let pc = ProverConfig {
        ancilla_dim: a.ancilla,
        restarts: a.restarts,
        max_iters: a.max_iters,
        tolerance: a.tol,
        seed: cfg.seed(),
        ..ProverConfig::default()
    };
    let state_side = ss::max_symmetric_fidelity(&st.rho, &rep, mode, &pc)?;
    let mut ok = state_side.converged;
    rows.push(opt_row(&state_side));
    if let Some(p) = &st.pure {
        let closed = ss::max_symmetric_fidelity_pure(p, &rep, mode)?;
        rows.push(
            Row::new("closed-form-pure")
                .f("value", closed)
                .f("abs_diff", (closed - state_side.value).abs()),
        );
    }
    if !a.no_prover {
        let prover = ss::prover_acceptance(&st.rho, &rep, mode, &pc)?;
        ok &= prover.converged;
        let diff = (prover.value - state_side.value).abs();
        rows.push(opt_row(&prover).f("abs_diff", diff));
    }
    Ok(ok)
}

fn cmd_ham(cfg: &RunConfig, a: &HamArgs, rows: &mut Rows) -> Result<bool> {
    let h = load_hamiltonian(&a.ham, cfg.seed())?;
    let rep = load_group(&a.group, h.dims())?.table()?;
    for t in parse_t_grid(&a.t)? {
        let r = hs::covariance_acceptance(&h, &rep, t)?;
        let mut row = Row::new(&r.method)
            .f("t", t)
            .f("simulated", r.simulated)
            .of("closed_form", r.closed_form)
            .of("abs_diff", r.abs_diff())
            .f("deficit", hs::covariance_deficit(&h, &rep, t)?);
        if let Some(n) = a.series {
            let s = hs::commutator_series(&h, &rep, t, n)?;
            row = row
                .f("series_sum", s.partial_sums[n])
                .f("series_residual", s.deficit_residuals[n]);
        }
        if let Some(steps) = a.trotter {
            let exact = linalg::expm_hermitian(&h.matrix(), t)?;
            let tr = hs::trotter_evolution(&h, t, steps)?;
            let tr_acc = hs::covariance_from_unitary(&tr, &rep);
            row = row
                .f("trotter_error", linalg::spectral_norm(&(tr - exact)))
                .f("trotter_acceptance", tr_acc.simulated);
        }
        if a.max {
            let m = hs::max_over_states_acceptance(&h, &rep, t)?;
            row = row
                .f("max_value", m.value)
                .f("bound_unitary_commutator", m.bound_unitary_commutator)
                .of("bound_small_t", m.bound_small_t)
                .f("bound_nested", m.bound_nested);
        }
        rows.push(row);
    }
    Ok(true)
}

fn cmd_dqc1(cfg: &RunConfig, a: &Dqc1Args, rows: &mut Rows) -> Result<bool> {
    let u = load_unitary(&a.unitary, cfg.seed())?;
    let r = hs::dqc1_reduction_check(&u)?;
    rows.push(
        Row::new("reduction-vs-trace")
            .u("d", r.d as u64)
            .f("lhs", r.lhs)
            .f("rhs", r.rhs)
            .f("abs_diff", r.abs_diff)
            .f("trace_form", r.trace_form),
    );
    Ok(true)
}

fn cmd_dme(cfg: &RunConfig, a: &DmeArgs, rows: &mut Rows) -> Result<bool> {
    let st = load_state(&a.state, cfg.seed())?;
    let rep = load_group(&a.group, st.rho.dims())?.table()?;
    for t in parse_t_grid(&a.t)? {
        let r = hs::dme_acceptance(&st.rho, &rep, t)?;
        rows.push(
            Row::new("dme-vs-expansion")
                .f("t", t)
                .f("acceptance", r.acceptance)
                .f("trace_form", r.trace_form)
                .f("abs_diff", (r.acceptance - r.trace_form).abs())
                .f("expansion", r.expansion)
                .f("residual", r.residual)
                .f("delta", r.delta)
                .f("copies_estimate", r.copies_estimate),
        );
    }
    Ok(true)
}

fn cmd_otoc(cfg: &RunConfig, a: &OtocArgs, rows: &mut Rows) -> Result<bool> {
    let h = load_hamiltonian(&a.ham, cfg.seed())?;
    let rep = load_group(&a.group, h.dims())?.table()?;
    for t in parse_t_grid(&a.t)? {
        let r = hs::abelian_otoc(&h, &rep, t)?;
        let sample = if a.shots > 0 {
            Some(hs::abelian_otoc_sample(&h, &rep, t, a.shots, cfg.seed())?)
        } else {
            None
        };
        for (label, p) in r.probabilities.iter().enumerate() {
            let mut row = Row::new("fourier-vs-circuit")
                .f("t", t)
                .u("label", label as u64)
                .f("probability", *p)
                .f("circuit_probability", r.circuit_probabilities[label])
                .f("abs_diff", (p - r.circuit_probabilities[label]).abs())
                .f("otoc_re", r.otoc[label].0)
                .f("otoc_im", r.otoc[label].1)
                .f("recovered_re", r.recovered[label].0)
                .f("recovered_im", r.recovered[label].1)
                .f("roundtrip_error", r.roundtrip_error);
            if let Some(s) = &sample {
                row = row
                    .f("estimate_re", s.estimates[label].0)
                    .f("estimate_im", s.estimates[label].1)
                    .u("count", s.counts[label])
                    .u("shots", s.shots);
            }
            rows.push(row);
        }
    }
    Ok(true)
}

fn cmd_blockenc(cfg: &RunConfig, a: &BlockencArgs, rows: &mut Rows) -> Result<bool> {
    let h = load_hamiltonian(&a.ham, cfg.seed())?;
    let h = if a.normalize {
        hs::normalized(&h, 1.0)?
    } else {
        h
    };
    let rep = load_group(&a.group, h.dims())?.table()?;
    let r = hs::block_encoding_acceptance(&h.matrix(), &rep)?;
    rows.push(
        Row::new(&r.method)
            .f("simulated", r.simulated)
            .of("closed_form", r.closed_form)
            .of("abs_diff", r.abs_diff()),
    );
    Ok(true)
}

fn sep_row(
    rho: &DensityMatrix,
    group: &str,
    k: usize,
    all: bool,
) -> Result<Row> {
    let (res, kind) = if let Some(rest) = group.strip_prefix("zpow:") {
        let g = permutation_group(&format!("zpow:{rest}"))?.expect("zpow parses");
        (sep::acceptance_group(rho, &g)?, None)
    } else {
        let kind = GroupKind::parse(group)?;
        (sep::acceptance_kind(rho, kind, k)?, Some(kind))
    };
    let p = res.p;
    let mut row = Row::new("cycle-index")
        .front("k", json!(res.k))
        .s("group", kind.map(|k| k.tag()).unwrap_or(&res.group));
    // keep the column order k, group, p, cswaps, ratio, method
    let method = row.0.remove("method");
    row = row.f("p", p);
    match kind.map(|kd| sep::gate_count(kd, k)).transpose()? {
        Some(count) => {
            row = row.u("cswaps", count.cswap_count);
            let gap = 1.0 - p;
            row = row.of(
                "ratio",
                (gap > 1e-12).then(|| count.cswap_count as f64 / gap),
            );
        }
        None => {
            row.0.insert("cswaps".into(), Value::Null);
            row.0.insert("ratio".into(), Value::Null);
        }
    }
    if let Some(m) = method {
        row.0.insert("method".into(), m);
    }
    if all {
        let mut diff: f64 = 0.0;
        if kind == Some(GroupKind::Symmetric) {
            let rec = sep::acceptance_recurrence(rho, k)?.p;
            let bell = sep::acceptance_bell(rho, k)?.p;
            let s = sep::acceptance_sym(rho, k)?.p;
            diff = diff.max((rec - p).abs()).max((bell - p).abs()).max((s - p).abs());
            row = row.f("p_recurrence", rec).f("p_bell", bell);
        }
        let g = match kind {
            Some(kd) => kd.group(k),
            None => permutation_group(group).map(|g| g.expect("zpow parses")),
        };
        let direct = match g.and_then(|g| sep::acceptance_direct(rho, &g)) {
            Ok(v) => Some(v),
            Err(SymError::Oversize(_)) => None,
            Err(e) => return Err(e),
        };
        if let Some(v) = direct {
            diff = diff.max((v - p).abs());
        }
        row = row.of("p_direct", direct).f("abs_diff", diff);
    }
    Ok(row)
}

fn cmd_sep(cfg: &RunConfig, a: &SepArgs, rows: &mut Rows) -> Result<bool> {
    let st = load_state(&a.state, cfg.seed())?;
    let groups: Vec<&str> = if a.group.starts_with("zpow:") {
        vec![a.group.as_str()]
    } else {
        a.group.split(',').map(str::trim).collect()
    };
    let ks = if a.group.starts_with("zpow:") {
        vec![0]
    } else {
        parse_k_grid(&a.k)?
    };
    for &k in &ks {
        for g in &groups {
            if g.starts_with("dih") && k < 3 {
                continue;
            }
            rows.push(sep_row(&st.rho, g, k, a.all_methods)?);
        }
    }
    Ok(true)
}

fn resources_row(kind: GroupKind, k: usize) -> Result<Row> {
    let c = sep::gate_count(kind, k)?;
    Ok(Row::new("construction-count")
        .front("k", json!(k))
        .s("group", kind.tag())
        .u("cswaps", c.cswap_count)
        .u("control_qubits", c.control_qubits)
        .of("controlled_powers", c.controlled_powers.map(|x| x as f64))
        .of("formula_estimate", c.formula_estimate)
        .of("upper_bound", c.upper_bound.map(|x| x as f64))
        .s("depth_class", &c.depth_class))
}

fn cmd_resources(a: &ResourcesArgs, rows: &mut Rows) -> Result<bool> {
    for k in parse_k_grid(&a.k)? {
        for g in a.group.split(',') {
            let kind = GroupKind::parse(g.trim())?;
            if kind == GroupKind::Dihedral && k < 3 {
                continue;
            }
            rows.push(resources_row(kind, k)?);
        }
    }
    Ok(true)
}

fn cmd_sweep(a: &SweepArgs, rows: &mut Rows) -> Result<bool> {
    match a.figure {
        Figure::SepDecrease => {
            let states = [
                ("w:3-reduced", models::w_reduced(3)?),
                ("mixed:2", DensityMatrix::maximally_mixed(vec![2])?),
            ];
            for k in parse_k_grid(&a.k)? {
                for (name, rho) in &states {
                    let p = sep::acceptance_sym(rho, k)?.p;
                    let rec = sep::acceptance_recurrence(rho, k)?.p;
                    rows.push(
                        Row::new("cycle-index-vs-recurrence")
                            .front("k", json!(k))
                            .s("state", name)
                            .f("p", p)
                            .f("p_recurrence", rec)
                            .f("abs_diff", (p - rec).abs()),
                    );
                }
            }
        }
        Figure::Rejection => {
            let rho = models::w_reduced(3)?;
            for k in parse_k_grid(&a.k)? {
                for kind in [GroupKind::Symmetric, GroupKind::Cyclic, GroupKind::Dihedral] {
                    if kind == GroupKind::Dihedral && k < 3 {
                        continue;
                    }
                    let r = sep::resources_to_rejection(&rho, kind, k)?;
                    rows.push(
                        Row::new("resources-to-rejection")
                            .front("k", json!(k))
                            .s("group", kind.tag())
                            .f("p", r.p)
                            .u("cswaps", r.cswaps)
                            .f("ratio", r.ratio)
                            .of("formula_ratio", r.formula_ratio),
                    );
                }
            }
        }
        Figure::NmrDecay => {
            let h = hs::nmr(1.0, 2.0, 0.5)?;
            let reps = [
                ("z2xz2-pauli", groups::z2xz2_pauli()?),
                ("d3-cnot-swap", groups::d3_cnot_swap()?),
            ];
            for t in parse_t_grid(&a.t)? {
                for (name, rep) in &reps {
                    let r = hs::covariance_acceptance(&h, rep, t)?;
                    rows.push(
                        Row::new(&r.method)
                            .front("t", float(t))
                            .s("group", name)
                            .f("simulated", r.simulated)
                            .of("closed_form", r.closed_form)
                            .of("abs_diff", r.abs_diff()),
                    );
                }
            }
        }
    }
    Ok(true)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Bose(_) => "bose",
        Command::Gsym(_) => "gsym",
        Command::Gbse(_) => "gbse",
        Command::Gse(_) => "gse",
        Command::Ham(_) => "ham",
        Command::Dqc1(_) => "dqc1",
        Command::Dme(_) => "dme",
        Command::Otoc(_) => "otoc",
        Command::Blockenc(_) => "blockenc",
        Command::Sep(_) => "sep",
        Command::Resources(_) => "resources",
        Command::Sweep(_) => "sweep",
    }
}

/// Runs one command; returns the report text and whether every optimization converged.
pub fn execute(cfg: &RunConfig) -> Result<(String, bool)> {
    cfg.validate()?;
    let mut rows = Rows::default();
    let converged = match &cfg.command {
        Command::Bose(a) => cmd_bose(cfg, a, &mut rows)?,
        Command::Gsym(a) => cmd_opt(cfg, a, SymmetryMode::GSym, &mut rows)?,
        Command::Gbse(a) => cmd_opt(cfg, a, SymmetryMode::Bse, &mut rows)?,
        Command::Gse(a) => cmd_opt(cfg, a, SymmetryMode::Se, &mut rows)?,
        Command::Ham(a) => cmd_ham(cfg, a, &mut rows)?,
        Command::Dqc1(a) => cmd_dqc1(cfg, a, &mut rows)?,
        Command::Dme(a) => cmd_dme(cfg, a, &mut rows)?,
        Command::Otoc(a) => cmd_otoc(cfg, a, &mut rows)?,
        Command::Blockenc(a) => cmd_blockenc(cfg, a, &mut rows)?,
        Command::Sep(a) => cmd_sep(cfg, a, &mut rows)?,
        Command::Resources(a) => cmd_resources(a, &mut rows)?,
        Command::Sweep(a) => cmd_sweep(a, &mut rows)?,
    };
    Ok((render(cfg, command_name(&cfg.command), rows), converged))
}

fn configure_threads() {
    if let Ok(v) = std::env::var("SYMTEST_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n > 0 {
                // a second initialization (e.g. in tests) is harmless
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

/// Parses arguments, runs, writes the report and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    configure_threads();
    let (text, converged) = match execute(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_VALIDATION;
        }
    };
    let written = match &cfg.output {
        Some(path) => fs::write(path, text.as_bytes()),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return EXIT_VALIDATION;
    }
    if converged {
        EXIT_OK
    } else {
        eprintln!("warning: an optimization did not converge; the report holds the best value found");
        EXIT_NONCONVERGENCE
    }
}
