//! Named states and Hamiltonians used as fixtures.

use crate::error::{Result, SymError};
use crate::ham_symmetry::HamiltonianSpec;
use crate::linalg::{c, CVec, DensityMatrix, PureState};

pub use crate::ham_symmetry::{heisenberg_xy, nmr, transverse_ising};

#[derive(Clone, Debug)]
pub enum FixtureObject {
    Pure(PureState),
    Mixed(DensityMatrix),
    Hamiltonian(HamiltonianSpec),
}

#[derive(Clone, Debug)]
pub struct NamedFixture {
    pub name: String,
    pub object: FixtureObject,
    pub note: &'static str,
}

impl NamedFixture {
    /// The fixture as a density matrix, if it is a state.
    pub fn density(&self) -> Result<DensityMatrix> {
        match &self.object {
            FixtureObject::Pure(p) => Ok(p.density()),
            FixtureObject::Mixed(r) => Ok(r.clone()),
            FixtureObject::Hamiltonian(_) => Err(SymError::Invalid(format!(
                "{} is a Hamiltonian, not a state",
                self.name
            ))),
        }
    }

    pub fn pure(&self) -> Option<&PureState> {
        match &self.object {
            FixtureObject::Pure(p) => Some(p),
            _ => None,
        }
    }

    pub fn hamiltonian(&self) -> Result<HamiltonianSpec> {
        match &self.object {
            FixtureObject::Hamiltonian(h) => Ok(h.clone()),
            _ => Err(SymError::Invalid(format!("{} is a state, not a Hamiltonian", self.name))),
        }
    }
}

fn qubits(n: usize) -> Result<usize> {
    if n == 0 || n > 12 {
        return Err(SymError::Oversize(format!("{n} qubits")));
    }
    Ok(1 << n)
}

/// (|00⟩ + |11⟩)/√2.
pub fn bell() -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = CVec::from_vec(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]);
    PureState::new(v, vec![2, 2]).expect("unit vector")
}

/// (|01⟩ − |10⟩)/√2.
pub fn singlet() -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = CVec::from_vec(vec![c(0.0, 0.0), c(s, 0.0), c(-s, 0.0), c(0.0, 0.0)]);
    PureState::new(v, vec![2, 2]).expect("unit vector")
}

pub fn ghz(n: usize) -> Result<PureState> {
    let d = qubits(n)?;
    let mut v = CVec::zeros(d);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    v[0] = c(s, 0.0);
    v[d - 1] = c(s, 0.0);
    PureState::new(v, vec![2; n])
}

/// Equal superposition of the n weight-one basis states.
pub fn w_state(n: usize) -> Result<PureState> {
    let d = qubits(n)?;
    let mut v = CVec::zeros(d);
    let a = 1.0 / (n as f64).sqrt();
    for j in 0..n {
        v[1 << j] = c(a, 0.0);
    }
    PureState::new(v, vec![2; n])
}

/// Single-qubit reduction of the n-qubit W state: diag((n−1)/n, 1/n).
pub fn w_reduced(n: usize) -> Result<DensityMatrix> {
    w_state(n)?.density().reduce(&[0])
}

/// Single-qubit states by letter: 0, 1, +, -, r (|0⟩ + i|1⟩)/√2, l (|0⟩ − i|1⟩)/√2.
pub fn qubit_state(letter: char) -> Result<PureState> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (a, b) = match letter {
        '0' => (c(1.0, 0.0), c(0.0, 0.0)),
        '1' => (c(0.0, 0.0), c(1.0, 0.0)),
        '+' => (c(s, 0.0), c(s, 0.0)),
        '-' => (c(s, 0.0), c(-s, 0.0)),
        'r' => (c(s, 0.0), c(0.0, s)),
        'l' => (c(s, 0.0), c(0.0, -s)),
        _ => return Err(SymError::Unknown(format!("qubit state {letter}"))),
    };
    PureState::new(CVec::from_vec(vec![a, b]), vec![2])
}

/// Tensor product of single-qubit letters, e.g. "0+" for |0⟩ ⊗ |+⟩.
pub fn product(letters: &str) -> Result<PureState> {
    let mut chars = letters.chars();
    let first = chars
        .next()
        .ok_or_else(|| SymError::Parse("empty product state".into()))?;
    let mut psi = qubit_state(first)?;
    for l in chars {
        psi = psi.tensor(&qubit_state(l)?)?;
    }
    Ok(psi)
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| SymError::Parse(format!("{what}: expected an integer, got {s:?}")))
}

fn parse_f64_list(s: &str, n: usize, what: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| SymError::Parse(format!("{what}: bad number {x:?}")))
        })
        .collect::<Result<_>>()?;
    if v.len() != n {
        return Err(SymError::Parse(format!("{what} takes {n} numbers")));
    }
    Ok(v)
}

/// Look up a fixture by name:
/// `bell`, `singlet`, `ghz:n`, `w:n`, `w:n-reduced`, `product:<letters>`, `mixed:d`,
/// `bell-reduced`, `tim:n`, `nmr:w1,w2,J`, `xy:n` or `xy:n,J`.
pub fn fixture(name: &str) -> Result<NamedFixture> {
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (name, None),
    };
    let need = |what: &str| -> Result<&str> {
        arg.ok_or_else(|| SymError::Parse(format!("{what} needs an argument")))
    };
    let (object, note) = match head {
        "bell" => (FixtureObject::Pure(bell()), "(|00> + |11>)/sqrt 2"),
        "bell-reduced" => (
            FixtureObject::Mixed(bell().density().reduce(&[1])?),
            "one half of a Bell pair, I/2",
        ),
        "singlet" => (FixtureObject::Pure(singlet()), "(|01> - |10>)/sqrt 2"),
        "ghz" => (
            FixtureObject::Pure(ghz(parse_usize(need("ghz")?, "ghz")?)?),
            "(|0..0> + |1..1>)/sqrt 2",
        ),
        "w" => {
            let a = need("w")?;
            match a.strip_suffix("-reduced") {
                Some(n) => (
                    FixtureObject::Mixed(w_reduced(parse_usize(n, "w")?)?),
                    "single-qubit reduction of the W state",
                ),
                None => (
                    FixtureObject::Pure(w_state(parse_usize(a, "w")?)?),
                    "equal superposition of weight-one strings",
                ),
            }
        }
        "product" => (
            FixtureObject::Pure(product(need("product")?)?),
            "tensor product of single-qubit states",
        ),
        "mixed" => (
            FixtureObject::Mixed(DensityMatrix::maximally_mixed(vec![parse_usize(
                need("mixed")?,
                "mixed",
            )?])?),
            "maximally mixed state",
        ),
        "tim" => (
            FixtureObject::Hamiltonian(transverse_ising(parse_usize(need("tim")?, "tim")?)?),
            "transverse-field Ising ring",
        ),
        "nmr" => {
            let v = parse_f64_list(need("nmr")?, 3, "nmr")?;
            (
                FixtureObject::Hamiltonian(nmr(v[0], v[1], v[2])?),
                "weakly J-coupled two-spin NMR Hamiltonian",
            )
        }
        "xy" => {
            let a = need("xy")?;
            let (n, j) = match a.split_once(',') {
                Some((n, j)) => (
                    parse_usize(n, "xy")?,
                    j.trim()
                        .parse::<f64>()
                        .map_err(|_| SymError::Parse(format!("xy: bad coupling {j:?}")))?,
                ),
                None => (parse_usize(a, "xy")?, 1.0),
            };
            (
                FixtureObject::Hamiltonian(heisenberg_xy(n, j)?),
                "open Heisenberg XY chain",
            )
        }
        _ => return Err(SymError::Unknown(format!("fixture {name}"))),
    };
    Ok(NamedFixture {
        name: name.to_string(),
        object,
        note,
    })
}

/// Names accepted by [`fixture`], for help text.
pub const FIXTURE_NAMES: &[&str] = &[
    "bell",
    "bell-reduced",
    "singlet",
    "ghz:n",
    "w:n",
    "w:n-reduced",
    "product:<0|1|+|-|r|l>...",
    "mixed:d",
    "tim:n",
    "nmr:w1,w2,J",
    "xy:n[,J]",
];
