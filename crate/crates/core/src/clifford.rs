//! Pauli propagation through Clifford circuits.
//!
//! A DQC1 input `(I + Z ⊗ I..I) / 2^{n+1}` has a single non-identity Pauli
//! term, so a Clifford circuit `W` maps it to `(I + W (Z ⊗ I..I) W†) / 2^{n+1}`
//! where the conjugated term is again a signed Pauli string. That string
//! gives the control expectations in `O(gates)` time, and local rotations
//! taking every factor to `I` or `Z` show the output state is diagonal in a
//! product basis, hence free of discord in both directions.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::correlations::{discord, discord_product_bound, DiscordDirection};
use crate::dqc1::{build_input, UnitaryMatrix};
use crate::error::{Error, Result};
use crate::qmath::{
    c, hadamard, identity, pauli_x, pauli_y, pauli_z, tensor_all, CMatrix, DensityMatrix, I, ZERO,
};

/// Single-qubit Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    Z,
    X,
    Y,
}

impl Pauli {
    /// `(x, z)` symplectic bits, with `Y = i X Z`.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Z => (false, true),
            Pauli::Y => (true, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (false, true) => Pauli::Z,
            (true, true) => Pauli::Y,
        }
    }

    pub fn matrix(self) -> CMatrix {
        match self {
            Pauli::I => identity(2),
            Pauli::X => pauli_x(),
            Pauli::Y => pauli_y(),
            Pauli::Z => pauli_z(),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// `±P_0 ⊗ P_1 ⊗ ...` stored as X and Z bit vectors plus a sign bit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedPauliString {
    negative: bool,
    x: Vec<bool>,
    z: Vec<bool>,
}

impl SignedPauliString {
    pub fn identity(n: usize) -> Self {
        Self {
            negative: false,
            x: vec![false; n],
            z: vec![false; n],
        }
    }

    pub fn from_labels(negative: bool, labels: &[Pauli]) -> Self {
        let (x, z) = labels.iter().map(|p| p.bits()).unzip();
        Self { negative, x, z }
    }

    /// `Z` on `qubit`, identity elsewhere.
    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        (s.x[qubit], s.z[qubit]) = p.bits();
        s
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `+1` or `-1`.
    pub fn phase(&self) -> i8 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    pub fn label(&self, qubit: usize) -> Pauli {
        Pauli::from_bits(self.x[qubit], self.z[qubit])
    }

    pub fn labels(&self) -> Vec<Pauli> {
        (0..self.len()).map(|q| self.label(q)).collect()
    }

    /// Signed dense matrix, qubit 0 slowest.
    pub fn matrix(&self) -> CMatrix {
        let factors: Vec<CMatrix> = self.labels().iter().map(|p| p.matrix()).collect();
        tensor_all(&factors) * c(self.phase() as f64, 0.0)
    }

    /// Whether every factor is `I` or `Z`, i.e. the operator is diagonal in
    /// the computational basis.
    pub fn is_diagonal(&self) -> bool {
        self.x.iter().all(|&b| !b)
    }

    /// Recognises a dense matrix equal to a signed Pauli string within `tol`.
    pub fn from_matrix(m: &CMatrix, tol: f64) -> Option<Self> {
        let dim = m.nrows();
        if dim != m.ncols() || !dim.is_power_of_two() {
            return None;
        }
        let n = dim.trailing_zeros() as usize;
        // row 0 of a Pauli string has its only nonzero at the column given by the X bits
        let col = (0..dim).max_by(|&a, &b| m[(0, a)].norm().total_cmp(&m[(0, b)].norm()))?;
        let x: Vec<bool> = (0..n).map(|q| (col >> (n - 1 - q)) & 1 == 1).collect();
        for zmask in 0..dim {
            let z: Vec<bool> = (0..n).map(|q| (zmask >> (n - 1 - q)) & 1 == 1).collect();
            for negative in [false, true] {
                let cand = Self {
                    negative,
                    x: x.clone(),
                    z: z.clone(),
                };
                if (cand.matrix() - m).iter().all(|e| e.norm() <= tol) {
                    return Some(cand);
                }
            }
        }
        None
    }

    fn apply(&mut self, gate: Gate) {
        match gate {
            Gate::H(q) => {
                self.negative ^= self.x[q] & self.z[q];
                std::mem::swap(&mut self.x[q], &mut self.z[q]);
            }
            Gate::S(q) => {
                self.negative ^= self.x[q] & self.z[q];
                self.z[q] ^= self.x[q];
            }
            Gate::X(q) => self.negative ^= self.z[q],
            Gate::Z(q) => self.negative ^= self.x[q],
            Gate::Cnot(ctl, t) => {
                self.negative ^= self.x[ctl] & self.z[t] & !(self.x[t] ^ self.z[ctl]);
                self.x[t] ^= self.x[ctl];
                self.z[ctl] ^= self.z[t];
            }
            Gate::Cz(a, b) => {
                self.negative ^= self.x[a] & self.x[b] & (self.z[a] ^ self.z[b]);
                self.z[a] ^= self.x[b];
                self.z[b] ^= self.x[a];
            }
        }
    }
}

impl fmt::Display for SignedPauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if self.negative { '-' } else { '+' })?;
        for p in self.labels() {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for SignedPauliString {
    type Err = Error;

    /// Parses strings like `+XZI` or `-YY`; a missing sign means `+`.
    fn from_str(s: &str) -> Result<Self> {
        let (negative, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let labels = body
            .chars()
            .map(|ch| match ch {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::InvalidArgument(format!("bad Pauli label {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_labels(negative, &labels))
    }
}

impl Serialize for SignedPauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SignedPauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Clifford generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    S(usize),
    X(usize),
    Z(usize),
    /// `Cnot(control, target)`.
    Cnot(usize, usize),
    Cz(usize, usize),
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::S(_) => "S",
            Gate::X(_) => "X",
            Gate::Z(_) => "Z",
            Gate::Cnot(..) => "CNOT",
            Gate::Cz(..) => "CZ",
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::S(q) | Gate::X(q) | Gate::Z(q) => vec![q],
            Gate::Cnot(a, b) | Gate::Cz(a, b) => vec![a, b],
        }
    }

    /// Same gate acting `offset` qubits further down.
    pub fn shifted(&self, offset: usize) -> Gate {
        match *self {
            Gate::H(q) => Gate::H(q + offset),
            Gate::S(q) => Gate::S(q + offset),
            Gate::X(q) => Gate::X(q + offset),
            Gate::Z(q) => Gate::Z(q + offset),
            Gate::Cnot(a, b) => Gate::Cnot(a + offset, b + offset),
            Gate::Cz(a, b) => Gate::Cz(a + offset, b + offset),
        }
    }

    /// Gate sequence implementing the inverse.
    pub fn inverse(&self) -> Vec<Gate> {
        match *self {
            Gate::S(q) => vec![Gate::S(q); 3],
            g => vec![g],
        }
    }

    /// Dense matrix on `n` qubits, qubit 0 slowest.
    pub fn matrix(&self, n: usize) -> CMatrix {
        let dim = 1usize << n;
        let bit = |idx: usize, q: usize| (idx >> (n - 1 - q)) & 1;
        match *self {
            Gate::H(q) | Gate::S(q) | Gate::X(q) | Gate::Z(q) => {
                let local = match self {
                    Gate::H(_) => hadamard(),
                    Gate::S(_) => CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), ZERO, ZERO, I]),
                    Gate::X(_) => pauli_x(),
                    _ => pauli_z(),
                };
                let factors: Vec<CMatrix> = (0..n)
                    .map(|k| if k == q { local.clone() } else { identity(2) })
                    .collect();
                tensor_all(&factors)
            }
            Gate::Cnot(ctl, t) => CMatrix::from_fn(dim, dim, |r, col| {
                let mapped = if bit(col, ctl) == 1 {
                    col ^ (1 << (n - 1 - t))
                } else {
                    col
                };
                if r == mapped {
                    c(1.0, 0.0)
                } else {
                    ZERO
                }
            }),
            Gate::Cz(a, b) => CMatrix::from_fn(dim, dim, |r, col| {
                if r != col {
                    ZERO
                } else if bit(r, a) & bit(r, b) == 1 {
                    c(-1.0, 0.0)
                } else {
                    c(1.0, 0.0)
                }
            }),
        }
    }
}

/// Ordered gate list on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliffordCircuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl CliffordCircuit {
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::MalformedCircuit {
                index: None,
                reason: "circuit needs at least one qubit".into(),
            });
        }
        for (index, g) in gates.iter().enumerate() {
            let qs = g.qubits();
            if let Some(&q) = qs.iter().find(|&&q| q >= n_qubits) {
                return Err(Error::MalformedCircuit {
                    index: Some(index),
                    reason: format!("qubit {q} out of range for {n_qubits} qubits"),
                });
            }
            if qs.len() == 2 && qs[0] == qs[1] {
                return Err(Error::MalformedCircuit {
                    index: Some(index),
                    reason: format!("{} acts twice on qubit {}", g.name(), qs[0]),
                });
            }
        }
        Ok(Self { n_qubits, gates })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Dense unitary `W = g_k ... g_1`.
    pub fn matrix(&self) -> CMatrix {
        self.gates
            .iter()
            .fold(identity(1 << self.n_qubits), |acc, g| {
                g.matrix(self.n_qubits) * acc
            })
    }

    /// Gates of the inverse circuit.
    pub fn inverse_gates(&self) -> Vec<Gate> {
        self.gates.iter().rev().flat_map(|g| g.inverse()).collect()
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::MalformedCircuit {
                index: None,
                reason: e.to_string(),
            })?;
        Self::from_json_value(&value)
    }

    pub fn from_json_value(value: &serde_json::Value) -> Result<Self> {
        let bad = |index: Option<usize>, reason: String| Error::MalformedCircuit { index, reason };
        let n = value
            .get("n")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| bad(None, "missing integer field \"n\"".into()))?
            as usize;
        let gates = value
            .get("gates")
            .and_then(|v| v.as_array())
            .ok_or_else(|| bad(None, "missing array field \"gates\"".into()))?;
        let parsed = gates
            .iter()
            .enumerate()
            .map(|(i, g)| {
                serde_json::from_value::<GateJson>(g.clone())
                    .map_err(|e| bad(Some(i), e.to_string()))
                    .and_then(|gj| gj.to_gate().map_err(|r| bad(Some(i), r)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, parsed)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let gates: Vec<GateJson> = self.gates.iter().map(GateJson::from_gate).collect();
        serde_json::json!({ "n": self.n_qubits, "gates": gates })
    }
}

impl Serialize for CliffordCircuit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json_value().serialize(s)
    }
}

impl<'de> Deserialize<'de> for CliffordCircuit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        Self::from_json_value(&v).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum QubitsJson {
    One(usize),
    Two([usize; 2]),
}

/// `{"g": "CZ", "q": [0, 1]}` or `{"g": "H", "q": 0}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateJson {
    g: String,
    q: QubitsJson,
}

impl GateJson {
    fn to_gate(&self) -> std::result::Result<Gate, String> {
        match (self.g.to_ascii_uppercase().as_str(), &self.q) {
            ("H", QubitsJson::One(q)) => Ok(Gate::H(*q)),
            ("S", QubitsJson::One(q)) => Ok(Gate::S(*q)),
            ("X", QubitsJson::One(q)) => Ok(Gate::X(*q)),
            ("Z", QubitsJson::One(q)) => Ok(Gate::Z(*q)),
            ("CZ", QubitsJson::Two([a, b])) => Ok(Gate::Cz(*a, *b)),
            ("CNOT" | "CX", QubitsJson::Two([a, b])) => Ok(Gate::Cnot(*a, *b)),
            ("H" | "S" | "X" | "Z", _) => Err(format!("gate {} takes one qubit", self.g)),
            ("CZ" | "CNOT" | "CX", _) => Err(format!("gate {} takes two qubits", self.g)),
            (other, _) => Err(format!("unknown gate {other:?}")),
        }
    }

    fn from_gate(g: &Gate) -> Self {
        let q = match *g {
            Gate::H(q) | Gate::S(q) | Gate::X(q) | Gate::Z(q) => QubitsJson::One(q),
            Gate::Cnot(a, b) | Gate::Cz(a, b) => QubitsJson::Two([a, b]),
        };
        Self {
            g: g.name().to_string(),
            q,
        }
    }
}

/// `g P g†` for one gate.
pub fn conjugate_gate(gate: Gate, p: &SignedPauliString) -> Result<SignedPauliString> {
    if let Some(&q) = gate.qubits().iter().find(|&&q| q >= p.len()) {
        return Err(Error::InvalidArgument(format!(
            "gate qubit {q} out of range for a {}-qubit string",
            p.len()
        )));
    }
    let mut out = p.clone();
    out.apply(gate);
    Ok(out)
}

/// `W P W†` for the whole circuit.
pub fn propagate(circuit: &CliffordCircuit, p: &SignedPauliString) -> Result<SignedPauliString> {
    if p.len() != circuit.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: circuit.n_qubits(),
            found: p.len(),
        });
    }
    let mut out = p.clone();
    for &g in circuit.gates() {
        out.apply(g);
    }
    Ok(out)
}

/// Control expectations `(<X>, <Y>)` of a Clifford DQC1 circuit, from the
/// propagated input term `Z ⊗ I..I`.
pub fn dqc1_clifford_expectations(circuit: &CliffordCircuit, alpha: f64) -> Result<(f64, f64)> {
    crate::dqc1::check_alpha(alpha)?;
    let n = circuit.n_qubits();
    let out = propagate(circuit, &SignedPauliString::single(n, 0, Pauli::Z))?;
    let rest_identity = (1..n).all(|q| out.label(q) == Pauli::I);
    let value = alpha * out.phase() as f64;
    Ok(match (out.label(0), rest_identity) {
        (Pauli::X, true) => (value, 0.0),
        (Pauli::Y, true) => (0.0, value),
        _ => (0.0, 0.0),
    })
}

/// Local rotation taking one Pauli factor to `I` or `Z`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalRotation {
    pub qubit: usize,
    pub from: char,
    pub to: char,
    /// Gates applied in order; empty when the factor is already diagonal.
    pub gates: Vec<String>,
}

fn diagonalising_gates(p: Pauli, q: usize) -> Vec<Gate> {
    match p {
        Pauli::X => vec![Gate::H(q)],
        // S† = S^3 takes Y to X, then H takes X to Z
        Pauli::Y => vec![Gate::S(q), Gate::S(q), Gate::S(q), Gate::H(q)],
        Pauli::I | Pauli::Z => Vec::new(),
    }
}

/// Dense discords of the circuit's output state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenseDiscordCheck {
    pub discord_measure_control: f64,
    /// Exact for a one-qubit register, otherwise the product-measurement bound.
    pub discord_measure_register: f64,
    /// Largest entry deviation between the dense state and `(I + P) / 2^{n+1}`.
    pub state_deviation: f64,
    pub passed: bool,
}

/// Outcome of checking that a Clifford DQC1 circuit generates no discord.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroDiscordReport {
    pub n_qubits: usize,
    pub propagated: SignedPauliString,
    pub local_map: Vec<LocalRotation>,
    /// Propagated string after the local rotations; only `I` and `Z` factors.
    pub diagonal_form: SignedPauliString,
    pub dense_check: Option<DenseDiscordCheck>,
    pub verified: bool,
}

/// Largest circuit width for which the dense cross-check runs.
pub const DENSE_CHECK_MAX_QUBITS: usize = 4;
pub const DISCORD_ZERO_TOL: f64 = 1e-6;

pub fn verify_zero_discord(circuit: &CliffordCircuit) -> Result<ZeroDiscordReport> {
    let n = circuit.n_qubits();
    let propagated = propagate(circuit, &SignedPauliString::single(n, 0, Pauli::Z))?;
    let mut local_map = Vec::new();
    let mut local_gates = Vec::new();
    for q in 0..n {
        let p = propagated.label(q);
        let gates = diagonalising_gates(p, q);
        local_map.push(LocalRotation {
            qubit: q,
            from: p.symbol(),
            to: if p == Pauli::I { 'I' } else { 'Z' },
            gates: gates.iter().map(|g| g.name().to_string()).collect(),
        });
        local_gates.extend(gates);
    }
    let local = CliffordCircuit::new(n, local_gates)?;
    let diagonal_form = propagate(&local, &propagated)?;
    let structural = diagonal_form.is_diagonal();

    let dense_check = if (2..=DENSE_CHECK_MAX_QUBITS).contains(&n) {
        Some(dense_discord_check(circuit, &propagated)?)
    } else {
        None
    };
    let verified = structural && dense_check.is_none_or(|d| d.passed);
    Ok(ZeroDiscordReport {
        n_qubits: n,
        propagated,
        local_map,
        diagonal_form,
        dense_check,
        verified,
    })
}

/// Dense output state `W rho_in W†` with the control pure, split control | register.
pub fn dense_output_state(circuit: &CliffordCircuit) -> Result<DensityMatrix> {
    let n = circuit.n_qubits();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "dense DQC1 state needs a control and at least one register qubit".into(),
        ));
    }
    build_input(n - 1, 1.0)?.conjugate_by(&circuit.matrix())
}

fn dense_discord_check(
    circuit: &CliffordCircuit,
    propagated: &SignedPauliString,
) -> Result<DenseDiscordCheck> {
    let n = circuit.n_qubits();
    let rho = dense_output_state(circuit)?;
    let dim = 1usize << n;
    let predicted = (identity(dim) + propagated.matrix()) * c(1.0 / dim as f64, 0.0);
    let state_deviation = (rho.entries() - predicted)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let dc = discord(&rho, DiscordDirection::MeasureControl)?;
    let dr = discord_product_bound(&rho, DiscordDirection::MeasureRegister)?;
    Ok(DenseDiscordCheck {
        discord_measure_control: dc,
        discord_measure_register: dr,
        state_deviation,
        passed: dc.abs() < DISCORD_ZERO_TOL
            && dr.abs() < DISCORD_ZERO_TOL
            && state_deviation < 1e-12,
    })
}

/// Uniformly random gate sequence over the generator set.
pub fn random_circuit<R: Rng + ?Sized>(
    n_qubits: usize,
    n_gates: usize,
    rng: &mut R,
) -> CliffordCircuit {
    let gates = (0..n_gates)
        .map(|_| {
            let kind = if n_qubits < 2 {
                rng.random_range(0..4)
            } else {
                rng.random_range(0..6)
            };
            let a = rng.random_range(0..n_qubits);
            let mut pair = || {
                let mut b = rng.random_range(0..n_qubits - 1);
                if b >= a {
                    b += 1;
                }
                b
            };
            match kind {
                0 => Gate::H(a),
                1 => Gate::S(a),
                2 => Gate::X(a),
                3 => Gate::Z(a),
                4 => Gate::Cnot(a, pair()),
                _ => Gate::Cz(a, pair()),
            }
        })
        .collect();
    CliffordCircuit { n_qubits, gates }
}

/// DQC1 circuit for a register unitary `U = i^k A P A†` whose controlled
/// version is Clifford.
#[derive(Debug, Clone)]
pub struct ControlledClifford {
    /// Register unitary.
    pub unitary: UnitaryMatrix,
    /// Hadamard on the control followed by controlled-`U`, on `n + 1` qubits.
    pub circuit: CliffordCircuit,
}

impl ControlledClifford {
    /// `phase_power` k gives the global phase `i^k` of `U`.
    pub fn new(conjugator: &CliffordCircuit, pauli: &[Pauli], phase_power: u8) -> Result<Self> {
        let n = conjugator.n_qubits();
        if pauli.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: pauli.len(),
            });
        }
        let mut gates = vec![Gate::H(0)];
        gates.extend(conjugator.inverse_gates().iter().map(|g| g.shifted(1)));
        for (j, p) in pauli.iter().enumerate() {
            let t = j + 1;
            match p {
                Pauli::I => {}
                Pauli::X => gates.push(Gate::Cnot(0, t)),
                Pauli::Z => gates.push(Gate::Cz(0, t)),
                Pauli::Y => gates.extend([
                    Gate::S(t),
                    Gate::S(t),
                    Gate::S(t),
                    Gate::Cnot(0, t),
                    Gate::S(t),
                ]),
            }
        }
        gates.extend(conjugator.gates().iter().map(|g| g.shifted(1)));
        // diag(1, i^k) on the control
        gates.extend(std::iter::repeat_n(Gate::S(0), (phase_power % 4) as usize));
        let circuit = CliffordCircuit::new(n + 1, gates)?;

        let a = conjugator.matrix();
        let p = SignedPauliString::from_labels(false, pauli).matrix();
        let phase = I.powi(phase_power as i32 % 4);
        let u = (&a * p * a.adjoint()) * phase;
        Ok(Self {
            unitary: UnitaryMatrix::new(u)?,
            circuit,
        })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, conjugator_gates: usize, rng: &mut R) -> Result<Self> {
        let conjugator = random_circuit(n, conjugator_gates, rng);
        // identity Pauli half the time so nonzero traces are exercised
        let pauli: Vec<Pauli> = if rng.random_bool(0.5) {
            vec![Pauli::I; n]
        } else {
            (0..n)
                .map(|_| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..4)])
                .collect()
        };
        Self::new(&conjugator, &pauli, rng.random_range(0..4))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dqc1::{exact_expectations, output_state, z_theta};
    use crate::rng::task_rng;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn ps(s: &str) -> SignedPauliString {
        s.parse().unwrap()
    }

    fn circuit(n: usize, gates: Vec<Gate>) -> CliffordCircuit {
        CliffordCircuit::new(n, gates).unwrap()
    }

    /// Dense oracle: conjugate the matrix and recognise the result.
    fn dense_propagate(c: &CliffordCircuit, p: &SignedPauliString) -> SignedPauliString {
        let w = c.matrix();
        let m = &w * p.matrix() * w.adjoint();
        SignedPauliString::from_matrix(&m, 1e-9).expect("Clifford image must be a signed Pauli")
    }

    #[test]
    fn conjugation_table_examples() {
        assert_eq!(conjugate_gate(Gate::H(0), &ps("Z")).unwrap(), ps("X"));
        assert_eq!(conjugate_gate(Gate::S(0), &ps("X")).unwrap(), ps("Y"));
        assert_eq!(conjugate_gate(Gate::Cz(0, 1), &ps("XI")).unwrap(), ps("XZ"));
        assert!(conjugate_gate(Gate::H(3), &ps("XI")).is_err());
    }

    #[test]
    fn single_gates_match_dense_conjugation() {
        let gates = [
            Gate::H(0),
            Gate::S(0),
            Gate::X(0),
            Gate::Z(0),
            Gate::Cnot(0, 1),
            Gate::Cnot(1, 0),
            Gate::Cz(0, 1),
        ];
        let labels = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        for g in gates {
            for &a in &labels {
                for &b in &labels {
                    for neg in [false, true] {
                        let p = SignedPauliString::from_labels(neg, &[a, b]);
                        let fast = conjugate_gate(g, &p).unwrap();
                        assert_eq!(
                            fast,
                            dense_propagate(&circuit(2, vec![g]), &p),
                            "{g:?} on {p}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn self_inverse_gates_are_involutions() {
        let p = ps("-XYZ");
        for g in [
            Gate::H(1),
            Gate::X(2),
            Gate::Z(0),
            Gate::Cnot(2, 0),
            Gate::Cz(1, 2),
        ] {
            let once = conjugate_gate(g, &p).unwrap();
            assert_eq!(conjugate_gate(g, &once).unwrap(), p);
        }
    }

    #[test]
    fn propagate_examples() {
        assert_eq!(propagate(&circuit(2, vec![]), &ps("ZI")).unwrap(), ps("ZI"));
        assert_eq!(
            propagate(&circuit(2, vec![Gate::H(0)]), &ps("ZI")).unwrap(),
            ps("XI")
        );
        assert_eq!(
            propagate(&circuit(2, vec![Gate::H(0), Gate::Cz(0, 1)]), &ps("ZI")).unwrap(),
            ps("XZ")
        );
        assert!(matches!(
            propagate(&circuit(3, vec![]), &ps("ZI")),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn random_circuits_match_dense_conjugation() {
        let mut rng = task_rng(41, 0);
        for trial in 0..200 {
            let n = 1 + trial % 5;
            let c = random_circuit(n, 1 + trial % 25, &mut rng);
            let labels: Vec<Pauli> = (0..n)
                .map(|_| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..4)])
                .collect();
            let p = SignedPauliString::from_labels(rng.random_bool(0.5), &labels);
            assert_eq!(propagate(&c, &p).unwrap(), dense_propagate(&c, &p));
        }
    }

    #[test]
    fn clifford_expectation_examples() {
        let alpha = 0.7;
        assert_eq!(
            dqc1_clifford_expectations(&circuit(2, vec![Gate::H(0)]), alpha).unwrap(),
            (alpha, 0.0)
        );
        assert_eq!(
            dqc1_clifford_expectations(&circuit(2, vec![Gate::H(0), Gate::Cz(0, 1)]), alpha)
                .unwrap(),
            (0.0, 0.0)
        );
        assert_eq!(
            dqc1_clifford_expectations(
                &circuit(3, vec![Gate::H(0), Gate::Cz(0, 1), Gate::Cz(0, 2)]),
                1.0
            )
            .unwrap(),
            (0.0, 0.0)
        );
    }

    #[test]
    fn clifford_endpoints_match_dense_simulator() {
        for (theta, c) in [
            (0.0, circuit(2, vec![Gate::H(0)])),
            (PI, circuit(2, vec![Gate::H(0), Gate::Cz(0, 1)])),
        ] {
            for alpha in [1.0, 0.58] {
                let (x, y) = exact_expectations(&z_theta(theta), alpha).unwrap();
                let (cx, cy) = dqc1_clifford_expectations(&c, alpha).unwrap();
                assert_abs_diff_eq!(x, cx, epsilon = 1e-12);
                assert_abs_diff_eq!(y, cy, epsilon = 1e-12);
                let dense = output_state(&z_theta(theta), 1.0).unwrap();
                let via_circuit = dense_output_state(&c).unwrap();
                assert!((dense.entries() - via_circuit.entries()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn controlled_clifford_matches_dense_expectations() {
        let mut rng = task_rng(43, 0);
        for trial in 0..20 {
            let n = 1 + trial % 3;
            let cc = ControlledClifford::random(n, 12, &mut rng).unwrap();
            let (x, y) = exact_expectations(&cc.unitary, 0.9).unwrap();
            let (cx, cy) = dqc1_clifford_expectations(&cc.circuit, 0.9).unwrap();
            assert_abs_diff_eq!(x, cx, epsilon = 1e-12);
            assert_abs_diff_eq!(y, cy, epsilon = 1e-12);
            // the circuit really is H then controlled-U
            let dense = crate::dqc1::circuit_unitary(&cc.unitary);
            assert!((dense - cc.circuit.matrix()).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_discord_examples() {
        let r = verify_zero_discord(&circuit(2, vec![Gate::H(0), Gate::Cz(0, 1)])).unwrap();
        assert!(r.verified);
        assert_eq!(r.propagated, ps("XZ"));
        assert_eq!(r.local_map[0].from, 'X');
        assert_eq!(r.local_map[0].to, 'Z');
        assert_eq!(r.local_map[1].from, 'Z');
        assert_eq!(r.local_map[1].to, 'Z');
        assert_eq!(r.diagonal_form, ps("ZZ"));
        let d = r.dense_check.unwrap();
        assert!(d.discord_measure_control < 1e-6 && d.discord_measure_register < 1e-6);

        let empty = verify_zero_discord(&circuit(2, vec![])).unwrap();
        assert!(empty.verified);
        assert_eq!(empty.propagated, ps("ZI"));
        assert!(empty.local_map.iter().all(|l| l.gates.is_empty()));
        let d = empty.dense_check.unwrap();
        assert_abs_diff_eq!(d.discord_measure_control, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn random_four_qubit_circuits_have_no_discord() {
        let mut rng = task_rng(47, 0);
        for _ in 0..5 {
            let r = verify_zero_discord(&random_circuit(4, 20, &mut rng)).unwrap();
            assert!(r.verified, "{r:?}");
        }
    }

    #[test]
    fn circuit_json_round_trip_and_errors() {
        let text =
            r#"{"n": 2, "gates": [{"g":"H","q":0},{"g":"CZ","q":[0,1]},{"g":"CNOT","q":[1,0]}]}"#;
        let c = CliffordCircuit::from_json_str(text).unwrap();
        assert_eq!(c.gates(), &[Gate::H(0), Gate::Cz(0, 1), Gate::Cnot(1, 0)]);
        let back: CliffordCircuit = serde_json::from_value(c.to_json_value()).unwrap();
        assert_eq!(back, c);

        let bad = r#"{"n": 2, "gates": [{"g":"H","q":0},{"g":"T","q":1}]}"#;
        match CliffordCircuit::from_json_str(bad) {
            Err(Error::MalformedCircuit { index: Some(1), .. }) => {}
            other => panic!("{other:?}"),
        }
        let range = r#"{"n": 2, "gates": [{"g":"CZ","q":[0,2]}]}"#;
        assert!(matches!(
            CliffordCircuit::from_json_str(range),
            Err(Error::MalformedCircuit { index: Some(0), .. })
        ));
        let same = r#"{"n": 2, "gates": [{"g":"H","q":0},{"g":"CNOT","q":[1,1]}]}"#;
        assert!(matches!(
            CliffordCircuit::from_json_str(same),
            Err(Error::MalformedCircuit { index: Some(1), .. })
        ));
        let arity = r#"{"n": 2, "gates": [{"g":"H","q":[0,1]}]}"#;
        assert!(matches!(
            CliffordCircuit::from_json_str(arity),
            Err(Error::MalformedCircuit { index: Some(0), .. })
        ));
    }

    #[test]
    fn pauli_string_text_form() {
        let p = ps("-XYZI");
        assert_eq!(p.to_string(), "-XYZI");
        assert_eq!(p.phase(), -1);
        assert_eq!(serde_json::to_string(&p).unwrap(), "\"-XYZI\"");
        assert!("+XQ".parse::<SignedPauliString>().is_err());
    }

    #[test]
    fn propagation_time_is_linear_in_gates() {
        use std::time::Instant;
        let mut rng = task_rng(53, 0);
        let short = random_circuit(50, 20_000, &mut rng);
        let long = random_circuit(50, 200_000, &mut rng);
        let p = SignedPauliString::single(50, 0, Pauli::Z);
        let best = |c: &CliffordCircuit| {
            (0..7)
                .map(|_| {
                    let t = Instant::now();
                    std::hint::black_box(propagate(c, &p).unwrap());
                    t.elapsed().as_secs_f64()
                })
                .fold(f64::INFINITY, f64::min)
        };
        let ratio = best(&long) / best(&short);
        assert!(ratio <= 12.0, "10x gates took {ratio:.2}x time");
    }
}
