// Copyright 2026 The rydqaoa Authors
// SPDX-License-Identifier: Apache-2.0

//! Target states and circuits, each paired with an independent check.
//!
//! Pinned representatives:
//!
//! * `ame-5` is the logical `|0>` of the cyclic five-qubit code, i.e. the
//!   joint +1 eigenstate of the shifts of `XZZXI` and of `ZZZZZ`. Its
//!   support is 16 of the 32 computational basis states, each with
//!   amplitude modulus 1/4.
//! * `ame-6` is the graph state of the triangular prism (two triangles
//!   `{0,3,4}`, `{1,2,5}` joined by `0-5`, `3-2`, `4-1`). Every three-qubit
//!   cut of that graph has full GF(2) rank, so all 20 three-qubit marginals
//!   are maximally mixed. Support is uniform (64 amplitudes of modulus 1/8).
//! * `perfect-encoder` copies the input qubit onto four ancillas with
//!   controlled-NOTs, applies a Hadamard to every qubit, and then a
//!   controlled-π phase around the ring `0-1-2-3-4-0`. The logical
//!   codewords are the ring graph state and its `Z^{⊗5}` image, which span
//!   a distance-3 perfect code.

use std::fmt;

use pairs::combinations;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gates::{standard_gate, Control, SingleQubitGate, StandardGate};
use crate::qcore::{
    inner, partial_trace, ComplexMatrix, QuantumState, C64, ONE, UNITARY_TOL, ZERO,
};

/// Tolerance for stabilizer eigenvalues and AME marginals.
pub const STABILIZER_TOL: f64 = 1e-9;
/// Tolerance for the error-correction conditions.
pub const KL_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl GraphSpec {
    /// Edges are unordered; insertion order is kept.
    pub fn new(num_vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if num_vertices == 0 {
            return Err(invalid("a graph needs at least one vertex"));
        }
        let mut seen = Vec::with_capacity(edges.len());
        for &(a, b) in &edges {
            if a == b {
                return Err(invalid(format!("self-loop on vertex {a}")));
            }
            if a >= num_vertices || b >= num_vertices {
                return Err(invalid(format!("edge ({a},{b}) out of range")));
            }
            let key = (a.min(b), a.max(b));
            if seen.contains(&key) {
                return Err(invalid(format!("duplicate edge ({a},{b})")));
            }
            seen.push(key);
        }
        Ok(Self {
            num_vertices,
            edges,
        })
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::new(n, combinations(n).collect())
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|i| (i - 1, i)).collect())
    }

    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(invalid("a ring needs at least three vertices"));
        }
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n)).collect())
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, a: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(x, y)| match () {
                _ if x == a => Some(y),
                _ if y == a => Some(x),
                _ => None,
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Correlation operators `K_a = X_a ⊗_{b∈N(a)} Z_b`.
    pub fn stabilizers(&self) -> Vec<PauliString> {
        (0..self.num_vertices)
            .map(|a| {
                let mut ops = vec![Pauli::I; self.num_vertices];
                ops[a] = Pauli::X;
                for b in self.neighbors(a) {
                    ops[b] = Pauli::Z;
                }
                PauliString::new(ops)
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// Tensor product of single-qubit Paulis, qubit 0 first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliString {
    ops: Vec<Pauli>,
}

impl PauliString {
    pub fn new(ops: Vec<Pauli>) -> Self {
        Self { ops }
    }

    /// Parses strings such as `"XZZXI"`.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(invalid(format!("bad Pauli letter `{c}`"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut ops = vec![Pauli::I; n];
        ops[q] = p;
        Self::new(ops)
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.ops.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// `P |v>` on a qubit register of matching size.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.ops.len();
        assert_eq!(v.len(), 1 << n, "Pauli string length must match register");
        let mut flip = 0usize;
        for (q, p) in self.ops.iter().enumerate() {
            if matches!(p, Pauli::X | Pauli::Y) {
                flip |= 1 << (n - 1 - q);
            }
        }
        let mut out = vec![ZERO; v.len()];
        for (x, &a) in v.iter().enumerate() {
            let mut phase = ONE;
            for (q, p) in self.ops.iter().enumerate() {
                let bit = (x >> (n - 1 - q)) & 1;
                let sign = if bit == 1 { -1.0 } else { 1.0 };
                match p {
                    Pauli::I | Pauli::X => {}
                    Pauli::Z => phase *= sign,
                    Pauli::Y => phase *= C64::new(0.0, sign),
                }
            }
            out[x ^ flip] += phase * a;
        }
        out
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let dim = 1 << self.ops.len();
        let cols: Vec<Vec<C64>> = (0..dim)
            .map(|j| {
                let mut e = vec![ZERO; dim];
                e[j] = ONE;
                self.apply(&e)
            })
            .collect();
        ComplexMatrix::from_columns(&cols).expect("square by construction")
    }
}

/// `(prod over edges CZ) |+>^n`.
pub fn cluster_state(graph: &GraphSpec) -> Result<QuantumState> {
    let n = graph.num_vertices;
    let plus = QuantumState::plus(n)?;
    let mut amps = plus.into_amplitudes();
    for &(a, b) in &graph.edges {
        let ma = 1 << (n - 1 - a);
        let mb = 1 << (n - 1 - b);
        for (x, amp) in amps.iter_mut().enumerate() {
            if x & ma != 0 && x & mb != 0 {
                *amp = -*amp;
            }
        }
    }
    QuantumState::new(n, 2, amps)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilizerReport {
    /// `Re <psi|K_a|psi>` per vertex.
    pub eigenvalues: Vec<f64>,
    pub pass: bool,
}

pub fn verify_cluster(psi: &QuantumState, graph: &GraphSpec) -> Result<StabilizerReport> {
    let n = graph.num_vertices;
    if psi.levels() != 2 || psi.num_sites() != n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            found: psi.dim(),
        });
    }
    let eigenvalues: Vec<f64> = graph
        .stabilizers()
        .iter()
        .map(|k| inner(psi.amplitudes(), &k.apply(psi.amplitudes())).re)
        .collect();
    let pass = eigenvalues.iter().all(|e| (e - 1.0).abs() <= STABILIZER_TOL);
    Ok(StabilizerReport { eigenvalues, pass })
}

/// `(|0...0> + |1...1>)/sqrt(2)`.
pub fn ghz_state(n: usize) -> Result<QuantumState> {
    if n < 2 {
        return Err(invalid("GHZ needs at least two qubits"));
    }
    let dim = 1usize << n;
    let mut amps = vec![ZERO; dim];
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amps[0] = s;
    amps[dim - 1] = s;
    QuantumState::new(n, 2, amps)
}

/// Joint +1 eigenstate of `n` independent commuting Pauli generators,
/// obtained by projecting computational basis states with
/// `prod_g (I + g)/2` until the image is nonzero.
pub fn stabilizer_state(generators: &[PauliString]) -> Result<QuantumState> {
    let n = generators
        .first()
        .map(PauliString::len)
        .ok_or_else(|| invalid("no generators"))?;
    if generators.len() != n || generators.iter().any(|g| g.len() != n) {
        return Err(invalid("need exactly n generators on n qubits"));
    }
    let dim = 1usize << n;
    for seed in 0..dim {
        let mut v = vec![ZERO; dim];
        v[seed] = ONE;
        for g in generators {
            let gv = g.apply(&v);
            v.iter_mut().zip(gv).for_each(|(a, b)| *a = (*a + b) * 0.5);
        }
        let n2: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        if n2 > 1e-6 {
            return QuantumState::normalized(n, 2, v);
        }
    }
    Err(invalid("generators do not define a stabilizer state"))
}

/// Stabilizer generators of the pinned AME representative on `n` qubits.
pub fn ame_generators(n: usize) -> Result<Vec<PauliString>> {
    match n {
        5 => ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ", "ZZZZZ"]
            .iter()
            .map(|s| PauliString::parse(s))
            .collect(),
        6 => Ok(prism_graph()?.stabilizers()),
        _ => Err(invalid(format!("no AME representative pinned for n = {n}"))),
    }
}

/// Triangular prism on six vertices.
pub fn prism_graph() -> Result<GraphSpec> {
    GraphSpec::new(
        6,
        vec![(0, 3), (0, 4), (3, 4), (1, 2), (1, 5), (2, 5), (0, 5), (2, 3), (1, 4)],
    )
}

pub fn ame_state(n: usize) -> Result<QuantumState> {
    stabilizer_state(&ame_generators(n)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmeReport {
    pub pass: bool,
    /// Largest max-entry deviation of any checked marginal from `I/d`.
    pub worst_deviation: f64,
    pub marginals_checked: usize,
}

/// Checks that every `floor(n/2)`-qubit marginal is maximally mixed.
pub fn verify_ame(psi: &QuantumState) -> Result<AmeReport> {
    if psi.levels() != 2 {
        return Err(invalid("AME verification expects qubits"));
    }
    let n = psi.num_sites();
    let k = n / 2;
    if k == 0 {
        return Err(invalid("AME needs at least two qubits"));
    }
    let d = 1usize << k;
    let mixed = ComplexMatrix::from_real_diagonal(&vec![1.0 / d as f64; d]);
    let mut worst = 0.0f64;
    let mut count = 0;
    for subset in subsets(n, k) {
        let rho = partial_trace(psi, &subset)?;
        worst = worst.max(rho.max_abs_diff(&mixed));
        count += 1;
    }
    Ok(AmeReport {
        pass: worst <= STABILIZER_TOL,
        worst_deviation: worst,
        marginals_checked: count,
    })
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|&i| m >> (n - 1 - i) & 1 == 1).collect())
        .collect()
}

/// The encoder as an ordered gate list `(gate, operands)`; the input qubit
/// is 0 and qubits 1..=4 are ancillas starting in `|0>`.
pub fn encoder_circuit() -> Vec<(StandardGate, Vec<usize>)> {
    let cnot = || StandardGate::Conditional {
        gate: SingleQubitGate::X,
        controls: vec![Control::Filled],
    };
    let mut gates: Vec<(StandardGate, Vec<usize>)> = (1..5).map(|t| (cnot(), vec![0, t])).collect();
    gates.extend((0..5).map(|q| (StandardGate::H, vec![q])));
    gates.extend((0..5).map(|q| (StandardGate::ControlledPhase(std::f64::consts::PI), vec![q, (q + 1) % 5])));
    gates
}

pub fn perfect_encoder_unitary() -> ComplexMatrix {
    encoder_circuit()
        .iter()
        .fold(ComplexMatrix::identity(32), |acc, (g, qs)| {
            &standard_gate(g, qs, 5).expect("static circuit is well formed") * &acc
        })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncoderReport {
    pub pass: bool,
    /// Largest of `|<0|E|1>|` and `|<0|E|0> - <1|E|1>|` over all checked `E`.
    pub worst_violation: f64,
    pub operators_checked: usize,
}

/// Error-detection conditions for `I` and all 15 single-qubit Paulis on the
/// codewords `U|0>|0000>` and `U|1>|0000>`.
pub fn verify_encoder(u: &ComplexMatrix) -> Result<EncoderReport> {
    if u.rows() != 32 || u.cols() != 32 {
        return Err(Error::DimensionMismatch {
            expected: 32,
            found: u.rows(),
        });
    }
    let defect = u.unitarity_defect();
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary(defect));
    }
    let zero = u.column(0);
    let one = u.column(16);
    let mut ops = vec![PauliString::parse("IIIII")?];
    for q in 0..5 {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            ops.push(PauliString::single(5, q, p));
        }
    }
    let worst = kl_violation(&zero, &one, &ops);
    Ok(EncoderReport {
        pass: worst <= KL_TOL,
        worst_violation: worst,
        operators_checked: ops.len(),
    })
}

pub(crate) fn kl_violation(zero: &[C64], one: &[C64], ops: &[PauliString]) -> f64 {
    ops.iter()
        .map(|e| {
            let e0 = e.apply(zero);
            let e1 = e.apply(one);
            let off = inner(zero, &e1).norm();
            let diag = (inner(zero, &e0) - inner(one, &e1)).norm();
            off.max(diag)
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    State,
    Circuit,
}

/// How a state target is independently checked.
#[derive(Clone, Debug, PartialEq)]
pub enum StateCheck {
    Cluster(GraphSpec),
    Ghz,
    Ame,
}

#[derive(Clone, Debug)]
pub enum TargetSpec {
    State {
        key: String,
        state: QuantumState,
        check: StateCheck,
    },
    Circuit {
        key: String,
        unitary: ComplexMatrix,
    },
}

/// Canonical registry entries. `cluster-full-N`, `cluster-chain-N` and
/// `ghz-N` are also accepted for N in 2..=6.
pub const REGISTRY_KEYS: [&str; 8] = [
    "cluster-full-4",
    "cluster-full-5",
    "cluster-full-6",
    "cluster-chain-4",
    "ghz-5",
    "ame-5",
    "ame-6",
    "perfect-encoder",
];

pub fn lookup_target(key: &str) -> Result<TargetSpec> {
    let unknown = || Error::UnknownTarget {
        key: key.to_string(),
        known: REGISTRY_KEYS
            .iter()
            .map(|s| s.to_string())
            .chain(["cluster-full-N", "cluster-chain-N", "ghz-N"].map(String::from))
            .collect(),
    };
    let sized = |prefix: &str| -> Option<usize> {
        key.strip_prefix(prefix)
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|n| (2..=6).contains(n))
    };
    let state = |state: QuantumState, check: StateCheck| TargetSpec::State {
        key: key.to_string(),
        state,
        check,
    };
    if key == "perfect-encoder" {
        return Ok(TargetSpec::Circuit {
            key: key.to_string(),
            unitary: perfect_encoder_unitary(),
        });
    }
    if let Some(n) = sized("cluster-full-") {
        let g = GraphSpec::complete(n)?;
        return Ok(state(cluster_state(&g)?, StateCheck::Cluster(g)));
    }
    if let Some(n) = sized("cluster-chain-") {
        let g = GraphSpec::path(n)?;
        return Ok(state(cluster_state(&g)?, StateCheck::Cluster(g)));
    }
    if let Some(n) = sized("ghz-") {
        return Ok(state(ghz_state(n)?, StateCheck::Ghz));
    }
    match key {
        "ame-5" => Ok(state(ame_state(5)?, StateCheck::Ame)),
        "ame-6" => Ok(state(ame_state(6)?, StateCheck::Ame)),
        _ => Err(unknown()),
    }
}

/// Outcome of a target's own check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Verification {
    Stabilizers(StabilizerReport),
    Ghz { fidelity: f64 },
    Ame(AmeReport),
    KnillLaflamme(EncoderReport),
}

impl Verification {
    pub fn passed(&self) -> bool {
        match self {
            Verification::Stabilizers(r) => r.pass,
            Verification::Ghz { fidelity } => (1.0 - fidelity) <= STABILIZER_TOL,
            Verification::Ame(r) => r.pass,
            Verification::KnillLaflamme(r) => r.pass,
        }
    }
}

impl fmt::Display for Verification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        match self {
            Verification::Stabilizers(r) => {
                let ok = r
                    .eigenvalues
                    .iter()
                    .filter(|e| (*e - 1.0).abs() <= STABILIZER_TOL)
                    .count();
                writeln!(f, "stabilizers: {ok}/{} at +1 [{verdict}]", r.eigenvalues.len())?;
                for (a, e) in r.eigenvalues.iter().enumerate() {
                    writeln!(f, "  K_{a}: {e:+.12}")?;
                }
                Ok(())
            }
            Verification::Ghz { fidelity } => {
                writeln!(f, "GHZ overlap fidelity: {fidelity:.12} [{verdict}]")
            }
            Verification::Ame(r) => {
                let ok = if r.pass { r.marginals_checked } else { 0 };
                writeln!(
                    f,
                    "AME marginals: {ok}/{} maximally mixed, worst deviation {:.3e} [{verdict}]",
                    r.marginals_checked, r.worst_deviation
                )
            }
            Verification::KnillLaflamme(r) => writeln!(
                f,
                "error-correction conditions over {} operators: worst violation {:.3e} [{verdict}]",
                r.operators_checked, r.worst_violation
            ),
        }
    }
}

impl TargetSpec {
    pub fn key(&self) -> &str {
        match self {
            TargetSpec::State { key, .. } | TargetSpec::Circuit { key, .. } => key,
        }
    }

    pub fn kind(&self) -> TargetKind {
        match self {
            TargetSpec::State { .. } => TargetKind::State,
            TargetSpec::Circuit { .. } => TargetKind::Circuit,
        }
    }

    pub fn num_qubits(&self) -> usize {
        match self {
            TargetSpec::State { state, .. } => state.num_sites(),
            TargetSpec::Circuit { unitary, .. } => unitary.rows().trailing_zeros() as usize,
        }
    }

    /// Runs the target's check on the registered object itself.
    pub fn verify(&self) -> Result<Verification> {
        match self {
            TargetSpec::State { state, .. } => self.verify_state(state),
            TargetSpec::Circuit { unitary, .. } => self.verify_unitary(unitary),
        }
    }

    /// Runs this target's state check on another state.
    pub fn verify_state(&self, psi: &QuantumState) -> Result<Verification> {
        let TargetSpec::State { state, check, .. } = self else {
            return Err(invalid("circuit targets verify unitaries"));
        };
        Ok(match check {
            StateCheck::Cluster(g) => Verification::Stabilizers(verify_cluster(psi, g)?),
            StateCheck::Ghz => Verification::Ghz {
                fidelity: crate::qcore::state_fidelity(psi, state)?,
            },
            StateCheck::Ame => Verification::Ame(verify_ame(psi)?),
        })
    }

    pub fn verify_unitary(&self, u: &ComplexMatrix) -> Result<Verification> {
        match self {
            TargetSpec::Circuit { .. } => Ok(Verification::KnillLaflamme(verify_encoder(u)?)),
            TargetSpec::State { .. } => Err(invalid("state targets verify states")),
        }
    }
}

mod pairs {
    /// All unordered pairs `(i, j)` with `i < j < n`, lexicographic.
    pub fn combinations(n: usize) -> impl Iterator<Item = (usize, usize)> {
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
    }
}
