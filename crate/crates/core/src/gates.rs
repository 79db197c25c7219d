// Copyright 2026 The rydqaoa Authors
// SPDX-License-Identifier: Apache-2.0

//! Chain generators for the layered ansatz, plus the small gate set used to
//! write down target circuits.
//!
//! Qubits are zero-indexed along an open chain. Site 0 is even. The even
//! pairs are `(0,1), (2,3), ...` and the odd pairs `(1,2), (3,4), ...`; there
//! is no wraparound.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::qcore::{ComplexMatrix, DiagonalOperator, C64, MAX_DIM, ONE, ZERO};

/// Largest chain whose qubit space fits in [`MAX_DIM`].
pub const MAX_QUBITS: usize = 9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainLayout {
    num_qubits: usize,
    even_pairs: Vec<(usize, usize)>,
    odd_pairs: Vec<(usize, usize)>,
}

impl ChainLayout {
    pub fn new(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(invalid(format!(
                "chain length must be in 1..={MAX_QUBITS}, got {num_qubits}"
            )));
        }
        debug_assert!(1usize << num_qubits <= MAX_DIM);
        let pairs = |start: usize| -> Vec<(usize, usize)> {
            (start..num_qubits.saturating_sub(1))
                .step_by(2)
                .map(|i| (i, i + 1))
                .collect()
        };
        Ok(Self {
            num_qubits,
            even_pairs: pairs(0),
            odd_pairs: pairs(1),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn even_pairs(&self) -> &[(usize, usize)] {
        &self.even_pairs
    }

    pub fn odd_pairs(&self) -> &[(usize, usize)] {
        &self.odd_pairs
    }

    pub fn even_sites(&self) -> Vec<usize> {
        (0..self.num_qubits).step_by(2).collect()
    }

    pub fn odd_sites(&self) -> Vec<usize> {
        (1..self.num_qubits).step_by(2).collect()
    }

    /// Sites acted on by a single-site Z generator, or the pairs of a ZZ one.
    pub fn sites_of(&self, kind: GeneratorKind) -> Vec<usize> {
        match kind {
            GeneratorKind::MixX => (0..self.num_qubits).collect(),
            GeneratorKind::ZEven => self.even_sites(),
            GeneratorKind::ZOdd => self.odd_sites(),
            GeneratorKind::ZzEven => self.even_pairs.iter().flat_map(|&(a, b)| [a, b]).collect(),
            GeneratorKind::ZzOdd => self.odd_pairs.iter().flat_map(|&(a, b)| [a, b]).collect(),
        }
    }

    /// `(-1)^bit` for qubit `q` of basis index `x`.
    #[inline]
    pub(crate) fn z_sign(&self, x: usize, q: usize) -> f64 {
        if (x >> (self.num_qubits - 1 - q)) & 1 == 1 {
            -1.0
        } else {
            1.0
        }
    }
}

/// The five generators of one ansatz layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeneratorKind {
    /// `sum_i X_i`
    MixX,
    /// `sum Z` over even sites
    ZEven,
    /// `sum Z` over odd sites
    ZOdd,
    /// `sum Z Z` over even-anchored pairs
    ZzEven,
    /// `sum Z Z` over odd-anchored pairs
    ZzOdd,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 5] = [
        GeneratorKind::MixX,
        GeneratorKind::ZEven,
        GeneratorKind::ZOdd,
        GeneratorKind::ZzEven,
        GeneratorKind::ZzOdd,
    ];

    /// Factor order inside one layer; the first entry acts first on the state.
    pub const APPLICATION_ORDER: [GeneratorKind; 5] = [
        GeneratorKind::ZzOdd,
        GeneratorKind::ZzEven,
        GeneratorKind::ZOdd,
        GeneratorKind::ZEven,
        GeneratorKind::MixX,
    ];

    pub fn is_diagonal(self) -> bool {
        self != GeneratorKind::MixX
    }
}

/// Diagonal of a Z-type generator; `None` for the mixer.
pub fn generator_diagonal(kind: GeneratorKind, layout: &ChainLayout) -> Option<DiagonalOperator> {
    let dim = layout.dim();
    let entry = |x: usize| -> f64 {
        match kind {
            GeneratorKind::MixX => unreachable!(),
            GeneratorKind::ZEven | GeneratorKind::ZOdd => layout
                .sites_of(kind)
                .iter()
                .map(|&q| layout.z_sign(x, q))
                .sum(),
            GeneratorKind::ZzEven => layout
                .even_pairs
                .iter()
                .map(|&(a, b)| layout.z_sign(x, a) * layout.z_sign(x, b))
                .sum(),
            GeneratorKind::ZzOdd => layout
                .odd_pairs
                .iter()
                .map(|&(a, b)| layout.z_sign(x, a) * layout.z_sign(x, b))
                .sum(),
        }
    };
    kind.is_diagonal()
        .then(|| DiagonalOperator::new((0..dim).map(entry).collect()))
}

/// Dense Hermitian matrix of a generator on the `2^n` space.
pub fn generator_matrix(kind: GeneratorKind, layout: &ChainLayout) -> ComplexMatrix {
    match generator_diagonal(kind, layout) {
        Some(d) => d.to_matrix(),
        None => {
            let n = layout.num_qubits;
            let dim = layout.dim();
            let mut m = ComplexMatrix::zeros(dim, dim);
            for x in 0..dim {
                for q in 0..n {
                    m[(x ^ (1 << (n - 1 - q)), x)] += ONE;
                }
            }
            m
        }
    }
}

/// `exp(-i angle H_kind)`.
///
/// Z-type kinds are returned as (dense-stored) diagonal matrices computed
/// entrywise; the mixer is the tensor power of `cos(a) I - i sin(a) X`.
pub fn layer_unitary(kind: GeneratorKind, angle: f64, layout: &ChainLayout) -> Result<ComplexMatrix> {
    if !angle.is_finite() {
        return Err(invalid("layer angle must be finite"));
    }
    if let Some(d) = generator_diagonal(kind, layout) {
        return Ok(d.evolution(angle));
    }
    let dim = layout.dim();
    let n = layout.num_qubits;
    let (c, s) = (C64::new(angle.cos(), 0.0), C64::new(0.0, -angle.sin()));
    let mut m = ComplexMatrix::zeros(dim, dim);
    for x in 0..dim {
        for y in 0..dim {
            let flips = (x ^ y).count_ones() as i32;
            m[(x, y)] = c.powi(n as i32 - flips) * s.powi(flips);
        }
    }
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SingleQubitGate {
    X,
    Y,
    Z,
    /// Hadamard.
    H,
    /// `diag(1, e^{i phi})`
    Phase(f64),
}

impl SingleQubitGate {
    pub fn matrix(self) -> [[C64; 2]; 2] {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            SingleQubitGate::X => [[ZERO, ONE], [ONE, ZERO]],
            SingleQubitGate::Y => [[ZERO, -i], [i, ZERO]],
            SingleQubitGate::Z => [[ONE, ZERO], [ZERO, -ONE]],
            SingleQubitGate::H => [[h, h], [h, -h]],
            SingleQubitGate::Phase(phi) => [[ONE, ZERO], [ZERO, C64::from_polar(1.0, phi)]],
        }
    }
}

/// Control polarity: a filled dot fires on `|1>`, a hollow one on `|0>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Control {
    Filled,
    Hollow,
}

impl Control {
    fn fires_on(self) -> usize {
        match self {
            Control::Filled => 1,
            Control::Hollow => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StandardGate {
    X,
    Y,
    Z,
    H,
    /// Controlled-Z; qubits `[control, target]`.
    Cz,
    /// `diag(1, 1, 1, e^{i phi})`; qubits `[control, target]`.
    ControlledPhase(f64),
    /// Single-qubit gate conditioned on every control; qubits are the
    /// controls in order followed by the target.
    Conditional {
        gate: SingleQubitGate,
        controls: Vec<Control>,
    },
}

impl StandardGate {
    fn parts(&self) -> (SingleQubitGate, Vec<Control>) {
        match self {
            StandardGate::X => (SingleQubitGate::X, vec![]),
            StandardGate::Y => (SingleQubitGate::Y, vec![]),
            StandardGate::Z => (SingleQubitGate::Z, vec![]),
            StandardGate::H => (SingleQubitGate::H, vec![]),
            StandardGate::Cz => (SingleQubitGate::Z, vec![Control::Filled]),
            StandardGate::ControlledPhase(phi) => {
                (SingleQubitGate::Phase(*phi), vec![Control::Filled])
            }
            StandardGate::Conditional { gate, controls } => (*gate, controls.clone()),
        }
    }
}

/// Embeds a gate into the `2^n` space by identity padding.
pub fn standard_gate(gate: &StandardGate, qubits: &[usize], n: usize) -> Result<ComplexMatrix> {
    if n == 0 || n > MAX_QUBITS {
        return Err(invalid(format!("qubit count must be in 1..={MAX_QUBITS}")));
    }
    let (base, controls) = gate.parts();
    if qubits.len() != controls.len() + 1 {
        return Err(Error::DimensionMismatch {
            expected: controls.len() + 1,
            found: qubits.len(),
        });
    }
    if let Some(&q) = qubits.iter().find(|&&q| q >= n) {
        return Err(invalid(format!("qubit {q} out of range for {n} qubits")));
    }
    for (i, q) in qubits.iter().enumerate() {
        if qubits[..i].contains(q) {
            return Err(invalid(format!("qubit {q} repeated in gate operands")));
        }
    }
    let target = *qubits.last().expect("at least the target");
    let bit = |x: usize, q: usize| (x >> (n - 1 - q)) & 1;
    let g = base.matrix();
    let dim = 1usize << n;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for x in 0..dim {
        let fires = controls
            .iter()
            .zip(qubits)
            .all(|(c, &q)| bit(x, q) == c.fires_on());
        if !fires {
            m[(x, x)] = ONE;
            continue;
        }
        let b = bit(x, target);
        let mask = 1 << (n - 1 - target);
        for (out, row) in g.iter().enumerate() {
            let y = (x & !mask) | (out * mask);
            m[(y, x)] = row[b];
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::testing::pauli;
    use crate::qcore::{operator_fidelity, tensor_product, unitary_evolution, QuantumState, ORACLE_TOL};
    use std::f64::consts::{FRAC_PI_2, PI};

    /// Builds `P_site` on n qubits by Kronecker products of 2x2 Paulis.
    fn pauli_on(n: usize, ops: &[(usize, char)]) -> ComplexMatrix {
        let mut m = ComplexMatrix::identity(1);
        for q in 0..n {
            let p = ops.iter().find(|(s, _)| *s == q).map_or('I', |(_, p)| *p);
            m = tensor_product(&m, &pauli(p)).unwrap();
        }
        m
    }

    fn sum(ms: Vec<ComplexMatrix>, dim: usize) -> ComplexMatrix {
        ms.iter().fold(ComplexMatrix::zeros(dim, dim), |acc, m| &acc + m)
    }

    fn kronecker_generator(kind: GeneratorKind, layout: &ChainLayout) -> ComplexMatrix {
        let n = layout.num_qubits();
        let terms = match kind {
            GeneratorKind::MixX => (0..n).map(|q| pauli_on(n, &[(q, 'X')])).collect(),
            GeneratorKind::ZEven | GeneratorKind::ZOdd => layout
                .sites_of(kind)
                .into_iter()
                .map(|q| pauli_on(n, &[(q, 'Z')]))
                .collect(),
            GeneratorKind::ZzEven => layout
                .even_pairs()
                .iter()
                .map(|&(a, b)| pauli_on(n, &[(a, 'Z'), (b, 'Z')]))
                .collect(),
            GeneratorKind::ZzOdd => layout
                .odd_pairs()
                .iter()
                .map(|&(a, b)| pauli_on(n, &[(a, 'Z'), (b, 'Z')]))
                .collect(),
        };
        sum(terms, layout.dim())
    }

    #[test]
    fn layout_pairs_are_open_chain() {
        let l = ChainLayout::new(5).unwrap();
        assert_eq!(l.even_pairs(), &[(0, 1), (2, 3)]);
        assert_eq!(l.odd_pairs(), &[(1, 2), (3, 4)]);
        let l = ChainLayout::new(1).unwrap();
        assert!(l.even_pairs().is_empty() && l.odd_pairs().is_empty());
        assert_eq!(ChainLayout::new(6).unwrap().odd_pairs(), &[(1, 2), (3, 4)]);
        assert!(ChainLayout::new(0).is_err());
        assert!(ChainLayout::new(10).is_err());
    }

    #[test]
    fn generators_match_kronecker_construction() {
        for n in 1..=6 {
            let l = ChainLayout::new(n).unwrap();
            for kind in GeneratorKind::ALL {
                let g = generator_matrix(kind, &l);
                assert_eq!(g.max_abs_diff(&kronecker_generator(kind, &l)), 0.0, "{kind:?} n={n}");
                assert!(g.is_hermitian(0.0));
            }
        }
    }

    #[test]
    fn mixer_examples() {
        let l = ChainLayout::new(2).unwrap();
        let hx = generator_matrix(GeneratorKind::MixX, &l);
        let out = hx.apply(QuantumState::basis(2, 2, 0).unwrap().amplitudes());
        assert_eq!(out, vec![ZERO, ONE, ONE, ZERO]);
        let plus = QuantumState::plus(2).unwrap();
        let out = hx.apply(plus.amplitudes());
        for (o, p) in out.iter().zip(plus.amplitudes()) {
            assert!((o - p * 2.0).norm() < 1e-15);
        }
    }

    #[test]
    fn zz_diagonal_examples() {
        let l4 = ChainLayout::new(4).unwrap();
        let d = generator_diagonal(GeneratorKind::ZzEven, &l4).unwrap();
        assert_eq!(d.entries()[0], 2.0);

        // brute force over all 32 bitstrings of the n=5 odd-pair sum
        let l5 = ChainLayout::new(5).unwrap();
        let d = generator_diagonal(GeneratorKind::ZzOdd, &l5).unwrap();
        for x in 0..32usize {
            let b = |q: usize| if (x >> (4 - q)) & 1 == 1 { -1.0 } else { 1.0 };
            assert_eq!(d.entries()[x], b(1) * b(2) + b(3) * b(4));
        }
        assert_eq!(d.entries()[0b01100], 2.0);
    }

    #[test]
    fn z_type_generators_commute() {
        let l = ChainLayout::new(5).unwrap();
        let zs: Vec<_> = GeneratorKind::ALL[1..]
            .iter()
            .map(|&k| generator_matrix(k, &l))
            .collect();
        for a in &zs {
            for b in &zs {
                assert!(a.commutator(b).max_abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn layer_unitary_examples() {
        let l = ChainLayout::new(3).unwrap();
        for kind in GeneratorKind::ALL {
            let u = layer_unitary(kind, 0.0, &l).unwrap();
            assert!(u.max_abs_diff(&ComplexMatrix::identity(8)) < 1e-15);
        }
        let l1 = ChainLayout::new(1).unwrap();
        let u = layer_unitary(GeneratorKind::MixX, FRAC_PI_2, &l1).unwrap();
        assert!(u.max_abs_diff(&pauli('X').scale(C64::new(0.0, -1.0))) < 1e-15);

        let l2 = ChainLayout::new(2).unwrap();
        let g = 0.83;
        let u = layer_unitary(GeneratorKind::ZzEven, g, &l2).unwrap();
        let e = |s: f64| C64::from_polar(1.0, s * g);
        assert_eq!(u, ComplexMatrix::from_diagonal(&[e(-1.0), e(1.0), e(1.0), e(-1.0)]));
        assert!(layer_unitary(GeneratorKind::MixX, f64::NAN, &l2).is_err());
    }

    #[test]
    fn layer_unitary_matches_dense_exponential() {
        let l = ChainLayout::new(4).unwrap();
        for kind in GeneratorKind::ALL {
            let dense = unitary_evolution(&generator_matrix(kind, &l), 0.37).unwrap();
            let fast = layer_unitary(kind, 0.37, &l).unwrap();
            assert!(dense.max_abs_diff(&fast) < ORACLE_TOL, "{kind:?}");
        }
    }

    #[test]
    fn layer_composition_and_periodicity() {
        let l = ChainLayout::new(4).unwrap();
        for kind in GeneratorKind::ALL {
            for &(a, b) in &[(0.3, -1.1), (2.0, 2.5), (-3.0, 0.01)] {
                let ua = layer_unitary(kind, a, &l).unwrap();
                let ub = layer_unitary(kind, b, &l).unwrap();
                let uab = layer_unitary(kind, a + b, &l).unwrap();
                assert!((&ua * &ub).max_abs_diff(&uab) < ORACLE_TOL);
                let shifted = layer_unitary(kind, a + 2.0 * PI, &l).unwrap();
                assert!((operator_fidelity(&ua, &shifted).unwrap() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn standard_gate_examples() {
        let cz = standard_gate(&StandardGate::Cz, &[0, 1], 2).unwrap();
        assert_eq!(cz, ComplexMatrix::from_real_diagonal(&[1.0, 1.0, 1.0, -1.0]));

        let h = standard_gate(&StandardGate::H, &[0], 1).unwrap();
        let out = h.apply(&[ONE, ZERO]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out[0].re - s).abs() < 1e-15 && (out[1].re - s).abs() < 1e-15);

        let hollow_x = StandardGate::Conditional {
            gate: SingleQubitGate::X,
            controls: vec![Control::Hollow],
        };
        let m = standard_gate(&hollow_x, &[0, 1], 2).unwrap();
        assert_eq!(m.apply(&[ONE, ZERO, ZERO, ZERO]), vec![ZERO, ONE, ZERO, ZERO]);
        // control |1> leaves the target alone
        assert_eq!(m.apply(&[ZERO, ZERO, ONE, ZERO]), vec![ZERO, ZERO, ONE, ZERO]);

        let cp = standard_gate(&StandardGate::ControlledPhase(0.4), &[1, 0], 2).unwrap();
        assert!((cp[(3, 3)] - C64::from_polar(1.0, 0.4)).norm() < 1e-15);
        assert_eq!(cp[(2, 2)], ONE);
    }

    #[test]
    fn standard_gate_rejects_bad_operands() {
        assert!(standard_gate(&StandardGate::Cz, &[1, 1], 2).is_err());
        assert!(standard_gate(&StandardGate::Cz, &[0], 2).is_err());
        assert!(standard_gate(&StandardGate::X, &[3], 2).is_err());
    }

    #[test]
    fn single_site_embedding_matches_kronecker() {
        for n in 1..=5 {
            for q in 0..n {
                for (g, p) in [(StandardGate::X, 'X'), (StandardGate::Z, 'Z'), (StandardGate::Y, 'Y')] {
                    let m = standard_gate(&g, &[q], n).unwrap();
                    assert!(m.max_abs_diff(&pauli_on(n, &[(q, p)])) <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn multi_controlled_gates_are_unitary() {
        let g = StandardGate::Conditional {
            gate: SingleQubitGate::H,
            controls: vec![Control::Hollow, Control::Filled, Control::Hollow],
        };
        let m = standard_gate(&g, &[4, 0, 2, 1], 5).unwrap();
        assert!(m.is_unitary(1e-12));
    }
}
