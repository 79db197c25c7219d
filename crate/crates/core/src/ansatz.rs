// Copyright 2026 The rydqaoa Authors
// SPDX-License-Identifier: Apache-2.0

//! Layered ansatz schedules and their ideal gate-model evaluation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gates::{generator_diagonal, layer_unitary, ChainLayout, GeneratorKind};
use crate::qcore::{ComplexMatrix, QuantumState, C64};
use crate::targets::TargetKind;

/// Parameters per layer.
pub const PARAMS_PER_LAYER: usize = 5;

/// Maps `x` into `[-π, π)`. Values already in range are returned unchanged.
pub fn wrap_angle(x: f64) -> f64 {
    if (-PI..PI).contains(&x) {
        return x;
    }
    let two_pi = 2.0 * PI;
    let mut y = x - two_pi * ((x + PI) / two_pi).floor();
    // rounding can land exactly on the excluded endpoint
    if y >= PI {
        y -= two_pi;
    }
    if y < -PI {
        y = -PI;
    }
    y
}

/// Rabi angles of one layer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LayerAngles {
    pub alpha: f64,
    pub beta_even: f64,
    pub beta_odd: f64,
    pub gamma_even: f64,
    pub gamma_odd: f64,
}

impl LayerAngles {
    /// `(alpha, beta_even, beta_odd, gamma_even, gamma_odd)`.
    pub fn to_array(self) -> [f64; PARAMS_PER_LAYER] {
        [
            self.alpha,
            self.beta_even,
            self.beta_odd,
            self.gamma_even,
            self.gamma_odd,
        ]
    }

    pub fn from_array(a: [f64; PARAMS_PER_LAYER]) -> Self {
        Self {
            alpha: a[0],
            beta_even: a[1],
            beta_odd: a[2],
            gamma_even: a[3],
            gamma_odd: a[4],
        }
    }

    pub fn angle(&self, kind: GeneratorKind) -> f64 {
        match kind {
            GeneratorKind::MixX => self.alpha,
            GeneratorKind::ZEven => self.beta_even,
            GeneratorKind::ZOdd => self.beta_odd,
            GeneratorKind::ZzEven => self.gamma_even,
            GeneratorKind::ZzOdd => self.gamma_odd,
        }
    }

    fn wrapped(self) -> Self {
        Self::from_array(self.to_array().map(wrap_angle))
    }
}

/// A depth-`p` schedule; angles are wrapped into `[-π, π)` on construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<LayerAngles>", into = "Vec<LayerAngles>")]
pub struct QaoaSchedule {
    layers: Vec<LayerAngles>,
}

impl TryFrom<Vec<LayerAngles>> for QaoaSchedule {
    type Error = Error;
    fn try_from(layers: Vec<LayerAngles>) -> Result<Self> {
        Self::new(layers)
    }
}

impl From<QaoaSchedule> for Vec<LayerAngles> {
    fn from(s: QaoaSchedule) -> Self {
        s.layers
    }
}

impl QaoaSchedule {
    pub fn new(layers: Vec<LayerAngles>) -> Result<Self> {
        if layers.is_empty() {
            return Err(invalid("schedule depth must be at least 1"));
        }
        if layers
            .iter()
            .flat_map(|l| l.to_array())
            .any(|a| !a.is_finite())
        {
            return Err(invalid("schedule angles must be finite"));
        }
        Ok(Self {
            layers: layers.into_iter().map(LayerAngles::wrapped).collect(),
        })
    }

    pub fn zero(depth: usize) -> Result<Self> {
        Self::new(vec![LayerAngles::default(); depth])
    }

    /// Layer-major flat layout, five angles per layer.
    pub fn from_flat(params: &[f64]) -> Result<Self> {
        if params.is_empty() || !params.len().is_multiple_of(PARAMS_PER_LAYER) {
            return Err(invalid(format!(
                "parameter count {} is not a positive multiple of {PARAMS_PER_LAYER}",
                params.len()
            )));
        }
        Self::new(
            params
                .chunks_exact(PARAMS_PER_LAYER)
                .map(|c| LayerAngles::from_array([c[0], c[1], c[2], c[3], c[4]]))
                .collect(),
        )
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.to_array()).collect()
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn num_params(&self) -> usize {
        PARAMS_PER_LAYER * self.layers.len()
    }

    pub fn layers(&self) -> &[LayerAngles] {
        &self.layers
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &Self) -> Self {
        let mut layers = self.layers.clone();
        layers.extend_from_slice(&other.layers);
        Self { layers }
    }
}

/// Fast ideal-model evaluator for a fixed chain length.
///
/// The four diagonal factors of a layer are merged into one phase per basis
/// state; the mixer factorizes into single-qubit rotations.
#[derive(Clone, Debug)]
pub struct IdealSimulator {
    layout: ChainLayout,
    z_even: Vec<f64>,
    z_odd: Vec<f64>,
    zz_even: Vec<f64>,
    zz_odd: Vec<f64>,
}

impl IdealSimulator {
    pub fn new(layout: ChainLayout) -> Self {
        let diag = |k| {
            generator_diagonal(k, &layout)
                .expect("Z-type generator")
                .entries()
                .to_vec()
        };
        Self {
            z_even: diag(GeneratorKind::ZEven),
            z_odd: diag(GeneratorKind::ZOdd),
            zz_even: diag(GeneratorKind::ZzEven),
            zz_odd: diag(GeneratorKind::ZzOdd),
            layout,
        }
    }

    pub fn layout(&self) -> &ChainLayout {
        &self.layout
    }

    /// Applies one full layer in place.
    pub fn apply_layer(&self, layer: &LayerAngles, v: &mut [C64]) {
        for (x, amp) in v.iter_mut().enumerate() {
            let e = layer.gamma_odd * self.zz_odd[x]
                + layer.gamma_even * self.zz_even[x]
                + layer.beta_odd * self.z_odd[x]
                + layer.beta_even * self.z_even[x];
            if e != 0.0 {
                *amp *= C64::from_polar(1.0, -e);
            }
        }
        self.apply_mixer(layer.alpha, v);
    }

    /// Applies a single factor `exp(-i angle H_kind)` in place.
    pub fn apply_factor(&self, kind: GeneratorKind, angle: f64, v: &mut [C64]) {
        let diag = match kind {
            GeneratorKind::MixX => return self.apply_mixer(angle, v),
            GeneratorKind::ZEven => &self.z_even,
            GeneratorKind::ZOdd => &self.z_odd,
            GeneratorKind::ZzEven => &self.zz_even,
            GeneratorKind::ZzOdd => &self.zz_odd,
        };
        for (amp, d) in v.iter_mut().zip(diag) {
            *amp *= C64::from_polar(1.0, -angle * d);
        }
    }

    fn apply_mixer(&self, alpha: f64, v: &mut [C64]) {
        if alpha == 0.0 {
            return;
        }
        let c = alpha.cos();
        let s = C64::new(0.0, -alpha.sin());
        let n = self.layout.num_qubits();
        for q in 0..n {
            let m = 1usize << (n - 1 - q);
            for x in 0..v.len() {
                if x & m == 0 {
                    let (a, b) = (v[x], v[x | m]);
                    v[x] = a * c + b * s;
                    v[x | m] = b * c + a * s;
                }
            }
        }
    }

    pub fn apply(&self, s: &QaoaSchedule, v: &mut [C64]) {
        for layer in s.layers() {
            self.apply_layer(layer, v);
        }
    }

    /// Full unitary, built column by column.
    pub fn unitary(&self, s: &QaoaSchedule) -> ComplexMatrix {
        let dim = self.layout.dim();
        let cols: Vec<Vec<C64>> = (0..dim)
            .map(|j| {
                let mut e = vec![C64::new(0.0, 0.0); dim];
                e[j] = C64::new(1.0, 0.0);
                self.apply(s, &mut e);
                e
            })
            .collect();
        ComplexMatrix::from_columns(&cols).expect("square by construction")
    }
}

fn check_state(layout: &ChainLayout, psi: &QuantumState) -> Result<()> {
    if psi.levels() != 2 || psi.num_sites() != layout.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: layout.dim(),
            found: psi.dim(),
        });
    }
    Ok(())
}

/// Ideal-model evolution of `psi0` under the schedule.
pub fn apply_schedule(
    s: &QaoaSchedule,
    layout: &ChainLayout,
    psi0: &QuantumState,
) -> Result<QuantumState> {
    check_state(layout, psi0)?;
    let sim = IdealSimulator::new(layout.clone());
    let mut v = psi0.amplitudes().to_vec();
    sim.apply(s, &mut v);
    Ok(QuantumState::from_raw(layout.num_qubits(), 2, v))
}

/// Dense product of the per-factor layer unitaries.
pub fn schedule_unitary(s: &QaoaSchedule, layout: &ChainLayout) -> ComplexMatrix {
    let mut u = ComplexMatrix::identity(layout.dim());
    for layer in s.layers() {
        for kind in GeneratorKind::APPLICATION_ORDER {
            let angle = layer.angle(kind);
            if angle != 0.0 {
                let f = layer_unitary(kind, angle, layout).expect("angles are finite");
                u = &f * &u;
            }
        }
    }
    u
}

/// `|+>^n` for state targets; circuit targets have no initial state.
pub fn default_initial_state(n: usize, kind: TargetKind) -> Result<Option<QuantumState>> {
    match kind {
        TargetKind::State => QuantumState::plus(n).map(Some),
        TargetKind::Circuit => Ok(None),
    }
}
