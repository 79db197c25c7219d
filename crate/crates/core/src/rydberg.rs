// Copyright 2026 The rydqaoa Authors
// SPDX-License-Identifier: Apache-2.0

//! Three-level Rydberg chain: blockade Hamiltonian, square pulses, and the
//! compiler from ansatz schedules to pulse sequences.
//!
//! Levels per atom are `g = 0`, `e = 1`, `r = 2`; the logical qubit lives on
//! `{g, e}`. During a pulse the addressed atoms see
//! `(Ω/2)(|lo><hi| + |hi><lo|) - Δ|hi><hi|` on the driven transition
//! (`lo, hi = g, e` or `e, r`), and every pair interacts through
//! `V_ij n_i n_j` with `n = |r><r|` and `V_ij = v_nn / |i - j|^6`.
//!
//! Phase conventions of the compiled blocks (infinite-blockade limit):
//!
//! * a detuned ER 2π-pulse maps the logical qubit to `diag(1, -e^{-iβ})`,
//!   so a Z layer angle `θ` is realised with `β = π - 2θ`;
//! * the three-pulse block realises `diag(1, -e^{-iβ}, -1, -1)` on
//!   (control, target), which has the entangling invariant of
//!   `exp(-iγ Z⊗Z)` when `β = π - 4γ`. The remaining single-qubit phases
//!   differ from the ideal layer, so physical schedules are refined on
//!   the physical model rather than reused verbatim;
//! * the global GE pulse of duration `2α/Ω_b` is `exp(-iα X)` per atom.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ansatz::{wrap_angle, QaoaSchedule};
use crate::error::{invalid, Error, Result};
use crate::gates::{ChainLayout, GeneratorKind};
use crate::qcore::{unitary_evolution, ComplexMatrix, QuantumState, C64, MAX_DIM, ONE, ZERO};

/// Largest chain simulated in the three-level space (`3^6 = 729`).
pub const MAX_ATOMS: usize = 6;
const TWO_PI: f64 = 2.0 * PI;
const MHZ: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeviceConfig {
    pub num_atoms: usize,
    /// Micrometres; metadata only, the physics uses `v_nn`.
    pub spacing_um: f64,
    /// Nearest-neighbour interaction, rad/s.
    pub v_nn: f64,
    /// `g <-> e` Rabi frequency, rad/s.
    pub omega_b: f64,
    /// `e <-> r` Rabi frequency, rad/s.
    pub omega_r: f64,
    /// Reduced `e <-> r` drive for the target pulse of an entangling block.
    pub omega_r_weak: f64,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self::new(5)
    }
}

impl DeviceConfig {
    pub fn new(num_atoms: usize) -> Self {
        let v_nn = TWO_PI * 24.0 * MHZ;
        Self {
            num_atoms,
            spacing_um: 5.24,
            v_nn,
            omega_b: TWO_PI * 60.0 * MHZ,
            omega_r: TWO_PI * 36.0 * MHZ,
            omega_r_weak: v_nn / 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_atoms == 0 || self.num_atoms > MAX_ATOMS {
            return Err(invalid(format!(
                "num_atoms must be in 1..={MAX_ATOMS}, got {}",
                self.num_atoms
            )));
        }
        for (name, v) in [
            ("v_nn", self.v_nn),
            ("omega_b", self.omega_b),
            ("omega_r", self.omega_r),
            ("omega_r_weak", self.omega_r_weak),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be positive and finite")));
            }
        }
        Ok(())
    }

    /// `v_nn / |i - j|^6`.
    pub fn interaction(&self, i: usize, j: usize) -> f64 {
        let d = i.abs_diff(j) as f64;
        self.v_nn / d.powi(6)
    }

    pub fn dim(&self) -> usize {
        3usize.pow(self.num_atoms as u32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Transition {
    /// `|g> <-> |e>`
    GE,
    /// `|e> <-> |r>`
    ER,
}

impl Transition {
    fn levels(self) -> (usize, usize) {
        match self {
            Transition::GE => (0, 1),
            Transition::ER => (1, 2),
        }
    }
}

/// A square pulse. Frequencies in rad/s, duration in seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    atoms: Vec<usize>,
    transition: Transition,
    rabi: f64,
    detuning: f64,
    duration: f64,
}

impl Pulse {
    /// Atom indices are sorted and deduplicated.
    pub fn new(
        mut atoms: Vec<usize>,
        transition: Transition,
        rabi: f64,
        detuning: f64,
        duration: f64,
    ) -> Result<Self> {
        atoms.sort_unstable();
        atoms.dedup();
        if atoms.is_empty() {
            return Err(invalid("a pulse must address at least one atom"));
        }
        if !(rabi.is_finite() && rabi >= 0.0) || !detuning.is_finite() {
            return Err(invalid("Rabi frequency must be non-negative and detuning finite"));
        }
        if !(duration.is_finite() && duration > 0.0) {
            return Err(invalid("pulse duration must be positive"));
        }
        Ok(Self {
            atoms,
            transition,
            rabi,
            detuning,
            duration,
        })
    }

    pub fn atoms(&self) -> &[usize] {
        &self.atoms
    }

    pub fn transition(&self) -> Transition {
        self.transition
    }

    pub fn rabi(&self) -> f64 {
        self.rabi
    }

    pub fn detuning(&self) -> f64 {
        self.detuning
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }
}

/// Sequentially executed pulses plus provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pulses: Vec<Pulse>,
    /// SHA-256 of the source schedule's flat angles (little-endian bits).
    source_hash: String,
    device: DeviceConfig,
}

impl PulseSequence {
    /// Hand-built sequence; its source hash is empty.
    pub fn from_pulses(pulses: Vec<Pulse>, device: DeviceConfig) -> Result<Self> {
        device.validate()?;
        for p in &pulses {
            check_pulse(&device, p)?;
        }
        Ok(Self {
            pulses,
            source_hash: String::new(),
            device,
        })
    }

    pub fn pulses(&self) -> &[Pulse] {
        &self.pulses
    }

    pub fn source_hash(&self) -> &str {
        &self.source_hash
    }

    pub fn device(&self) -> &DeviceConfig {
        &self.device
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    pub fn total_duration(&self) -> f64 {
        self.pulses.iter().map(|p| p.duration).sum()
    }

    /// Machine-readable form with frequencies in Hz (`ω / 2π`).
    pub fn export(&self) -> PulseExport {
        PulseExport {
            format_version: PULSE_FORMAT_VERSION,
            source_hash: self.source_hash.clone(),
            device: self.device.clone(),
            total_duration_s: self.total_duration(),
            pulses: self
                .pulses
                .iter()
                .map(|p| ExportedPulse {
                    atoms: p.atoms.clone(),
                    transition: p.transition,
                    rabi_hz: p.rabi / TWO_PI,
                    detuning_hz: p.detuning / TWO_PI,
                    duration_s: p.duration,
                })
                .collect(),
        }
    }

    /// Piecewise-constant drive profile: one point at the start and one at
    /// the end of every pulse.
    pub fn staircase(&self) -> Vec<StaircasePoint> {
        let mut t = 0.0;
        let mut out = Vec::with_capacity(2 * self.pulses.len());
        for (index, p) in self.pulses.iter().enumerate() {
            let point = |time_s| StaircasePoint {
                time_s,
                pulse: index,
                transition: p.transition,
                atoms: p
                    .atoms
                    .iter()
                    .map(usize::to_string)
                    .collect::<Vec<_>>()
                    .join(" "),
                rabi_hz: p.rabi / TWO_PI,
                detuning_hz: p.detuning / TWO_PI,
            };
            out.push(point(t));
            t += p.duration;
            out.push(point(t));
        }
        out
    }

    /// Writes [`staircase`](Self::staircase) as CSV with a header row.
    pub fn write_staircase_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        if self.pulses.is_empty() {
            wr.write_record(["time_s", "pulse", "transition", "atoms", "rabi_hz", "detuning_hz"])?;
        }
        for p in self.staircase() {
            wr.serialize(p)?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub const PULSE_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExportedPulse {
    pub atoms: Vec<usize>,
    pub transition: Transition,
    pub rabi_hz: f64,
    pub detuning_hz: f64,
    pub duration_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseExport {
    pub format_version: u32,
    pub source_hash: String,
    pub device: DeviceConfig,
    pub total_duration_s: f64,
    pub pulses: Vec<ExportedPulse>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StaircasePoint {
    pub time_s: f64,
    pub pulse: usize,
    pub transition: Transition,
    pub atoms: String,
    pub rabi_hz: f64,
    pub detuning_hz: f64,
}

/// Closed-form detuned two-level propagator in the rotating frame,
/// with `Ω' = sqrt(Ω² + Δ²)`.
pub fn two_level_propagator(omega: f64, delta: f64, t: f64) -> ComplexMatrix {
    let op = omega.hypot(delta);
    let half = op * t / 2.0;
    let (s, c) = half.sin_cos();
    let (ds, os) = if op == 0.0 {
        (0.0, 0.0)
    } else {
        (delta / op * s, omega / op * s)
    };
    let ep = C64::from_polar(1.0, delta * t / 2.0);
    let em = ep.conj();
    let i = C64::new(0.0, 1.0);
    let m = [
        ep * C64::new(c, -ds),
        i * ep * os,
        i * em * os,
        em * C64::new(c, ds),
    ];
    ComplexMatrix::new(2, 2, m.to_vec()).expect("2x2")
}

/// Detuning that turns a `2π/Ω'` pulse into `-exp(-iβZ)`.
pub fn detuning_for_phase(beta: f64, omega: f64) -> Result<f64> {
    if !beta.is_finite() || beta.abs() >= PI {
        return Err(Error::AngleOutOfRange { value: beta });
    }
    Ok(-beta * omega / (PI * PI - beta * beta).sqrt())
}

/// Lab-frame `exp(-i t [(Ω/2)σx - Δ|1><1|])` as `[[a, b], [c, d]]`.
fn driven_two_level(omega: f64, delta: f64, t: f64) -> [C64; 4] {
    let op = omega.hypot(delta);
    let (s, c) = (op * t / 2.0).sin_cos();
    let (nx, nz) = if op == 0.0 {
        (0.0, 0.0)
    } else {
        (omega / op, delta / op)
    };
    let g = C64::from_polar(1.0, delta * t / 2.0);
    [
        g * C64::new(c, -s * nz),
        g * C64::new(0.0, -s * nx),
        g * C64::new(0.0, -s * nx),
        g * C64::new(c, s * nz),
    ]
}

fn check_pulse(device: &DeviceConfig, p: &Pulse) -> Result<()> {
    if let Some(&a) = p.atoms.iter().find(|&&a| a >= device.num_atoms) {
        return Err(invalid(format!(
            "pulse addresses atom {a} on a {}-atom chain",
            device.num_atoms
        )));
    }
    Ok(())
}

fn place_values(n: usize) -> Vec<usize> {
    (0..n).map(|i| 3usize.pow((n - 1 - i) as u32)).collect()
}

#[inline]
fn digit(x: usize, w: usize) -> usize {
    (x / w) % 3
}

/// Dense `3^n` Hamiltonian during `active`.
pub fn hamiltonian_snapshot(device: &DeviceConfig, active: &Pulse) -> Result<ComplexMatrix> {
    device.validate()?;
    check_pulse(device, active)?;
    let n = device.num_atoms;
    let dim = device.dim();
    let w = place_values(n);
    let (_, hi) = active.transition.levels();
    let mut h = ComplexMatrix::zeros(dim, dim);
    let half = C64::new(active.rabi / 2.0, 0.0);
    for x in 0..dim {
        let mut e = rydberg_energy(device, &w, x);
        for &a in &active.atoms {
            let d = digit(x, w[a]);
            if d == hi {
                e -= active.detuning;
                h[(x - w[a], x)] += half;
                h[(x, x - w[a])] += half;
            }
        }
        h[(x, x)] += C64::new(e, 0.0);
    }
    Ok(h)
}

/// Exact evolution under a sequence of square pulses.
///
/// Each pulse leaves every basis state inside a small invariant block:
/// non-addressed atoms, and addressed atoms outside the driven transition,
/// are frozen. GE blocks factor into single-atom rotations times a constant
/// interaction phase; ER blocks (at most `2^k` states for `k` addressed
/// atoms) are exponentiated directly, with one exponential per distinct
/// frozen configuration.
pub fn evolve_pulses(
    pulses: &[Pulse],
    device: &DeviceConfig,
    psi0: &QuantumState,
) -> Result<QuantumState> {
    device.validate()?;
    if psi0.levels() != 3 || psi0.num_sites() != device.num_atoms {
        return Err(Error::DimensionMismatch {
            expected: device.dim(),
            found: psi0.dim(),
        });
    }
    let mut amps = psi0.amplitudes().to_vec();
    evolve_amplitudes(pulses, device, &mut amps)?;
    Ok(QuantumState::from_raw(device.num_atoms, 3, amps))
}

fn evolve_amplitudes(pulses: &[Pulse], device: &DeviceConfig, amps: &mut [C64]) -> Result<()> {
    let n = device.num_atoms;
    let w = place_values(n);
    for p in pulses {
        check_pulse(device, p)?;
        match p.transition {
            Transition::GE => apply_ge(p, device, &w, amps),
            Transition::ER => apply_er(p, device, &w, amps)?,
        }
    }
    Ok(())
}

fn rydberg_energy(device: &DeviceConfig, w: &[usize], x: usize) -> f64 {
    let n = w.len();
    let excited = |i: &usize| digit(x, w[*i]) == 2;
    let mut e = 0.0;
    for i in (0..n).filter(excited) {
        for j in (i + 1..n).filter(excited) {
            e += device.interaction(i, j);
        }
    }
    e
}

fn apply_ge(p: &Pulse, device: &DeviceConfig, w: &[usize], amps: &mut [C64]) {
    for (x, a) in amps.iter_mut().enumerate() {
        let e = rydberg_energy(device, w, x);
        if e != 0.0 {
            *a *= C64::from_polar(1.0, -e * p.duration);
        }
    }
    let [u00, u01, u10, u11] = driven_two_level(p.rabi, p.detuning, p.duration);
    for &site in &p.atoms {
        let ws = w[site];
        for x in 0..amps.len() {
            if digit(x, ws) == 0 {
                let (a, b) = (amps[x], amps[x + ws]);
                amps[x] = u00 * a + u01 * b;
                amps[x + ws] = u10 * a + u11 * b;
            }
        }
    }
}

fn apply_er(p: &Pulse, device: &DeviceConfig, w: &[usize], amps: &mut [C64]) -> Result<()> {
    let n = w.len();
    let mut cache: HashMap<(u32, u32), ComplexMatrix> = HashMap::new();
    let mut block = Vec::with_capacity(1 << p.atoms.len());
    for x in 0..amps.len() {
        // block representative: every addressed atom in g or e
        if p.atoms.iter().any(|&a| digit(x, w[a]) == 2) {
            continue;
        }
        let active: Vec<usize> = p
            .atoms
            .iter()
            .copied()
            .filter(|&a| digit(x, w[a]) == 1)
            .collect();
        let active_mask = active.iter().fold(0u32, |m, &a| m | 1 << a);
        let frozen_r = (0..n)
            .filter(|&i| digit(x, w[i]) == 2)
            .fold(0u32, |m, i| m | 1 << i);
        let u = match cache.entry((active_mask, frozen_r)) {
            std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(er_block(p, device, &active, frozen_r, n)?)
            }
        };
        let m = active.len();
        let index = |s: usize| -> usize {
            (0..m)
                .filter(|k| s >> (m - 1 - k) & 1 == 1)
                .map(|k| w[active[k]])
                .sum::<usize>()
                + x
        };
        block.clear();
        block.extend((0..1usize << m).map(|s| amps[index(s)]));
        let out = u.apply(&block);
        for (s, v) in out.into_iter().enumerate() {
            amps[index(s)] = v;
        }
    }
    Ok(())
}

/// Block propagator for the addressed atoms currently in `{e, r}`, with
/// the other Rydberg atoms held fixed.
fn er_block(
    p: &Pulse,
    device: &DeviceConfig,
    active: &[usize],
    frozen_r: u32,
    n: usize,
) -> Result<ComplexMatrix> {
    let m = active.len();
    let dim = 1usize << m;
    let frozen: Vec<usize> = (0..n).filter(|&i| frozen_r >> i & 1 == 1).collect();
    let base: f64 = frozen
        .iter()
        .enumerate()
        .flat_map(|(k, &i)| frozen[k + 1..].iter().map(move |&j| (i, j)))
        .map(|(i, j)| device.interaction(i, j))
        .sum();
    let mut h = ComplexMatrix::zeros(dim, dim);
    let half = C64::new(p.rabi / 2.0, 0.0);
    for s in 0..dim {
        let bit = |k: usize| s >> (m - 1 - k) & 1 == 1;
        let mut e = base;
        for k in 0..m {
            if !bit(k) {
                continue;
            }
            e -= p.detuning;
            e += frozen.iter().map(|&j| device.interaction(active[k], j)).sum::<f64>();
            e += (k + 1..m)
                .filter(|&l| bit(l))
                .map(|l| device.interaction(active[k], active[l]))
                .sum::<f64>();
        }
        for k in 0..m {
            h[(s ^ 1 << (m - 1 - k), s)] = half;
        }
        h[(s, s)] = C64::new(e, 0.0);
    }
    unitary_evolution(&h, p.duration)
}

/// Logical `Z`-layer angle to the ER detuning phase; `None` means no pulse.
pub fn z_pulse_phase(theta: f64) -> Option<f64> {
    let beta = wrap_angle(PI - 2.0 * theta);
    (beta > -PI).then_some(beta)
}

/// How an entangling block is realised for a given `γ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EntanglerPlan {
    /// `γ = 0`: no pulses.
    Skip,
    /// `4γ ≡ 0 (mod 2π)`, `γ ≠ 0`: the target pulse degenerates to the
    /// identity (infinite detuning), only the control pulses remain.
    ControlOnly,
    /// Full three-pulse block with this target phase.
    Full(f64),
}

pub fn entangler_plan(gamma: f64) -> EntanglerPlan {
    if gamma == 0.0 {
        return EntanglerPlan::Skip;
    }
    let beta = wrap_angle(PI - 4.0 * gamma);
    if beta > -PI {
        EntanglerPlan::Full(beta)
    } else {
        EntanglerPlan::ControlOnly
    }
}

/// Duration of the global GE pulse for mixer angle `α`; negative angles
/// are shifted by π (a global sign).
pub fn mixer_duration(alpha: f64, omega_b: f64) -> Option<f64> {
    let a = if alpha < 0.0 { alpha + PI } else { alpha };
    (a > 0.0).then(|| 2.0 * a / omega_b)
}

/// `diag(1, -e^{-iβ}, -1, -1)` on (control, target).
pub fn ideal_entangler_block(beta: f64) -> ComplexMatrix {
    let m1 = C64::new(-1.0, 0.0);
    ComplexMatrix::from_diagonal(&[ONE, -C64::from_polar(1.0, -beta), m1, m1])
}

/// Control π, weak detuned target 2π, control π.
pub fn entangler_pulses(
    device: &DeviceConfig,
    control: usize,
    target: usize,
    plan: EntanglerPlan,
) -> Result<Vec<Pulse>> {
    let pi_pulse = || Pulse::new(vec![control], Transition::ER, device.omega_r, 0.0, PI / device.omega_r);
    Ok(match plan {
        EntanglerPlan::Skip => vec![],
        EntanglerPlan::ControlOnly => vec![pi_pulse()?, pi_pulse()?],
        EntanglerPlan::Full(beta) => {
            let w = device.omega_r_weak;
            let delta = detuning_for_phase(beta, w)?;
            vec![
                pi_pulse()?,
                Pulse::new(vec![target], Transition::ER, w, delta, TWO_PI / w.hypot(delta))?,
                pi_pulse()?,
            ]
        }
    })
}

fn schedule_hash(s: &QaoaSchedule) -> String {
    let mut h = Sha256::new();
    for a in s.to_flat() {
        h.update(a.to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// Translates a schedule into square pulses, layer by layer in the
/// ansatz's factor order.
pub fn compile_schedule(s: &QaoaSchedule, device: &DeviceConfig) -> Result<PulseSequence> {
    compile_with(s, device, true)
}

/// Like [`compile_schedule`] but maps an angle of exactly `-π` to the
/// continuous limit of its pulse block instead of rejecting it.
pub(crate) fn compile_lenient(s: &QaoaSchedule, device: &DeviceConfig) -> PulseSequence {
    compile_with(s, device, false).expect("device validated by caller")
}

fn compile_with(s: &QaoaSchedule, device: &DeviceConfig, strict: bool) -> Result<PulseSequence> {
    device.validate()?;
    let layout = ChainLayout::new(device.num_atoms)?;
    let mut pulses = Vec::new();
    for layer in s.layers() {
        for kind in GeneratorKind::APPLICATION_ORDER {
            let angle = layer.angle(kind);
            if strict && kind != GeneratorKind::MixX && angle.abs() >= PI {
                return Err(Error::AngleOutOfRange { value: angle });
            }
            match kind {
                GeneratorKind::MixX => {
                    if let Some(t) = mixer_duration(angle, device.omega_b) {
                        let all = (0..device.num_atoms).collect();
                        pulses.push(Pulse::new(all, Transition::GE, device.omega_b, 0.0, t)?);
                    }
                }
                GeneratorKind::ZEven | GeneratorKind::ZOdd => {
                    let sites = layout.sites_of(kind);
                    if sites.is_empty() {
                        continue;
                    }
                    if let Some(beta) = z_pulse_phase(angle) {
                        let om = device.omega_r;
                        let delta = detuning_for_phase(beta, om)?;
                        pulses.push(Pulse::new(sites, Transition::ER, om, delta, TWO_PI / om.hypot(delta))?);
                    }
                }
                GeneratorKind::ZzEven | GeneratorKind::ZzOdd => {
                    let pairs = if kind == GeneratorKind::ZzEven {
                        layout.even_pairs()
                    } else {
                        layout.odd_pairs()
                    };
                    let plan = entangler_plan(angle);
                    for &(c, t) in pairs {
                        pulses.extend(entangler_pulses(device, c, t, plan)?);
                    }
                }
            }
        }
    }
    Ok(PulseSequence {
        pulses,
        source_hash: schedule_hash(s),
        device: device.clone(),
    })
}

/// Index of logical basis state `x` (qubits) inside the `3^n` space.
fn embed_index(x: usize, n: usize) -> usize {
    (0..n).fold(0, |acc, q| acc * 3 + ((x >> (n - 1 - q)) & 1))
}

/// Logical components of a three-level amplitude vector (not renormalized).
fn project_logical(amps: &[C64], n: usize) -> Vec<C64> {
    (0..1usize << n).map(|x| amps[embed_index(x, n)]).collect()
}

fn embed_logical(v: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![ZERO; 3usize.pow(n as u32)];
    for (x, a) in v.iter().enumerate() {
        out[embed_index(x, n)] = *a;
    }
    out
}

/// Runs a compiled schedule on a logical input and projects back; the
/// returned amplitudes carry the leakage as missing norm.
pub fn physical_logical_amplitudes(
    seq: &PulseSequence,
    psi0_logical: &[C64],
) -> Result<Vec<C64>> {
    let n = seq.device.num_atoms;
    if psi0_logical.len() != 1 << n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            found: psi0_logical.len(),
        });
    }
    let mut amps = embed_logical(psi0_logical, n);
    evolve_amplitudes(&seq.pulses, &seq.device, &mut amps)?;
    Ok(project_logical(&amps, n))
}

/// Physical-model evolution; returns the renormalized logical state and
/// the population left outside `{g, e}^n`.
pub fn simulate_schedule_physical(
    s: &QaoaSchedule,
    device: &DeviceConfig,
    psi0_logical: &QuantumState,
) -> Result<(QuantumState, f64)> {
    if psi0_logical.levels() != 2 || psi0_logical.num_sites() != device.num_atoms {
        return Err(Error::DimensionMismatch {
            expected: 1 << device.num_atoms,
            found: psi0_logical.dim(),
        });
    }
    let seq = compile_schedule(s, device)?;
    let v = physical_logical_amplitudes(&seq, psi0_logical.amplitudes())?;
    let kept: f64 = v.iter().map(|a| a.norm_sqr()).sum();
    let leakage = (1.0 - kept).max(0.0);
    let psi = QuantumState::normalized(device.num_atoms, 2, v)?;
    Ok((psi, leakage))
}

/// `2^n x 2^n` logical block of the physical evolution; sub-unitary when
/// population leaks to `r`.
pub fn physical_logical_operator(seq: &PulseSequence) -> Result<ComplexMatrix> {
    let n = seq.device.num_atoms;
    let dim = 1usize << n;
    if 3usize.pow(n as u32) > MAX_DIM {
        return Err(Error::DimensionTooLarge {
            dim: 3usize.pow(n as u32),
            max: MAX_DIM,
        });
    }
    let cols = (0..dim)
        .map(|j| {
            let mut e = vec![ZERO; dim];
            e[j] = ONE;
            physical_logical_amplitudes(seq, &e)
        })
        .collect::<Result<Vec<_>>>()?;
    ComplexMatrix::from_columns(&cols)
}
