// Copyright 2026 The rydqaoa Authors
// SPDX-License-Identifier: Apache-2.0

//! Gradient-free search over schedule angles.
//!
//! The global search is generalized simulated annealing with a
//! Tsallis-Stariolo visiting distribution, a strategy chain of `2·dim`
//! moves per temperature, re-annealing below a temperature floor, and a
//! bounded quasi-Newton polish (finite-difference BFGS) of promising points.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::ansatz::{default_initial_state, wrap_angle, IdealSimulator, QaoaSchedule, PARAMS_PER_LAYER};
use crate::error::{invalid, Error, Result};
use crate::gates::ChainLayout;
use crate::qcore::{inner, ComplexMatrix, C64};
use crate::rydberg::{compile_lenient, physical_logical_amplitudes, physical_logical_operator, DeviceConfig};
use crate::targets::TargetSpec;

/// Simulation model behind an objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Ideal,
    Physical,
}

impl std::str::FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(Model::Ideal),
            "physical" => Ok(Model::Physical),
            _ => Err(invalid(format!("unknown model `{s}` (expected ideal or physical)"))),
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Model::Ideal => "ideal",
            Model::Physical => "physical",
        })
    }
}

/// `1 - fidelity` of a depth-`p` schedule against a target.
#[derive(Clone, Debug)]
pub struct Objective {
    target: TargetSpec,
    model: Model,
    depth: usize,
    sim: IdealSimulator,
    device: DeviceConfig,
    initial: Option<Vec<C64>>,
}

impl Objective {
    /// `device` defaults to the standard chain of the target's size.
    pub fn new(
        target: TargetSpec,
        model: Model,
        depth: usize,
        device: Option<DeviceConfig>,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(invalid("depth must be at least 1"));
        }
        let n = target.num_qubits();
        let device = device.unwrap_or_else(|| DeviceConfig::new(n));
        if device.num_atoms != n {
            return Err(invalid(format!(
                "device has {} atoms but target `{}` has {n} qubits",
                device.num_atoms,
                target.key()
            )));
        }
        if model == Model::Physical {
            device.validate()?;
        }
        let initial = default_initial_state(n, target.kind())?.map(|s| s.into_amplitudes());
        Ok(Self {
            sim: IdealSimulator::new(ChainLayout::new(n)?),
            target,
            model,
            depth,
            device,
            initial,
        })
    }

    pub fn target(&self) -> &TargetSpec {
        &self.target
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn device(&self) -> &DeviceConfig {
        &self.device
    }

    pub fn num_params(&self) -> usize {
        PARAMS_PER_LAYER * self.depth
    }

    /// Fidelity of a schedule of any depth.
    pub fn fidelity(&self, s: &QaoaSchedule) -> f64 {
        match (&self.target, self.model) {
            (TargetSpec::State { state, .. }, Model::Ideal) => {
                let mut v = self.initial.clone().expect("state targets have an initial state");
                self.sim.apply(s, &mut v);
                inner(state.amplitudes(), &v).norm_sqr().min(1.0)
            }
            (TargetSpec::Circuit { unitary, .. }, Model::Ideal) => {
                circuit_fidelity(&self.sim.unitary(s), unitary)
            }
            (TargetSpec::State { state, .. }, Model::Physical) => {
                let seq = compile_lenient(s, &self.device);
                let init = self.initial.as_ref().expect("state targets have an initial state");
                let v = physical_logical_amplitudes(&seq, init).expect("sizes checked at construction");
                inner(state.amplitudes(), &v).norm_sqr().min(1.0)
            }
            (TargetSpec::Circuit { unitary, .. }, Model::Physical) => {
                let seq = compile_lenient(s, &self.device);
                let m = physical_logical_operator(&seq).expect("sizes checked at construction");
                circuit_fidelity(&m, unitary)
            }
        }
    }

    fn cost_unchecked(&self, params: &[f64]) -> f64 {
        let s = QaoaSchedule::from_flat(params).expect("length checked by caller");
        (1.0 - self.fidelity(&s)).clamp(0.0, 1.0)
    }
}

/// `|Tr(V† M)| / d`; equals the unitary formula when `M` is unitary and
/// counts lost norm as infidelity otherwise.
fn circuit_fidelity(m: &ComplexMatrix, v: &ComplexMatrix) -> f64 {
    (inner(v.data(), m.data()).norm() / m.rows() as f64).min(1.0)
}

/// `1 - fidelity` for a flat angle vector of length `5p`.
pub fn evaluate_cost(obj: &Objective, params: &[f64]) -> Result<f64> {
    if params.is_empty() || !params.len().is_multiple_of(PARAMS_PER_LAYER) {
        return Err(invalid(format!(
            "parameter count {} is not a positive multiple of {PARAMS_PER_LAYER}",
            params.len()
        )));
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(invalid("parameters must be finite"));
    }
    Ok(obj.cost_unchecked(params))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Interval applied to every parameter.
    pub bounds: (f64, f64),
    /// Cost evaluations per restart.
    pub max_evaluations: u64,
    pub restarts: usize,
    pub initial_temperature: f64,
    pub visiting_parameter: f64,
    pub acceptance_parameter: f64,
    /// Re-anneal when the temperature falls below this fraction of the start.
    pub restart_temperature_ratio: f64,
    /// Annealing iterations per restart; for warm starts, the cap on
    /// local-refinement iterations.
    pub max_iterations: usize,
    pub local_refinement: bool,
    /// Stop a restart once its best cost is at or below this value.
    pub target_cost: f64,
    pub rng_seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            bounds: (-PI, PI),
            max_evaluations: 200_000,
            restarts: 5,
            initial_temperature: 5230.0,
            visiting_parameter: 2.62,
            acceptance_parameter: -5.0,
            restart_temperature_ratio: 2e-5,
            max_iterations: 1000,
            local_refinement: true,
            target_cost: 1e-12,
            rng_seed: 0,
        }
    }
}

impl OptimizerConfig {
    /// Defaults sized for the model's evaluation cost.
    pub fn for_model(model: Model) -> Self {
        match model {
            Model::Ideal => Self::default(),
            Model::Physical => Self {
                max_evaluations: 20_000,
                ..Self::default()
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.bounds;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid("bounds must be finite with lower < upper"));
        }
        if self.restarts == 0 {
            return Err(invalid("restarts must be at least 1"));
        }
        if !(self.visiting_parameter > 1.0 && self.visiting_parameter < 3.0) {
            return Err(invalid("visiting parameter must lie in (1, 3)"));
        }
        if self.acceptance_parameter.is_nan() || self.acceptance_parameter >= 1.0 {
            return Err(invalid("acceptance parameter must be below 1"));
        }
        if !(self.initial_temperature > 0.0 && self.initial_temperature.is_finite()) {
            return Err(invalid("initial temperature must be positive"));
        }
        if !(self.restart_temperature_ratio > 0.0 && self.restart_temperature_ratio < 1.0) {
            return Err(invalid("restart temperature ratio must lie in (0, 1)"));
        }
        Ok(())
    }

    fn is_periodic(&self) -> bool {
        (self.bounds.1 - self.bounds.0 - 2.0 * PI).abs() < 1e-12
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub best_params: QaoaSchedule,
    pub best_fidelity: f64,
    pub evaluations_used: u64,
    pub restart_fidelities: Vec<f64>,
    pub restart_seeds: Vec<u64>,
    pub seed: u64,
    /// True when some restart ran out of evaluations.
    pub budget_exhausted: bool,
}

/// Best point of one annealing run.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnealOutcome {
    pub x: Vec<f64>,
    pub cost: f64,
    pub evaluations: u64,
    pub exhausted: bool,
}

/// Seed of restart `r` derived from the master seed.
pub fn restart_seed(master: u64, r: usize) -> u64 {
    // splitmix64 finalizer over a Weyl step
    let mut z = master ^ (r as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const CACHE_LIMIT: usize = 4096;
const TAIL_LIMIT: f64 = 1e8;
const MIN_VISIT_BOUND: f64 = 1e-10;

/// Counts evaluations against a budget and memoizes recent points.
struct Evaluator<F> {
    f: F,
    nfev: u64,
    max: u64,
    cache: HashMap<Vec<u64>, f64>,
    target: f64,
    best: f64,
}

impl<F: FnMut(&[f64]) -> f64> Evaluator<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        if let Some(&e) = self.cache.get(&key) {
            return e;
        }
        self.nfev += 1;
        let e = (self.f)(x);
        let e = if e.is_nan() { f64::INFINITY } else { e };
        if self.cache.len() >= CACHE_LIMIT {
            self.cache.clear();
        }
        self.cache.insert(key, e);
        if e < self.best {
            self.best = e;
        }
        e
    }

    fn exhausted(&self) -> bool {
        self.nfev >= self.max
    }

    fn done(&self) -> bool {
        self.exhausted() || self.best <= self.target
    }
}

struct Visiting {
    qv: f64,
    factor4_p: f64,
    factor6: f64,
}

impl Visiting {
    fn new(qv: f64) -> Self {
        let factor2 = ((4.0 - qv) * (qv - 1.0).ln()).exp();
        let factor3 = ((2.0 - qv) * 2f64.ln() / (qv - 1.0)).exp();
        let factor4_p = PI.sqrt() * factor2 / (factor3 * (3.0 - qv));
        let factor5 = 1.0 / (qv - 1.0) - 0.5;
        let d1 = 2.0 - factor5;
        let factor6 = PI * (1.0 - factor5) / (PI * (1.0 - factor5)).sin() / ln_gamma(d1).exp();
        Self {
            qv,
            factor4_p,
            factor6,
        }
    }

    /// One heavy-tailed step length at `temperature`.
    fn sample(&self, rng: &mut ChaCha8Rng, temperature: f64) -> f64 {
        let qv = self.qv;
        let mut x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        let factor1 = (temperature.ln() / (qv - 1.0)).exp();
        let factor4 = self.factor4_p * factor1;
        x *= (-(qv - 1.0) * (self.factor6 / factor4).ln() / (3.0 - qv)).exp();
        let den = ((qv - 1.0) * y.abs().ln() / (3.0 - qv)).exp();
        x / den
    }

    fn clip_tail(v: f64, rng: &mut ChaCha8Rng) -> f64 {
        if v > TAIL_LIMIT {
            TAIL_LIMIT * rng.random::<f64>()
        } else if v < -TAIL_LIMIT {
            -TAIL_LIMIT * rng.random::<f64>()
        } else {
            v
        }
    }
}

#[inline]
fn fold_into(v: f64, lo: f64, range: f64) -> f64 {
    let b = (v - lo) % range + range;
    let mut out = b % range + lo;
    if (out - lo).abs() < MIN_VISIT_BOUND {
        out += MIN_VISIT_BOUND;
    }
    out
}

/// Generalized simulated annealing over the box `cfg.bounds^dim`.
///
/// `periodic` marks the objective as `(upper - lower)`-periodic in every
/// coordinate, which lets the local polish move freely and fold back.
pub fn minimize_dual_annealing<F>(
    f: F,
    dim: usize,
    cfg: &OptimizerConfig,
    seed: u64,
    x0: Option<&[f64]>,
    periodic: bool,
) -> Result<AnnealOutcome>
where
    F: FnMut(&[f64]) -> f64,
{
    cfg.validate()?;
    if dim == 0 {
        return Err(invalid("dimension must be positive"));
    }
    let (lo, hi) = cfg.bounds;
    let range = hi - lo;
    if let Some(x0) = x0 {
        if x0.len() != dim || x0.iter().any(|v| !(lo..=hi).contains(v)) {
            return Err(invalid("starting point must have the right length and lie within bounds"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ev = Evaluator {
        f,
        nfev: 0,
        max: cfg.max_evaluations,
        cache: HashMap::new(),
        target: cfg.target_cost,
        best: f64::INFINITY,
    };
    let visit = Visiting::new(cfg.visiting_parameter);
    let qa = cfg.acceptance_parameter;
    let ls_max_iter = (6 * dim).clamp(100, 1000);
    let polish = LocalSearch {
        lo,
        hi,
        periodic,
        max_iter: ls_max_iter,
    };

    let uniform_point = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..dim).map(|_| lo + range * rng.random::<f64>()).collect()
    };

    // energy state
    let mut current = x0.map(<[f64]>::to_vec).unwrap_or_else(|| uniform_point(&mut rng));
    let mut e_cur = ev.eval(&current);
    let mut reinit = 0;
    while !e_cur.is_finite() && reinit < 1000 && !ev.exhausted() {
        current = uniform_point(&mut rng);
        e_cur = ev.eval(&current);
        reinit += 1;
    }
    let mut xbest = current.clone();
    let mut ebest = e_cur;

    // strategy chain state
    let mut emin = e_cur;
    let mut xmin = current.clone();
    let mut not_improved_idx = 0usize;
    let mut not_improved_max = 1000usize;
    let k_factor = 100.0 * dim as f64;

    let t1 = ((cfg.visiting_parameter - 1.0) * 2f64.ln()).exp() - 1.0;
    let t_restart = cfg.initial_temperature * cfg.restart_temperature_ratio;
    let mut iteration = 0usize;

    'outer: while !ev.done() {
        for i in 0..cfg.max_iterations {
            let s = i as f64 + 2.0;
            let t2 = ((cfg.visiting_parameter - 1.0) * s.ln()).exp() - 1.0;
            let temperature = cfg.initial_temperature * t1 / t2;
            if iteration >= cfg.max_iterations {
                break 'outer;
            }
            if temperature < t_restart {
                current = uniform_point(&mut rng);
                e_cur = ev.eval(&current);
                continue 'outer;
            }

            // strategy chain
            let t_step = temperature / (i as f64 + 1.0);
            not_improved_idx += 1;
            let mut improved = i == 0;
            for j in 0..2 * dim {
                let mut x_visit = current.clone();
                if j < dim {
                    for v in x_visit.iter_mut() {
                        let step = Visiting::clip_tail(visit.sample(&mut rng, temperature), &mut rng);
                        *v = fold_into(*v + step, lo, range);
                    }
                } else {
                    let k = j - dim;
                    let step = Visiting::clip_tail(visit.sample(&mut rng, temperature), &mut rng);
                    x_visit[k] = fold_into(current[k] + step, lo, range);
                }
                let e = ev.eval(&x_visit);
                if e < e_cur {
                    e_cur = e;
                    current = x_visit;
                    if e < ebest {
                        ebest = e;
                        xbest = current.clone();
                        improved = true;
                        not_improved_idx = 0;
                    }
                } else {
                    let r: f64 = rng.random();
                    let pqv_temp = 1.0 - (1.0 - qa) * (e - e_cur) / t_step;
                    let pqv = if pqv_temp <= 0.0 {
                        0.0
                    } else {
                        (pqv_temp.ln() / (1.0 - qa)).exp()
                    };
                    if r <= pqv {
                        e_cur = e;
                        current = x_visit;
                        xmin = current.clone();
                    }
                    if not_improved_idx >= not_improved_max && (j == 0 || e_cur < emin) {
                        emin = e_cur;
                        xmin = current.clone();
                    }
                }
                if ev.done() {
                    break 'outer;
                }
            }

            // local search
            if cfg.local_refinement {
                if improved {
                    let (e, x) = polish.run(&mut ev, &xbest, ebest);
                    if e < ebest {
                        not_improved_idx = 0;
                        ebest = e;
                        xbest = x.clone();
                        e_cur = e;
                        current = x;
                    }
                    if ev.done() {
                        break 'outer;
                    }
                }
                let mut do_ls = false;
                if k_factor < 90.0 * dim as f64 {
                    let pls = (k_factor * (ebest - e_cur) / t_step).exp();
                    if pls >= rng.random::<f64>() {
                        do_ls = true;
                    }
                }
                if not_improved_idx >= not_improved_max {
                    do_ls = true;
                }
                if do_ls {
                    let (e, x) = polish.run(&mut ev, &xmin, emin);
                    xmin = x.clone();
                    emin = e;
                    not_improved_idx = 0;
                    not_improved_max = dim;
                    if e < ebest {
                        ebest = e;
                        xbest = x.clone();
                        e_cur = e;
                        current = x;
                    }
                    if ev.done() {
                        break 'outer;
                    }
                }
            }
            iteration += 1;
        }
    }
    Ok(AnnealOutcome {
        x: xbest,
        cost: ebest,
        evaluations: ev.nfev,
        exhausted: ev.exhausted(),
    })
}

/// Bounded BFGS with central finite differences and Armijo backtracking.
struct LocalSearch {
    lo: f64,
    hi: f64,
    periodic: bool,
    max_iter: usize,
}

const FD_STEP: f64 = 1e-6;
const GTOL: f64 = 1e-9;
const FTOL: f64 = 1e-12;

impl LocalSearch {
    fn project(&self, x: &mut [f64]) {
        for v in x.iter_mut() {
            *v = if self.periodic {
                fold_periodic(*v, self.lo, self.hi)
            } else {
                v.clamp(self.lo, self.hi)
            };
        }
    }

    fn gradient<F: FnMut(&[f64]) -> f64>(&self, ev: &mut Evaluator<F>, x: &[f64]) -> Option<Vec<f64>> {
        let mut g = vec![0.0; x.len()];
        let mut probe = x.to_vec();
        for k in 0..x.len() {
            if ev.nfev + 2 > ev.max {
                return None;
            }
            let (mut up, mut down) = (x[k] + FD_STEP, x[k] - FD_STEP);
            if !self.periodic {
                up = up.min(self.hi);
                down = down.max(self.lo);
            }
            probe[k] = up;
            let fu = ev.eval(&probe);
            probe[k] = down;
            let fd = ev.eval(&probe);
            probe[k] = x[k];
            g[k] = (fu - fd) / (up - down);
        }
        Some(g)
    }

    /// Returns the polished point if it beats `(x0, e0)`, else the input.
    fn run<F: FnMut(&[f64]) -> f64>(&self, ev: &mut Evaluator<F>, x0: &[f64], e0: f64) -> (f64, Vec<f64>) {
        let n = x0.len();
        let mut x = x0.to_vec();
        let mut f = e0;
        let Some(mut g) = self.gradient(ev, &x) else {
            return (e0, x0.to_vec());
        };
        // inverse Hessian, row-major
        let mut h = identity(n);
        let mut first = true;
        for _ in 0..self.max_iter {
            if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) < GTOL || ev.done() {
                break;
            }
            let mut d = mat_vec(&h, &g, n).iter().map(|v| -v).collect::<Vec<_>>();
            let mut slope = dot(&g, &d);
            if slope >= 0.0 {
                h = identity(n);
                d = g.iter().map(|v| -v).collect();
                slope = dot(&g, &d);
            }
            let mut t = 1.0;
            let mut accepted = None;
            while t > 1e-12 && !ev.exhausted() {
                let mut xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
                if !self.periodic {
                    self.project(&mut xn);
                }
                let fnew = ev.eval(&xn);
                let step: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
                let decrease = if self.periodic { t * slope } else { dot(&g, &step) };
                if fnew <= f + 1e-4 * decrease {
                    accepted = Some((xn, fnew, step));
                    break;
                }
                t *= 0.5;
            }
            let Some((xn, fnew, s)) = accepted else {
                break;
            };
            let Some(gn) = self.gradient(ev, &xn) else {
                if fnew < f {
                    x = xn;
                    f = fnew;
                }
                break;
            };
            let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            let converged = (f - fnew) <= FTOL * f.abs().max(fnew.abs()).max(1.0);
            if sy > 1e-12 * norm(&s) * norm(&y) {
                if first {
                    let scale = sy / dot(&y, &y);
                    h.iter_mut().for_each(|v| *v *= scale);
                    first = false;
                }
                bfgs_update(&mut h, &s, &y, sy, n);
            }
            x = xn;
            f = fnew;
            g = gn;
            if converged {
                break;
            }
        }
        if f < e0 {
            if self.periodic {
                self.project(&mut x);
            }
            (f, x)
        } else {
            (e0, x0.to_vec())
        }
    }
}

/// Maps `v` into `[lo, hi)` modulo `hi - lo`.
fn fold_periodic(v: f64, lo: f64, hi: f64) -> f64 {
    let range = hi - lo;
    let mut out = lo + (v - lo).rem_euclid(range);
    if out >= hi {
        out -= range;
    }
    out
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn mat_vec(m: &[f64], v: &[f64], n: usize) -> Vec<f64> {
    m.chunks_exact(n).map(|row| dot(row, v)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `H <- (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64, n: usize) {
    let rho = 1.0 / sy;
    let hy = mat_vec(h, y, n);
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

fn run_restart(obj: &Objective, cfg: &OptimizerConfig, seed: u64) -> Result<AnnealOutcome> {
    let periodic = cfg.is_periodic();
    minimize_dual_annealing(
        |x: &[f64]| obj.cost_unchecked(x),
        obj.num_params(),
        cfg,
        seed,
        None,
        periodic,
    )
}

/// Independent annealing restarts with derived seeds; the lowest cost wins
/// and ties go to the earlier restart.
pub fn dual_anneal(obj: &Objective, cfg: &OptimizerConfig) -> Result<OptResult> {
    cfg.validate()?;
    let seeds: Vec<u64> = (0..cfg.restarts).map(|r| restart_seed(cfg.rng_seed, r)).collect();
    let outcomes = seeds
        .par_iter()
        .map(|&s| run_restart(obj, cfg, s))
        .collect::<Result<Vec<_>>>()?;
    finish(obj, cfg.rng_seed, seeds, outcomes)
}

fn finish(obj: &Objective, seed: u64, seeds: Vec<u64>, outcomes: Vec<AnnealOutcome>) -> Result<OptResult> {
    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.cost < outcomes[best].cost {
            best = i;
        }
    }
    let wrapped: Vec<f64> = outcomes[best].x.iter().map(|&v| wrap_angle(v)).collect();
    let best_params = QaoaSchedule::from_flat(&wrapped)?;
    Ok(OptResult {
        best_fidelity: obj.fidelity(&best_params),
        best_params,
        evaluations_used: outcomes.iter().map(|o| o.evaluations).sum(),
        restart_fidelities: outcomes.iter().map(|o| 1.0 - o.cost).collect(),
        restart_seeds: seeds,
        seed,
        budget_exhausted: outcomes.iter().any(|o| o.exhausted),
    })
}

/// Local refinement on the physical model starting from an ideal-model
/// optimum. `cfg.max_iterations` caps the quasi-Newton iterations
/// (0 returns the warm start unchanged).
pub fn warm_start_physical(
    obj_physical: &Objective,
    ideal_result: &OptResult,
    cfg: &OptimizerConfig,
) -> Result<OptResult> {
    cfg.validate()?;
    let start = &ideal_result.best_params;
    if start.depth() != obj_physical.depth() {
        return Err(invalid(format!(
            "warm start has depth {} but the objective expects {}",
            start.depth(),
            obj_physical.depth()
        )));
    }
    let x0 = start.to_flat();
    let mut ev = Evaluator {
        f: |x: &[f64]| obj_physical.cost_unchecked(x),
        nfev: 0,
        max: cfg.max_evaluations.max(1),
        cache: HashMap::new(),
        target: cfg.target_cost,
        best: f64::INFINITY,
    };
    let e0 = ev.eval(&x0);
    let (e, x) = if cfg.max_iterations == 0 || !cfg.local_refinement {
        (e0, x0)
    } else {
        let polish = LocalSearch {
            lo: cfg.bounds.0,
            hi: cfg.bounds.1,
            periodic: cfg.is_periodic(),
            max_iter: cfg.max_iterations,
        };
        polish.run(&mut ev, &x0, e0)
    };
    let outcome = AnnealOutcome {
        x,
        cost: e,
        evaluations: ev.nfev,
        exhausted: ev.exhausted(),
    };
    finish(obj_physical, cfg.rng_seed, vec![cfg.rng_seed], vec![outcome])
}
