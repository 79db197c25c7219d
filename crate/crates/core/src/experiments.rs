// Copyright 2026 The rydqaoa Authors
// SPDX-License-Identifier: Apache-2.0

//! Depth sweeps, parameter-noise sweeps, exponential fits and run records.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{default_initial_state, IdealSimulator, QaoaSchedule};
use crate::error::{invalid, Result};
use crate::gates::{ChainLayout, GeneratorKind};
use crate::optimize::{dual_anneal, restart_seed, Model, Objective, OptimizerConfig};
use crate::qcore::{inner, C64};
use crate::targets::TargetSpec;

pub const RECORD_FORMAT_VERSION: u32 = 1;
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Error magnitude `R`; shifts are drawn from `[-πR, πR]`.
    pub magnitude: f64,
    pub trials: usize,
    pub rng_seed: u64,
}

impl NoiseConfig {
    pub fn new(magnitude: f64, trials: usize, rng_seed: u64) -> Result<Self> {
        let c = Self {
            magnitude,
            trials,
            rng_seed,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.magnitude) {
            return Err(invalid(format!("noise magnitude {} outside [0, 1]", self.magnitude)));
        }
        if self.trials == 0 {
            return Err(invalid("noise trials must be positive"));
        }
        Ok(())
    }
}

/// Adds an independent uniform shift in `[-πR, πR]` to every angle.
/// Draw `k` of a given seed always produces the same schedule.
pub fn perturb_schedule(s: &QaoaSchedule, noise: &NoiseConfig, draw_index: u64) -> Result<QaoaSchedule> {
    noise.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.rng_seed);
    rng.set_stream(draw_index);
    let half_width = PI * noise.magnitude;
    let shifted: Vec<f64> = s
        .to_flat()
        .into_iter()
        .map(|a| {
            let u = (2.0 * rng.random::<f64>() - 1.0) * half_width;
            a + u
        })
        .collect();
    QaoaSchedule::from_flat(&shifted)
}

/// Sample mean and standard deviation by Welford's recurrence.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample deviation; zero below two samples.
    pub fn std_dev(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).sqrt()
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.std_dev() / (self.count as f64).sqrt()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSummary {
    pub magnitude: f64,
    pub rng_seed: u64,
    pub mean: f64,
    pub std_dev: f64,
    pub std_error: f64,
    pub fidelities: Vec<f64>,
}

/// Mean fidelity of `noise.trials` perturbed copies of `s` (ideal model).
pub fn noise_sweep(s: &QaoaSchedule, target: &TargetSpec, noise: &NoiseConfig) -> Result<NoiseSummary> {
    noise_sweep_with_model(s, target, noise, Model::Ideal)
}

pub fn noise_sweep_with_model(
    s: &QaoaSchedule,
    target: &TargetSpec,
    noise: &NoiseConfig,
    model: Model,
) -> Result<NoiseSummary> {
    noise.validate()?;
    let obj = Objective::new(target.clone(), model, s.depth(), None)?;
    let fidelities = (0..noise.trials as u64)
        .into_par_iter()
        .map(|k| perturb_schedule(s, noise, k).map(|p| obj.fidelity(&p)))
        .collect::<Result<Vec<_>>>()?;
    let mut stats = RunningStats::default();
    fidelities.iter().for_each(|&f| stats.push(f));
    Ok(NoiseSummary {
        magnitude: noise.magnitude,
        rng_seed: noise.rng_seed,
        mean: stats.mean(),
        std_dev: stats.std_dev(),
        std_error: stats.std_error(),
        fidelities,
    })
}

/// `1 - F ≈ a·e^{-λp}` fitted by least squares on `ln(1 - F)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpFit {
    pub a: f64,
    pub lambda: f64,
    /// Pearson correlation of `ln(1 - F)` against `p`.
    pub correlation: f64,
    /// Depths dropped because their infidelity was not positive.
    pub excluded_depths: Vec<f64>,
}

pub fn fit_exponential(depths: &[f64], infidelities: &[f64]) -> Result<ExpFit> {
    if depths.len() != infidelities.len() {
        return Err(invalid("depths and infidelities differ in length"));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded_depths = Vec::new();
    for (&p, &e) in depths.iter().zip(infidelities) {
        if e > 0.0 && e.is_finite() {
            xs.push(p);
            ys.push(e.ln());
        } else {
            excluded_depths.push(p);
        }
    }
    if xs.len() < 2 {
        return Err(invalid("need at least two depths with positive infidelity"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(invalid("depths must not all be equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let correlation = if syy == 0.0 { 0.0 } else { sxy / (sxx * syy).sqrt() };
    Ok(ExpFit {
        a: intercept.exp(),
        lambda: -slope,
        correlation,
        excluded_depths,
    })
}

/// Ideal-model fidelity after each of the `5p` factors, in application order.
pub fn fidelity_trajectory(s: &QaoaSchedule, target: &TargetSpec) -> Result<Vec<f64>> {
    let n = target.num_qubits();
    let layout = ChainLayout::new(n)?;
    let sim = IdealSimulator::new(layout);
    let dim = 1usize << n;
    let mut out = Vec::with_capacity(s.num_params());
    match target {
        TargetSpec::State { state, .. } => {
            let mut v = default_initial_state(n, target.kind())?
                .expect("state target")
                .into_amplitudes();
            for layer in s.layers() {
                for kind in GeneratorKind::APPLICATION_ORDER {
                    sim.apply_factor(kind, layer.angle(kind), &mut v);
                    out.push(inner(state.amplitudes(), &v).norm_sqr().min(1.0));
                }
            }
        }
        TargetSpec::Circuit { unitary, .. } => {
            let mut cols: Vec<Vec<C64>> = (0..dim)
                .map(|j| {
                    let mut e = vec![C64::new(0.0, 0.0); dim];
                    e[j] = C64::new(1.0, 0.0);
                    e
                })
                .collect();
            let adj = unitary.adjoint();
            for layer in s.layers() {
                for kind in GeneratorKind::APPLICATION_ORDER {
                    let mut tr = C64::new(0.0, 0.0);
                    for (j, c) in cols.iter_mut().enumerate() {
                        sim.apply_factor(kind, layer.angle(kind), c);
                        // (V† M)_{jj} = Σ_i conj(V_ij) M_ij
                        tr += (0..dim).map(|i| adj[(j, i)] * c[i]).sum::<C64>();
                    }
                    out.push((tr.norm() / dim as f64).min(1.0));
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Depth,
    Noise,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub depth: usize,
    pub sample: usize,
    pub seed: u64,
    pub fidelity: f64,
}

/// Self-describing result of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub format_version: u32,
    pub code_version: String,
    pub kind: SweepKind,
    pub target: String,
    pub model: Model,
    /// Whatever configuration produced the record, verbatim.
    pub config: serde_json::Value,
    pub depths: Vec<usize>,
    pub samples: Vec<SampleRecord>,
    pub noise: Vec<NoiseSummary>,
    pub fit: Option<ExpFit>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    target: &'a str,
    depth: usize,
    sample: usize,
    seed: u64,
    fidelity: f64,
    model: Model,
    #[serde(rename = "R")]
    r: Option<f64>,
}

impl SweepRecord {
    pub fn new(kind: SweepKind, target: &str, model: Model, config: serde_json::Value) -> Self {
        Self {
            format_version: RECORD_FORMAT_VERSION,
            code_version: CODE_VERSION.to_string(),
            kind,
            target: target.to_string(),
            model,
            config,
            depths: Vec::new(),
            samples: Vec::new(),
            noise: Vec::new(),
            fit: None,
        }
    }

    /// Highest fidelity recorded at each depth, in `depths` order.
    pub fn best_per_depth(&self) -> Vec<(usize, f64)> {
        self.depths
            .iter()
            .map(|&d| {
                let best = self
                    .samples
                    .iter()
                    .filter(|s| s.depth == d)
                    .map(|s| s.fidelity)
                    .fold(f64::NEG_INFINITY, f64::max);
                (d, best)
            })
            .collect()
    }

    /// Refits `fit` from the best fidelity at each depth.
    pub fn refit(&mut self) -> Result<()> {
        let (ds, inf): (Vec<f64>, Vec<f64>) = self
            .best_per_depth()
            .into_iter()
            .map(|(d, f)| (d as f64, 1.0 - f))
            .unzip();
        self.fit = Some(fit_exponential(&ds, &inf)?);
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn read_json<R: Read>(r: R) -> Result<Self> {
        Ok(serde_json::from_reader(r)?)
    }

    /// One row per depth sample or per noise trial.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for s in &self.samples {
            wr.serialize(CsvRow {
                target: &self.target,
                depth: s.depth,
                sample: s.sample,
                seed: s.seed,
                fidelity: s.fidelity,
                model: self.model,
                r: None,
            })?;
        }
        let depth = self.depths.first().copied().unwrap_or(0);
        for n in &self.noise {
            for (k, &f) in n.fidelities.iter().enumerate() {
                wr.serialize(CsvRow {
                    target: &self.target,
                    depth,
                    sample: k,
                    seed: n.rng_seed,
                    fidelity: f,
                    model: self.model,
                    r: Some(n.magnitude),
                })?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

/// Seed of sample `k` at depth `p`; independent of the other cells.
pub fn cell_seed(master: u64, depth: usize, sample: usize) -> u64 {
    restart_seed(restart_seed(master, depth), sample)
}

/// `samples` independent optimizations at every depth; each sample is a
/// full [`dual_anneal`] call seeded by [`cell_seed`].
pub fn depth_sweep(
    target: &TargetSpec,
    depths: &[usize],
    samples: usize,
    cfg: &OptimizerConfig,
    model: Model,
) -> Result<SweepRecord> {
    if depths.is_empty() {
        return Err(invalid("depth list is empty"));
    }
    if samples == 0 {
        return Err(invalid("samples per depth must be positive"));
    }
    cfg.validate()?;
    let cells: Vec<(usize, usize)> = depths
        .iter()
        .flat_map(|&d| (0..samples).map(move |k| (d, k)))
        .collect();
    let results = cells
        .par_iter()
        .map(|&(d, k)| {
            let obj = Objective::new(target.clone(), model, d, None)?;
            let seed = cell_seed(cfg.rng_seed, d, k);
            let r = dual_anneal(
                &obj,
                &OptimizerConfig {
                    rng_seed: seed,
                    ..cfg.clone()
                },
            )?;
            Ok(SampleRecord {
                depth: d,
                sample: k,
                seed,
                fidelity: r.best_fidelity,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rec = SweepRecord::new(
        SweepKind::Depth,
        target.key(),
        model,
        serde_json::to_value(cfg)?,
    );
    rec.depths = depths.to_vec();
    rec.samples = results;
    if depths.len() >= 2 {
        // no fit when fewer than two depths kept a positive infidelity
        rec.refit().ok();
    }
    Ok(rec)
}
