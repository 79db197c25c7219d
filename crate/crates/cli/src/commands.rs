// Copyright 2026 The rydqaoa Authors
// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::Context;
use rydqaoa_core::ansatz::{apply_schedule, default_initial_state, schedule_unitary};
use rydqaoa_core::experiments::{
    depth_sweep, noise_sweep_with_model, perturb_schedule, SweepKind, SweepRecord,
};
use rydqaoa_core::optimize::warm_start_physical;
use rydqaoa_core::{
    compile_schedule, dual_anneal, lookup_target, ChainLayout, DeviceConfig, Model, NoiseConfig,
    Objective, OptResult, OptimizerConfig, QaoaSchedule, TargetSpec,
};
use serde::{Deserialize, Serialize};

use crate::config::{parse_depths, RunConfig, SweepKindArg, OUTPUT_FORMAT_VERSION};
use crate::output::{write_atomic, write_json};
use crate::{EXIT_RUNTIME, EXIT_USAGE, EXIT_VERIFY};

#[derive(Debug)]
pub enum CliError {
    Usage(anyhow::Error),
    Verification(String),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Verification(_) => EXIT_VERIFY,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(e) | CliError::Runtime(e) => write!(f, "{e:#}"),
            CliError::Verification(m) => f.write_str(m),
        }
    }
}

/// Argument-level core errors are usage errors; the rest are runtime.
impl From<rydqaoa_core::Error> for CliError {
    fn from(e: rydqaoa_core::Error) -> Self {
        match e {
            rydqaoa_core::Error::UnknownTarget { .. } | rydqaoa_core::Error::InvalidArgument(_) => {
                CliError::Usage(e.into())
            }
            _ => CliError::Runtime(e.into()),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

type CmdResult<T = ()> = std::result::Result<T, CliError>;

fn usage(msg: impl fmt::Display) -> CliError {
    CliError::Usage(anyhow::anyhow!("{msg}"))
}

/// Schedule plus the context needed to reuse it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub format_version: u32,
    pub target: String,
    pub num_qubits: usize,
    pub model: Model,
    pub fidelity: Option<f64>,
    pub schedule: QaoaSchedule,
    pub run_config: RunConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeRecord {
    pub format_version: u32,
    pub run_config: RunConfig,
    pub target: String,
    pub depth: usize,
    pub model: Model,
    pub optimizer: OptimizerConfig,
    pub result: OptResult,
}

#[derive(Serialize)]
struct PulseFile<'a> {
    format_version: u32,
    run_config: &'a RunConfig,
    #[serde(flatten)]
    export: rydqaoa_core::rydberg::PulseExport,
}

pub fn run(rc: RunConfig) -> CmdResult {
    match rc.command.as_str() {
        "optimize" => optimize(&rc),
        "verify" => verify(&rc),
        "sweep" => sweep(&rc),
        "perturb" => perturb(&rc),
        "export" => export(&rc),
        other => Err(usage(format!("unknown command `{other}`"))),
    }
}

fn target_of(rc: &RunConfig) -> CmdResult<TargetSpec> {
    let key = rc.target.as_deref().ok_or_else(|| usage("--target is required"))?;
    Ok(lookup_target(key)?)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CmdResult<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    Ok(serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))?)
}

fn schedule_of(rc: &RunConfig) -> CmdResult<(PathBuf, ScheduleFile)> {
    let path = rc.schedule.clone().ok_or_else(|| usage("--schedule is required"))?;
    let file: ScheduleFile = read_json(&path)?;
    Ok((path, file))
}

/// `dir/name.schedule.json` -> `name`.
fn stem_of(path: &Path) -> String {
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("schedule");
    name.trim_end_matches(".json").trim_end_matches(".schedule").to_string()
}

fn optimize(rc: &RunConfig) -> CmdResult {
    let target = target_of(rc)?;
    let depth = rc.depth.ok_or_else(|| usage("--depth is required"))?;
    if depth == 0 {
        return Err(usage("--depth must be at least 1"));
    }
    let model = rc.model();
    let cfg = rc.optimizer(5);
    let obj = Objective::new(target.clone(), model, depth, rc.device.clone())?;
    let result = match &rc.warm_start {
        Some(path) => {
            if model != Model::Physical {
                return Err(usage("--warm-start refines on the physical model; pass --model physical"));
            }
            let start: OptimizeRecord = read_json(path)?;
            if start.target != target.key() {
                return Err(usage(format!(
                    "warm start was optimized for `{}`, not `{}`",
                    start.target,
                    target.key()
                )));
            }
            warm_start_physical(&obj, &start.result, &cfg)?
        }
        None => dual_anneal(&obj, &cfg)?,
    };
    let out = rc.out_dir();
    let base = format!("{}-p{depth}-{model}", target.key());
    let record = OptimizeRecord {
        format_version: OUTPUT_FORMAT_VERSION,
        run_config: rc.clone(),
        target: target.key().to_string(),
        depth,
        model,
        optimizer: cfg,
        result: result.clone(),
    };
    write_json(&out.join(format!("{base}.result.json")), &record)?;
    let sched = ScheduleFile {
        format_version: OUTPUT_FORMAT_VERSION,
        target: target.key().to_string(),
        num_qubits: target.num_qubits(),
        model,
        fidelity: Some(result.best_fidelity),
        schedule: result.best_params.clone(),
        run_config: rc.clone(),
    };
    write_json(&out.join(format!("{base}.schedule.json")), &sched)?;
    println!(
        "target={} depth={depth} model={model} fidelity={:.12} evaluations={}{}",
        target.key(),
        result.best_fidelity,
        result.evaluations_used,
        if result.budget_exhausted { " (budget exhausted)" } else { "" }
    );
    Ok(())
}

fn verify(rc: &RunConfig) -> CmdResult {
    let report = match &rc.schedule {
        None => target_of(rc)?.verify()?,
        Some(_) => {
            let (_, file) = schedule_of(rc)?;
            let key = rc.target.clone().unwrap_or_else(|| file.target.clone());
            let target = lookup_target(&key)?;
            let n = target.num_qubits();
            let layout = ChainLayout::new(n)?;
            let obj = Objective::new(target.clone(), Model::Ideal, file.schedule.depth(), None)?;
            println!("schedule fidelity (ideal model) = {:.12}", obj.fidelity(&file.schedule));
            match &target {
                TargetSpec::State { .. } => {
                    let psi0 = default_initial_state(n, target.kind())?.expect("state target");
                    target.verify_state(&apply_schedule(&file.schedule, &layout, &psi0)?)?
                }
                TargetSpec::Circuit { .. } => {
                    target.verify_unitary(&schedule_unitary(&file.schedule, &layout))?
                }
            }
        }
    };
    println!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Verification("verification failed".into()))
    }
}

fn sweep(rc: &RunConfig) -> CmdResult {
    match rc.kind.unwrap_or(SweepKindArg::Depth) {
        SweepKindArg::Depth => sweep_depth(rc),
        SweepKindArg::Noise => sweep_noise(rc),
    }
}

fn write_record(rec: &SweepRecord, json: PathBuf) -> CmdResult {
    write_json(&json, rec)?;
    write_atomic(&json.with_extension("csv"), |w| Ok(rec.write_csv(w)?))?;
    Ok(())
}

fn sweep_depth(rc: &RunConfig) -> CmdResult {
    let target = target_of(rc)?;
    let spec = rc.depths.as_deref().ok_or_else(|| usage("--depths a:b is required"))?;
    let depths = parse_depths(spec).map_err(CliError::Usage)?;
    let samples = rc.samples.unwrap_or(5);
    let model = rc.model();
    let cfg = rc.optimizer(1);
    let mut rec = depth_sweep(&target, &depths, samples, &cfg, model)?;
    rec.config = serde_json::json!({ "run_config": rc, "optimizer": cfg });
    for (d, f) in rec.best_per_depth() {
        println!("depth={d} best_fidelity={f:.12}");
    }
    match &rec.fit {
        Some(fit) => println!(
            "fit: a={:.6} lambda={:.6} correlation={:.6} excluded_depths={:?}",
            fit.a, fit.lambda, fit.correlation, fit.excluded_depths
        ),
        None => println!("fit: not available (fewer than two depths with positive infidelity)"),
    }
    let name = format!("sweep-depth-{}-{model}.json", target.key());
    write_record(&rec, rc.out_dir().join(name))
}

fn sweep_noise(rc: &RunConfig) -> CmdResult {
    let (_, file) = schedule_of(rc)?;
    let key = rc.target.clone().unwrap_or_else(|| file.target.clone());
    let target = lookup_target(&key)?;
    let model = rc.model();
    let trials = rc.trials.unwrap_or(100);
    let magnitudes = rc.noise_r.clone().unwrap_or_else(|| vec![0.0, 0.001, 0.01]);
    let mut rec = SweepRecord::new(
        SweepKind::Noise,
        target.key(),
        model,
        serde_json::json!({ "run_config": rc }),
    );
    rec.depths = vec![file.schedule.depth()];
    for r in magnitudes {
        let noise = NoiseConfig::new(r, trials, rc.seed())?;
        let summary = noise_sweep_with_model(&file.schedule, &target, &noise, model)?;
        println!(
            "R={r} mean={:.6} std={:.6} stderr={:.6}",
            summary.mean, summary.std_dev, summary.std_error
        );
        rec.noise.push(summary);
    }
    let name = format!("sweep-noise-{}-p{}-{model}.json", target.key(), file.schedule.depth());
    write_record(&rec, rc.out_dir().join(name))
}

fn perturb(rc: &RunConfig) -> CmdResult {
    let (path, file) = schedule_of(rc)?;
    let r = match rc.noise_r.as_deref() {
        Some([r]) => *r,
        _ => return Err(usage("--noise-R takes exactly one magnitude here")),
    };
    let draw = rc.draw.unwrap_or(0);
    let noise = NoiseConfig::new(r, 1, rc.seed())?;
    let s = perturb_schedule(&file.schedule, &noise, draw)?;
    let target = lookup_target(&file.target)?;
    let obj = Objective::new(target, Model::Ideal, s.depth(), None)?;
    let fidelity = obj.fidelity(&s);
    let out = ScheduleFile {
        format_version: OUTPUT_FORMAT_VERSION,
        fidelity: Some(fidelity),
        schedule: s,
        model: Model::Ideal,
        run_config: rc.clone(),
        ..file
    };
    let name = format!("{}.perturbed-{draw}.schedule.json", stem_of(&path));
    write_json(&rc.out_dir().join(name), &out)?;
    println!("R={r} draw={draw} fidelity={fidelity:.12}");
    Ok(())
}

fn export(rc: &RunConfig) -> CmdResult {
    let (path, file) = schedule_of(rc)?;
    let device = rc
        .device
        .clone()
        .unwrap_or_else(|| DeviceConfig::new(file.num_qubits));
    if device.num_atoms != file.num_qubits {
        return Err(usage(format!(
            "device has {} atoms but the schedule is for {} qubits",
            device.num_atoms, file.num_qubits
        )));
    }
    let seq = compile_schedule(&file.schedule, &device)?;
    let stem = stem_of(&path);
    let out = rc.out_dir();
    let pulses = PulseFile {
        format_version: OUTPUT_FORMAT_VERSION,
        run_config: rc,
        export: seq.export(),
    };
    write_json(&out.join(format!("{stem}.pulses.json")), &pulses)?;
    write_atomic(&out.join(format!("{stem}.staircase.csv")), |w| {
        Ok(seq.write_staircase_csv(w)?)
    })?;
    println!(
        "pulses={} total_duration_s={:e}",
        seq.len(),
        seq.total_duration()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stems() {
        assert_eq!(stem_of(Path::new("/a/ghz-5-p3-ideal.schedule.json")), "ghz-5-p3-ideal");
        assert_eq!(stem_of(Path::new("plain.json")), "plain");
    }

    #[test]
    fn error_codes() {
        let e: CliError = lookup_target("nope").unwrap_err().into();
        assert_eq!(e.code(), EXIT_USAGE);
        assert!(e.to_string().contains("ghz-5"));
        let e: CliError = rydqaoa_core::Error::AngleOutOfRange { value: -3.2 }.into();
        assert_eq!(e.code(), EXIT_RUNTIME);
        assert_eq!(CliError::Verification("x".into()).code(), EXIT_VERIFY);
    }
}
