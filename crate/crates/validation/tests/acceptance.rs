// Copyright 2026 The rydqaoa Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. The n=6 p=16 optimization runs only with `--ignored`,
//! `--include-ignored` or `RYDQAOA_LONG=1`.
//!
//! Started as `acceptance --as-rydqaoa ARGS...` the binary behaves as the
//! command-line tool, which the determinism check spawns.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rydqaoa_core::experiments::{depth_sweep, fidelity_trajectory, noise_sweep};
use rydqaoa_core::rydberg::{
    detuning_for_phase, entangler_pulses, ideal_entangler_block, physical_logical_operator,
    two_level_propagator, EntanglerPlan,
};
use rydqaoa_core::targets::{
    ghz_state, perfect_encoder_unitary, verify_ame, verify_cluster, verify_encoder, Pauli,
    PauliString, StateCheck, KL_TOL,
};
use rydqaoa_core::*;
use rydqaoa_validation::{rk4_propagator, Outcome, Scoreboard};

const CLI_MODE: &str = "--as-rydqaoa";
const SEED: u64 = 7;
const PIN_THRESHOLD: f64 = 0.999;
const TABLE_TOL: f64 = 0.005;
const NOISE_TRIALS: usize = 100;

fn config(restarts: usize) -> OptimizerConfig {
    OptimizerConfig {
        restarts,
        rng_seed: SEED,
        ..OptimizerConfig::default()
    }
}

fn optimize(key: &str, depth: usize, restarts: usize) -> OptResult {
    let obj = Objective::new(lookup_target(key).unwrap(), Model::Ideal, depth, None).unwrap();
    dual_anneal(&obj, &config(restarts)).unwrap()
}

fn timed_optimum(key: &str, depth: usize, restarts: usize, limit_s: f64) -> Outcome {
    let t0 = Instant::now();
    let r = optimize(key, depth, restarts);
    let secs = t0.elapsed().as_secs_f64();
    (
        r.best_fidelity >= PIN_THRESHOLD && secs <= limit_s,
        format!(
            "{key} p={depth} restarts={restarts}: F={:.9} (need >= {PIN_THRESHOLD}), {secs:.1} s (limit {limit_s:.0} s)",
            r.best_fidelity
        ),
    )
}

/// Smallest depth whose best-of-5 fidelity reaches the pin threshold.
fn pin(key: &str, max_depth: usize) -> Option<(usize, OptResult, String)> {
    let mut scan = Vec::new();
    for p in 1..=max_depth {
        let r = optimize(key, p, 5);
        scan.push(format!("p{p}:{:.4}", r.best_fidelity));
        if r.best_fidelity >= PIN_THRESHOLD {
            return Some((p, r, scan.join(" ")));
        }
    }
    None
}

fn table_rows(rows: &[(&str, usize, f64, f64)]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for &(key, max_depth, at_1pct, at_01pct) in rows {
        let Some((p, r, scan)) = pin(key, max_depth) else {
            pass = false;
            parts.push(format!("{key}: no depth <= {max_depth} reached {PIN_THRESHOLD}"));
            continue;
        };
        let t = lookup_target(key).unwrap();
        let mut cells = Vec::new();
        for (mag, want) in [(0.01, at_1pct), (0.001, at_01pct)] {
            let s = noise_sweep(&r.best_params, &t, &NoiseConfig::new(mag, NOISE_TRIALS, SEED).unwrap()).unwrap();
            let ok = (s.mean - want).abs() <= TABLE_TOL;
            pass &= ok;
            cells.push(format!(
                "R={mag}: {:.2}% vs {:.2}%{}",
                100.0 * s.mean,
                100.0 * want,
                if ok { "" } else { " (outside 0.5 pt)" }
            ));
        }
        parts.push(format!("{key} pinned p={p} [{scan}] {}", cells.join(", ")));
    }
    (pass, parts.join("; "))
}

fn criterion_4() -> Outcome {
    let t = lookup_target("cluster-full-4").unwrap();
    let depths: Vec<usize> = (1..=6).collect();
    let rec = depth_sweep(&t, &depths, 5, &config(1), Model::Ideal).unwrap();
    let best: Vec<String> = rec
        .best_per_depth()
        .iter()
        .map(|(p, f)| format!("p{p}:1-F={:.2e}", 1.0 - f))
        .collect();
    let Some(fit) = rec.fit else {
        return (false, format!("no fit possible [{}]", best.join(" ")));
    };
    let lambda_ok = (fit.lambda - 1.06).abs() <= 0.3 * 1.06;
    let r_ok = fit.correlation <= -0.9;
    (
        lambda_ok && r_ok,
        format!(
            "lambda={:.3} (need 0.742..1.378), r={:.3} (need <= -0.9), a={:.3} [{}]",
            fit.lambda,
            fit.correlation,
            fit.a,
            best.join(" ")
        ),
    )
}

fn criterion_5() -> Outcome {
    let t = lookup_target("perfect-encoder").unwrap();
    let mut fids = Vec::new();
    let mut last = None;
    for p in [2, 4, 6, 8] {
        let r = optimize("perfect-encoder", p, 5);
        fids.push(r.best_fidelity);
        last = Some((p, r));
    }
    let increasing = fids.windows(2).all(|w| w[1] > w[0] - 1e-6);
    let (p, r) = last.unwrap();
    let traj = fidelity_trajectory(&r.best_params, &t).unwrap();
    let obj = Objective::new(t, Model::Ideal, p, None).unwrap();
    let cost = evaluate_cost(&obj, &r.best_params.to_flat()).unwrap();
    let gap = (traj.last().unwrap() - (1.0 - cost)).abs();
    let list: Vec<String> = fids.iter().map(|f| format!("{f:.4}")).collect();
    (
        increasing && gap <= 1e-12,
        format!("(a) F over p=2,4,6,8: {} ; (b) trajectory vs objective gap {gap:.1e}", list.join(" ")),
    )
}

fn criterion_6() -> Outcome {
    let mut worst = 0.0f64;
    for a in 0..10 {
        let ratio = -3.0 + 6.0 * a as f64 / 9.0;
        for b in 1..=10 {
            let omega = 1.3;
            let t = 4.0 * PI * b as f64 / 10.0 / omega;
            let u = two_level_propagator(omega, ratio * omega, t);
            let r = rk4_propagator(omega, ratio * omega, t, 10_000);
            for (x, y) in u.data().iter().zip(&r) {
                worst = worst.max((x - y).norm());
            }
        }
    }
    (worst <= 1e-9, format!("100 grid points, worst deviation {worst:.1e} (tol 1e-9)"))
}

fn criterion_7() -> Outcome {
    let mut worst = 0.0f64;
    for k in 0..50 {
        let beta = -PI + 2.0 * PI * (k as f64 + 0.5) / 50.0;
        let omega = 2.1;
        let delta = detuning_for_phase(beta, omega).unwrap();
        let u = two_level_propagator(omega, delta, 2.0 * PI / omega.hypot(delta));
        let want = ComplexMatrix::from_diagonal(&[-C64::from_polar(1.0, -beta), -C64::from_polar(1.0, beta)]);
        worst = worst.max(u.max_abs_diff(&want));
    }
    (worst <= 1e-10, format!("50 phases, worst deviation {worst:.1e} (tol 1e-10)"))
}

fn criterion_8() -> Outcome {
    let mut checked = 0;
    let mut failures = Vec::new();
    for n in 2..=6 {
        for key in [format!("cluster-full-{n}"), format!("cluster-chain-{n}")] {
            let TargetSpec::State {
                state,
                check: StateCheck::Cluster(g),
                ..
            } = lookup_target(&key).unwrap()
            else {
                failures.push(format!("{key} is not a cluster target"));
                continue;
            };
            if !verify_cluster(&state, &g).unwrap().pass {
                failures.push(format!("{key} fails its stabilizers"));
            }
            for q in 0..n {
                let flipped = PauliString::single(n, q, Pauli::X).apply(state.amplitudes());
                let bad = QuantumState::new(n, 2, flipped).unwrap();
                let report = verify_cluster(&bad, &g).unwrap();
                let nb = g.neighbors(q);
                for (a, e) in report.eigenvalues.iter().enumerate() {
                    let want = if nb.contains(&a) { -1.0 } else { 1.0 };
                    if (e - want).abs() > 1e-9 {
                        failures.push(format!("{key}: X_{q} gives K_{a}={e:+.3}"));
                    }
                }
                if report.pass {
                    failures.push(format!("{key}: X_{q} still passes"));
                }
            }
            checked += 1;
        }
    }
    (
        failures.is_empty(),
        if failures.is_empty() {
            format!("{checked} cluster targets pass; every X corruption flips exactly its neighbours")
        } else {
            failures.join("; ")
        },
    )
}

fn criterion_9() -> Outcome {
    let good = verify_encoder(&perfect_encoder_unitary()).unwrap();
    let bad = verify_encoder(&ComplexMatrix::identity(32)).unwrap();
    (
        good.pass && good.operators_checked == 16 && good.worst_violation <= KL_TOL && !bad.pass,
        format!(
            "encoder: {} operators, worst {:.1e}; identity control {}",
            good.operators_checked,
            good.worst_violation,
            if bad.pass { "passes (wrong)" } else { "fails" }
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (key, marginals) in [("ame-5", 10), ("ame-6", 20)] {
        let TargetSpec::State { state, .. } = lookup_target(key).unwrap() else {
            unreachable!()
        };
        let r = verify_ame(&state).unwrap();
        pass &= r.pass && r.marginals_checked == marginals && r.worst_deviation <= 1e-9;
        parts.push(format!("{key}: {} marginals, worst {:.1e}", r.marginals_checked, r.worst_deviation));
    }
    let ghz = verify_ame(&ghz_state(5).unwrap()).unwrap();
    pass &= !ghz.pass;
    parts.push(format!("GHZ5 control {}", if ghz.pass { "passes (wrong)" } else { "fails" }));
    (pass, parts.join("; "))
}

fn cz_operator_fidelity(device: &DeviceConfig) -> f64 {
    let pulses = entangler_pulses(device, 0, 1, EntanglerPlan::Full(0.0)).unwrap();
    let seq = PulseSequence::from_pulses(pulses, device.clone()).unwrap();
    let m = physical_logical_operator(&seq).unwrap();
    let ideal = ideal_entangler_block(0.0);
    let overlap: C64 = ideal.data().iter().zip(m.data()).map(|(a, b)| a.conj() * b).sum();
    overlap.norm() / 4.0
}

fn criterion_11() -> Outcome {
    let base = DeviceConfig::new(2);
    let fids: Vec<f64> = [1.0, 10.0, 100.0]
        .iter()
        .map(|k| {
            cz_operator_fidelity(&DeviceConfig {
                v_nn: base.v_nn * k,
                ..base.clone()
            })
        })
        .collect();
    (
        fids[0] >= 0.99 && fids[1] > fids[0] && fids[2] > fids[1],
        format!("v_nn x1, x10, x100: {:.6} {:.6} {:.6}", fids[0], fids[1], fids[2]),
    )
}

fn criterion_12() -> Outcome {
    let t = lookup_target("ghz-4").unwrap();
    let r = optimize("ghz-4", 4, 2);
    let mut pass = true;
    let mut prev: Option<(f64, f64)> = None;
    let mut parts = Vec::new();
    for mag in [0.0, 0.001, 0.01, 0.05] {
        let s = noise_sweep(&r.best_params, &t, &NoiseConfig::new(mag, NOISE_TRIALS, SEED).unwrap()).unwrap();
        if mag == 0.0 {
            pass &= s.std_dev == 0.0 && s.mean == r.best_fidelity;
        }
        if let Some((m, se)) = prev {
            pass &= s.mean <= m + 2.0 * (se * se + s.std_error * s.std_error).sqrt();
        }
        prev = Some((s.mean, s.std_error));
        parts.push(format!("R={mag}: {:.6}±{:.1e}", s.mean, s.std_error));
    }
    (pass, format!("ghz-4 p=4 {}", parts.join(", ")))
}

fn cli(args: &[&str]) -> bool {
    Command::new(std::env::current_exe().unwrap())
        .arg(CLI_MODE)
        .args(args)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn snapshot(dir: &Path) -> BTreeMap<String, String> {
    let root = dir.to_str().unwrap();
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).unwrap().replace(root, "OUT"))
        })
        .collect()
}

fn criterion_13() -> Outcome {
    let runs: Vec<_> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    for d in &runs {
        let out = d.path().to_str().unwrap();
        let sched = d.path().join("ghz-4-p2-ideal.schedule.json");
        let sched = sched.to_str().unwrap();
        let steps: [&[&str]; 5] = [
            &["optimize", "--target", "ghz-4", "--depth", "2", "--seed", "11", "--budget", "5000", "--restarts", "3", "--out", out],
            &["sweep", "--kind", "depth", "--target", "cluster-full-4", "--depths", "1:2", "--samples", "2", "--seed", "5", "--budget", "3000", "--out", out],
            &["sweep", "--kind", "noise", "--schedule", sched, "--noise-R", "0.001,0.01", "--trials", "20", "--seed", "3", "--out", out],
            &["perturb", "--schedule", sched, "--noise-R", "0.01", "--draw", "4", "--seed", "3", "--out", out],
            &["export", "--schedule", sched, "--out", out],
        ];
        for args in steps {
            if !cli(args) {
                return (false, format!("command failed: {}", args[0]));
            }
        }
    }
    let a = snapshot(runs[0].path());
    let b = snapshot(runs[1].path());
    let differing: Vec<&String> = a.keys().filter(|k| a.get(*k) != b.get(*k)).collect();
    (
        a.len() == b.len() && differing.is_empty() && a.len() >= 9,
        format!("{} output files from 5 seeded commands, {} differ", a.len(), differing.len()),
    )
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    if args.get(1).map(String::as_str) == Some(CLI_MODE) {
        let cli_args = std::iter::once("rydqaoa".to_string()).chain(args[2..].iter().cloned());
        return ExitCode::from(rydqaoa_cli::run(cli_args));
    }
    // `cargo test -- --list` expects a listing, not a run
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let long = args.iter().any(|a| a == "--ignored" || a == "--include-ignored")
        || std::env::var("RYDQAOA_LONG").is_ok_and(|v| v == "1");
    let start = Instant::now();
    let mut board = Scoreboard::default();
    println!("acceptance: seed {SEED}");

    board.run("1", || timed_optimum("cluster-full-4", 4, 5, 600.0));
    board.run("2", || timed_optimum("cluster-full-5", 10, 10, 7200.0));
    if long {
        board.run("2b", || timed_optimum("cluster-full-6", 16, 10, f64::INFINITY));
    } else {
        board.skip("2b", "cluster-full-6 p=16 (pass --ignored or set RYDQAOA_LONG=1)");
    }
    board.run("3a", || table_rows(&[("ghz-5", 10, 0.977, 0.9991)]));
    board.run("3b", || table_rows(&[("ame-5", 10, 0.985, 0.9986), ("ame-6", 12, 0.983, 0.9982)]));
    board.run("4", criterion_4);
    board.run("5", criterion_5);

    let props = Instant::now();
    board.run("6", criterion_6);
    board.run("7", criterion_7);
    board.run("8", criterion_8);
    board.run("9", criterion_9);
    board.run("10", criterion_10);
    board.run("11", criterion_11);
    board.run("12", criterion_12);
    board.run("13", criterion_13);
    let props_s = props.elapsed().as_secs_f64();
    board.record(
        "6-13",
        props_s < 300.0,
        &format!("property criteria together took {props_s:.1} s (limit 300 s)"),
    );

    let failed = board.failed();
    println!(
        "acceptance: {} failing [{}] in {:.1} s",
        failed.len(),
        failed.join(", "),
        start.elapsed().as_secs_f64()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
