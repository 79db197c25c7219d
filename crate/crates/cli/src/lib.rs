// Copyright 2026 The rydqaoa Authors
// SPDX-License-Identifier: Apache-2.0

//! Library side of the `rydqaoa` command-line driver.

mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{ModelArg, RunConfig, SweepKindArg};

/// Exit statuses.
pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_VERIFY: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "rydqaoa", version, about = "Layered-ansatz control synthesis for Rydberg atom chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize schedule angles for a target.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        depth: Option<u64>,
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
        /// Cost evaluations per restart.
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        restarts: Option<usize>,
        /// Refine an ideal-model result file on the physical model.
        #[arg(long)]
        warm_start: Option<PathBuf>,
    },
    /// Check a registered target, or a schedule file against its target.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        schedule: Option<PathBuf>,
    },
    /// Depth or noise sweep.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        kind: Option<SweepKindArg>,
        /// Inclusive depth range `a:b`.
        #[arg(long)]
        depths: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        schedule: Option<PathBuf>,
        /// Comma-separated noise magnitudes.
        #[arg(long = "noise-R", value_delimiter = ',')]
        noise_r: Option<Vec<f64>>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Write one randomly perturbed copy of a schedule.
    Perturb {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[arg(long = "noise-R")]
        noise_r: Option<f64>,
        /// Index of the draw within the seeded stream.
        #[arg(long)]
        draw: Option<u64>,
    },
    /// Compile a schedule file to pulse JSON and a staircase CSV.
    Export {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        schedule: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// JSON run configuration; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    jobs: Option<usize>,
}

fn flags(cli: Command) -> (Option<PathBuf>, RunConfig) {
    fn base(name: &str, c: Common) -> (Option<PathBuf>, RunConfig) {
        (
            c.config,
            RunConfig {
                command: name.to_string(),
                target: c.target,
                seed: c.seed,
                out: c.out,
                jobs: c.jobs,
                ..Default::default()
            },
        )
    }
    match cli {
        Command::Optimize {
            common,
            depth,
            model,
            budget,
            restarts,
            warm_start,
        } => {
            let (f, rc) = base("optimize", common);
            (
                f,
                RunConfig {
                    depth: depth.map(|d| d as usize),
                    model,
                    budget,
                    restarts,
                    warm_start,
                    ..rc
                },
            )
        }
        Command::Verify { common, schedule } => {
            let (f, rc) = base("verify", common);
            (f, RunConfig { schedule, ..rc })
        }
        Command::Sweep {
            common,
            kind,
            depths,
            samples,
            model,
            budget,
            restarts,
            schedule,
            noise_r,
            trials,
        } => {
            let (f, rc) = base("sweep", common);
            (
                f,
                RunConfig {
                    kind,
                    depths,
                    samples,
                    model,
                    budget,
                    restarts,
                    schedule,
                    noise_r,
                    trials,
                    ..rc
                },
            )
        }
        Command::Perturb {
            common,
            schedule,
            noise_r,
            draw,
        } => {
            let (f, rc) = base("perturb", common);
            (
                f,
                RunConfig {
                    schedule,
                    noise_r: noise_r.map(|r| vec![r]),
                    draw,
                    ..rc
                },
            )
        }
        Command::Export { common, schedule } => {
            let (f, rc) = base("export", common);
            (f, RunConfig { schedule, ..rc })
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (config_path, from_flags) = flags(cli.command);
    let rc = match config_path {
        Some(p) => match RunConfig::load(&p) {
            Ok(file) => file.overlay(from_flags),
            Err(e) => {
                eprintln!("error: {e:#}");
                return EXIT_USAGE;
            }
        },
        None => from_flags,
    };
    if let Some(j) = rc.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: cannot size worker pool: {e}");
            return EXIT_RUNTIME;
        }
    }
    match commands::run(rc) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}
