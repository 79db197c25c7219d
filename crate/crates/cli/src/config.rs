// Copyright 2026 The rydqaoa Authors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: JSON file values overlaid by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::Context;
use rydqaoa_core::{DeviceConfig, Model, OptimizerConfig};
use serde::{Deserialize, Serialize};

pub const OUTPUT_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SweepKindArg {
    Depth,
    Noise,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelArg {
    Ideal,
    Physical,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Ideal => Model::Ideal,
            ModelArg::Physical => Model::Physical,
        }
    }
}

/// Every setting a command may read. Embedded in each output record.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub target: Option<String>,
    pub depth: Option<usize>,
    /// Inclusive range `a:b`.
    pub depths: Option<String>,
    pub model: Option<ModelArg>,
    pub kind: Option<SweepKindArg>,
    pub samples: Option<usize>,
    pub noise_r: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub draw: Option<u64>,
    pub seed: Option<u64>,
    pub budget: Option<u64>,
    pub restarts: Option<usize>,
    pub jobs: Option<usize>,
    pub schedule: Option<PathBuf>,
    pub warm_start: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub device: Option<DeviceConfig>,
    pub optimizer: Option<OptimizerConfig>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f; } )*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("invalid config file {}", path.display()))
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(mut self, top: RunConfig) -> Self {
        self.command = top.command;
        overlay!(
            self, top, target, depth, depths, model, kind, samples, noise_r, trials, draw, seed,
            budget, restarts, jobs, schedule, warm_start, out, device, optimizer
        );
        self
    }

    pub fn model(&self) -> Model {
        self.model.unwrap_or(ModelArg::Ideal).into()
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    /// Optimizer settings: config-file block, then model defaults, then flags.
    pub fn optimizer(&self, default_restarts: usize) -> OptimizerConfig {
        let mut cfg = self
            .optimizer
            .clone()
            .unwrap_or_else(|| OptimizerConfig {
                restarts: default_restarts,
                ..OptimizerConfig::for_model(self.model())
            });
        if let Some(b) = self.budget {
            cfg.max_evaluations = b;
        }
        if let Some(r) = self.restarts {
            cfg.restarts = r;
        }
        cfg.rng_seed = self.seed();
        cfg
    }
}

/// Parses an inclusive `a:b` range (or a single depth).
pub fn parse_depths(s: &str) -> anyhow::Result<Vec<usize>> {
    let (a, b) = match s.split_once(':') {
        Some((a, b)) => (a.trim().parse::<usize>()?, b.trim().parse::<usize>()?),
        None => {
            let d = s.trim().parse::<usize>()?;
            (d, d)
        }
    };
    anyhow::ensure!(a >= 1 && a <= b, "depth range `{s}` must satisfy 1 <= a <= b");
    Ok((a..=b).collect())
}
