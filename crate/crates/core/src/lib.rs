// Copyright 2026 The rydqaoa Authors
// SPDX-License-Identifier: Apache-2.0

//! Variational preparation of entangled states and circuits on a chain of
//! Rydberg atoms.

pub mod ansatz;
pub mod error;
pub mod experiments;
pub mod gates;
pub mod optimize;
pub mod qcore;
pub mod rydberg;
pub mod targets;

pub use ansatz::{IdealSimulator, LayerAngles, QaoaSchedule};
pub use error::{Error, Result};
pub use experiments::{NoiseConfig, SweepRecord};
pub use gates::{ChainLayout, GeneratorKind};
pub use optimize::{dual_anneal, evaluate_cost, Model, Objective, OptResult, OptimizerConfig};
pub use qcore::{ComplexMatrix, DiagonalOperator, QuantumState, C64};
pub use rydberg::{compile_schedule, DeviceConfig, Pulse, PulseSequence};
pub use targets::{lookup_target, TargetKind, TargetSpec};
