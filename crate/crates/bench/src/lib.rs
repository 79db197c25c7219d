// Copyright 2026 The rydqaoa Authors
// SPDX-License-Identifier: Apache-2.0

//! Fixtures shared by the benchmarks.

use rydqaoa_core::QaoaSchedule;

/// Deterministic, non-degenerate schedule of the given depth.
pub fn fixture_schedule(depth: usize) -> QaoaSchedule {
    let flat: Vec<f64> = (0..5 * depth)
        .map(|k| ((k as f64 + 1.0) * 0.618_033_988_7).fract() * 2.0 - 1.0)
        .collect();
    QaoaSchedule::from_flat(&flat).expect("finite angles")
}
