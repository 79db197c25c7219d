// Copyright 2026 The rydqaoa Authors
// SPDX-License-Identifier: Apache-2.0

//! Cross-module invariants.

use std::f64::consts::PI;

use proptest::prelude::*;
use rydqaoa_core::experiments::{fit_exponential, perturb_schedule};
use rydqaoa_core::optimize::minimize_dual_annealing;
use rydqaoa_core::rydberg::physical_logical_operator;
use rydqaoa_core::*;

fn angles(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-PI..PI, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cost_is_a_probability(x in angles(10)) {
        for key in ["ghz-5", "perfect-encoder", "cluster-full-4"] {
            let obj = Objective::new(lookup_target(key).unwrap(), Model::Ideal, 2, None).unwrap();
            let c = evaluate_cost(&obj, &x).unwrap();
            prop_assert!((0.0..=1.0).contains(&c));
        }
    }

    #[test]
    fn cost_is_periodic(x in angles(5), k in 0usize..5, turns in -3i32..=3) {
        let obj = Objective::new(lookup_target("ame-5").unwrap(), Model::Ideal, 1, None).unwrap();
        let mut y = x.clone();
        y[k] += 2.0 * PI * f64::from(turns);
        let a = evaluate_cost(&obj, &x).unwrap();
        let b = evaluate_cost(&obj, &y).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn physical_operator_is_a_contraction(x in angles(5)) {
        let seq = compile_schedule(&QaoaSchedule::from_flat(&x).unwrap(), &DeviceConfig::new(3)).unwrap();
        let m = physical_logical_operator(&seq).unwrap();
        // every column keeps at most unit norm
        for j in 0..8 {
            let n: f64 = (0..8).map(|i| m[(i, j)].norm_sqr()).sum();
            prop_assert!(n <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn perturbation_stays_within_magnitude(x in angles(10), r in 0.0f64..0.2, seed in any::<u64>(), draw in any::<u64>()) {
        let s = QaoaSchedule::from_flat(&x).unwrap();
        let noise = NoiseConfig::new(r, 1, seed).unwrap();
        let p = perturb_schedule(&s, &noise, draw).unwrap();
        for (a, b) in s.to_flat().iter().zip(p.to_flat()) {
            let d = rydqaoa_core::ansatz::wrap_angle(b - a).abs();
            prop_assert!(d <= PI * r + 1e-12);
        }
    }

    #[test]
    fn fit_recovers_exact_exponentials(a in 0.01f64..1.0, lambda in 0.05f64..2.0) {
        let ps: Vec<f64> = (1..=8).map(f64::from).collect();
        let inf: Vec<f64> = ps.iter().map(|p| a * (-lambda * p).exp()).collect();
        let fit = fit_exponential(&ps, &inf).unwrap();
        prop_assert!((fit.lambda - lambda).abs() < 1e-9);
        prop_assert!((fit.a - a).abs() < 1e-9 * a.max(1.0));
        prop_assert!((fit.correlation + 1.0).abs() < 1e-9);
    }

    #[test]
    fn annealer_never_leaves_the_box(lo in -5.0f64..0.0, width in 0.5f64..6.0, seed in any::<u64>()) {
        let hi = lo + width;
        let cfg = OptimizerConfig {
            bounds: (lo, hi),
            max_evaluations: 400,
            target_cost: f64::NEG_INFINITY,
            ..OptimizerConfig::default()
        };
        let mut inside = true;
        let out = minimize_dual_annealing(
            |x: &[f64]| {
                inside &= x.iter().all(|v| (lo..=hi).contains(v));
                x.iter().map(|v| (v - 0.3).powi(2)).sum()
            },
            3,
            &cfg,
            seed,
            None,
            false,
        )
        .unwrap();
        prop_assert!(inside);
        prop_assert!(out.x.iter().all(|v| (lo..=hi).contains(v)));
        prop_assert!(out.evaluations <= 400);
    }
}
