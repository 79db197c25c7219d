// Copyright 2026 The rydqaoa Authors
// SPDX-License-Identifier: Apache-2.0

//! Oracles and reporting for the acceptance run.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rydqaoa_core::C64;

/// Verdict plus a one-line explanation.
pub type Outcome = (bool, String);

/// Fourth-order Runge-Kutta for `dU/dt = -i H(s) U` with the rotating-frame
/// drive `H(s) = -(Ω/2)[[0, e^{iΔs}], [e^{-iΔs}, 0]]`. Row-major 2x2.
pub fn rk4_propagator(omega: f64, delta: f64, t: f64, steps: usize) -> [C64; 4] {
    let rhs = |s: f64, u: &[C64; 4]| -> [C64; 4] {
        let h01 = C64::from_polar(-omega / 2.0, delta * s);
        let h10 = h01.conj();
        let mi = C64::new(0.0, -1.0);
        [mi * h01 * u[2], mi * h01 * u[3], mi * h10 * u[0], mi * h10 * u[1]]
    };
    let axpy = |a: &[C64; 4], b: &[C64; 4], c: f64| -> [C64; 4] { std::array::from_fn(|i| a[i] + b[i] * c) };
    let h = t / steps as f64;
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mut u = [one, zero, zero, one];
    for k in 0..steps {
        let s = k as f64 * h;
        let k1 = rhs(s, &u);
        let k2 = rhs(s + h / 2.0, &axpy(&u, &k1, h / 2.0));
        let k3 = rhs(s + h / 2.0, &axpy(&u, &k2, h / 2.0));
        let k4 = rhs(s + h, &axpy(&u, &k3, h));
        u = std::array::from_fn(|i| u[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0));
    }
    u
}

/// Prints one line per criterion and remembers the failures. A panicking
/// check counts as a failure.
#[derive(Debug, Default)]
pub struct Scoreboard {
    failed: Vec<String>,
}

impl Scoreboard {
    pub fn run(&mut self, id: &str, check: impl FnOnce() -> Outcome) -> bool {
        let t0 = Instant::now();
        let (pass, detail) = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        self.record(id, pass, &format!("{detail}  [{:.1} s]", t0.elapsed().as_secs_f64()));
        pass
    }

    pub fn record(&mut self, id: &str, pass: bool, detail: &str) {
        if !pass {
            self.failed.push(id.to_string());
        }
        self.line(id, if pass { "PASS" } else { "FAIL" }, detail);
    }

    pub fn skip(&self, id: &str, detail: &str) {
        self.line(id, "SKIPPED", detail);
    }

    pub fn failed(&self) -> &[String] {
        &self.failed
    }

    fn line(&self, id: &str, verdict: &str, detail: &str) {
        println!("criterion {id:<5} {verdict:<7} {detail}");
        let _ = std::io::stdout().flush();
    }
}
