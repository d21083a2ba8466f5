//! Tally of failed checks for one acceptance criterion.

use std::time::{Duration, Instant};

#[derive(Debug, Default)]
pub struct Criterion {
    pub failures: Vec<String>,
}

impl Criterion {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn near(&mut self, label: &str, got: f64, want: f64, tol: f64) {
        self.check((got - want).abs() <= tol, || {
            format!("{label}: got {got:.10}, expected {want} ± {tol:e}")
        });
    }

    pub fn within(&mut self, start: Instant, limit: Duration) {
        let t = start.elapsed();
        self.check(t <= limit, || format!("runtime {t:?} exceeds {limit:?}"));
    }
}
