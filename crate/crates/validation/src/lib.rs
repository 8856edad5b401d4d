// SPDX-License-Identifier: Apache-2.0

//! Reporting scaffolding for the acceptance suite.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Duration;

/// Verdict and diagnostics for one criterion.
#[derive(Debug, Default)]
pub struct Outcome {
    pub failed: bool,
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pass(&self) -> bool {
        !self.failed
    }

    pub fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failed = true;
            self.notes.push(format!("violated: {}", what.into()));
        }
    }

    pub fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }

    pub fn runtime(&mut self, elapsed: Duration, limit: Duration) {
        self.note(format!(
            "runtime {:.3} s (limit {:.3} s)",
            elapsed.as_secs_f64(),
            limit.as_secs_f64()
        ));
        self.check(elapsed < limit, "runtime limit");
    }
}

/// Display name and body of a criterion.
pub type Criterion = (&'static str, fn() -> Outcome);

const MAX_NOTES: usize = 30;

/// Runs each criterion, prints a PASS/FAIL line with its notes and returns
/// the number of failures. A panic counts as a failure.
pub fn run(criteria: &[Criterion]) -> usize {
    let mut failed = 0;
    for &(name, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome {
                failed: true,
                notes: vec![format!("panicked: {msg}")],
            }
        });
        println!("criterion {name}: {}", if outcome.pass() { "PASS" } else { "FAIL" });
        for n in outcome.notes.iter().take(MAX_NOTES) {
            println!("    {n}");
        }
        if outcome.notes.len() > MAX_NOTES {
            println!("    ... {} more", outcome.notes.len() - MAX_NOTES);
        }
        failed += usize::from(outcome.failed);
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    failed
}

#[cfg(test)]
mod tests {
    use super::*;

    fn good() -> Outcome {
        let mut o = Outcome::new();
        o.check(true, "fine");
        o
    }

    fn bad() -> Outcome {
        let mut o = Outcome::new();
        o.check(false, "broken");
        o
    }

    fn boom() -> Outcome {
        panic!("boom")
    }

    #[test]
    fn counts_failures_and_panics() {
        assert_eq!(run(&[("a", good), ("b", bad), ("c", boom)]), 2);
    }

    #[test]
    fn runtime_over_limit_fails() {
        let mut o = Outcome::new();
        o.runtime(Duration::from_millis(2), Duration::from_millis(1));
        assert!(!o.pass());
        assert_eq!(o.notes.len(), 2);
    }
}
