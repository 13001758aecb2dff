//! A small runner for numbered acceptance criteria: each criterion runs in
//! turn, panics are caught, and one `PASS`/`FAIL` line is printed per
//! criterion with its measurement and wall time.

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

/// What a criterion measured and whether it met its tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    /// Passes when every `measured <= tolerance`.
    pub fn within(pairs: &[(f64, f64)], detail: String) -> Verdict {
        Verdict {
            pass: pairs.iter().all(|(m, t)| m.is_finite() && m <= t),
            detail,
        }
    }
}

pub type RunResult = Result<Verdict, Box<dyn std::error::Error>>;

pub struct Criterion {
    pub id: u32,
    pub title: &'static str,
    pub budget: Duration,
    pub run: fn() -> RunResult,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u32,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {}: {} [{:.1} s, budget {} s]",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.title,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }
}

/// Runs one criterion. A panic or error counts as a failure, and so does
/// exceeding the time budget.
pub fn run_one(c: &Criterion) -> Outcome {
    let start = Instant::now();
    let result = panic::catch_unwind(AssertUnwindSafe(c.run));
    let elapsed = start.elapsed();
    let (mut pass, mut detail) = match result {
        Ok(Ok(v)) => (v.pass, v.detail),
        Ok(Err(e)) => (false, format!("error: {e}")),
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            (false, format!("panicked: {msg}"))
        }
    };
    if elapsed > c.budget {
        pass = false;
        detail.push_str("; over time budget");
    }
    Outcome {
        id: c.id,
        title: c.title,
        pass,
        detail,
        elapsed,
        budget: c.budget,
    }
}

/// Runs every criterion, printing each line as it finishes, and returns the
/// outcomes.
pub fn run_all(criteria: &[Criterion]) -> Vec<Outcome> {
    criteria
        .iter()
        .map(|c| {
            let o = run_one(c);
            println!("{}", o.line());
            o
        })
        .collect()
}
