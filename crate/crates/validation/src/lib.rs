//! Runner for the acceptance suite: each criterion is a closure returning a
//! verdict, timed against its budget and reported on one line.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            pass,
            detail: detail.into(),
        }
    }
}

pub struct Criterion<'a> {
    /// Criterion number; `None` for supplementary checks.
    pub id: Option<u32>,
    pub title: &'static str,
    pub budget: Duration,
    pub check: Box<dyn FnMut() -> Verdict + 'a>,
}

impl<'a> Criterion<'a> {
    pub fn new(id: u32, title: &'static str, budget: Duration, check: impl FnMut() -> Verdict + 'a) -> Self {
        Criterion {
            id: Some(id),
            title,
            budget,
            check: Box::new(check),
        }
    }

    pub fn supplementary(title: &'static str, budget: Duration, check: impl FnMut() -> Verdict + 'a) -> Self {
        Criterion {
            id: None,
            title,
            budget,
            check: Box::new(check),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: Option<u32>,
    pub pass: bool,
    pub line: String,
}

/// Runs one criterion. A panic or an exceeded budget is a failure.
pub fn evaluate(c: &mut Criterion<'_>) -> Outcome {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(|| (c.check)()));
    let elapsed = start.elapsed();
    let verdict = result.unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Verdict::new(false, format!("panicked: {msg}"))
    });
    let in_budget = elapsed <= c.budget;
    let pass = verdict.pass && in_budget;
    let mut detail = verdict.detail;
    if !in_budget {
        detail = format!("{detail}; over budget");
    }
    let label = match c.id {
        Some(id) => format!("criterion {id:>2}"),
        None => "supplementary".to_string(),
    };
    let line = format!(
        "{label} {} {} ({:.2} s of {} s): {}",
        if pass { "PASS" } else { "FAIL" },
        c.title,
        elapsed.as_secs_f64(),
        c.budget.as_secs(),
        detail
    );
    Outcome { id: c.id, pass, line }
}

/// Runs every check in order, printing one line each.
pub fn run_all(criteria: &mut [Criterion<'_>]) -> Vec<Outcome> {
    criteria
        .iter_mut()
        .map(|c| {
            let outcome = evaluate(c);
            println!("{}", outcome.line);
            outcome
        })
        .collect()
}
