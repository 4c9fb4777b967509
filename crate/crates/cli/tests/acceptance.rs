//! One line per acceptance criterion, exact and finite-difference modes,
//! plus the runtime budget and the corrupted-profile control.
//! Exits nonzero when any line fails.

use std::time::Instant;

use finslerlab::DerivativeMode;
use finslerlab_cli::suite::{run, run_criterion, CriterionResult, SuiteOptions};

const BUDGET_SECONDS: f64 = 60.0;

fn report(label: &str, results: &[CriterionResult], failures: &mut usize) {
    for r in results {
        println!("[{label}] {}", r.line());
        for s in &r.skipped {
            println!("[{label}]   SKIP row {}: {}", s.row, s.reason);
        }
        if !r.passed {
            *failures += 1;
            for c in r.checks.iter().filter(|c| !c.passed) {
                println!("[{label}]   failed check {}: {:.3e} > {:.0e}", c.name, c.max_deviation, c.tolerance);
            }
        }
    }
}

fn verdict(name: &str, passed: bool, detail: String, failures: &mut usize) {
    println!("{} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
    if !passed {
        *failures += 1;
    }
}

fn main() {
    let mut failures = 0;

    let start = Instant::now();
    let exact = run(&SuiteOptions::default());
    let exact_seconds = start.elapsed().as_secs_f64();
    report("exact", &exact, &mut failures);
    verdict(
        "exact suite runtime",
        exact.len() == 8 && exact_seconds < BUDGET_SECONDS,
        format!("{} criteria in {exact_seconds:.2}s (budget {BUDGET_SECONDS}s)", exact.len()),
        &mut failures,
    );

    let fd = run(&SuiteOptions {
        mode: DerivativeMode::Fd,
        ..Default::default()
    });
    report("fd", &fd, &mut failures);

    // The sign-flipped profile must fail criterion 1 with a finite drift of
    // the principal curvatures away from ±1.
    let corrupted = run_criterion(
        1,
        &SuiteOptions {
            corrupted_phi: true,
            ..Default::default()
        },
    );
    let drift = corrupted
        .checks
        .iter()
        .filter(|c| c.name.starts_with("curvatures"))
        .map(|c| c.max_deviation)
        .fold(0.0f64, f64::max);
    verdict(
        "negative control, corrupted helicoid profile",
        !corrupted.passed && drift.is_finite() && drift > corrupted.tolerance,
        format!("criterion 1 {} with eigenvalue drift {drift:.3e}", if corrupted.passed { "passed" } else { "failed" }),
        &mut failures,
    );

    if failures > 0 {
        println!("acceptance: {failures} failing line(s)");
        std::process::exit(1);
    }
    println!("acceptance: all lines pass");
}
