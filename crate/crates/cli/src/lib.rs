//! Scenario runner for `finslerlab`: JSON scenarios in, JSON reports out.
//!
//! Exit codes: 0 when every check passes, 1 when one fails, 2 for
//! configuration errors.

pub mod commands;
pub mod report;
pub mod scenario;
pub mod suite;

pub use commands::{run, summary_lines, Command};
pub use report::{Check, Report, Tracker, Worst};
pub use scenario::{ConfigError, Overrides, Scenario};
pub use suite::{CriterionResult, SuiteOptions};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
