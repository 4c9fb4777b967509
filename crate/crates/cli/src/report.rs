//! Verification reports and their JSON encoding.
//!
//! Reals are written as `{:.16e}`, i.e. 17 significant digits, so every value
//! round-trips exactly. Object keys come out sorted, so two runs of the same
//! scenario differ only in `wall_clock_seconds`.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = "finslerlab";

/// Where a check deviated most, with both compared values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Worst {
    pub sample: Vec<f64>,
    pub got: Vec<f64>,
    pub want: Vec<f64>,
}

/// One named comparison against a tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst: Option<Worst>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    /// A check that could not run to completion.
    pub fn failed(name: impl Into<String>, tolerance: f64, error: impl ToString, sample: Vec<f64>) -> Check {
        Check {
            name: name.into(),
            passed: false,
            max_deviation: f64::INFINITY,
            tolerance,
            samples: 0,
            worst: Some(Worst {
                sample,
                got: vec![],
                want: vec![],
            }),
            error: Some(error.to_string()),
        }
    }

    /// A pass/fail predicate with no numeric deviation.
    pub fn flag(name: impl Into<String>, passed: bool) -> Check {
        Check {
            name: name.into(),
            passed,
            max_deviation: if passed { 0.0 } else { 1.0 },
            tolerance: 0.0,
            samples: 1,
            worst: None,
            error: None,
        }
    }
}

/// Accumulates `max |got − want|` over samples; the check passes iff it is at most `tol`.
#[derive(Debug, Clone)]
pub struct Tracker {
    name: String,
    tol: f64,
    max: f64,
    samples: usize,
    worst: Option<Worst>,
    errors: usize,
    /// First error with its sample; numeric samples still set `worst`.
    error: Option<(String, Vec<f64>)>,
}

impl Tracker {
    pub fn new(name: impl Into<String>, tol: f64) -> Tracker {
        Tracker {
            name: name.into(),
            tol,
            max: 0.0,
            samples: 0,
            worst: None,
            errors: 0,
            error: None,
        }
    }

    pub fn record(&mut self, sample: &[f64], got: &[f64], want: &[f64]) {
        let dev = if got.len() == want.len() {
            got.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        self.deviation(sample, dev, got, want);
    }

    /// Records a precomputed deviation, NaN counting as a failure.
    pub fn deviation(&mut self, sample: &[f64], dev: f64, got: &[f64], want: &[f64]) {
        self.samples += 1;
        let dev = if dev.is_nan() { f64::INFINITY } else { dev };
        if self.worst.is_none() || dev > self.max {
            self.max = self.max.max(dev);
            self.worst = Some(Worst {
                sample: sample.to_vec(),
                got: got.to_vec(),
                want: want.to_vec(),
            });
        }
    }

    /// Records a scalar bound `value ≤ tol`.
    pub fn bound(&mut self, sample: &[f64], value: f64) {
        self.deviation(sample, value.abs(), &[value], &[0.0]);
    }

    /// Counts a sample that could not be evaluated. The check fails, but
    /// deviations seen at the other samples are still reported.
    pub fn error(&mut self, sample: &[f64], err: impl ToString) {
        self.samples += 1;
        self.errors += 1;
        if self.error.is_none() {
            self.error = Some((err.to_string(), sample.to_vec()));
        }
    }

    pub fn finish(self) -> Check {
        let numeric = self.worst.is_some();
        let (error, worst) = match self.error {
            Some((msg, sample)) => {
                let msg = if self.errors > 1 {
                    format!("{msg} (and {} more failed samples)", self.errors - 1)
                } else {
                    msg
                };
                let fallback = Worst {
                    sample,
                    got: vec![],
                    want: vec![],
                };
                (Some(msg), Some(self.worst.unwrap_or(fallback)))
            }
            None => (None, self.worst),
        };
        Check {
            passed: error.is_none() && self.samples > 0 && self.max <= self.tol,
            name: self.name,
            max_deviation: if numeric { self.max } else if error.is_some() { f64::INFINITY } else { 0.0 },
            tolerance: self.tol,
            samples: self.samples,
            worst,
            error,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub scenario: Value,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub payload: Value,
    /// The only field that differs between identical runs.
    pub wall_clock_seconds: f64,
}

impl Report {
    pub fn new(command: &str, scenario: Value, checks: Vec<Check>, payload: Value) -> Report {
        Report {
            schema_version: SCHEMA_VERSION,
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            scenario,
            passed: checks.iter().all(|c| c.passed),
            checks,
            payload,
            wall_clock_seconds: 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        to_json(&serde_json::to_value(self).expect("reports serialize"))
    }
}

/// Pretty JSON with every float printed to 17 significant digits.
/// Non-finite reals become `null`, as JSON has no spelling for them.
pub fn to_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, value: &Value, depth: usize) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().unwrap();
                if x.is_finite() {
                    let _ = write!(out, "{x:.16e}");
                } else {
                    out.push_str("null");
                }
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            // Short numeric rows stay on one line.
            if items.iter().all(|v| !v.is_array() && !v.is_object()) {
                out.push('[');
                for (k, v) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, v, depth + 1);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (k, v) in items.iter().enumerate() {
                indent(out, depth + 1);
                write_value(out, v, depth + 1);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            indent(out, depth);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (k, (key, v)) in map.iter().enumerate() {
                indent(out, depth + 1);
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_value(out, v, depth + 1);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            indent(out, depth);
            out.push('}');
        }
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}
