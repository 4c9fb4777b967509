//! The five commands. Each turns a scenario into a [`Report`]; scenario
//! problems surface as [`ConfigError`] (exit 2), geometric failures as failed
//! checks (exit 1).

use finslerlab::isoparametric::LevelPoints;
use finslerlab::phi::validate_phi;
use finslerlab::zoo::killing_check;
use finslerlab::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::report::{Check, Report, Tracker};
use crate::scenario::{split_seed, ConfigError, Scenario};
use crate::suite::{self, SuiteOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    ValidateMetric,
    SurfaceReport,
    IsoparametricCheck,
    KropinaCompare,
    ReproducePaper,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::ValidateMetric => "validate-metric",
            Command::SurfaceReport => "surface-report",
            Command::IsoparametricCheck => "isoparametric-check",
            Command::KropinaCompare => "kropina-compare",
            Command::ReproducePaper => "reproduce-paper",
        }
    }
}

/// Number of random points used by `validate-metric`.
pub const METRIC_SAMPLES: usize = 50;
const SAMPLE_ATTEMPTS: usize = 100_000;

pub fn run(command: Command, scenario: &Scenario) -> std::result::Result<Report, ConfigError> {
    let echo = serde_json::to_value(scenario).expect("scenarios serialize");
    let (checks, payload) = match command {
        Command::ValidateMetric => validate_metric(scenario)?,
        Command::SurfaceReport => surface_report(scenario)?,
        Command::IsoparametricCheck => isoparametric(scenario)?,
        Command::KropinaCompare => kropina_compare(scenario)?,
        Command::ReproducePaper => reproduce_paper(scenario),
    };
    Ok(Report::new(command.name(), echo, checks, payload))
}

type Outcome = (Vec<Check>, Value);

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("payloads serialize")
}

fn validate_metric(sc: &Scenario) -> std::result::Result<Outcome, ConfigError> {
    let model = sc.metric()?;
    let tol = sc.tolerance();
    let mut checks = Vec::new();
    let mut payload = serde_json::Map::new();

    let profile = match model.kind() {
        MetricKind::AlphaBeta { phi, b0, .. } => Some((phi.clone(), *b0)),
        MetricKind::DualAlphaBeta { beta_star, phi } => Some((phi.clone(), linalg::norm(beta_star))),
        _ => None,
    };
    if let Some((phi, b0)) = profile {
        let v = validate_phi(&phi, b0, 200)?;
        checks.push(Check::flag("profile convexity", v.passed));
        payload.insert("profile".into(), to_value(&v));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(split_seed(sc.seed(), 0));
    let mut points = Vec::new();
    for _ in 0..METRIC_SAMPLES {
        match suite::try_cone_sample(&model, &mut rng, SAMPLE_ATTEMPTS) {
            Some(p) => points.push(p),
            None => {
                return Err(ConfigError(format!(
                    "no well-conditioned cone samples found in [-0.8, 0.8]^{} after {SAMPLE_ATTEMPTS} draws",
                    model.dim()
                )))
            }
        }
    }
    // Unit wind is a property of the data, not of a sample: a violation is a configuration error.
    for (x, _) in &points {
        model.check_point(x)?;
    }

    let positivity = points.iter().map(|(x, y)| {
        let s: Vec<f64> = x.iter().chain(y).copied().collect();
        let e = fundamental_tensor(&model, x, y).map_or(f64::NAN, |p| linalg::min_eigenvalue(&p.g));
        (s, e)
    });
    checks.push(suite::positive_check("fundamental tensor is positive definite", positivity));
    let mut euler = Tracker::new("g(y, y) = F(y)^2", tol);
    let mut legendre_rt = Tracker::new("Legendre round trip", tol);
    for (x, y) in &points {
        let s: Vec<f64> = x.iter().chain(y).copied().collect();
        match (model.eval(x, y), fundamental_tensor(&model, x, y)) {
            (Ok(f), Ok(p)) => {
                let gyy = linalg::bilinear(&p.g, y, y);
                euler.deviation(&s, (gyy - f * f).abs() / (1.0 + f * f), &[gyy], &[f * f]);
            }
            (Err(e), _) | (_, Err(e)) => euler.error(&s, e),
        }
        match legendre(&model, x, y).and_then(|xi| legendre_inverse(&model, x, &xi)) {
            Ok(back) => {
                let dev = linalg::max_abs_diff(&back, y) / (1.0 + linalg::norm(y));
                legendre_rt.deviation(&s, dev, &back, y);
            }
            Err(e) => legendre_rt.error(&s, e),
        }
    }
    checks.push(euler.finish());
    checks.push(legendre_rt.finish());

    if let MetricKind::Kropina { h, wind } = model.kind() {
        let xs: Vec<Vec<f64>> = points.iter().map(|(x, _)| x.clone()).collect();
        let k = killing_check(h, wind, &xs, model.derivatives())?;
        // Informational: Kropina metrics need not come from Killing winds.
        payload.insert(
            "killing".into(),
            json!({"max_r": k.max_r, "tolerance": k.tolerance, "passed": k.passed}),
        );
    }
    payload.insert("dim".into(), json!(model.dim()));
    payload.insert("minkowski".into(), json!(model.is_minkowski()));
    payload.insert("explicit_dual".into(), json!(model.has_explicit_dual()));
    payload.insert("samples".into(), json!(points.len()));
    Ok((checks, Value::Object(payload)))
}

fn surface_report(sc: &Scenario) -> std::result::Result<Outcome, ConfigError> {
    let model = sc.metric()?;
    let desc = sc.surface()?;
    let imm = desc.immersion(model.dim())?;
    let samples = desc.parameter_samples(imm.param_dim())?;
    let tol = sc.tolerance();
    let options = ShapeOptions {
        orientation: desc.orientation.clone(),
        volume: sc.volume.clone(),
        ..Default::default()
    };
    let expect = sc.expect.clone().unwrap_or_default();

    let mut pipeline = Tracker::new("shape operator at every sample", tol);
    let mut unit = Tracker::new("F(n) = 1", tol);
    let mut adjoint = Tracker::new("shape operator is self-adjoint", tol);
    let mut curv = expect
        .principal_curvatures
        .as_ref()
        .map(|_| Tracker::new("principal curvatures match expectation", tol));
    let mut distinct = expect
        .distinct
        .map(|_| Tracker::new("number of distinct principal curvatures", 0.0));
    let mut umbilic = Tracker::new("umbilic flag", 0.0);
    let mut minimal = Tracker::new("minimal flag", 0.0);
    let mut reports = Vec::new();
    let mut errors = Vec::new();
    for u in &samples {
        match shape_operator(&model, &imm, u, &options) {
            Ok(r) => {
                pipeline.bound(u, 0.0);
                unit.bound(u, r.unit_residual);
                adjoint.bound(u, r.self_adjoint_residual);
                if let (Some(t), Some(want)) = (curv.as_mut(), &expect.principal_curvatures) {
                    t.record(u, &r.principal_curvatures, want);
                }
                if let (Some(t), Some(want)) = (distinct.as_mut(), expect.distinct) {
                    t.record(u, &[r.multiplicities.len() as f64], &[want as f64]);
                }
                let (is_umbilic, is_minimal) = umbilic_minimal_flags(&r, tol);
                let b = |v: bool| if v { 1.0 } else { 0.0 };
                if let Some(want) = expect.umbilic {
                    umbilic.record(u, &[b(is_umbilic)], &[b(want)]);
                }
                if let Some(want) = expect.minimal {
                    minimal.record(u, &[b(is_minimal)], &[b(want)]);
                }
                reports.push(json!({
                    "report": to_value(&r),
                    "umbilic": is_umbilic,
                    "minimal": is_minimal,
                }));
            }
            Err(e) => {
                pipeline.error(u, &e);
                errors.push(json!({"u": u, "error": e.to_string()}));
            }
        }
    }
    let mut checks = vec![pipeline.finish()];
    if !reports.is_empty() {
        checks.push(unit.finish());
        checks.push(adjoint.finish());
    }
    checks.extend(curv.map(Tracker::finish));
    checks.extend(distinct.map(Tracker::finish));
    if expect.umbilic.is_some() {
        checks.push(umbilic.finish());
    }
    if expect.minimal.is_some() {
        checks.push(minimal.finish());
    }
    if expect.constant == Some(true) {
        let width = reports
            .iter()
            .map(|r| r["report"]["principal_curvatures"].as_array().map_or(0, Vec::len))
            .min()
            .unwrap_or(0);
        for i in 0..width {
            let vals: Vec<(Vec<f64>, f64)> = reports
                .iter()
                .map(|r| {
                    let u = serde_json::from_value(r["report"]["u"].clone()).unwrap_or_default();
                    (u, r["report"]["principal_curvatures"][i].as_f64().unwrap_or(f64::NAN))
                })
                .collect();
            checks.push(suite::spread_check(&format!("principal curvature {} constant", i + 1), tol, &vals));
        }
    }
    let payload = json!({
        "samples": reports,
        "errors": errors,
        "sample_count": samples.len(),
    });
    Ok((checks, payload))
}

fn isoparametric(sc: &Scenario) -> std::result::Result<Outcome, ConfigError> {
    let model = sc.metric()?;
    let field = sc
        .field
        .as_ref()
        .ok_or_else(|| ConfigError("scenario has no field".into()))?
        .build(model.dim())?;
    let sampling = sc.sampling(model.dim())?;
    let volume = sc.volume.clone().unwrap_or_default();
    let tol = sc.tolerance();
    let levels = match sample_levels(&model, &field, &sampling) {
        Ok(l) => l,
        Err(e @ GeometryError::InsufficientSamples { .. }) => {
            return Ok((vec![Check::failed("level sampling", tol, e, vec![])], Value::Null))
        }
        Err(e) => return Err(e.into()),
    };
    let points = |lv: &[LevelPoints]| lv.iter().map(|l| to_value(l)).collect::<Vec<_>>();
    let mut checks = Vec::new();
    let mut payload = serde_json::Map::new();
    payload.insert("levels".into(), Value::Array(points(&levels)));
    match isoparametric_check(&model, &volume, &field, &levels, tol) {
        Ok(primal) => {
            checks.push(Check::flag("transnormal", primal.transnormal));
            checks.push(Check::flag("isoparametric (primal path)", primal.passed()));
            if model.is_minkowski() && model.has_explicit_dual() {
                match minkowski_dual_check(&model, &field, &levels, tol) {
                    Ok(dual) => {
                        checks.push(Check::flag("isoparametric (dual path)", dual.passed()));
                        let agree = tol.min(1e-8).max(match model.derivatives() {
                            DerivativeMode::Exact => 0.0,
                            DerivativeMode::Fd => suite::FD_TOL,
                        });
                        checks.push(suite::path_agreement("primal and dual paths agree", agree, &primal, &dual));
                        payload.insert("dual".into(), to_value(&dual));
                    }
                    Err(e) => checks.push(Check::failed("isoparametric (dual path)", tol, e, vec![])),
                }
            }
            payload.insert("primal".into(), to_value(&primal));
        }
        Err(e) => checks.push(Check::failed("isoparametric (primal path)", tol, e, vec![])),
    }
    Ok((checks, Value::Object(payload)))
}

fn kropina_compare(sc: &Scenario) -> std::result::Result<Outcome, ConfigError> {
    let model = sc.metric()?;
    if !matches!(model.kind(), MetricKind::Kropina { .. }) {
        return Err(ConfigError("kropina-compare needs a kropina metric".into()));
    }
    let desc = sc.surface()?;
    let imm = desc.immersion(model.dim())?;
    let samples = desc.parameter_samples(imm.param_dim())?;
    let tol = sc.tolerance();
    Ok(
        match kropina_equivalence_report(&model, &imm, &samples, &desc.orientation, tol) {
            Ok(c) => {
                let mut checks = suite::comparison_checks("Kropina vs navigation", &c);
                checks.push(Check::flag("comparison verdict", c.passed));
                (checks, to_value(&c))
            }
            Err(e) => {
                let sample = match &e {
                    GeometryError::NotKilling { point, .. } | GeometryError::NormalExcluded(point) => point.clone(),
                    _ => vec![],
                };
                (vec![Check::failed("Kropina vs navigation", tol, e, sample)], Value::Null)
            }
        },
    )
}

fn reproduce_paper(sc: &Scenario) -> Outcome {
    let spec = sc.suite.clone().unwrap_or_default();
    let opts = SuiteOptions {
        mode: sc.mode(),
        corrupted_phi: spec.corrupted_phi,
        seed: sc.seed(),
        only: spec.only,
    };
    let results = suite::run(&opts);
    let checks = results
        .iter()
        .map(|r| Check {
            name: format!("criterion {}: {}", r.id, r.title),
            passed: r.passed,
            max_deviation: r.max_deviation,
            tolerance: r.tolerance,
            samples: r.checks.iter().map(|c| c.samples).sum(),
            worst: r.checks.iter().find(|c| !c.passed).and_then(|c| c.worst.clone()),
            error: r.checks.iter().find_map(|c| c.error.clone()),
        })
        .collect();
    (checks, json!({ "criteria": to_value(&results) }))
}

/// One line per check, plus skipped classification rows for `reproduce-paper`.
pub fn summary_lines(report: &Report) -> Vec<String> {
    let mut lines: Vec<String> = report
        .checks
        .iter()
        .map(|c| {
            let mut line = format!(
                "{} {} | max deviation {:.3e} (tol {:.0e})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.max_deviation,
                c.tolerance
            );
            if let Some(e) = &c.error {
                line.push_str(&format!(" | {e}"));
            }
            line
        })
        .collect();
    for crit in report.payload["criteria"].as_array().into_iter().flatten() {
        for s in crit["skipped"].as_array().into_iter().flatten() {
            lines.push(format!(
                "SKIP criterion {} row {}: {}",
                crit["id"],
                s["row"].as_str().unwrap_or("?"),
                s["reason"].as_str().unwrap_or("")
            ));
        }
    }
    lines
}
