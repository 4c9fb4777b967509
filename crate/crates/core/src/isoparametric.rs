//! Transnormal and isoparametric checks of scalar fields on sampled level sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, GeometryError, Result};
use crate::expand::expand;
use crate::field::{laplacians, ScalarField, VolumeForm};
use crate::hypersurface::{shape_operator, Immersion, Orientation, ShapeOptions};
use crate::linalg::norm;
use crate::metric::MetricModel;

/// Minimum number of in-domain points on every level.
pub const MIN_SAMPLES: usize = 5;
/// Bisection tolerance along a ray.
pub const RAY_TOL: f64 = 1e-12;
/// Accepted `|f(x) − t|`.
pub const LEVEL_TOL: f64 = 1e-10;
/// Spread allowed for `H_n` on a level of a passing field.
pub const MEAN_CURVATURE_TOL: f64 = 1e-6;
/// Allowed `|Δ_σ f − Δ̂f + S(∇f)|`.
pub const CLOSURE_TOL: f64 = 1e-6;

pub const SCOPE_NOTE: &str = "constancy is checked on sampled points of the listed levels only; \
smoothness of a(t) and continuity of b(t) are not certified";

/// Axis-aligned box from which ray origins are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// How level sets are sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub levels: Vec<f64>,
    pub samples_per_level: usize,
    pub boxes: Vec<SeedBox>,
    /// Ray length; rays run over `[−reach, reach]` from the origin.
    pub reach: f64,
    pub seed: u64,
}

/// Points of one level set with `df ∈ A*`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelPoints {
    pub level: f64,
    pub points: Vec<Vec<f64>>,
}

/// Draws points of `{f = t}` by bisection along random rays.
pub fn sample_levels(model: &MetricModel, field: &ScalarField, sampling: &Sampling) -> Result<Vec<LevelPoints>> {
    let m = model.dim();
    if sampling.boxes.is_empty() {
        return Err(GeometryError::Config("level sampling needs at least one seed box".into()));
    }
    for b in &sampling.boxes {
        check_dim(m, b.lower.len())?;
        check_dim(m, b.upper.len())?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    let want = sampling.samples_per_level.max(MIN_SAMPLES);
    let budget = 200 * want;
    sampling
        .levels
        .iter()
        .map(|&t| {
            let mut points = Vec::with_capacity(want);
            let mut tries = 0;
            while points.len() < want && tries < budget {
                tries += 1;
                let b = &sampling.boxes[rng.random_range(0..sampling.boxes.len())];
                let origin: Vec<f64> = (0..m)
                    .map(|i| b.lower[i] + (b.upper[i] - b.lower[i]) * rng.random::<f64>())
                    .collect();
                let dir = loop {
                    let d: Vec<f64> = (0..m).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
                    let l = norm(&d);
                    if l > 0.1 && l <= 1.0 {
                        break d.iter().map(|c| c / l).collect::<Vec<f64>>();
                    }
                };
                if let Some(x) = ray_root(field, &origin, &dir, t, sampling.reach) {
                    if admissible(model, field, &x) {
                        points.push(x);
                    }
                }
            }
            if points.len() < MIN_SAMPLES {
                return Err(GeometryError::InsufficientSamples {
                    level: t,
                    found: points.len(),
                    required: MIN_SAMPLES,
                });
            }
            Ok(LevelPoints { level: t, points })
        })
        .collect()
}

fn ray_root(field: &ScalarField, origin: &[f64], dir: &[f64], t: f64, reach: f64) -> Option<Vec<f64>> {
    let at = |s: f64| -> Vec<f64> { origin.iter().zip(dir).map(|(o, d)| o + s * d).collect() };
    let g = |s: f64| field.value(&at(s)) - t;
    const STEPS: usize = 64;
    let h = reach / STEPS as f64;
    // Nearest sign change on either side of the origin.
    for k in 0..STEPS {
        for sign in [1.0, -1.0] {
            let (mut lo, mut hi) = (sign * k as f64 * h, sign * (k + 1) as f64 * h);
            let (mut glo, ghi) = (g(lo), g(hi));
            if !(glo.is_finite() && ghi.is_finite()) || glo * ghi > 0.0 {
                continue;
            }
            while (hi - lo).abs() > RAY_TOL {
                let mid = 0.5 * (lo + hi);
                let gm = g(mid);
                if gm * glo > 0.0 {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            let x = at(0.5 * (lo + hi));
            return (g(0.5 * (lo + hi)).abs() <= LEVEL_TOL).then_some(x);
        }
    }
    None
}

fn admissible(model: &MetricModel, field: &ScalarField, x: &[f64]) -> bool {
    if model.check_point(x).is_err() {
        return false;
    }
    let df = field.differential(x, model);
    norm(&df) > 0.0 && model.in_dual_cone(x, &df).unwrap_or(false)
}

/// Range of one quantity over a level, with the points attaining the extremes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spread {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
    pub min_point: Vec<f64>,
    pub max_point: Vec<f64>,
}

impl Spread {
    fn of(points: &[Vec<f64>], vals: &[f64]) -> Spread {
        let mut lo = 0;
        let mut hi = 0;
        for (k, v) in vals.iter().enumerate() {
            if *v < vals[lo] {
                lo = k;
            }
            if *v > vals[hi] {
                hi = k;
            }
        }
        Spread {
            mean: vals.iter().sum::<f64>() / vals.len() as f64,
            min: vals[lo],
            max: vals[hi],
            spread: vals[hi] - vals[lo],
            min_point: points[lo].clone(),
            max_point: points[hi].clone(),
        }
    }

    /// `spread ≤ tol (1 + |mean|)`.
    pub fn constant(&self, tol: f64) -> bool {
        self.spread <= tol * (1.0 + self.mean.abs())
    }
}

/// Per-level values of `a = F(∇f)` and both Laplacians.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSummary {
    pub level: f64,
    pub samples: usize,
    pub a: Spread,
    pub hat: Option<Spread>,
    pub sigma: Option<Spread>,
    /// Spread of `H_n` along the level, when computed.
    pub mean_curvature: Option<Spread>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsoparametricVerdict {
    pub field: String,
    /// `"primal"` or `"dual"`.
    pub path: String,
    pub tolerance: f64,
    pub levels: Vec<LevelSummary>,
    pub transnormal: bool,
    /// `Δ̂f` constant on every level.
    pub isoparametric_hat: Option<bool>,
    /// `Δ_σ f` constant on every level.
    pub isoparametric_sigma: Option<bool>,
    /// `max |Δ_σ f − Δ̂f + S(∇f)|`.
    pub max_closure_residual: Option<f64>,
    /// `max |S(∇f)|`; when it vanishes both flavors must agree.
    pub max_s: Option<f64>,
    /// Constant `H_n` on every level, checked for passing fields.
    pub constant_mean_curvature: Option<bool>,
    pub scope_note: String,
}

impl IsoparametricVerdict {
    /// Transnormal and isoparametric for every Laplacian flavor computed.
    pub fn passed(&self) -> bool {
        self.transnormal
            && self.isoparametric_hat.unwrap_or(true)
            && self.isoparametric_sigma.unwrap_or(true)
            && self.max_closure_residual.is_none_or(|r| r <= CLOSURE_TOL)
            && self.constant_mean_curvature.unwrap_or(true)
    }
}

fn verdict(field: &ScalarField, path: &str, tol: f64, levels: Vec<LevelSummary>) -> IsoparametricVerdict {
    let transnormal = levels.iter().all(|l| l.a.constant(tol));
    let flavor = |get: fn(&LevelSummary) -> &Option<Spread>| -> Option<bool> {
        let spreads: Option<Vec<&Spread>> = levels.iter().map(|l| get(l).as_ref()).collect();
        spreads.map(|s| transnormal && s.iter().all(|s| s.constant(tol)))
    };
    IsoparametricVerdict {
        field: field.name().to_string(),
        path: path.to_string(),
        tolerance: tol,
        transnormal,
        isoparametric_hat: flavor(|l| &l.hat),
        isoparametric_sigma: flavor(|l| &l.sigma),
        levels,
        max_closure_residual: None,
        max_s: None,
        constant_mean_curvature: None,
        scope_note: SCOPE_NOTE.to_string(),
    }
}

/// Spread of `F(∇f) = F*(df)` on each level.
pub fn transnormal_check(
    model: &MetricModel,
    field: &ScalarField,
    levels: &[LevelPoints],
    tol: f64,
) -> Result<IsoparametricVerdict> {
    let summaries = levels
        .iter()
        .map(|lv| {
            require_samples(lv)?;
            let a = lv
                .points
                .iter()
                .map(|x| model.eval_dual(x, &field.differential(x, model)))
                .collect::<Result<Vec<_>>>()?;
            Ok(LevelSummary {
                level: lv.level,
                samples: lv.points.len(),
                a: Spread::of(&lv.points, &a),
                hat: None,
                sigma: None,
                mean_curvature: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(verdict(field, "primal", tol, summaries))
}

fn require_samples(lv: &LevelPoints) -> Result<()> {
    if lv.points.len() < MIN_SAMPLES {
        return Err(GeometryError::InsufficientSamples {
            level: lv.level,
            found: lv.points.len(),
            required: MIN_SAMPLES,
        });
    }
    Ok(())
}

/// Primal path: `F(∇f)`, `Δ̂f` and `Δ_σ f` through the Legendre inverse,
/// then constancy of `H_n` on the levels of a passing field.
pub fn isoparametric_check(
    model: &MetricModel,
    volume: &VolumeForm,
    field: &ScalarField,
    levels: &[LevelPoints],
    tol: f64,
) -> Result<IsoparametricVerdict> {
    let mut closure = 0.0f64;
    let mut s_max = 0.0f64;
    let summaries = levels
        .iter()
        .map(|lv| {
            require_samples(lv)?;
            let reports = lv
                .points
                .iter()
                .map(|x| laplacians(model, volume, field, x))
                .collect::<Result<Vec<_>>>()?;
            for r in &reports {
                closure = closure.max(r.closure_residual.abs());
                s_max = s_max.max(r.s_of_gradient.abs());
            }
            let col = |f: fn(&crate::field::LaplacianReport) -> f64| -> Vec<f64> { reports.iter().map(f).collect() };
            Ok(LevelSummary {
                level: lv.level,
                samples: lv.points.len(),
                a: Spread::of(&lv.points, &col(|r| r.gradient_norm)),
                hat: Some(Spread::of(&lv.points, &col(|r| r.hat))),
                sigma: Some(Spread::of(&lv.points, &col(|r| r.sigma))),
                mean_curvature: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut v = verdict(field, "primal", tol, summaries);
    v.max_closure_residual = Some(closure);
    v.max_s = Some(s_max);
    if v.passed() {
        let mut all = true;
        for (summary, lv) in v.levels.iter_mut().zip(levels) {
            let h = lv
                .points
                .iter()
                .map(|x| level_mean_curvature(model, volume, field, x))
                .collect::<Result<Vec<_>>>()?;
            let spread = Spread::of(&lv.points, &h);
            all &= spread.spread <= MEAN_CURVATURE_TOL;
            summary.mean_curvature = Some(spread);
        }
        v.constant_mean_curvature = Some(all);
    }
    Ok(v)
}

/// `H_n` of the level set through `x` with `n = ∇f / F(∇f)`.
pub fn level_mean_curvature(model: &MetricModel, volume: &VolumeForm, field: &ScalarField, x: &[f64]) -> Result<f64> {
    let imm = Immersion::level_set(field.clone(), x.to_vec())?;
    let u = vec![0.0; model.dim() - 1];
    let report = shape_operator(
        model,
        &imm,
        &u,
        &ShapeOptions {
            orientation: Orientation::Default,
            volume: Some(volume.clone()),
            ..Default::default()
        },
    )?;
    Ok(report.volume_mean_curvature.unwrap_or(report.mean_curvature))
}

/// Dual path for Minkowski models: `F*(df)` and `g*^{ij}(df) f_ij`, with no
/// Legendre inversion. Both Laplacian flavors coincide there under Lebesgue measure.
pub fn minkowski_dual_check(
    model: &MetricModel,
    field: &ScalarField,
    levels: &[LevelPoints],
    tol: f64,
) -> Result<IsoparametricVerdict> {
    if !model.is_minkowski() || !model.has_explicit_dual() {
        return Err(GeometryError::Unsupported(
            "the dual path needs a Minkowski model with a closed-form dual".into(),
        ));
    }
    let m = model.dim();
    let summaries = levels
        .iter()
        .map(|lv| {
            require_samples(lv)?;
            let mut a = Vec::with_capacity(lv.points.len());
            let mut b = Vec::with_capacity(lv.points.len());
            for x in &lv.points {
                let fj = expand(model.derivatives(), x, 2, |v| field.eval(v));
                let df = fj.gradient(m);
                if !model.in_dual_cone(x, &df)? {
                    return Err(GeometryError::DualConeViolation(format!("df = {df:?} at x = {x:?}")));
                }
                let t = model
                    .dual_squared_expansion(x, &df, 2)
                    .expect("closed-form dual checked above");
                a.push(t.value().sqrt());
                let mut lap = 0.0;
                for i in 0..m {
                    for j in 0..m {
                        lap += 0.5 * t.partial(&[m + i, m + j]) * fj.partial(&[i, j]);
                    }
                }
                b.push(lap);
            }
            let bs = Spread::of(&lv.points, &b);
            Ok(LevelSummary {
                level: lv.level,
                samples: lv.points.len(),
                a: Spread::of(&lv.points, &a),
                hat: Some(bs.clone()),
                sigma: Some(bs),
                mean_curvature: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut v = verdict(field, "dual", tol, summaries);
    v.max_s = Some(0.0);
    Ok(v)
}
