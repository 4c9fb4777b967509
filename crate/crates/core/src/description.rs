//! Serializable descriptions of metrics, surfaces and fields.
//!
//! These are the records accepted in scenario files. Each resolves to the
//! corresponding library object and is validated on the way.

use serde::{Deserialize, Serialize};

use crate::chart::{CovectorField, RiemannianChart, VectorField};
use crate::error::{GeometryError, Result};
use crate::expand::DerivativeMode;
use crate::field::ScalarField;
use crate::hypersurface::{Immersion, Orientation};
use crate::metric::{kropina_from_navigation, MetricKind, MetricModel};
use crate::phi::PhiFamily;

fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(GeometryError::Config(msg.into()))
}

/// A Riemannian chart by name (`"euclidean"`, `"round-sphere"`, `"s3"`) or in full.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChartSpec {
    Named(String),
    Full(RiemannianChart),
}

impl ChartSpec {
    pub fn resolve(&self, dim: Option<usize>) -> Result<RiemannianChart> {
        let chart = match self {
            ChartSpec::Full(c) => c.clone(),
            ChartSpec::Named(name) => match name.as_str() {
                "euclidean" => RiemannianChart::Euclidean { dim: dim.unwrap_or(3) },
                "round-sphere" | "sphere" => RiemannianChart::RoundSphere { dim: dim.unwrap_or(3) },
                "s3" | "s3-hopf" => RiemannianChart::RoundSphere { dim: 3 },
                other => return config(format!("unknown chart name {other:?}")),
            },
        };
        if let Some(d) = dim {
            if d != chart.dim() {
                return config(format!("chart has dimension {}, scenario says {d}", chart.dim()));
            }
        }
        chart.validate()?;
        Ok(chart)
    }
}

/// A wind field as constant components, `"hopf"`, or in full.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WindSpec {
    Components(Vec<f64>),
    Named(String),
    Full(VectorField),
}

impl WindSpec {
    pub fn resolve(&self) -> Result<VectorField> {
        match self {
            WindSpec::Components(c) => Ok(VectorField::Constant { components: c.clone() }),
            WindSpec::Named(n) if n == "hopf" => Ok(VectorField::Hopf),
            WindSpec::Named(n) => config(format!("unknown wind field {n:?}")),
            WindSpec::Full(v) => Ok(v.clone()),
        }
    }

    fn dim_hint(&self) -> Option<usize> {
        match self {
            WindSpec::Components(c) => Some(c.len()),
            WindSpec::Named(_) => Some(3),
            WindSpec::Full(v) => v.dim(),
        }
    }
}

/// A 1-form as constant components or in full.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CovectorSpec {
    Components(Vec<f64>),
    Full(CovectorField),
}

impl CovectorSpec {
    fn resolve(&self) -> CovectorField {
        match self {
            CovectorSpec::Components(c) => CovectorField::Constant { components: c.clone() },
            CovectorSpec::Full(f) => f.clone(),
        }
    }
}

/// Metric record, e.g. `{"kind": "kropina", "h": "euclidean", "W": [0,0,1], "dim": 3}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricDescription {
    Euclidean {
        dim: usize,
    },
    Riemannian {
        h: ChartSpec,
        #[serde(default)]
        dim: Option<usize>,
    },
    Kropina {
        h: ChartSpec,
        #[serde(rename = "W")]
        wind: WindSpec,
        #[serde(default)]
        dim: Option<usize>,
    },
    AlphaBeta {
        alpha: ChartSpec,
        beta: CovectorSpec,
        phi: PhiFamily,
        b0: f64,
        #[serde(default)]
        excluded: Vec<[f64; 2]>,
        #[serde(default)]
        dim: Option<usize>,
    },
    DualAlphaBeta {
        beta_star: Vec<f64>,
        phi: PhiFamily,
    },
    /// Shorthand for the dual (α, β) space of the helicoid.
    HelicoidSpace {
        a: f64,
        b: f64,
        #[serde(default)]
        corrupted: bool,
    },
}

impl MetricDescription {
    pub fn build(&self, mode: DerivativeMode) -> Result<MetricModel> {
        let model = match self {
            MetricDescription::Euclidean { dim } => MetricModel::euclidean(*dim)?,
            MetricDescription::Riemannian { h, dim } => MetricModel::riemannian(h.resolve(*dim)?)?,
            MetricDescription::Kropina { h, wind, dim } => {
                let chart = h.resolve(dim.or(wind.dim_hint()))?;
                kropina_from_navigation(chart, wind.resolve()?, &[])?
            }
            MetricDescription::AlphaBeta {
                alpha,
                beta,
                phi,
                b0,
                excluded,
                dim,
            } => {
                let beta = beta.resolve();
                let alpha = alpha.resolve(dim.or(Some(beta.dim())))?;
                MetricModel::new(MetricKind::AlphaBeta {
                    alpha,
                    beta,
                    phi: phi.clone(),
                    b0: *b0,
                    excluded: excluded.clone(),
                })?
            }
            MetricDescription::DualAlphaBeta { beta_star, phi } => MetricModel::new(MetricKind::DualAlphaBeta {
                beta_star: beta_star.clone(),
                phi: phi.clone(),
            })?,
            MetricDescription::HelicoidSpace { a, b, corrupted } => {
                let phi = if *corrupted {
                    PhiFamily::corrupted_helicoid(*a, *b)
                } else {
                    PhiFamily::helicoid(*a, *b)
                };
                MetricModel::new(MetricKind::DualAlphaBeta {
                    beta_star: vec![0.0, 0.0, *b],
                    phi,
                })?
            }
        };
        Ok(model.with_derivatives(mode))
    }
}

/// `[lower, upper, count]`, inclusive of both ends.
pub type Axis = [f64; 3];

fn linspace(axis: &Axis) -> Result<Vec<f64>> {
    let [lo, hi, n] = *axis;
    if !(n >= 1.0 && n.fract() == 0.0) || !lo.is_finite() || !hi.is_finite() {
        return config(format!("bad grid axis {axis:?}"));
    }
    let n = n as usize;
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
}

/// Tensor-product grid over the listed axes, last axis fastest.
pub fn grid(axes: &[Axis]) -> Result<Vec<Vec<f64>>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        let vals = linspace(axis)?;
        out = out
            .into_iter()
            .flat_map(|p| {
                vals.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SurfaceShape {
    Hyperplane {
        #[serde(default)]
        origin: Option<Vec<f64>>,
        #[serde(default)]
        basis: Option<Vec<Vec<f64>>>,
    },
    Sphere {
        #[serde(default)]
        center: Option<Vec<f64>>,
        radius: f64,
    },
    Cylinder {
        #[serde(default)]
        center: Option<Vec<f64>>,
        radius: f64,
        #[serde(default = "one")]
        sphere_dim: usize,
    },
    Helicoid {
        a: f64,
    },
    CliffordTorus {
        r: f64,
        s: f64,
    },
    S3Sphere {
        height: f64,
    },
    Graph {
        #[serde(default)]
        constant: f64,
        linear: Vec<f64>,
        quadratic: Vec<Vec<f64>>,
    },
}

fn one() -> usize {
    1
}

/// Surface record, e.g.
/// `{"family": "helicoid", "a": 1.0, "u": [0.05, 0.95, 5], "v": [0, 6.28, 5]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceDescription {
    #[serde(flatten)]
    pub shape: SurfaceShape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Axis>,
    /// Axes for parameter dimensions beyond two, or instead of `u`/`v`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<Axis>>,
    /// Explicit parameter values, appended to the grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub orientation: Orientation,
}

impl SurfaceDescription {
    pub fn immersion(&self, dim: usize) -> Result<Immersion> {
        let zeros = vec![0.0; dim];
        let imm = match &self.shape {
            SurfaceShape::Hyperplane { origin, basis } => Immersion::Hyperplane {
                origin: origin.clone().unwrap_or(zeros),
                basis: basis.clone().unwrap_or_else(|| {
                    (0..dim.saturating_sub(1))
                        .map(|a| (0..dim).map(|i| if i == a { 1.0 } else { 0.0 }).collect())
                        .collect()
                }),
            },
            SurfaceShape::Sphere { center, radius } => Immersion::Sphere {
                center: center.clone().unwrap_or(zeros),
                radius: *radius,
            },
            SurfaceShape::Cylinder {
                center,
                radius,
                sphere_dim,
            } => Immersion::Cylinder {
                center: center.clone().unwrap_or(zeros),
                radius: *radius,
                sphere_dim: *sphere_dim,
            },
            SurfaceShape::Helicoid { a } => Immersion::Helicoid { a: *a },
            SurfaceShape::CliffordTorus { r, s } => Immersion::CliffordTorus { r: *r, s: *s },
            SurfaceShape::S3Sphere { height } => Immersion::S3Sphere { height: *height },
            SurfaceShape::Graph {
                constant,
                linear,
                quadratic,
            } => Immersion::Graph {
                constant: *constant,
                linear: linear.clone(),
                quadratic: quadratic.clone(),
            },
        };
        imm.validate()?;
        if imm.ambient_dim() != dim {
            return config(format!(
                "surface lives in dimension {}, metric in {dim}",
                imm.ambient_dim()
            ));
        }
        Ok(imm)
    }

    /// Parameter samples from `u`, `v`, `grid` and `samples`.
    pub fn parameter_samples(&self, param_dim: usize) -> Result<Vec<Vec<f64>>> {
        let mut axes: Vec<Axis> = self.u.iter().chain(&self.v).copied().collect();
        if let Some(g) = &self.grid {
            axes.extend(g.iter().copied());
        }
        let mut out = if axes.is_empty() { Vec::new() } else { grid(&axes)? };
        if let Some(extra) = &self.samples {
            out.extend(extra.iter().cloned());
        }
        if out.is_empty() {
            return config("surface has no sample grid");
        }
        if let Some(bad) = out.iter().find(|p| p.len() != param_dim) {
            return config(format!("sample {bad:?} needs {param_dim} parameters"));
        }
        Ok(out)
    }
}

/// Scalar field record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FieldDescription {
    /// `⟨c, x⟩ + d`.
    Linear {
        coeffs: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    /// `|x − p|`.
    #[serde(alias = "distance-like")]
    Norm {
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    /// `d + ⟨b, x⟩ + xᵀAx`.
    Quadratic {
        #[serde(default)]
        constant: f64,
        linear: Vec<f64>,
        quadratic: Vec<Vec<f64>>,
    },
}

impl FieldDescription {
    pub fn build(&self, dim: usize) -> Result<ScalarField> {
        let check = |n: usize| -> Result<()> {
            if n != dim {
                return config(format!("field has {n} coefficients, metric dimension is {dim}"));
            }
            Ok(())
        };
        Ok(match self {
            FieldDescription::Linear { coeffs, offset } => {
                check(coeffs.len())?;
                ScalarField::linear(coeffs.clone(), *offset)
            }
            FieldDescription::Norm { center } => {
                let c = center.clone().unwrap_or(vec![0.0; dim]);
                check(c.len())?;
                ScalarField::norm(c)
            }
            FieldDescription::Quadratic {
                constant,
                linear,
                quadratic,
            } => {
                check(linear.len())?;
                check(quadratic.len())?;
                if quadratic.iter().any(|r| r.len() != dim) {
                    return config("quadratic part must be square");
                }
                ScalarField::quadratic(*constant, linear.clone(), quadratic.clone())
            }
        })
    }
}
