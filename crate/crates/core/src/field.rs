//! Scalar fields, volume forms, gradients, S-curvature and Laplacians.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, GeometryError, Result};
use crate::expand::expand;
use crate::jet::{constants, dot, Jet};
use crate::legendre::{dual_jacobian, legendre_inverse};
use crate::linalg::norm;
use crate::metric::{MetricKind, MetricModel};
use crate::phi::PhiFamily;
use crate::spray::spray;

type FieldFn = dyn Fn(&[Jet]) -> Jet + Send + Sync;

/// A smooth function on the chart, evaluable on jets.
#[derive(Clone)]
pub struct ScalarField {
    name: String,
    f: Arc<FieldFn>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({})", self.name)
    }
}

impl ScalarField {
    pub fn new<F>(name: impl Into<String>, f: F) -> ScalarField
    where
        F: Fn(&[Jet]) -> Jet + Send + Sync + 'static,
    {
        ScalarField {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// `f(x) = ⟨c, x⟩ + d`.
    pub fn linear(coeffs: Vec<f64>, offset: f64) -> ScalarField {
        let name = format!("linear({coeffs:?}, {offset})");
        ScalarField::new(name, move |x| {
            let mut acc = Jet::constant(offset);
            for (c, xi) in coeffs.iter().zip(x) {
                if *c != 0.0 {
                    acc += *c * xi;
                }
            }
            acc
        })
    }

    /// `f(x) = |x − p|`.
    pub fn norm(center: Vec<f64>) -> ScalarField {
        let name = format!("norm({center:?})");
        ScalarField::new(name, move |x| {
            let d: Vec<Jet> = x.iter().zip(&center).map(|(a, c)| a - *c).collect();
            dot(&d, &d).sqrt()
        })
    }

    /// `f(x) = d + ⟨b, x⟩ + xᵀ A x`.
    pub fn quadratic(constant: f64, linear: Vec<f64>, quadratic: Vec<Vec<f64>>) -> ScalarField {
        let name = format!("quadratic({constant}, {linear:?}, {quadratic:?})");
        ScalarField::new(name, move |x| {
            let mut acc = Jet::constant(constant);
            for (c, xi) in linear.iter().zip(x) {
                if *c != 0.0 {
                    acc += *c * xi;
                }
            }
            for (i, row) in quadratic.iter().enumerate() {
                for (j, a) in row.iter().enumerate() {
                    if *a != 0.0 {
                        acc += *a * &x[i] * &x[j];
                    }
                }
            }
            acc
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: &[Jet]) -> Jet {
        (self.f)(x)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.eval(&constants(x)).value()
    }

    /// `df(x)`.
    pub fn differential(&self, x: &[f64], model: &MetricModel) -> Vec<f64> {
        let j = expand(model.derivatives(), x, 1, |v| self.eval(v));
        j.gradient(x.len())
    }
}

/// Volume form `σ(x) dx¹ ∧ … ∧ dxᵐ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VolumeForm {
    #[default]
    Lebesgue,
    /// `√det` of the model's reference Riemannian metric.
    Riemannian,
    BusemannHausdorff,
    /// `σ = exp(⟨c, x⟩)`.
    Exponential { coeffs: Vec<f64> },
}

impl VolumeForm {
    /// `ln σ` on jets, up to an additive constant.
    pub fn log_density(&self, model: &MetricModel, x: &[Jet]) -> Result<Jet> {
        match self {
            VolumeForm::Lebesgue => Ok(Jet::constant(0.0)),
            VolumeForm::Riemannian => Ok(model.reference_chart().sqrt_det(x).ln()),
            VolumeForm::Exponential { coeffs } => {
                check_dim(model.dim(), coeffs.len())?;
                let mut acc = Jet::constant(0.0);
                for (c, xi) in coeffs.iter().zip(x) {
                    acc += *c * xi;
                }
                Ok(acc)
            }
            VolumeForm::BusemannHausdorff => match model.kind() {
                // The Kropina unit ball is a translate of the h unit ball.
                MetricKind::Euclidean { .. }
                | MetricKind::Riemannian { .. }
                | MetricKind::Kropina { .. }
                | MetricKind::AlphaBeta {
                    phi: PhiFamily::ConstantOne,
                    ..
                } => Ok(model.reference_chart().sqrt_det(x).ln()),
                _ if model.is_minkowski() => Ok(Jet::constant(0.0)),
                other => Err(GeometryError::Unsupported(format!(
                    "Busemann-Hausdorff density has no closed form for {other:?}"
                ))),
            },
        }
    }

    /// `∂_i ln σ`.
    pub fn log_density_gradient(&self, model: &MetricModel, x: &[f64]) -> Result<Vec<f64>> {
        self.log_density(model, &constants(x))?;
        let j = expand(model.derivatives(), x, 1, |v| {
            self.log_density(model, v).unwrap_or(Jet::constant(f64::NAN))
        });
        Ok(j.gradient(x.len()))
    }
}

/// `∇f = 𝓛⁻¹(df)`, defined where `df ∈ A*`.
pub fn gradient(model: &MetricModel, field: &ScalarField, x: &[f64]) -> Result<Vec<f64>> {
    model.check_point(x)?;
    let df = field.differential(x, model);
    if norm(&df) == 0.0 || !model.in_dual_cone(x, &df)? {
        return Err(GeometryError::OutOfDomain(format!("df = {df:?} at x = {x:?}")));
    }
    legendre_inverse(model, x, &df)
}

/// `S(x, y) = ∂G^i/∂y^i − y^i ∂_i ln σ`.
pub fn s_curvature(model: &MetricModel, volume: &VolumeForm, x: &[f64], y: &[f64]) -> Result<f64> {
    let data = spray(model, x, y)?;
    let grad = volume.log_density_gradient(model, x)?;
    Ok(data.connection.trace() - crate::linalg::dot(y, &grad))
}

/// Both Laplacians of a field and the data used to compute them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaplacianReport {
    pub point: Vec<f64>,
    pub differential: Vec<f64>,
    pub gradient: Vec<f64>,
    /// `F(∇f)`.
    pub gradient_norm: f64,
    /// `F*(df)`.
    pub dual_norm: f64,
    /// `Δ̂f = ∂_i(∇f)^i + Γ^i_ik(∇f)(∇f)^k`.
    pub hat: f64,
    /// `Δ_σ f = σ⁻¹ ∂_i(σ (∇f)^i)`.
    pub sigma: f64,
    /// `S(∇f)`.
    pub s_of_gradient: f64,
    /// `Δ_σ f − (Δ̂f − S(∇f))`.
    pub closure_residual: f64,
}

pub fn laplacians(
    model: &MetricModel,
    volume: &VolumeForm,
    field: &ScalarField,
    x: &[f64],
) -> Result<LaplacianReport> {
    model.check_point(x)?;
    let m = model.dim();
    let fj = expand(model.derivatives(), x, 2, |v| field.eval(v));
    let df = fj.gradient(m);
    if norm(&df) == 0.0 || !model.in_dual_cone(x, &df)? {
        return Err(GeometryError::OutOfDomain(format!("df = {df:?} at x = {x:?}")));
    }
    let jac = dual_jacobian(model, x, &df)?;
    let y = jac.vector.clone();
    // ∂_j (∇f)^i = ∂y^i/∂x^j + ∂y^i/∂ξ_k f_kj
    let mut div = 0.0;
    for i in 0..m {
        div += jac.d_x[(i, i)];
        for k in 0..m {
            div += jac.d_xi[(i, k)] * fj.partial(&[k, i]);
        }
    }
    let (gamma_term, trace_n) = if model.is_minkowski() {
        (0.0, 0.0)
    } else {
        let data = spray(model, x, &y)?;
        let g: f64 = (0..m)
            .map(|i| (0..m).map(|k| data.christoffel[i][(i, k)] * y[k]).sum::<f64>())
            .sum();
        (g, data.connection.trace())
    };
    let lns = volume.log_density_gradient(model, x)?;
    let drift = crate::linalg::dot(&y, &lns);
    let hat = div + gamma_term;
    let sigma = div + drift;
    let s = trace_n - drift;
    Ok(LaplacianReport {
        point: x.to_vec(),
        differential: df,
        gradient_norm: jac.dual_value,
        dual_norm: jac.dual_value,
        gradient: y,
        hat,
        sigma,
        s_of_gradient: s,
        closure_residual: sigma - (hat - s),
    })
}
