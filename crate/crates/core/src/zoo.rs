//! Helpers specific to (α,β) and navigation metrics.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::chart::{RiemannianChart, VectorField};
use crate::error::{check_dim, GeometryError, Result};
use crate::expand::{expand_vec, DerivativeMode};
use crate::jet::{constants, values};
use crate::linalg::{bilinear, dot, mat_vec, norm};
use crate::metric::{MetricKind, MetricModel};
use crate::phi::PhiFamily;

pub const KILLING_TOL: f64 = 1e-8;

/// Covariant derivative data of a wind field at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KillingSample {
    pub point: Vec<f64>,
    /// `r_ij = ½(W_{i|j} + W_{j|i})`.
    pub r: Vec<Vec<f64>>,
    /// `s_ij = ½(W_{i|j} − W_{j|i})`.
    pub s: Vec<Vec<f64>>,
    /// `s_j = W^i s_ij`.
    pub s_lower: Vec<f64>,
    pub max_r: f64,
}

impl KillingSample {
    /// `s^i_0 = h^{ik} s_kj y^j`.
    pub fn s_raised_0(&self, h: &RiemannianChart, y: &[f64]) -> Vec<f64> {
        let m = y.len();
        let s = DMatrix::from_fn(m, m, |i, j| self.s[i][j]);
        let low = mat_vec(&s, y);
        values(&h.sharp(&constants(&self.point), &constants(&low)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KillingReport {
    pub samples: Vec<KillingSample>,
    pub max_r: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// `W_{i|j} = ∂_j W_i − Γ̄^k_ij W_k` at one point.
pub fn wind_derivative(
    h: &RiemannianChart,
    wind: &VectorField,
    x: &[f64],
    mode: DerivativeMode,
) -> Result<KillingSample> {
    check_dim(h.dim(), x.len())?;
    let m = h.dim();
    let lowered = expand_vec(mode, x, 1, |v| h.flat(v, &wind.eval(v)));
    let gamma = h.christoffel(x, mode);
    let wl: Vec<f64> = lowered.iter().map(|j| j.value()).collect();
    let cov = DMatrix::from_fn(m, m, |i, j| {
        lowered[i].partial(&[j]) - (0..m).map(|k| gamma[k][(i, j)] * wl[k]).sum::<f64>()
    });
    let r = (&cov + cov.transpose()) * 0.5;
    let s = (&cov - cov.transpose()) * 0.5;
    let w = wind.eval_f64(x);
    let s_lower = (0..m).map(|j| (0..m).map(|i| w[i] * s[(i, j)]).sum()).collect();
    let rows = |a: &DMatrix<f64>| (0..m).map(|i| (0..m).map(|j| a[(i, j)]).collect()).collect();
    Ok(KillingSample {
        point: x.to_vec(),
        max_r: r.amax(),
        r: rows(&r),
        s: rows(&s),
        s_lower,
    })
}

/// Measures `max |r_ij|` over the samples; passes iff it is at most `1e-8`.
pub fn killing_check(
    h: &RiemannianChart,
    wind: &VectorField,
    samples: &[Vec<f64>],
    mode: DerivativeMode,
) -> Result<KillingReport> {
    let samples = samples
        .iter()
        .map(|x| wind_derivative(h, wind, x, mode))
        .collect::<Result<Vec<_>>>()?;
    let max_r = samples.iter().fold(0.0f64, |m, s| m.max(s.max_r));
    Ok(KillingReport {
        samples,
        max_r,
        tolerance: KILLING_TOL,
        passed: max_r <= KILLING_TOL,
    })
}

fn navigation(model: &MetricModel) -> Result<(&RiemannianChart, &VectorField)> {
    match model.kind() {
        MetricKind::Kropina { h, wind } => Ok((h, wind)),
        other => Err(GeometryError::Unsupported(format!(
            "navigation data requested from {other:?}"
        ))),
    }
}

/// Closed-form Kropina fundamental tensor
/// `g_ij = (F/W₀)(h_ij − (h/W₀)(h_{y^i} W_j + h_{y^j} W_i) + h² W_i W_j / W₀²) + F_{y^i} F_{y^j}`.
pub fn kropina_tensor_closed_form(model: &MetricModel, x: &[f64], y: &[f64]) -> Result<DMatrix<f64>> {
    let (h, wind) = navigation(model)?;
    model.eval(x, y)?;
    let m = model.dim();
    let xj = constants(x);
    let hm = crate::linalg::values(&h.metric(&xj));
    let wl = values(&h.flat(&xj, &wind.eval(&xj)));
    let hy = mat_vec(&hm, y);
    let hn = dot(y, &hy).sqrt();
    let hd: Vec<f64> = hy.iter().map(|v| v / hn).collect();
    let w0 = dot(&wl, y);
    let f = hn * hn / (2.0 * w0);
    let fy: Vec<f64> = (0..m)
        .map(|i| hn / w0 * hd[i] - wl[i] * hn * hn / (2.0 * w0 * w0))
        .collect();
    Ok(DMatrix::from_fn(m, m, |i, j| {
        let cross = hn / w0 * (hd[i] * wl[j] + hd[j] * wl[i]);
        f / w0 * (hm[(i, j)] - cross + hn * hn * wl[i] * wl[j] / (w0 * w0))
            + fy[i] * fy[j]
    }))
}

/// `Ḡ^i − F s^i_0`, the navigation prediction of the spray of a Kropina metric.
pub fn navigation_spray(model: &MetricModel, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let (h, wind) = navigation(model)?;
    let f = model.eval(x, y)?;
    let gamma = h.christoffel(x, model.derivatives());
    let sample = wind_derivative(h, wind, x, model.derivatives())?;
    let s0 = sample.s_raised_0(h, y);
    Ok((0..y.len())
        .map(|i| 0.5 * bilinear(&gamma[i], y, y) - f * s0[i])
        .collect())
}

/// Finsler unit normal `n = (φ − sφ') n̄ + φ' β*` of a dual-form (α,β) model,
/// from an α-unit normal `n̄` with `s = β*(n̄)`.
pub fn alpha_beta_normal(model: &MetricModel, nbar: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    check_dim(model.dim(), nbar.len())?;
    check_dim(model.dim(), x.len())?;
    let (beta_star, phi, b0) = match model.kind() {
        MetricKind::DualAlphaBeta { beta_star, phi } => (beta_star.clone(), phi.clone(), norm(beta_star)),
        MetricKind::Euclidean { .. } | MetricKind::Riemannian { .. } => return Ok(nbar.to_vec()),
        MetricKind::AlphaBeta { phi: PhiFamily::ConstantOne, .. } => return Ok(nbar.to_vec()),
        other => {
            return Err(GeometryError::Unsupported(format!(
                "the normal formula needs the dual (α*, β*) description, got {other:?}"
            )))
        }
    };
    let s = dot(&beta_star, nbar);
    if !phi.contains(s) || s.abs() >= b0 {
        return Err(GeometryError::DomainViolation(format!(
            "s = β*(n̄) = {s} outside the admissible profile domain"
        )));
    }
    let [p, dp, _] = phi.derivatives(s);
    Ok(nbar
        .iter()
        .zip(&beta_star)
        .map(|(n, b)| (p - s * dp) * n + dp * b)
        .collect())
}
