//! Conic Finsler metrics on a single chart and their pointwise tensors.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::chart::{CovectorField, RiemannianChart, VectorField};
use crate::error::{check_dim, GeometryError, Result};
use crate::expand::{expand, expand_vec, DerivativeMode};
use crate::jet::{constants, dot, values, Jet};
use crate::linalg::{invert, min_eigenvalue, norm};
use crate::phi::PhiFamily;

/// Tolerance on `‖W‖_h = 1`.
pub const UNIT_WIND_TOL: f64 = 1e-9;

/// The metric variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MetricKind {
    Euclidean {
        dim: usize,
    },
    Riemannian {
        chart: RiemannianChart,
    },
    /// `F = α φ(β/α)` with cone `s ∉ E`, `s` in the profile domain.
    AlphaBeta {
        alpha: RiemannianChart,
        beta: CovectorField,
        phi: PhiFamily,
        b0: f64,
        #[serde(default)]
        excluded: Vec<[f64; 2]>,
    },
    /// `F = h²/(2W₀)` on `W₀ = h(W, y) > 0`, dual `F* = h* + W`.
    Kropina {
        h: RiemannianChart,
        wind: VectorField,
    },
    /// Minkowski metric given by its dual `F* = |ξ| φ(⟨β*, ξ⟩/|ξ|)`.
    DualAlphaBeta {
        beta_star: Vec<f64>,
        phi: PhiFamily,
    },
}

/// A metric model together with the derivative mode used by every operation.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricModel {
    kind: MetricKind,
    derivatives: DerivativeMode,
}

impl MetricModel {
    pub fn new(kind: MetricKind) -> Result<MetricModel> {
        validate_kind(&kind)?;
        Ok(MetricModel {
            kind,
            derivatives: DerivativeMode::Exact,
        })
    }

    pub fn euclidean(dim: usize) -> Result<MetricModel> {
        MetricModel::new(MetricKind::Euclidean { dim })
    }

    pub fn riemannian(chart: RiemannianChart) -> Result<MetricModel> {
        MetricModel::new(MetricKind::Riemannian { chart })
    }

    /// The helicoid space with parameters `a`, `b`.
    pub fn helicoid_space(a: f64, b: f64) -> Result<MetricModel> {
        MetricModel::new(MetricKind::DualAlphaBeta {
            beta_star: vec![0.0, 0.0, b],
            phi: PhiFamily::helicoid(a, b),
        })
    }

    pub fn with_derivatives(mut self, mode: DerivativeMode) -> MetricModel {
        self.derivatives = mode;
        self
    }

    pub fn kind(&self) -> &MetricKind {
        &self.kind
    }

    pub fn derivatives(&self) -> DerivativeMode {
        self.derivatives
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            MetricKind::Euclidean { dim } => *dim,
            MetricKind::Riemannian { chart } => chart.dim(),
            MetricKind::AlphaBeta { alpha, .. } => alpha.dim(),
            MetricKind::Kropina { h, .. } => h.dim(),
            MetricKind::DualAlphaBeta { beta_star, .. } => beta_star.len(),
        }
    }

    /// True when `F` does not depend on `x`.
    pub fn is_minkowski(&self) -> bool {
        let flat = |c: &RiemannianChart| !matches!(c, RiemannianChart::RoundSphere { .. });
        match &self.kind {
            MetricKind::Euclidean { .. } | MetricKind::DualAlphaBeta { .. } => true,
            MetricKind::Riemannian { chart } => flat(chart),
            MetricKind::AlphaBeta { alpha, beta, .. } => flat(alpha) && beta.is_constant(),
            MetricKind::Kropina { h, wind } => {
                flat(h) && matches!(wind, VectorField::Constant { .. })
            }
        }
    }

    pub fn has_explicit_dual(&self) -> bool {
        match &self.kind {
            MetricKind::AlphaBeta { phi, .. } => *phi == PhiFamily::ConstantOne,
            _ => true,
        }
    }

    /// The Riemannian metric whose unit normal is `n̄`: `h` for navigation
    /// data, `α` for (α,β) metrics, Euclidean for dual-form models.
    pub fn reference_chart(&self) -> RiemannianChart {
        match &self.kind {
            MetricKind::Euclidean { dim } => RiemannianChart::Euclidean { dim: *dim },
            MetricKind::Riemannian { chart } => chart.clone(),
            MetricKind::AlphaBeta { alpha, .. } => alpha.clone(),
            MetricKind::Kropina { h, .. } => h.clone(),
            MetricKind::DualAlphaBeta { beta_star, .. } => RiemannianChart::Euclidean {
                dim: beta_star.len(),
            },
        }
    }

    pub fn wind(&self) -> Option<&VectorField> {
        match &self.kind {
            MetricKind::Kropina { wind, .. } => Some(wind),
            _ => None,
        }
    }

    /// Per-point invariants: dimension, unit wind, `‖β‖_α ≤ b₀`.
    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        check_dim(self.dim(), x.len())?;
        match &self.kind {
            MetricKind::Kropina { h, wind } => {
                let xj = constants(x);
                let w = wind.eval(&xj);
                let n = h.inner(&xj, &w, &w).value().sqrt();
                if (n - 1.0).abs() > UNIT_WIND_TOL || !n.is_finite() {
                    return Err(GeometryError::NotUnitWind {
                        point: x.to_vec(),
                        norm: n,
                    });
                }
            }
            MetricKind::AlphaBeta {
                alpha, beta, b0, ..
            } => {
                let xj = constants(x);
                let b = beta.eval(&xj);
                let n = alpha.dual_inner(&xj, &b, &b).value().sqrt();
                if n > b0 * (1.0 + 1e-12) {
                    return Err(GeometryError::DomainViolation(format!(
                        "‖β‖_α = {n} exceeds b₀ = {b0} at {x:?}"
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// `F(x, y)` on jets, with no cone check.
    pub fn finsler_jet(&self, x: &[Jet], y: &[Jet]) -> Jet {
        match &self.kind {
            MetricKind::Euclidean { .. } => dot(y, y).sqrt(),
            MetricKind::Riemannian { chart } => chart.inner(x, y, y).sqrt(),
            MetricKind::AlphaBeta {
                alpha, beta, phi, ..
            } => {
                let a = alpha.inner(x, y, y).sqrt();
                let b = dot(&beta.eval(x), y);
                let s = &b / &a;
                a * phi.eval(&s)
            }
            MetricKind::Kropina { h, wind } => {
                let w = wind.eval(x);
                let w0 = dot(&h.flat(x, &w), y);
                h.inner(x, y, y) / (2.0 * w0)
            }
            MetricKind::DualAlphaBeta { beta_star, phi } => dual_ab_primal(beta_star, phi, y),
        }
    }

    /// `F*(x, ξ)` on jets when the model has a closed-form dual.
    pub fn dual_jet(&self, x: &[Jet], xi: &[Jet]) -> Option<Jet> {
        match &self.kind {
            MetricKind::Euclidean { .. } => Some(dot(xi, xi).sqrt()),
            MetricKind::Riemannian { chart } => Some(chart.dual_inner(x, xi, xi).sqrt()),
            MetricKind::AlphaBeta { alpha, phi, .. } if *phi == PhiFamily::ConstantOne => {
                Some(alpha.dual_inner(x, xi, xi).sqrt())
            }
            MetricKind::AlphaBeta { .. } => None,
            MetricKind::Kropina { h, wind } => {
                Some(h.dual_inner(x, xi, xi).sqrt() + dot(&wind.eval(x), xi))
            }
            MetricKind::DualAlphaBeta { beta_star, phi } => {
                Some(dual_ab_gradient(beta_star, phi, xi).0)
            }
        }
    }

    /// Membership of `y` in the cone `A_x`. The zero vector is never a member.
    pub fn in_cone(&self, x: &[f64], y: &[f64]) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.dim(), y.len())?;
        if norm(y) == 0.0 || y.iter().any(|v| !v.is_finite()) {
            return Ok(false);
        }
        let xj = constants(x);
        let yj = constants(y);
        Ok(match &self.kind {
            MetricKind::Euclidean { .. } | MetricKind::Riemannian { .. } => true,
            MetricKind::AlphaBeta {
                alpha,
                beta,
                phi,
                b0,
                excluded,
            } => {
                let a = alpha.inner(&xj, &yj, &yj).value().sqrt();
                let s = dot(&beta.eval(&xj), &yj).value() / a;
                phi.contains(s)
                    && s.abs() <= *b0
                    && excluded.iter().all(|[lo, hi]| s < *lo || s > *hi)
            }
            MetricKind::Kropina { h, wind } => {
                let w = wind.eval(&xj);
                h.inner(&xj, &w, &yj).value() > 0.0
            }
            MetricKind::DualAlphaBeta { beta_star, phi } => match phi {
                PhiFamily::ConstantOne => true,
                PhiFamily::Helicoid { a, .. } => {
                    let b = norm(beta_star);
                    let par = crate::linalg::dot(y, beta_star) / b;
                    let perp2 = crate::linalg::dot(y, y) - par * par;
                    let lower = 4.0 / (std::f64::consts::PI.powi(2) * a * a) * par * par;
                    0.0 < lower && lower < perp2 && perp2 < par * par / (a * a)
                }
                PhiFamily::Kropina => dual_ab_preimage(beta_star, phi, y).is_some(),
            },
        })
    }

    /// Membership of `ξ` in the dual cone `A*_x`.
    pub fn in_dual_cone(&self, x: &[f64], xi: &[f64]) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.dim(), xi.len())?;
        if norm(xi) == 0.0 || xi.iter().any(|v| !v.is_finite()) {
            return Ok(false);
        }
        Ok(match &self.kind {
            MetricKind::Euclidean { .. } | MetricKind::Riemannian { .. } => true,
            MetricKind::Kropina { .. } => {
                self.dual_jet(&constants(x), &constants(xi)).unwrap().value() > 0.0
            }
            MetricKind::DualAlphaBeta { beta_star, phi } => {
                let s = crate::linalg::dot(beta_star, xi) / norm(xi);
                phi.contains(s)
            }
            MetricKind::AlphaBeta { phi, .. } if *phi == PhiFamily::ConstantOne => true,
            MetricKind::AlphaBeta { .. } => crate::legendre::newton_inverse(self, x, xi).is_ok(),
        })
    }

    /// `F(x, y)` after the cone check.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        if !self.in_cone(x, y)? {
            return Err(GeometryError::ConeViolation(format!("y = {y:?} at x = {x:?}")));
        }
        let f = self.finsler_jet(&constants(x), &constants(y)).value();
        if !f.is_finite() {
            return Err(GeometryError::ConeViolation(format!(
                "no finite value at y = {y:?}, x = {x:?}"
            )));
        }
        Ok(f)
    }

    /// `F*(x, ξ)`, through the closed form or the Legendre inverse.
    pub fn eval_dual(&self, x: &[f64], xi: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        if !self.in_dual_cone(x, xi)? {
            return Err(GeometryError::DualConeViolation(format!("ξ = {xi:?} at x = {x:?}")));
        }
        match self.dual_jet(&constants(x), &constants(xi)) {
            Some(f) => Ok(f.value()),
            None => {
                let y = crate::legendre::legendre_inverse(self, x, xi)?;
                self.eval(x, &y)
            }
        }
    }

    /// Expansion of `F²` in the variables `(x, y)` to the given order.
    pub fn squared_expansion(&self, x: &[f64], y: &[f64], order: usize) -> Jet {
        let m = self.dim();
        homogeneous_expansion(self.derivatives, x, y, order, |v| {
            self.finsler_jet(&v[..m], &v[m..]).square()
        })
    }

    /// Expansion of `F*²` in `(x, ξ)`, when a closed-form dual exists.
    pub fn dual_squared_expansion(&self, x: &[f64], xi: &[f64], order: usize) -> Option<Jet> {
        if !self.has_explicit_dual() {
            return None;
        }
        let m = self.dim();
        Some(homogeneous_expansion(self.derivatives, x, xi, order, |v| {
            self.dual_jet(&v[..m], &v[m..]).unwrap().square()
        }))
    }
}

/// Expands a function of `(x, y)` that is 2-homogeneous in `y`.
///
/// Finite differences run at `y/λ` with `λ = ‖y‖∞`, then each coefficient of
/// `y`-degree `d` is scaled by `λ^(2−d)`. This is exact for homogeneous
/// functions and keeps fibre steps proportional to `|y|`, which matters for
/// short vectors near the cone boundary.
fn homogeneous_expansion<F>(mode: DerivativeMode, x: &[f64], y: &[f64], order: usize, f: F) -> Jet
where
    F: Fn(&[Jet]) -> Jet,
{
    let lambda = y.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let direct = |y: &[f64]| {
        let p: Vec<f64> = x.iter().chain(y).copied().collect();
        expand(mode, &p, order, &f)
    };
    if mode == DerivativeMode::Exact || lambda == 0.0 || !lambda.is_finite() {
        return direct(y);
    }
    let unit: Vec<f64> = y.iter().map(|c| c / lambda).collect();
    let jet = direct(&unit);
    let Some(space) = jet.space() else {
        return Jet::constant(jet.value() * lambda * lambda);
    };
    let m = x.len();
    let coeffs: Vec<f64> = (0..space.len(order))
        .map(|idx| {
            let d: i32 = space.exponents(idx)[m..].iter().map(|&k| k as i32).sum();
            jet.coefficient(idx) * lambda.powi(2 - d)
        })
        .collect();
    Jet::from_coefficients(space, order, &coeffs)
}

fn validate_kind(kind: &MetricKind) -> Result<()> {
    let cfg = |m: String| Err(GeometryError::Config(m));
    match kind {
        MetricKind::Euclidean { dim } => {
            if *dim < 2 {
                return cfg("dimension must be at least 2".into());
            }
        }
        MetricKind::Riemannian { chart } => chart.validate()?,
        MetricKind::AlphaBeta {
            alpha,
            beta,
            phi,
            b0,
            excluded,
        } => {
            alpha.validate()?;
            phi.validate_parameters()?;
            if beta.dim() != alpha.dim() {
                return cfg(format!("β has dimension {}, α has {}", beta.dim(), alpha.dim()));
            }
            if !(*b0 > 0.0) {
                return cfg(format!("b₀ must be positive, got {b0}"));
            }
            if excluded.iter().any(|[lo, hi]| !(lo <= hi)) {
                return cfg("excluded intervals must satisfy lo ≤ hi".into());
            }
        }
        MetricKind::Kropina { h, wind } => {
            h.validate()?;
            if wind.dim() != Some(h.dim()) {
                return cfg("wind dimension does not match the chart".into());
            }
        }
        MetricKind::DualAlphaBeta { beta_star, phi } => {
            phi.validate_parameters()?;
            if beta_star.len() < 2 {
                return cfg("dimension must be at least 2".into());
            }
            let b = norm(beta_star);
            if !(b > 0.0) {
                return cfg("β* must be nonzero".into());
            }
            if let PhiFamily::Helicoid { b: pb, .. } = phi {
                if (pb - b).abs() > 1e-12 * b {
                    return cfg(format!("|β*| = {b} differs from the profile's b = {pb}"));
                }
            }
        }
    }
    Ok(())
}

/// `(F*, ∂F*/∂ξ)` for `F* = |ξ| φ(⟨β*, ξ⟩/|ξ|)`.
pub(crate) fn dual_ab_gradient(beta_star: &[f64], phi: &PhiFamily, xi: &[Jet]) -> (Jet, Vec<Jet>) {
    let alpha = dot(xi, xi).sqrt();
    let mut beta = Jet::constant(0.0);
    for (b, x) in beta_star.iter().zip(xi) {
        beta += *b * x;
    }
    let s = &beta / &alpha;
    let (p, dp) = phi.eval_with_derivative(&s);
    let lead = (&p - &s * &dp) / &alpha;
    let grad = xi
        .iter()
        .zip(beta_star)
        .map(|(x, &b)| &lead * x + b * &dp)
        .collect();
    (alpha * p, grad)
}

/// `L*(ξ) = F* ∂F*` on jets.
fn dual_ab_legendre(beta_star: &[f64], phi: &PhiFamily, xi: &[Jet]) -> Vec<Jet> {
    let (f, g) = dual_ab_gradient(beta_star, phi, xi);
    g.iter().map(|c| &f * c).collect()
}

/// Solves `L*(ξ) = y` for a dual-form model by a rotational reduction to one
/// unknown `s`, with `ξ` in the plane of `β*` and `y`.
pub(crate) fn dual_ab_preimage(beta_star: &[f64], phi: &PhiFamily, y: &[f64]) -> Option<Vec<f64>> {
    if *phi == PhiFamily::ConstantOne {
        return Some(y.to_vec());
    }
    let b = norm(beta_star);
    let e: Vec<f64> = beta_star.iter().map(|c| c / b).collect();
    let par = crate::linalg::dot(y, &e);
    let perp: Vec<f64> = y.iter().zip(&e).map(|(v, ei)| v - par * ei).collect();
    let r = norm(&perp);
    if !(r > 0.0) {
        return None;
    }
    let target = par / r;
    // Component ratio ∥/⊥ of L*(ξ(s)) for the unit covector with ⟨β*, ξ⟩ = b s.
    let ratio = |s: f64| {
        let (p, dp) = phi.value_and_slope(s);
        let bar = p - s * dp;
        (bar * s / b + dp * b) / (bar * (1.0 - s * s / (b * b)).sqrt())
    };
    const SCAN: usize = 256;
    let mut root = None;
    'outer: for (lo, hi) in phi.domain() {
        let (lo, hi) = (lo.max(-b), hi.min(b));
        if !(hi > lo) {
            continue;
        }
        // Uniform cells, plus cells shrinking geometrically into each end:
        // near the cone boundary the root crowds an endpoint of the domain.
        let ends = (9..=52).map(|k| 0.5f64.powi(k));
        let mut t: Vec<f64> = ends.clone().collect();
        t.extend((1..=SCAN).map(|k| k as f64 / (SCAN + 1) as f64));
        t.extend(ends.map(|e| 1.0 - e));
        t.sort_by(f64::total_cmp);
        let mut prev: Option<(f64, f64)> = None;
        for s in t.iter().map(|t| lo + (hi - lo) * t) {
            if !(s > lo && s < hi) {
                continue;
            }
            let v = ratio(s) - target;
            if !v.is_finite() {
                prev = None;
                continue;
            }
            if v == 0.0 {
                root = Some(s);
                break 'outer;
            }
            if let Some((sp, vp)) = prev {
                if vp.signum() != v.signum() {
                    let (mut a, mut fa, mut c) = (sp, vp, s);
                    for _ in 0..200 {
                        let m = 0.5 * (a + c);
                        if m <= a || m >= c {
                            break;
                        }
                        let fm = ratio(m) - target;
                        if fm == 0.0 {
                            a = m;
                            c = m;
                            break;
                        }
                        if fm.signum() == fa.signum() {
                            a = m;
                            fa = fm;
                        } else {
                            c = m;
                        }
                    }
                    root = Some(0.5 * (a + c));
                    break 'outer;
                }
            }
            prev = Some((s, v));
        }
    }
    let s = root?;
    let cos = (1.0 - s * s / (b * b)).sqrt();
    let unit: Vec<f64> = perp
        .iter()
        .zip(&e)
        .map(|(p, ei)| cos * p / r + s / b * ei)
        .collect();
    let image = values(&dual_ab_legendre(beta_star, phi, &constants(&unit)));
    let lambda = norm(y) / norm(&image);
    if !lambda.is_finite() {
        return None;
    }
    Some(unit.iter().map(|c| lambda * c).collect())
}

/// Primal `F(y)` of a dual-form model, lifted to jets by a simplified Newton
/// iteration on `L*(ξ) = y` around the plain solution.
fn dual_ab_primal(beta_star: &[f64], phi: &PhiFamily, y: &[Jet]) -> Jet {
    let Some(xi0) = dual_ab_preimage(beta_star, phi, &values(y)) else {
        return Jet::constant(f64::NAN);
    };
    let order = y.iter().filter_map(Jet::order).max().unwrap_or(0);
    let mut xi = constants(&xi0);
    if order > 0 {
        let jac = expand_vec(DerivativeMode::Exact, &xi0, 1, |v| {
            dual_ab_legendre(beta_star, phi, v)
        });
        let n = xi0.len();
        let j = DMatrix::from_fn(n, n, |i, k| jac[i].partial(&[k]));
        let Ok(jinv) = invert(&j) else {
            return Jet::constant(f64::NAN);
        };
        for _ in 0..=order {
            let img = dual_ab_legendre(beta_star, phi, &xi);
            let res: Vec<Jet> = img.iter().zip(y).map(|(a, b)| a - b).collect();
            xi = (0..n)
                .map(|i| {
                    let mut c = xi[i].clone();
                    for (k, r) in res.iter().enumerate() {
                        c -= jinv[(i, k)] * r;
                    }
                    c
                })
                .collect();
        }
    }
    dual_ab_gradient(beta_star, phi, &xi).0
}

/// Fundamental and Cartan tensors at `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorPack {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// `cartan[i][(j, k)] = C_ijk`.
    pub cartan: Vec<DMatrix<f64>>,
}

impl TensorPack {
    /// `max_ij |C_ijk y^k|`.
    pub fn cartan_annihilation(&self, y: &[f64]) -> f64 {
        let m = y.len();
        let mut worst = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                let v: f64 = (0..m).map(|k| self.cartan[i][(j, k)] * y[k]).sum();
                worst = worst.max(v.abs());
            }
        }
        worst
    }
}

pub fn eval_metric(model: &MetricModel, x: &[f64], y: &[f64]) -> Result<f64> {
    model.eval(x, y)
}

pub fn in_cone(model: &MetricModel, x: &[f64], y: &[f64]) -> Result<bool> {
    model.in_cone(x, y)
}

/// `g_ij = ½ [F²]_{y^i y^j}` and `C_ijk = ½ ∂g_ij/∂y^k`.
pub fn fundamental_tensor(model: &MetricModel, x: &[f64], y: &[f64]) -> Result<TensorPack> {
    model.eval(x, y)?;
    let m = model.dim();
    let t = model.squared_expansion(x, y, 3);
    let g = DMatrix::from_fn(m, m, |i, j| 0.5 * t.partial(&[m + i, m + j]));
    let mut cartan = Vec::with_capacity(m);
    for i in 0..m {
        cartan.push(DMatrix::from_fn(m, m, |j, k| {
            0.25 * t.partial(&[m + i, m + j, m + k])
        }));
    }
    let scale = g.amax();
    if !(min_eigenvalue(&g) > 1e-12 * scale) {
        return Err(GeometryError::SingularTensor(format!(
            "fundamental tensor is not positive definite at y = {y:?}"
        )));
    }
    let g_inv = invert(&g)?;
    Ok(TensorPack { g, g_inv, cartan })
}

/// Builds the Kropina metric of navigation data `(h, W)`, checking the unit
/// wind condition at every probe point (the chart origin when none are given).
pub fn kropina_from_navigation(
    h: RiemannianChart,
    wind: VectorField,
    probes: &[Vec<f64>],
) -> Result<MetricModel> {
    let model = MetricModel::new(MetricKind::Kropina { h, wind })?;
    if probes.is_empty() {
        model.check_point(&vec![0.0; model.dim()])?;
    }
    for p in probes {
        model.check_point(p)?;
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kropina_e3() -> MetricModel {
        kropina_from_navigation(
            RiemannianChart::Euclidean { dim: 3 },
            VectorField::Constant {
                components: vec![0.0, 0.0, 1.0],
            },
            &[],
        )
        .unwrap()
    }

    #[test]
    fn kropina_values_and_cone() {
        let k = kropina_e3();
        let x = [0.0; 3];
        assert!((k.eval(&x, &[0.0, 0.0, 1.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!((k.eval(&x, &[1.0, 0.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            k.eval(&x, &[0.0, 0.0, -1.0]),
            Err(GeometryError::ConeViolation(_))
        ));
        assert!(k.in_cone(&x, &[1.0, 1.0, 0.1]).unwrap());
        assert!(!k.in_cone(&x, &[0.0, 0.0, 0.0]).unwrap());
    }

    #[test]
    fn short_wind_is_rejected() {
        let r = kropina_from_navigation(
            RiemannianChart::Euclidean { dim: 3 },
            VectorField::Constant {
                components: vec![0.0, 0.0, 0.9],
            },
            &[],
        );
        assert!(matches!(r, Err(GeometryError::NotUnitWind { .. })));
    }

    #[test]
    fn helicoid_cone_boundary_is_strict() {
        let m = MetricModel::helicoid_space(1.0, 1.0).unwrap();
        assert!(!m.in_cone(&[0.0; 3], &[1.0, 0.0, 1.0]).unwrap());
        assert!(m.in_cone(&[0.0; 3], &[1.0, 0.0, -1.2]).unwrap());
    }

    #[test]
    fn euclidean_tensor_is_identity() {
        let e = MetricModel::euclidean(3).unwrap();
        let t = fundamental_tensor(&e, &[1.0, 2.0, 3.0], &[0.3, -0.2, 0.5]).unwrap();
        assert!((t.g.clone() - DMatrix::identity(3, 3)).amax() < 1e-14);
        assert!(t.cartan.iter().all(|c| c.amax() < 1e-14));
    }

    #[test]
    fn dual_primal_inverts_the_dual_legendre_map() {
        let beta = [0.0, 0.0, 1.0];
        let phi = PhiFamily::helicoid(1.0, 1.0);
        for xi in [[1.0, 0.0, 0.3], [0.2, -0.9, -0.4], [0.5, 0.5, 0.1]] {
            let y = values(&dual_ab_legendre(&beta, &phi, &constants(&xi)));
            let back = dual_ab_preimage(&beta, &phi, &y).unwrap();
            assert!(crate::linalg::max_abs_diff(&back, &xi) < 1e-12, "{back:?} vs {xi:?}");
            let fstar = dual_ab_gradient(&beta, &phi, &constants(&xi)).0.value();
            let f = dual_ab_primal(&beta, &phi, &constants(&y)).value();
            assert!((f - fstar).abs() < 1e-13);
        }
    }

    #[test]
    fn lifted_primal_has_correct_derivatives() {
        // ∂F/∂y = ξ/F* for y = L*(ξ).
        let beta = [0.0, 0.0, 2.0];
        let phi = PhiFamily::helicoid(0.5, 2.0);
        let xi = [0.7, 0.2, 0.15];
        let y = values(&dual_ab_legendre(&beta, &phi, &constants(&xi)));
        let f = expand(DerivativeMode::Exact, &y, 3, |v| dual_ab_primal(&beta, &phi, v));
        let fstar = dual_ab_gradient(&beta, &phi, &constants(&xi)).0.value();
        for i in 0..3 {
            assert!((f.partial(&[i]) - xi[i] / fstar).abs() < 1e-11);
        }
        // 1-homogeneity: ∂²F y = 0.
        for i in 0..3 {
            let v: f64 = (0..3).map(|j| f.partial(&[i, j]) * y[j]).sum();
            assert!(v.abs() < 1e-10);
        }
    }
}
