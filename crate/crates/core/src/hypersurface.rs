//! Parametrized hypersurfaces, conic unit normals and shape operators.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::chart::stereographic_push;
use crate::error::{check_dim, GeometryError, Result};
use crate::expand::expand_vec;
use crate::field::{s_curvature, ScalarField, VolumeForm};
use crate::jet::{constants, values, Jet};
use crate::legendre::{dual_jacobian, DualJacobian};
use crate::linalg::{self, bilinear, generalized_symmetric_eigen, multiplicities, norm};
use crate::metric::{MetricKind, MetricModel};
use crate::spray::spray;
use crate::zoo::killing_check;

/// Allowed `ĝ` versus `h̄/W₀(n)` mismatch with exact derivatives.
pub const CONFORMAL_TOL: f64 = 1e-8;

/// Relative gap below which principal curvatures are grouped.
pub const MULTIPLICITY_GAP: f64 = 1e-6;
/// The same gap for finite-difference derivatives.
pub const FD_MULTIPLICITY_GAP: f64 = 1e-4;

/// A codimension-one immersion `u ↦ Φ(u)` into the chart.
#[derive(Debug, Clone)]
pub enum Immersion {
    /// `Φ(u) = o + Σ u_a e_a`.
    Hyperplane {
        origin: Vec<f64>,
        basis: Vec<Vec<f64>>,
    },
    /// Round sphere in hyperspherical coordinates with `u₁` the polar angle
    /// from the last axis; in `R³`, `(r sin u₁ sin u₂, r sin u₁ cos u₂, r cos u₁)`.
    Sphere { center: Vec<f64>, radius: f64 },
    /// `S^k(r) × R^{m−k−1}`: the first `k+1` coordinates on the sphere, the rest free.
    /// For `k = 1` the circle is `(r sin u₁, r cos u₁)`.
    Cylinder {
        center: Vec<f64>,
        radius: f64,
        sphere_dim: usize,
    },
    /// `(u cos v, u sin v, a v)`.
    Helicoid { a: f64 },
    /// `S¹(r) × S¹(s) ⊂ S³`, `r² + s² = 1`, in the stereographic chart.
    CliffordTorus { r: f64, s: f64 },
    /// The 2-sphere `{p₄ = height} ⊂ S³` in the stereographic chart, in
    /// polar angles `(θ, φ)`.
    S3Sphere { height: f64 },
    /// `x_m = c + ⟨b, u⟩ + uᵀ A u` over `u ∈ R^{m−1}`.
    Graph {
        constant: f64,
        linear: Vec<f64>,
        quadratic: Vec<Vec<f64>>,
    },
    /// Local parametrization of `{f = f(p)}` near `p` as a graph over the
    /// Euclidean tangent plane.
    LevelSet {
        field: ScalarField,
        base: Vec<f64>,
        frame: Vec<Vec<f64>>,
        normal: Vec<f64>,
    },
}

impl Immersion {
    /// Level set of `field` through `base`.
    pub fn level_set(field: ScalarField, base: Vec<f64>) -> Result<Immersion> {
        let m = base.len();
        let df = crate::expand::expand(crate::expand::DerivativeMode::Exact, &base, 1, |v| {
            field.eval(v)
        })
        .gradient(m);
        let len = norm(&df);
        if !(len > 0.0) {
            return Err(GeometryError::FrameDegenerate(base));
        }
        let normal: Vec<f64> = df.iter().map(|c| c / len).collect();
        let mut frame: Vec<Vec<f64>> = Vec::new();
        for k in 0..m {
            let mut v: Vec<f64> = (0..m).map(|i| if i == k { 1.0 } else { 0.0 }).collect();
            for b in frame.iter().chain(std::iter::once(&normal)) {
                let p = linalg::dot(&v, b);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= p * bi;
                }
            }
            let l = norm(&v);
            if l > 1e-8 {
                frame.push(v.iter().map(|c| c / l).collect());
            }
            if frame.len() + 1 == m {
                break;
            }
        }
        Ok(Immersion::LevelSet {
            field,
            base,
            frame,
            normal,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Immersion::Hyperplane { origin, .. } => origin.len(),
            Immersion::Sphere { center, .. } | Immersion::Cylinder { center, .. } => center.len(),
            Immersion::Helicoid { .. } | Immersion::CliffordTorus { .. } | Immersion::S3Sphere { .. } => 3,
            Immersion::Graph { linear, .. } => linear.len() + 1,
            Immersion::LevelSet { base, .. } => base.len(),
        }
    }

    pub fn param_dim(&self) -> usize {
        self.ambient_dim() - 1
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: &str| Err(GeometryError::Config(m.to_string()));
        match self {
            Immersion::Hyperplane { origin, basis } => {
                if basis.len() + 1 != origin.len() || basis.iter().any(|b| b.len() != origin.len()) {
                    return cfg("hyperplane needs m−1 basis vectors of length m");
                }
            }
            Immersion::Sphere { radius, .. } => {
                if !(*radius > 0.0) {
                    return cfg("sphere radius must be positive");
                }
            }
            Immersion::Cylinder {
                center,
                radius,
                sphere_dim,
            } => {
                if !(*radius > 0.0) || *sphere_dim == 0 || sphere_dim + 1 >= center.len() {
                    return cfg("cylinder needs r > 0 and 1 ≤ k ≤ m−2");
                }
            }
            Immersion::Helicoid { a } => {
                if !(*a > 0.0) {
                    return cfg("helicoid needs a > 0");
                }
            }
            Immersion::CliffordTorus { r, s } => {
                if !(*r > 0.0 && *s > 0.0) || (r * r + s * s - 1.0).abs() > 1e-12 {
                    return cfg("Clifford torus needs r, s > 0 with r² + s² = 1");
                }
            }
            Immersion::S3Sphere { height } => {
                if !(height.abs() < 1.0) {
                    return cfg("sphere height must lie in (−1, 1)");
                }
            }
            Immersion::Graph {
                linear, quadratic, ..
            } => {
                let n = linear.len();
                if n == 0 || quadratic.len() != n || quadratic.iter().any(|r| r.len() != n) {
                    return cfg("graph needs b of length m−1 and A of size (m−1)²");
                }
            }
            Immersion::LevelSet { .. } => {}
        }
        Ok(())
    }

    pub fn eval(&self, u: &[Jet]) -> Vec<Jet> {
        match self {
            Immersion::Hyperplane { origin, basis } => origin
                .iter()
                .enumerate()
                .map(|(i, &o)| {
                    let mut acc = Jet::constant(o);
                    for (ua, b) in u.iter().zip(basis) {
                        if b[i] != 0.0 {
                            acc += b[i] * ua;
                        }
                    }
                    acc
                })
                .collect(),
            Immersion::Sphere { center, radius } => {
                let s = hyperspherical(u, *radius);
                s.iter().zip(center).map(|(a, c)| a + *c).collect()
            }
            Immersion::Cylinder {
                center,
                radius,
                sphere_dim,
            } => {
                let mut out = hyperspherical(&u[..*sphere_dim], *radius);
                out.extend(u[*sphere_dim..].iter().cloned());
                out.iter().zip(center).map(|(a, c)| a + *c).collect()
            }
            Immersion::Helicoid { a } => {
                vec![&u[0] * u[1].cos(), &u[0] * u[1].sin(), *a * &u[1]]
            }
            Immersion::CliffordTorus { r, s } => {
                let p = [
                    *r * u[0].cos(),
                    *r * u[0].sin(),
                    *s * u[1].cos(),
                    *s * u[1].sin(),
                ];
                let d = (1.0 - &p[3]).recip();
                p[..3].iter().map(|c| c * &d).collect()
            }
            Immersion::S3Sphere { height } => {
                let rho = (1.0 - height * height).sqrt() / (1.0 - height);
                let st = u[0].sin();
                vec![rho * &st * u[1].cos(), rho * &st * u[1].sin(), rho * u[0].cos()]
            }
            Immersion::Graph {
                constant,
                linear,
                quadratic,
            } => {
                let mut h = Jet::constant(*constant);
                for (b, ua) in linear.iter().zip(u) {
                    h += *b * ua;
                }
                for (i, row) in quadratic.iter().enumerate() {
                    for (j, a) in row.iter().enumerate() {
                        if *a != 0.0 {
                            h += *a * &u[i] * &u[j];
                        }
                    }
                }
                let mut out = u.to_vec();
                out.push(h);
                out
            }
            Immersion::LevelSet {
                field,
                base,
                frame,
                normal,
            } => {
                let point = |tau: &Jet| -> Vec<Jet> {
                    (0..base.len())
                        .map(|i| {
                            let mut c = Jet::constant(base[i]) + tau * normal[i];
                            for (ua, e) in u.iter().zip(frame) {
                                c += e[i] * ua;
                            }
                            c
                        })
                        .collect()
                };
                let level = field.value(base);
                let slope = crate::expand::expand(
                    crate::expand::DerivativeMode::Exact,
                    base,
                    1,
                    |v| field.eval(v),
                )
                .gradient(base.len());
                let d = linalg::dot(&slope, normal);
                let mut tau = Jet::constant(0.0);
                for _ in 0..12 {
                    let r = field.eval(&point(&tau)) - level;
                    tau -= r * (1.0 / d);
                }
                point(&tau)
            }
        }
    }

    /// Vector whose side the default conormal ray points to, if any.
    pub fn coorientation(&self, u: &[f64]) -> Option<Vec<f64>> {
        let x = values(&self.eval(&constants(u)));
        match self {
            Immersion::Sphere { center, .. } => Some(x.iter().zip(center).map(|(a, c)| a - c).collect()),
            Immersion::Cylinder {
                center, sphere_dim, ..
            } => Some(
                x.iter()
                    .zip(center)
                    .enumerate()
                    .map(|(i, (a, c))| if i <= *sphere_dim { a - c } else { 0.0 })
                    .collect(),
            ),
            Immersion::CliffordTorus { r, s } => {
                let (t, f) = (u[0], u[1]);
                let p: Vec<f64> = vec![r * t.cos(), r * t.sin(), s * f.cos(), s * f.sin()];
                let n = vec![s * t.cos(), s * t.sin(), -r * f.cos(), -r * f.sin()];
                Some(values(&stereographic_push(&constants(&p), &constants(&n))))
            }
            Immersion::S3Sphere { .. } => Some(x),
            Immersion::LevelSet { normal, .. } => Some(normal.clone()),
            _ => None,
        }
    }
}

/// `x_{k+1} = r cos u₁`, `x_k = r sin u₁ cos u₂`, …, `x₁ = r sin u₁ ⋯ sin u_k`.
fn hyperspherical(u: &[Jet], r: f64) -> Vec<Jet> {
    let mut out = Vec::with_capacity(u.len() + 1);
    let mut prod = Jet::constant(r);
    for ua in u {
        out.push(&prod * ua.cos());
        prod = prod * ua.sin();
    }
    out.push(prod);
    out.reverse();
    out
}

/// Which conormal ray a report is built on.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Orientation {
    /// The immersion's co-orientation, or the generalized cross product of the frame.
    #[default]
    Default,
    /// The opposite of `Default`.
    Reversed,
    /// Positive pairing with the given vector.
    Toward { vector: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RayChoice {
    Preferred,
    /// The preferred ray left the dual cone; the opposite one was used.
    Opposite,
}

#[derive(Debug, Clone, Default)]
pub struct ShapeOptions {
    pub orientation: Orientation,
    pub volume: Option<VolumeForm>,
    /// Where `ĝ` is not positive definite, report the real parts of the
    /// eigenvalues of `ĝ⁻¹B` instead of failing. Principal vectors are then
    /// left empty. Diagnostic use only: such a metric is not Finsler.
    pub allow_indefinite: bool,
}

/// Everything computed at one parameter value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeReport {
    pub u: Vec<f64>,
    pub point: Vec<f64>,
    pub ray: RayChoice,
    /// Unit conormal, `F*(ν) = 1`.
    pub conormal: Vec<f64>,
    /// Finsler unit normal `n = 𝓛⁻¹(ν)`.
    pub normal: Vec<f64>,
    /// Unit normal of the reference Riemannian metric on the same side.
    pub riemannian_normal: Vec<f64>,
    pub frame: Vec<Vec<f64>>,
    /// `ĝ_ab = g_n(Φ_a, Φ_b)`.
    pub induced_metric: Vec<Vec<f64>>,
    /// `B_ab = −g_n(Φ_a, D_b n)`.
    pub second_form: Vec<Vec<f64>>,
    /// `A(Φ_b) = Σ_a shape_matrix[a][b] Φ_a`.
    pub shape_matrix: Vec<Vec<f64>>,
    /// `D^n_{Φ_a} n` for each `a`.
    pub normal_derivatives: Vec<Vec<f64>>,
    pub principal_curvatures: Vec<f64>,
    pub multiplicities: Vec<usize>,
    /// Columns are `ĝ`-orthonormal principal vectors in the `Φ_a` basis.
    pub principal_vectors: Vec<Vec<f64>>,
    /// `Ĥ_n = Σ k_i`.
    pub mean_curvature: f64,
    /// `H_n = Ĥ_n + S(n)`, when a volume form is given.
    pub volume_mean_curvature: Option<f64>,
    /// `|F(n) − 1|`.
    pub unit_residual: f64,
    /// `max_a |ν(Φ_a)|`.
    pub pairing_residual: f64,
    /// `‖ĝA − (ĝA)ᵀ‖ / ‖ĝA‖`.
    pub self_adjoint_residual: f64,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn jet_det(m: &[Vec<Jet>]) -> Jet {
    match m.len() {
        0 => Jet::constant(1.0),
        1 => m[0][0].clone(),
        2 => &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0],
        n => {
            let mut acc = Jet::constant(0.0);
            for c in 0..n {
                let minor: Vec<Vec<Jet>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, v)| v.clone()).collect())
                    .collect();
                let t = &m[0][c] * jet_det(&minor);
                if c % 2 == 0 {
                    acc += t;
                } else {
                    acc -= t;
                }
            }
            acc
        }
    }
}

struct Local {
    point: Vec<f64>,
    frame: Vec<Vec<f64>>,
    /// Conormal jets (order 1 in `u`) on the chosen ray.
    conormal: Vec<Jet>,
    ray: RayChoice,
}

fn local(model: &MetricModel, imm: &Immersion, u: &[f64], orientation: &Orientation) -> Result<Local> {
    imm.validate()?;
    check_dim(model.dim(), imm.ambient_dim())?;
    check_dim(imm.param_dim(), u.len())?;
    let m = model.dim();
    let n = m - 1;
    let phi = expand_vec(model.derivatives(), u, 2, |v| imm.eval(v));
    let point: Vec<f64> = phi.iter().map(Jet::value).collect();
    model.check_point(&point)?;
    let tangent: Vec<Vec<Jet>> = (0..n)
        .map(|a| phi.iter().map(|c| c.differentiate(a)).collect())
        .collect();
    let frame: Vec<Vec<f64>> = tangent.iter().map(|t| values(t)).collect();
    let gram = DMatrix::from_fn(n, n, |a, b| linalg::dot(&frame[a], &frame[b]));
    let scale: f64 = frame.iter().map(|f| linalg::dot(f, f)).product();
    if !(gram.determinant() > 1e-12 * scale) {
        return Err(GeometryError::FrameDegenerate(u.to_vec()));
    }
    // Generalized cross product: ν̃_i = (−1)^i det(Φ_a^j)_{j ≠ i}.
    let cross: Vec<Jet> = (0..m)
        .map(|i| {
            let minor: Vec<Vec<Jet>> = tangent
                .iter()
                .map(|t| t.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v.clone()).collect())
                .collect();
            let d = jet_det(&minor);
            if i % 2 == 0 {
                d
            } else {
                -d
            }
        })
        .collect();
    let cv = values(&cross);
    let reference = match orientation {
        Orientation::Toward { vector } => Some(vector.clone()),
        _ => imm.coorientation(u),
    };
    let mut sign = match reference {
        Some(v) => {
            let p = linalg::dot(&cv, &v);
            if p == 0.0 {
                return Err(GeometryError::Config(format!(
                    "co-orientation vector is tangent at u = {u:?}"
                )));
            }
            p.signum()
        }
        None => 1.0,
    };
    if *orientation == Orientation::Reversed {
        sign = -sign;
    }
    let mut ray = RayChoice::Preferred;
    let candidate: Vec<f64> = cv.iter().map(|c| sign * c).collect();
    if !model.in_dual_cone(&point, &candidate)? {
        let other: Vec<f64> = candidate.iter().map(|c| -c).collect();
        if !model.in_dual_cone(&point, &other)? {
            return Err(GeometryError::NoConicNormal(u.to_vec()));
        }
        sign = -sign;
        ray = RayChoice::Opposite;
    }
    Ok(Local {
        point,
        frame,
        conormal: cross.iter().map(|c| sign * c).collect(),
        ray,
    })
}

struct NormalData {
    conormal: Vec<f64>,
    normal: Vec<f64>,
    /// `∂_a n` at fixed chart, along the parametrization.
    d_normal: Vec<Vec<f64>>,
    jac: DualJacobian,
}

fn normal_data(model: &MetricModel, loc: &Local) -> Result<NormalData> {
    let m = model.dim();
    let n = m - 1;
    let xi = values(&loc.conormal);
    let jac = dual_jacobian(model, &loc.point, &xi)?;
    let fstar = jac.dual_value;
    let normal: Vec<f64> = jac.vector.iter().map(|c| c / fstar).collect();
    let d_normal = (0..n)
        .map(|a| {
            let dxi: Vec<f64> = loc.conormal.iter().map(|c| c.partial(&[a])).collect();
            let phi_a = &loc.frame[a];
            let dy: Vec<f64> = (0..m)
                .map(|i| {
                    (0..m)
                        .map(|j| jac.d_x[(i, j)] * phi_a[j] + jac.d_xi[(i, j)] * dxi[j])
                        .sum()
                })
                .collect();
            let dfstar = linalg::dot(&jac.dual_grad_x, phi_a)
                + linalg::dot(&jac.vector, &dxi) / fstar;
            (0..m).map(|i| (dy[i] - normal[i] * dfstar) / fstar).collect()
        })
        .collect();
    Ok(NormalData {
        conormal: xi.iter().map(|c| c / fstar).collect(),
        normal,
        d_normal,
        jac,
    })
}

/// Unit conormal `ν` (`F*(ν) = 1`), Finsler unit normal `n` and the ray used.
pub fn finsler_unit_normal(
    model: &MetricModel,
    imm: &Immersion,
    u: &[f64],
    orientation: &Orientation,
) -> Result<(Vec<f64>, Vec<f64>, RayChoice)> {
    let loc = local(model, imm, u, orientation)?;
    let nd = normal_data(model, &loc)?;
    Ok((nd.conormal, nd.normal, loc.ray))
}

/// `ĝ_ab = g_ij(n) Φ_a^i Φ_b^j`.
pub fn induced_metric(model: &MetricModel, imm: &Immersion, u: &[f64], normal: &[f64]) -> Result<DMatrix<f64>> {
    let point = values(&imm.eval(&constants(u)));
    let frame: Vec<Vec<f64>> = {
        let phi = expand_vec(model.derivatives(), u, 1, |v| imm.eval(v));
        (0..imm.param_dim())
            .map(|a| phi.iter().map(|c| c.partial(&[a])).collect())
            .collect()
    };
    let g = crate::metric::fundamental_tensor(model, &point, normal)?.g;
    let n = frame.len();
    Ok(DMatrix::from_fn(n, n, |a, b| bilinear(&g, &frame[a], &frame[b])))
}

/// Shape operator `A(X) = −D^n_X n` and its spectrum at `u`.
pub fn shape_operator(
    model: &MetricModel,
    imm: &Immersion,
    u: &[f64],
    options: &ShapeOptions,
) -> Result<ShapeReport> {
    let loc = local(model, imm, u, &options.orientation)?;
    let nd = normal_data(model, &loc)?;
    let m = model.dim();
    let n = m - 1;
    let g = &nd.jac.g;
    let correction: Option<crate::spray::SprayData> = if model.is_minkowski() {
        None
    } else {
        Some(spray(model, &loc.point, &nd.normal)?)
    };
    let cov: Vec<Vec<f64>> = (0..n)
        .map(|a| {
            let mut d = nd.d_normal[a].clone();
            if let Some(s) = &correction {
                for (di, gi) in d.iter_mut().zip(s.contract(&loc.frame[a], &nd.normal)) {
                    *di += gi;
                }
            }
            d
        })
        .collect();
    let ghat = DMatrix::from_fn(n, n, |a, b| bilinear(g, &loc.frame[a], &loc.frame[b]));
    let second = DMatrix::from_fn(n, n, |a, b| -bilinear(g, &loc.frame[a], &cov[b]));
    let asym = (&second - second.transpose()).norm();
    let self_adjoint_residual = if second.norm() > 0.0 {
        asym / second.norm()
    } else {
        asym
    };
    let shape = linalg::invert(&ghat)? * &second;
    let (k, vecs) = match generalized_symmetric_eigen(&second, &ghat) {
        Err(GeometryError::SingularTensor(_)) if options.allow_indefinite => {
            let mut k: Vec<f64> = shape.complex_eigenvalues().iter().map(|z| z.re).collect();
            k.sort_by(f64::total_cmp);
            (k, DMatrix::zeros(n, 0))
        }
        r => r?,
    };
    let gap = match model.derivatives() {
        crate::expand::DerivativeMode::Exact => MULTIPLICITY_GAP,
        crate::expand::DerivativeMode::Fd => FD_MULTIPLICITY_GAP,
    };
    let mult = multiplicities(&k, gap);
    let mean = k.iter().sum();
    let volume_mean_curvature = match &options.volume {
        Some(v) => Some(mean + s_curvature(model, v, &loc.point, &nd.normal)?),
        None => None,
    };
    let unit_residual = match model.eval(&loc.point, &nd.normal) {
        Ok(f) => (f - 1.0).abs(),
        Err(_) => f64::INFINITY,
    };
    let pairing_residual = loc
        .frame
        .iter()
        .map(|f| linalg::dot(&nd.conormal, f).abs())
        .fold(0.0, f64::max);
    let chart = model.reference_chart();
    let xj = constants(&loc.point);
    let sharp = values(&chart.sharp(&xj, &constants(&nd.conormal)));
    let hn = chart.dual_inner(&xj, &constants(&nd.conormal), &constants(&nd.conormal)).value().sqrt();
    Ok(ShapeReport {
        u: u.to_vec(),
        point: loc.point.clone(),
        ray: loc.ray,
        conormal: nd.conormal.clone(),
        normal: nd.normal.clone(),
        riemannian_normal: sharp.iter().map(|c| c / hn).collect(),
        frame: loc.frame.clone(),
        induced_metric: rows(&ghat),
        second_form: rows(&second),
        shape_matrix: rows(&shape),
        normal_derivatives: cov,
        principal_curvatures: k,
        multiplicities: mult,
        principal_vectors: rows(&vecs),
        mean_curvature: mean,
        volume_mean_curvature,
        unit_residual,
        pairing_residual,
        self_adjoint_residual,
    })
}

/// `(totally umbilic, minimal)` at tolerance `tol`.
pub fn umbilic_minimal_flags(report: &ShapeReport, tol: f64) -> (bool, bool) {
    let k = &report.principal_curvatures;
    let spread = k.last().unwrap_or(&0.0) - k.first().unwrap_or(&0.0);
    let k1 = k.first().copied().unwrap_or(0.0);
    (spread <= tol * (1.0 + k1.abs()), report.mean_curvature.abs() <= tol)
}

/// Per-sample comparison of a Kropina metric with its navigation metric `h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KropinaSample {
    pub u: Vec<f64>,
    pub point: Vec<f64>,
    pub finsler_curvatures: Vec<f64>,
    pub riemannian_curvatures: Vec<f64>,
    pub finsler_multiplicities: Vec<usize>,
    pub riemannian_multiplicities: Vec<usize>,
    pub eigenvalue_deviation: f64,
    /// Largest angle between matching principal eigenspaces, in radians.
    pub angle_deviation: f64,
    /// `max |ĝ − h̄/W₀(n)| / max |ĝ|`.
    pub conformal_residual: f64,
    /// `max_a ‖D^n_{Φ_a} n − ∇^h_{Φ_a} n̄‖`.
    pub derivative_residual: f64,
    /// `‖n − (n̄ + W)‖`.
    pub translation_residual: f64,
    /// `W₀(n) = ⟨n̄, W⟩_h + 1`.
    pub w0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KropinaComparison {
    pub samples: Vec<KropinaSample>,
    pub max_eigenvalue_deviation: f64,
    pub max_angle_deviation: f64,
    pub max_conformal_residual: f64,
    pub max_derivative_residual: f64,
    pub max_translation_residual: f64,
    pub killing_residual: f64,
    pub tolerance: f64,
    pub conformal_tolerance: f64,
    pub passed: bool,
}

/// Compares principal data of `(F, n)` and `(h, n̄)` on the given samples.
pub fn kropina_equivalence_report(
    model: &MetricModel,
    imm: &Immersion,
    samples: &[Vec<f64>],
    orientation: &Orientation,
    tol: f64,
) -> Result<KropinaComparison> {
    let (h, wind) = match model.kind() {
        MetricKind::Kropina { h, wind } => (h.clone(), wind.clone()),
        other => {
            return Err(GeometryError::Unsupported(format!(
                "Kropina comparison requested for {other:?}"
            )))
        }
    };
    let riemannian = MetricModel::riemannian(h.clone())?.with_derivatives(model.derivatives());
    let points: Vec<Vec<f64>> = samples
        .iter()
        .map(|u| values(&imm.eval(&constants(u))))
        .collect();
    let killing = killing_check(&h, &wind, &points, model.derivatives())?;
    if !killing.passed {
        let worst = killing
            .samples
            .iter()
            .max_by(|a, b| a.max_r.total_cmp(&b.max_r))
            .unwrap();
        return Err(GeometryError::NotKilling {
            point: worst.point.clone(),
            residual: worst.max_r,
        });
    }
    let mut out = Vec::with_capacity(samples.len());
    for u in samples {
        let rr = shape_operator(
            &riemannian,
            imm,
            u,
            &ShapeOptions {
                orientation: orientation.clone(),
                volume: None,
                allow_indefinite: false,
            },
        )?;
        let xj = constants(&rr.point);
        let w = wind.eval(&xj);
        let nbar = &rr.normal;
        let w0 = h.inner(&xj, &constants(nbar), &w).value() + 1.0;
        if w0 <= 1e-12 {
            return Err(GeometryError::NormalExcluded(rr.point.clone()));
        }
        let fr = shape_operator(
            model,
            imm,
            u,
            &ShapeOptions {
                orientation: Orientation::Toward {
                    vector: nbar.clone(),
                },
                volume: None,
                allow_indefinite: false,
            },
        )?;
        let eigenvalue_deviation = linalg::max_abs_diff(&fr.principal_curvatures, &rr.principal_curvatures);
        let angle_deviation = eigenspace_angle(&fr, &rr);
        let n = fr.induced_metric.len();
        let mut conf = 0.0f64;
        let mut big = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let want = rr.induced_metric[a][b] / w0;
                conf = conf.max((fr.induced_metric[a][b] - want).abs());
                big = big.max(fr.induced_metric[a][b].abs());
            }
        }
        let derivative_residual = fr
            .normal_derivatives
            .iter()
            .zip(&rr.normal_derivatives)
            .map(|(a, b)| {
                let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                norm(&d)
            })
            .fold(0.0, f64::max);
        let wv = values(&w);
        let shifted: Vec<f64> = nbar.iter().zip(&wv).map(|(a, b)| a + b).collect();
        let diff: Vec<f64> = fr.normal.iter().zip(&shifted).map(|(a, b)| a - b).collect();
        out.push(KropinaSample {
            u: u.clone(),
            point: rr.point.clone(),
            finsler_curvatures: fr.principal_curvatures.clone(),
            riemannian_curvatures: rr.principal_curvatures.clone(),
            finsler_multiplicities: fr.multiplicities.clone(),
            riemannian_multiplicities: rr.multiplicities.clone(),
            eigenvalue_deviation,
            angle_deviation,
            conformal_residual: conf / big.max(f64::MIN_POSITIVE),
            derivative_residual,
            translation_residual: norm(&diff),
            w0,
        });
    }
    let fold = |f: fn(&KropinaSample) -> f64| out.iter().map(f).fold(0.0, f64::max);
    let max_eigenvalue_deviation = fold(|s| s.eigenvalue_deviation);
    let max_angle_deviation = fold(|s| s.angle_deviation);
    let max_conformal_residual = fold(|s| s.conformal_residual);
    let max_derivative_residual = fold(|s| s.derivative_residual);
    let max_translation_residual = fold(|s| s.translation_residual);
    let conformal_tol = match model.derivatives() {
        crate::expand::DerivativeMode::Exact => CONFORMAL_TOL,
        crate::expand::DerivativeMode::Fd => tol,
    };
    let same_mult = out
        .iter()
        .all(|s| s.finsler_multiplicities == s.riemannian_multiplicities);
    Ok(KropinaComparison {
        passed: same_mult
            && max_eigenvalue_deviation <= tol
            && max_angle_deviation <= tol.sqrt().max(tol)
            && max_derivative_residual <= tol
            && max_conformal_residual <= conformal_tol,
        samples: out,
        max_eigenvalue_deviation,
        max_angle_deviation,
        max_conformal_residual,
        max_derivative_residual,
        max_translation_residual,
        killing_residual: killing.max_r,
        tolerance: tol,
        conformal_tolerance: conformal_tol,
    })
}

/// Largest principal angle between corresponding eigenspaces, measured in
/// the Riemannian induced metric. Vectors of both reports are expressed in
/// the same `Φ_a` basis.
fn eigenspace_angle(f: &ShapeReport, r: &ShapeReport) -> f64 {
    let n = r.induced_metric.len();
    let hbar = DMatrix::from_fn(n, n, |a, b| r.induced_metric[a][b]);
    let col = |rep: &ShapeReport, j: usize| -> Vec<f64> { (0..n).map(|a| rep.principal_vectors[a][j]).collect() };
    let groups = |mult: &[usize]| -> Vec<(usize, usize)> {
        let mut start = 0;
        mult.iter()
            .map(|&m| {
                let g = (start, start + m);
                start += m;
                g
            })
            .collect()
    };
    if f.multiplicities != r.multiplicities {
        return std::f64::consts::FRAC_PI_2;
    }
    let mut worst = 0.0f64;
    for (lo, hi) in groups(&r.multiplicities) {
        for j in lo..hi {
            let v = col(f, j);
            let vn = bilinear(&hbar, &v, &v).sqrt();
            let mut rest = v.clone();
            for k in lo..hi {
                let w = col(r, k);
                let p = bilinear(&hbar, &w, &v);
                for (ri, wi) in rest.iter_mut().zip(&w) {
                    *ri -= p * wi;
                }
            }
            let sin = (bilinear(&hbar, &rest, &rest).max(0.0)).sqrt() / vn;
            worst = worst.max(sin.min(1.0).asin());
        }
    }
    worst
}

/// Image of `u` under `Φ` as plain values.
pub fn point_of(imm: &Immersion, u: &[f64]) -> Vec<f64> {
    values(&imm.eval(&constants(u)))
}
