//! Riemannian charts and vector/covector fields evaluated on jets.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::expand::{expand_vec, DerivativeMode};
use crate::jet::{dot, Jet};
use crate::linalg::{invert, JetMatrix};

/// A Riemannian metric `h_ij(x)` on a single coordinate chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RiemannianChart {
    Euclidean { dim: usize },
    /// Constant symmetric positive definite matrix.
    Constant { matrix: Vec<Vec<f64>> },
    /// Unit round sphere `S^dim` in stereographic coordinates from the north pole:
    /// `h = 4 / (1 + |x|²)² δ`.
    RoundSphere { dim: usize },
}

impl RiemannianChart {
    pub fn dim(&self) -> usize {
        match self {
            RiemannianChart::Euclidean { dim } | RiemannianChart::RoundSphere { dim } => *dim,
            RiemannianChart::Constant { matrix } => matrix.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim() < 2 {
            return Err(GeometryError::Config("chart dimension must be at least 2".into()));
        }
        if let RiemannianChart::Constant { matrix } = self {
            let n = matrix.len();
            if matrix.iter().any(|r| r.len() != n) {
                return Err(GeometryError::Config("metric matrix must be square".into()));
            }
            let m = DMatrix::from_fn(n, n, |i, j| matrix[i][j]);
            if (&m - m.transpose()).amax() > 1e-12 * m.amax() {
                return Err(GeometryError::Config("metric matrix must be symmetric".into()));
            }
            if m.cholesky().is_none() {
                return Err(GeometryError::Config("metric matrix must be positive definite".into()));
            }
        }
        Ok(())
    }

    /// Conformal factor `e` with `h = e δ`, when the chart is conformally flat.
    fn conformal(&self, x: &[Jet]) -> Option<Jet> {
        match self {
            RiemannianChart::Euclidean { .. } => Some(Jet::constant(1.0)),
            RiemannianChart::RoundSphere { .. } => {
                let d = 1.0 + dot(x, x);
                Some(4.0 * d.square().recip())
            }
            RiemannianChart::Constant { .. } => None,
        }
    }

    pub fn metric(&self, x: &[Jet]) -> JetMatrix {
        let n = self.dim();
        match self {
            RiemannianChart::Constant { matrix } => matrix
                .iter()
                .map(|r| r.iter().map(|&v| Jet::constant(v)).collect())
                .collect(),
            _ => {
                let e = self.conformal(x).unwrap();
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| if i == j { e.clone() } else { Jet::constant(0.0) })
                            .collect()
                    })
                    .collect()
            }
        }
    }

    pub fn inverse_metric(&self, x: &[Jet]) -> JetMatrix {
        let n = self.dim();
        match self {
            RiemannianChart::Constant { matrix } => {
                let m = DMatrix::from_fn(n, n, |i, j| matrix[i][j]);
                let inv = invert(&m).expect("validated positive definite");
                (0..n)
                    .map(|i| (0..n).map(|j| Jet::constant(inv[(i, j)])).collect())
                    .collect()
            }
            _ => {
                let e = self.conformal(x).unwrap().recip();
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| if i == j { e.clone() } else { Jet::constant(0.0) })
                            .collect()
                    })
                    .collect()
            }
        }
    }

    /// `h(x)(a, b)`.
    pub fn inner(&self, x: &[Jet], a: &[Jet], b: &[Jet]) -> Jet {
        match self.conformal(x) {
            Some(e) => e * dot(a, b),
            None => quadratic(&self.metric(x), a, b),
        }
    }

    /// `h⁻¹(x)(ξ, η)`.
    pub fn dual_inner(&self, x: &[Jet], xi: &[Jet], eta: &[Jet]) -> Jet {
        match self.conformal(x) {
            Some(e) => dot(xi, eta) / e,
            None => quadratic(&self.inverse_metric(x), xi, eta),
        }
    }

    /// Index lowering `h_ij v^j`.
    pub fn flat(&self, x: &[Jet], v: &[Jet]) -> Vec<Jet> {
        match self.conformal(x) {
            Some(e) => v.iter().map(|c| &e * c).collect(),
            None => mat_vec(&self.metric(x), v),
        }
    }

    /// Index raising `h^ij ξ_j`.
    pub fn sharp(&self, x: &[Jet], xi: &[Jet]) -> Vec<Jet> {
        match self.conformal(x) {
            Some(e) => {
                let r = e.recip();
                xi.iter().map(|c| &r * c).collect()
            }
            None => mat_vec(&self.inverse_metric(x), xi),
        }
    }

    /// `√det h`.
    pub fn sqrt_det(&self, x: &[Jet]) -> Jet {
        let n = self.dim() as f64;
        match self {
            RiemannianChart::Constant { matrix } => {
                let k = matrix.len();
                let m = DMatrix::from_fn(k, k, |i, j| matrix[i][j]);
                Jet::constant(m.determinant().sqrt())
            }
            _ => self.conformal(x).unwrap().powf(n / 2.0),
        }
    }

    /// Levi-Civita symbols `Γ^k_ij` as `out[k][(i, j)]`.
    pub fn christoffel(&self, x: &[f64], mode: DerivativeMode) -> Vec<DMatrix<f64>> {
        let n = self.dim();
        let h = expand_vec(mode, x, 1, |v| self.metric(v).into_iter().flatten().collect());
        let d = |i: usize, j: usize, l: usize| h[i * n + j].partial(&[l]);
        let hinv = self.inverse_metric(&crate::jet::constants(x));
        (0..n)
            .map(|k| {
                DMatrix::from_fn(n, n, |i, j| {
                    (0..n)
                        .map(|l| {
                            0.5 * hinv[k][l].value() * (d(l, j, i) + d(l, i, j) - d(i, j, l))
                        })
                        .sum()
                })
            })
            .collect()
    }
}

fn quadratic(m: &[Vec<Jet>], a: &[Jet], b: &[Jet]) -> Jet {
    let mut acc = Jet::constant(0.0);
    for (i, row) in m.iter().enumerate() {
        for (j, mij) in row.iter().enumerate() {
            if mij.is_constant() && mij.value() == 0.0 {
                continue;
            }
            acc += mij * &a[i] * &b[j];
        }
    }
    acc
}

fn mat_vec(m: &[Vec<Jet>], v: &[Jet]) -> Vec<Jet> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// Stereographic preimage on `S^m ⊂ R^{m+1}` of a chart point.
pub fn inverse_stereographic(x: &[Jet]) -> Vec<Jet> {
    let r2 = dot(x, x);
    let inv = (1.0 + &r2).recip();
    let mut p: Vec<Jet> = x.iter().map(|c| 2.0 * c * &inv).collect();
    p.push((r2 - 1.0) * &inv);
    p
}

/// Chart image of an ambient tangent vector `V` at `p ∈ S^m` under the
/// stereographic projection from `(0, …, 0, 1)`.
pub fn stereographic_push(p: &[Jet], v: &[Jet]) -> Vec<Jet> {
    let m = p.len() - 1;
    let denom = (1.0 - &p[m]).recip();
    let denom2 = denom.square();
    (0..m)
        .map(|i| &v[i] * &denom + &p[i] * &v[m] * &denom2)
        .collect()
}

/// Stereographic projection `p ↦ p_{1..m} / (1 − p_{m+1})`.
pub fn stereographic(p: &[f64]) -> Vec<f64> {
    let m = p.len() - 1;
    p[..m].iter().map(|c| c / (1.0 - p[m])).collect()
}

/// A smooth vector field `W^i(x)` on the chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VectorField {
    Constant { components: Vec<f64> },
    /// `W(x) = A x + c`.
    Linear { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
    /// Hopf field `(−p₂, p₁, −p₄, p₃)` on the unit `S³`, in the stereographic chart.
    Hopf,
}

impl VectorField {
    pub fn dim(&self) -> Option<usize> {
        match self {
            VectorField::Constant { components } => Some(components.len()),
            VectorField::Linear { offset, .. } => Some(offset.len()),
            VectorField::Hopf => Some(3),
        }
    }

    pub fn eval(&self, x: &[Jet]) -> Vec<Jet> {
        match self {
            VectorField::Constant { components } => {
                components.iter().map(|&c| Jet::constant(c)).collect()
            }
            VectorField::Linear { matrix, offset } => matrix
                .iter()
                .zip(offset)
                .map(|(row, &c)| {
                    let mut acc = Jet::constant(c);
                    for (a, xi) in row.iter().zip(x) {
                        if *a != 0.0 {
                            acc += *a * xi;
                        }
                    }
                    acc
                })
                .collect(),
            VectorField::Hopf => {
                let p = inverse_stereographic(x);
                let v = vec![-&p[1], p[0].clone(), -&p[3], p[2].clone()];
                stereographic_push(&p, &v)
            }
        }
    }

    pub fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        crate::jet::values(&self.eval(&crate::jet::constants(x)))
    }
}

/// A smooth 1-form `b_i(x)` on the chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CovectorField {
    Constant { components: Vec<f64> },
    Linear { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
}

impl CovectorField {
    pub fn dim(&self) -> usize {
        match self {
            CovectorField::Constant { components } => components.len(),
            CovectorField::Linear { offset, .. } => offset.len(),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, CovectorField::Constant { .. })
    }

    pub fn eval(&self, x: &[Jet]) -> Vec<Jet> {
        match self {
            CovectorField::Constant { components } => {
                components.iter().map(|&c| Jet::constant(c)).collect()
            }
            CovectorField::Linear { matrix, offset } => VectorField::Linear {
                matrix: matrix.clone(),
                offset: offset.clone(),
            }
            .eval(x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::constants;

    #[test]
    fn hopf_field_is_unit_in_round_chart() {
        let chart = RiemannianChart::RoundSphere { dim: 3 };
        for x in [[0.1, -0.4, 0.7], [1.3, 0.2, -0.5], [0.0, 0.0, 0.0]] {
            let xj = constants(&x);
            let w = VectorField::Hopf.eval(&xj);
            let n = chart.inner(&xj, &w, &w).value().sqrt();
            assert!((n - 1.0).abs() < 1e-13, "{n}");
        }
    }

    #[test]
    fn stereographic_round_trip() {
        let x = constants(&[0.3, -0.2, 0.9]);
        let p = inverse_stereographic(&x);
        let pv = crate::jet::values(&p);
        assert!((crate::linalg::norm(&pv) - 1.0).abs() < 1e-14);
        let back = stereographic(&pv);
        assert!(crate::linalg::max_abs_diff(&back, &[0.3, -0.2, 0.9]) < 1e-14);
    }

    #[test]
    fn round_sphere_christoffel_matches_conformal_closed_form() {
        // h = e^{2ψ} δ with ψ = ln 2 − ln(1 + |x|²):
        // Γ^k_ij = δ_ki ψ_j + δ_kj ψ_i − δ_ij ψ_k, ψ_i = −2 x_i / (1 + |x|²).
        let chart = RiemannianChart::RoundSphere { dim: 3 };
        let x = [0.4, -0.1, 0.8];
        let g = chart.christoffel(&x, DerivativeMode::Exact);
        let d = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
        let psi: Vec<f64> = x.iter().map(|v| -2.0 * v / d).collect();
        let kd = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let want = kd(k, i) * psi[j] + kd(k, j) * psi[i] - kd(i, j) * psi[k];
                    assert!((g[k][(i, j)] - want).abs() < 1e-13);
                }
            }
        }
    }
}
