//! Legendre transformation between the cone and its dual.

use nalgebra::DMatrix;

use crate::error::{check_dim, GeometryError, Result};
use crate::jet::constants;
use crate::linalg::{invert, mat_vec, norm};
use crate::metric::{dual_ab_preimage, MetricKind, MetricModel};

pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 50;

/// `𝓛(y) = F F_y`, the covector `g_y(y, ·)`.
pub fn legendre(model: &MetricModel, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    model.eval(x, y)?;
    if let MetricKind::DualAlphaBeta { beta_star, phi } = model.kind() {
        return dual_ab_preimage(beta_star, phi, y)
            .ok_or_else(|| GeometryError::ConeViolation(format!("y = {y:?}")));
    }
    let m = model.dim();
    let t = model.squared_expansion(x, y, 1);
    Ok((0..m).map(|i| 0.5 * t.partial(&[m + i])).collect())
}

/// `𝓛⁻¹(ξ)`, from the closed-form dual when available, else by damped Newton.
pub fn legendre_inverse(model: &MetricModel, x: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
    model.check_point(x)?;
    if !model.in_dual_cone(x, xi)? {
        return Err(GeometryError::DualConeViolation(format!("ξ = {xi:?} at x = {x:?}")));
    }
    match model.dual_squared_expansion(x, xi, 1) {
        Some(t) => {
            let m = model.dim();
            Ok((0..m).map(|i| 0.5 * t.partial(&[m + i])).collect())
        }
        None => newton_inverse(model, x, xi),
    }
}

/// Damped Newton solve of `𝓛(y) = ξ` started from the α-musical preimage,
/// pushed into the cone along `β♯` when needed.
pub(crate) fn newton_inverse(model: &MetricModel, x: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
    check_dim(model.dim(), xi.len())?;
    let m = model.dim();
    let chart = model.reference_chart();
    let xj = constants(x);
    let mut y = crate::jet::values(&chart.sharp(&xj, &constants(xi)));
    if !model.in_cone(x, &y)? {
        let push = match model.kind() {
            MetricKind::AlphaBeta { beta, .. } => {
                crate::jet::values(&chart.sharp(&xj, &beta.eval(&xj)))
            }
            _ => y.clone(),
        };
        let base = y.clone();
        let shifted = |t: f64| -> Vec<f64> { base.iter().zip(&push).map(|(a, b)| a + t * b).collect() };
        let scale = norm(&y).max(1e-300) / norm(&push).max(1e-300);
        let mut hi = 1e-3 * scale;
        let mut found = false;
        for _ in 0..80 {
            if model.in_cone(x, &shifted(hi))? {
                found = true;
                break;
            }
            hi *= 2.0;
        }
        if !found {
            return Err(GeometryError::NewtonDivergence {
                iterations: 0,
                residual: f64::INFINITY,
            });
        }
        let mut lo = 0.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if model.in_cone(x, &shifted(mid))? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let t = hi + 0.1 * hi.max(scale);
        y = shifted(t);
        if !model.in_cone(x, &y)? {
            y = shifted(hi);
        }
    }
    let target = norm(xi).max(1.0);
    let mut residual = f64::INFINITY;
    for _ in 0..NEWTON_MAX_ITER {
        let t = model.squared_expansion(x, &y, 2);
        let l: Vec<f64> = (0..m).map(|i| 0.5 * t.partial(&[m + i])).collect();
        let r: Vec<f64> = l.iter().zip(xi).map(|(a, b)| a - b).collect();
        residual = norm(&r);
        if residual <= NEWTON_TOL * target {
            return Ok(y);
        }
        let g = DMatrix::from_fn(m, m, |i, j| 0.5 * t.partial(&[m + i, m + j]));
        let step = mat_vec(&invert(&g)?, &r);
        let mut damp = 1.0;
        loop {
            let cand: Vec<f64> = y.iter().zip(&step).map(|(a, d)| a - damp * d).collect();
            if model.in_cone(x, &cand)? {
                y = cand;
                break;
            }
            damp *= 0.5;
            if damp < 1e-12 {
                return Err(GeometryError::NewtonDivergence {
                    iterations: NEWTON_MAX_ITER,
                    residual,
                });
            }
        }
    }
    Err(GeometryError::NewtonDivergence {
        iterations: NEWTON_MAX_ITER,
        residual,
    })
}

/// First-order data of `𝓛⁻¹` at `(x, ξ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualJacobian {
    pub covector: Vec<f64>,
    /// `F*(x, ξ)`.
    pub dual_value: f64,
    /// `y = 𝓛⁻¹(ξ)`.
    pub vector: Vec<f64>,
    /// `∂y^i/∂ξ_j = g*^{ij}(ξ)`.
    pub d_xi: DMatrix<f64>,
    /// `∂y^i/∂x^j` at fixed `ξ`.
    pub d_x: DMatrix<f64>,
    /// `g_ij(y) = (g*)⁻¹`.
    pub g: DMatrix<f64>,
    /// `∂F*/∂x^j` at fixed `ξ`.
    pub dual_grad_x: Vec<f64>,
}

pub fn dual_jacobian(model: &MetricModel, x: &[f64], xi: &[f64]) -> Result<DualJacobian> {
    let m = model.dim();
    let y = legendre_inverse(model, x, xi)?;
    if let Some(t) = model.dual_squared_expansion(x, xi, 2) {
        let h = 0.5 * t.value();
        let dual_value = (2.0 * h).sqrt();
        let d_xi = DMatrix::from_fn(m, m, |i, j| 0.5 * t.partial(&[m + i, m + j]));
        let d_x = DMatrix::from_fn(m, m, |i, j| 0.5 * t.partial(&[m + i, j]));
        let dual_grad_x = (0..m).map(|j| 0.5 * t.partial(&[j]) / dual_value).collect();
        let g = invert(&d_xi)?;
        return Ok(DualJacobian {
            covector: xi.to_vec(),
            dual_value,
            vector: y,
            d_xi,
            d_x,
            g,
            dual_grad_x,
        });
    }
    let t = model.squared_expansion(x, &y, 2);
    let dual_value = t.value().sqrt();
    let g = DMatrix::from_fn(m, m, |i, j| 0.5 * t.partial(&[m + i, m + j]));
    let hyx = DMatrix::from_fn(m, m, |i, j| 0.5 * t.partial(&[m + i, j]));
    let d_xi = invert(&g)?;
    let d_x = -(&d_xi * hyx);
    // Envelope identity: ∂_x H*(x, ξ) = −∂_x H(x, y).
    let dual_grad_x = (0..m).map(|j| -0.5 * t.partial(&[j]) / dual_value).collect();
    Ok(DualJacobian {
        covector: xi.to_vec(),
        dual_value,
        vector: y,
        d_xi,
        d_x,
        g,
        dual_grad_x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{CovectorField, RiemannianChart, VectorField};
    use crate::metric::kropina_from_navigation;
    use crate::phi::PhiFamily;

    #[test]
    fn euclidean_is_identity() {
        let e = MetricModel::euclidean(2).unwrap();
        let xi = legendre(&e, &[0.0, 0.0], &[3.0, 4.0]).unwrap();
        assert!(crate::linalg::max_abs_diff(&xi, &[3.0, 4.0]) < 1e-14);
        let y = legendre_inverse(&e, &[0.0, 0.0], &[3.0, 4.0]).unwrap();
        assert!(crate::linalg::max_abs_diff(&y, &[3.0, 4.0]) < 1e-14);
    }

    #[test]
    fn kropina_legendre_example() {
        let k = kropina_from_navigation(
            RiemannianChart::Euclidean { dim: 3 },
            VectorField::Constant {
                components: vec![0.0, 0.0, 1.0],
            },
            &[],
        )
        .unwrap();
        let x = [0.0; 3];
        let xi = legendre(&k, &x, &[0.0, 0.0, 1.0]).unwrap();
        assert!(crate::linalg::max_abs_diff(&xi, &[0.0, 0.0, 0.25]) < 1e-15);
        assert!((k.eval_dual(&x, &xi).unwrap() - 0.5).abs() < 1e-15);
        let y = legendre_inverse(&k, &x, &[0.0, 0.0, 0.25]).unwrap();
        assert!(crate::linalg::max_abs_diff(&y, &[0.0, 0.0, 1.0]) < 1e-14);
    }

    #[test]
    fn newton_inverts_kropina_profile_metric() {
        // F = α²/β with β = 2 e₃ is the Kropina metric of the unit wind e₃.
        let ab = MetricModel::new(MetricKind::AlphaBeta {
            alpha: RiemannianChart::Euclidean { dim: 3 },
            beta: CovectorField::Constant {
                components: vec![0.0, 0.0, 2.0],
            },
            phi: PhiFamily::Kropina,
            b0: 2.0,
            excluded: vec![],
        })
        .unwrap();
        let x = [0.0; 3];
        let y = [0.3, -0.5, 0.8];
        let xi = legendre(&ab, &x, &y).unwrap();
        let back = newton_inverse(&ab, &x, &xi).unwrap();
        assert!(crate::linalg::max_abs_diff(&back, &y) < 1e-10, "{back:?}");
        // A start outside the cone is pushed in along β♯.
        let xi2 = legendre(&ab, &x, &[2.0, 0.0, 0.05]).unwrap();
        let back2 = newton_inverse(&ab, &x, &xi2).unwrap();
        assert!(crate::linalg::max_abs_diff(&back2, &[2.0, 0.0, 0.05]) < 1e-9, "{back2:?}");
    }
}
