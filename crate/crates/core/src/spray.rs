//! Spray coefficients, the Chern connection and flag curvature.

use nalgebra::DMatrix;

use crate::error::{check_dim, GeometryError, Result};
use crate::expand::expand_vec;
use crate::jet::{constants, Jet, JetSpace};
use crate::linalg::{bilinear, invert_jets, mat_vec};
use crate::metric::MetricModel;

/// Spray data at `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SprayData {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `g_ij(x, y)`.
    pub g: DMatrix<f64>,
    /// `G^i`.
    pub spray: Vec<f64>,
    /// `N^i_j = ∂G^i/∂y^j`.
    pub connection: DMatrix<f64>,
    /// `christoffel[i][(j, k)] = Γ^i_jk(x, y)`.
    pub christoffel: Vec<DMatrix<f64>>,
    /// `R^i_k`, present when requested.
    pub curvature: Option<DMatrix<f64>>,
}

impl SprayData {
    /// `Γ(u, v)^i = Γ^i_jk u^j v^k`.
    pub fn contract(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        self.christoffel.iter().map(|c| bilinear(c, u, v)).collect()
    }
}

struct LocalJets {
    g: Vec<Vec<Jet>>,
    spray: Vec<Jet>,
}

fn local_jets(model: &MetricModel, x: &[f64], y: &[f64], order: usize) -> Result<LocalJets> {
    let m = model.dim();
    let t = model.squared_expansion(x, y, order);
    let p: Vec<f64> = x.iter().chain(y).copied().collect();
    let vars = JetSpace::get(2 * m, order).variables(&p);
    let g: Vec<Vec<Jet>> = (0..m)
        .map(|i| {
            let ti = t.differentiate(m + i);
            (0..m).map(|j| 0.5 * ti.differentiate(m + j)).collect()
        })
        .collect();
    let ginv = invert_jets(&g)?;
    let tx: Vec<Jet> = (0..m).map(|k| t.differentiate(k)).collect();
    let a: Vec<Jet> = (0..m)
        .map(|l| {
            let mut acc = -tx[l].truncate(order - 2);
            for (k, txk) in tx.iter().enumerate() {
                acc += txk.differentiate(m + l) * &vars[m + k];
            }
            acc
        })
        .collect();
    let spray = (0..m)
        .map(|i| {
            let mut acc = Jet::constant(0.0);
            for (l, al) in a.iter().enumerate() {
                acc += &ginv[i][l] * al;
            }
            0.25 * acc
        })
        .collect();
    Ok(LocalJets { g, spray })
}

fn minkowski_data(model: &MetricModel, x: &[f64], y: &[f64], with_curvature: bool) -> SprayData {
    let m = model.dim();
    let t = model.squared_expansion(x, y, 2);
    SprayData {
        x: x.to_vec(),
        y: y.to_vec(),
        g: DMatrix::from_fn(m, m, |i, j| 0.5 * t.partial(&[m + i, m + j])),
        spray: vec![0.0; m],
        connection: DMatrix::zeros(m, m),
        christoffel: vec![DMatrix::zeros(m, m); m],
        curvature: with_curvature.then(|| DMatrix::zeros(m, m)),
    }
}

fn compute(model: &MetricModel, x: &[f64], y: &[f64], with_curvature: bool) -> Result<SprayData> {
    model.eval(x, y)?;
    if model.is_minkowski() {
        return Ok(minkowski_data(model, x, y, with_curvature));
    }
    let m = model.dim();
    let order = if with_curvature { 4 } else { 3 };
    let jets = local_jets(model, x, y, order)?;
    let g = DMatrix::from_fn(m, m, |i, j| jets.g[i][j].value());
    let ginv = crate::linalg::invert(&g)?;
    let spray: Vec<f64> = jets.spray.iter().map(Jet::value).collect();
    let n = DMatrix::from_fn(m, m, |i, j| jets.spray[i].partial(&[m + j]));
    // δ_k g_lj = ∂_{x^k} g_lj − N^r_k ∂_{y^r} g_lj
    let delta = |l: usize, j: usize, k: usize| -> f64 {
        let glj = &jets.g[l][j];
        glj.partial(&[k]) - (0..m).map(|r| n[(r, k)] * glj.partial(&[m + r])).sum::<f64>()
    };
    let mut christoffel = vec![DMatrix::zeros(m, m); m];
    for j in 0..m {
        for k in j..m {
            let lowered: Vec<f64> = (0..m)
                .map(|l| 0.5 * (delta(l, j, k) + delta(l, k, j) - delta(j, k, l)))
                .collect();
            let raised = mat_vec(&ginv, &lowered);
            for i in 0..m {
                christoffel[i][(j, k)] = raised[i];
                christoffel[i][(k, j)] = raised[i];
            }
        }
    }
    let curvature = with_curvature.then(|| {
        DMatrix::from_fn(m, m, |i, k| {
            let gi = &jets.spray[i];
            let mut r = 2.0 * gi.partial(&[k]);
            for j in 0..m {
                r -= y[j] * gi.partial(&[j, m + k]);
                r += 2.0 * spray[j] * gi.partial(&[m + j, m + k]);
                r -= n[(i, j)] * n[(j, k)];
            }
            r
        })
    });
    Ok(SprayData {
        x: x.to_vec(),
        y: y.to_vec(),
        g,
        spray,
        connection: n,
        christoffel,
        curvature,
    })
}

/// `G^i`, `N^i_j` and Chern `Γ^i_jk` at `(x, y)`.
pub fn spray(model: &MetricModel, x: &[f64], y: &[f64]) -> Result<SprayData> {
    compute(model, x, y, false)
}

/// Spray data including the spray curvature `R^i_k`.
pub fn spray_with_curvature(model: &MetricModel, x: &[f64], y: &[f64]) -> Result<SprayData> {
    compute(model, x, y, true)
}

/// `D^w_v X = v^j ∂_j X^i + Γ^i_jk(w) v^j X^k`.
pub fn covariant_derivative<F>(
    model: &MetricModel,
    w: &[f64],
    v: &[f64],
    field: F,
    x: &[f64],
) -> Result<Vec<f64>>
where
    F: Fn(&[Jet]) -> Vec<Jet>,
{
    check_dim(model.dim(), v.len())?;
    let data = spray(model, x, w)?;
    let m = model.dim();
    let xf = expand_vec(model.derivatives(), x, 1, &field);
    let xv: Vec<f64> = xf.iter().map(Jet::value).collect();
    let gamma = data.contract(v, &xv);
    Ok((0..m)
        .map(|i| (0..m).map(|j| v[j] * xf[i].partial(&[j])).sum::<f64>() + gamma[i])
        .collect())
}

/// Flag curvature `K(y; v) = g(R v, v) / (g(y,y) g(v,v) − g(y,v)²)`.
pub fn flag_curvature(model: &MetricModel, x: &[f64], y: &[f64], v: &[f64]) -> Result<f64> {
    check_dim(model.dim(), v.len())?;
    let data = spray_with_curvature(model, x, y)?;
    let r = data.curvature.as_ref().unwrap();
    let g = &data.g;
    let (gyy, gvv, gyv) = (bilinear(g, y, y), bilinear(g, v, v), bilinear(g, y, v));
    let denom = gyy * gvv - gyv * gyv;
    if !(denom > 1e-14 * gyy * gvv) {
        return Err(GeometryError::DegenerateFlag(format!(
            "v = {v:?} is parallel to y = {y:?}"
        )));
    }
    let rv = mat_vec(r, v);
    Ok(bilinear(g, &rv, v) / denom)
}

/// `Γ^i_jk(x, y)` for a Riemannian chart, through the generic engine.
pub fn christoffel_at(model: &MetricModel, x: &[f64], y: &[f64]) -> Result<Vec<DMatrix<f64>>> {
    Ok(spray(model, x, y)?.christoffel)
}

/// Evaluates `X` at `x` as plain values.
pub fn field_value<F>(field: F, x: &[f64]) -> Vec<f64>
where
    F: Fn(&[Jet]) -> Vec<Jet>,
{
    field(&constants(x)).iter().map(Jet::value).collect()
}
