//! Local Taylor expansion of vector-valued functions, either exactly through
//! jets or through central finite-difference stencils.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::jet::{constants, Jet, JetSpace};

/// How derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DerivativeMode {
    /// Truncated Taylor arithmetic, exact to rounding.
    #[default]
    Exact,
    /// Central finite differences on plain evaluations.
    Fd,
}

/// Accuracy order of the central stencils.
const STENCIL_ORDER: f64 = 4.0;
/// Steps `2h, h, h/2, …` tried per coefficient.
const STEP_LEVELS: usize = 4;

/// 1-D central stencil `(offset, weight)` for the `k`-th derivative at unit
/// step, with truncation error `O(h⁴)`.
fn stencil(k: u8) -> &'static [(i32, f64)] {
    match k {
        0 => &[(0, 1.0)],
        1 => &[(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)],
        2 => &[(-2, -1.0 / 12.0), (-1, 16.0 / 12.0), (0, -30.0 / 12.0), (1, 16.0 / 12.0), (2, -1.0 / 12.0)],
        3 => &[(-3, 0.125), (-2, -1.0), (-1, 1.625), (1, -1.625), (2, 1.0), (3, -0.125)],
        4 => &[(-3, -1.0 / 6.0), (-2, 2.0), (-1, -6.5), (0, 28.0 / 3.0), (1, -6.5), (2, 2.0), (3, -1.0 / 6.0)],
        _ => panic!("finite-difference stencils are provided up to order 4"),
    }
}

/// Expands `f` around `point` to the given order. Every output jet lives in
/// `JetSpace::get(point.len(), order)`, or is an exact constant.
pub fn expand_vec<F>(mode: DerivativeMode, point: &[f64], order: usize, f: F) -> Vec<Jet>
where
    F: Fn(&[Jet]) -> Vec<Jet>,
{
    let space = JetSpace::get(point.len(), order);
    match mode {
        DerivativeMode::Exact => f(&space.variables(point)),
        DerivativeMode::Fd => finite_difference(space, point, order, &f),
    }
}

pub fn expand<F>(mode: DerivativeMode, point: &[f64], order: usize, f: F) -> Jet
where
    F: Fn(&[Jet]) -> Jet,
{
    expand_vec(mode, point, order, |v| vec![f(v)]).remove(0)
}

fn finite_difference<F>(space: &'static JetSpace, point: &[f64], order: usize, f: &F) -> Vec<Jet>
where
    F: Fn(&[Jet]) -> Vec<Jet>,
{
    let n = point.len();
    let eval = |p: &[f64]| -> Vec<f64> { f(&constants(p)).iter().map(Jet::value).collect() };
    let base = eval(point);
    let len = space.len(order);
    let mut coeffs = vec![vec![0.0; len]; base.len()];
    for (c, b) in coeffs.iter_mut().zip(&base) {
        c[0] = *b;
    }
    let mut cache: HashMap<(usize, usize, Vec<i32>), Vec<f64>> = HashMap::new();
    for idx in 1..len {
        let alpha = space.exponents(idx).to_vec();
        let degree = space.degree(idx);
        // Tensor product of the 1-D stencils.
        let mut terms: Vec<(Vec<i32>, f64)> = vec![(vec![0; n], 1.0)];
        for (v, &k) in alpha.iter().enumerate() {
            if k == 0 {
                continue;
            }
            let mut next = Vec::new();
            for (off, w) in &terms {
                for &(o, sw) in stencil(k) {
                    let mut off = off.clone();
                    off[v] = o;
                    next.push((off, w * sw));
                }
            }
            terms = next;
        }
        // Balances O(h⁴) truncation against eps/h^degree rounding.
        let step = f64::EPSILON.powf(1.0 / (degree as f64 + STENCIL_ORDER));
        let mut estimate = |level: usize| -> Vec<f64> {
            let base_step = step * 2f64.powi(1 - level as i32);
            // Each variable steps relative to its own magnitude.
            let h: Vec<f64> = point.iter().map(|p| base_step * p.abs().max(1.0)).collect();
            let mut acc = vec![0.0; base.len()];
            for (off, w) in &terms {
                let vals = if off.iter().all(|&o| o == 0) {
                    base.clone()
                } else {
                    cache
                        .entry((level, degree, off.clone()))
                        .or_insert_with(|| {
                            let p: Vec<f64> =
                                point.iter().zip(off).zip(&h).map(|((p, &o), h)| p + o as f64 * h).collect();
                            eval(&p)
                        })
                        .clone()
                };
                for (a, v) in acc.iter_mut().zip(&vals) {
                    *a += w * v;
                }
            }
            let denom = alpha
                .iter()
                .zip(&h)
                .map(|(&k, h)| h.powi(k as i32))
                .product::<f64>()
                * space.factorial(idx);
            acc.iter().map(|a| a / denom).collect()
        };
        let d: Vec<Vec<f64>> = (0..STEP_LEVELS).map(&mut estimate).collect();
        for (out, c) in coeffs.iter_mut().enumerate() {
            // Richardson on the pair of consecutive steps that agree best:
            // coarse pairs carry truncation error, fine pairs rounding error.
            let (lo, hi) = (1..STEP_LEVELS)
                .map(|l| (d[l - 1][out], d[l][out]))
                .min_by(|a, b| (a.1 - a.0).abs().total_cmp(&(b.1 - b.0).abs()))
                .unwrap();
            c[idx] = hi + (hi - lo) / 15.0;
        }
    }
    coeffs
        .iter()
        .map(|c| Jet::from_coefficients(space, order, c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(v: &[Jet]) -> Vec<Jet> {
        vec![(&v[0] * &v[1]).sin() + v[1].exp() * &v[0], v[0].square()]
    }

    #[test]
    fn fd_matches_exact_through_order_four() {
        let p = [0.4, -0.3];
        let exact = expand_vec(DerivativeMode::Exact, &p, 4, sample);
        let fd = expand_vec(DerivativeMode::Fd, &p, 4, sample);
        for (e, f) in exact.iter().zip(&fd) {
            for vars in [&[0usize][..], &[1], &[0, 1], &[1, 1], &[0, 0, 1], &[0, 1, 1, 1]] {
                let (a, b) = (e.partial(vars), f.partial(vars));
                let tol = match vars.len() {
                    1 => 1e-9,
                    2 => 1e-7,
                    3 => 1e-5,
                    _ => 1e-3,
                };
                assert!((a - b).abs() <= tol * (1.0 + a.abs()), "{vars:?}: {a} vs {b}");
            }
        }
    }
}
