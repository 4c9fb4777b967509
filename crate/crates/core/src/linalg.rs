//! Small dense linear algebra on plain and jet-valued matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeometryError, Result};
use crate::jet::Jet;

pub type JetMatrix = Vec<Vec<Jet>>;

pub fn values(m: &[Vec<Jet>]) -> DMatrix<f64> {
    let n = m.len();
    let c = m.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, c, |i, j| m[i][j].value())
}

/// Gauss-Jordan inverse with partial pivoting on the leading values.
pub fn invert_jets(m: &[Vec<Jet>]) -> Result<JetMatrix> {
    let n = m.len();
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |s, x| s.max(x.value().abs()));
    let mut a: JetMatrix = m.to_vec();
    let mut inv: JetMatrix = (0..n)
        .map(|i| (0..n).map(|j| Jet::constant(if i == j { 1.0 } else { 0.0 })).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].value().abs().total_cmp(&a[j][col].value().abs()))
            .unwrap();
        if a[pivot][col].value().abs() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
            return Err(GeometryError::SingularTensor(format!(
                "pivot {col} vanishes in a {n}x{n} matrix"
            )));
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let r = a[col][col].recip();
        for j in 0..n {
            a[col][j] = &a[col][j] * &r;
            inv[col][j] = &inv[col][j] * &r;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let factor = a[i][col].clone();
            if factor.is_constant() && factor.value() == 0.0 {
                continue;
            }
            for j in 0..n {
                let t = &factor * &a[col][j];
                a[i][j] -= t;
                let t = &factor * &inv[col][j];
                inv[i][j] -= t;
            }
        }
    }
    Ok(inv)
}

pub fn invert(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| GeometryError::SingularTensor(format!("{}x{} matrix", m.nrows(), m.ncols())))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    symmetrize(m)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Solves `A v = λ B v` for symmetric `A` and positive definite `B`.
/// Eigenvalues ascend; eigenvectors are `B`-orthonormal columns.
pub fn generalized_symmetric_eigen(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let chol = symmetrize(b)
        .cholesky()
        .ok_or_else(|| GeometryError::SingularTensor("induced metric is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(l.nrows(), l.ncols()))
        .ok_or_else(|| GeometryError::SingularTensor("triangular factor".into()))?;
    let c = symmetrize(&(&linv * symmetrize(a) * linv.transpose()));
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let w = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<DVector<f64>>>(),
    );
    Ok((values, linv.transpose() * w))
}

/// Groups sorted values whose relative gap is below `gap`.
pub fn multiplicities(sorted: &[f64], gap: f64) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for (i, v) in sorted.iter().enumerate() {
        if i > 0 && (v - sorted[i - 1]).abs() <= gap * (1.0 + v.abs().max(sorted[i - 1].abs())) {
            *out.last_mut().unwrap() += 1;
        } else {
            out.push(1);
        }
    }
    out
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(v)).as_slice().to_vec()
}

/// Bilinear form `aᵀ M b`.
pub fn bilinear(m: &DMatrix<f64>, a: &[f64], b: &[f64]) -> f64 {
    dot(a, &mat_vec(m, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::JetSpace;

    #[test]
    fn jet_inverse_differentiates_correctly() {
        let s = JetSpace::get(1, 2);
        let t = &s.variables(&[0.5])[0];
        let m = vec![
            vec![2.0 + t.clone(), t.clone()],
            vec![Jet::constant(1.0), 3.0 - t.square()],
        ];
        let inv = invert_jets(&m).unwrap();
        let h = 1e-5;
        let plain = |t: f64| {
            DMatrix::from_row_slice(2, 2, &[2.0 + t, t, 1.0, 3.0 - t * t])
                .try_inverse()
                .unwrap()
        };
        let d = (plain(0.5 + h) - plain(0.5 - h)) / (2.0 * h);
        for i in 0..2 {
            for j in 0..2 {
                assert!((inv[i][j].value() - plain(0.5)[(i, j)]).abs() < 1e-14);
                assert!((inv[i][j].partial(&[0]) - d[(i, j)]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn generalized_eigen_sorts_and_normalizes() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -4.0]);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 4.0]);
        let (vals, vecs) = generalized_symmetric_eigen(&a, &b).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 2.0).abs() < 1e-14);
        let gram = vecs.transpose() * &b * &vecs;
        assert!((gram - DMatrix::identity(2, 2)).norm() < 1e-13);
    }

    #[test]
    fn multiplicity_grouping() {
        assert_eq!(multiplicities(&[-1.0, -1.0 + 1e-9, 1.0], 1e-6), vec![2, 1]);
    }
}
