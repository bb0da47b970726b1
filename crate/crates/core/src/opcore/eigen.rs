use nalgebra::{DMatrix, SymmetricEigen};

use super::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.vectors.rows()).map(|i| self.vectors[(i, k)]).collect()
    }

    /// `V f(Λ) V†` for a scalar function of the eigenvalues.
    pub fn reconstruct(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.values.len();
        let fv: Vec<C64> = self.values.iter().map(|&x| f(x)).collect();
        let v = &self.vectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for k in 0..n {
                let a = v[(i, k)] * fv[k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * v[(j, k)].conj();
                }
            }
        }
        out
    }
}

fn sorted_permutation(values: &[f64]) -> Result<Vec<usize>> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Diagonalization {
            dim: values.len(),
            reason: "non-finite eigenvalue".into(),
        });
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    Ok(order)
}

pub fn eigh(m: &ComplexMatrix) -> Result<HermitianEigen> {
    m.ensure_square()?;
    let n = m.rows();
    let herm = m.hermiticity_error();
    let scale = m.max_abs().max(1.0);
    if herm > 1e-10 * scale {
        return Err(Error::Diagonalization {
            dim: n,
            reason: format!("input not Hermitian (max |A - A†| = {herm:e})"),
        });
    }
    let se = SymmetricEigen::try_new(m.to_nalgebra(), f64::EPSILON, 0).ok_or_else(|| {
        Error::Diagonalization {
            dim: n,
            reason: "QR iteration did not converge".into(),
        }
    })?;
    let vals: Vec<f64> = se.eigenvalues.iter().copied().collect();
    let order = sorted_permutation(&vals)?;
    Ok(HermitianEigen {
        values: order.iter().map(|&k| vals[k]).collect(),
        vectors: ComplexMatrix::from_fn(n, n, |i, j| se.eigenvectors[(i, order[j])]),
    })
}

/// Eigenpairs of a real symmetric matrix (row-major), ascending.
pub fn eigh_real(n: usize, data: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let m = DMatrix::from_row_slice(n, n, data);
    let se = SymmetricEigen::try_new(m, f64::EPSILON, 0).ok_or_else(|| Error::Diagonalization {
        dim: n,
        reason: "QR iteration did not converge".into(),
    })?;
    let vals: Vec<f64> = se.eigenvalues.iter().copied().collect();
    let order = sorted_permutation(&vals)?;
    let vecs = DMatrix::from_fn(n, n, |i, j| se.eigenvectors[(i, order[j])]);
    Ok((order.iter().map(|&k| vals[k]).collect(), vecs))
}
