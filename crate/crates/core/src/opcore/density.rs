use super::{eigh, ComplexMatrix, HilbertSpace, SparseOperator, C64};
use crate::error::{shape_err, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    space: HilbertSpace,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(space: HilbertSpace, matrix: ComplexMatrix) -> Result<Self> {
        let d = space.dim();
        if matrix.rows() != d || matrix.cols() != d {
            return Err(shape_err(
                format!("{d}x{d}"),
                format!("{}x{}", matrix.rows(), matrix.cols()),
            ));
        }
        Ok(Self { space, matrix })
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) state vector.
    pub fn pure(space: HilbertSpace, psi: &[C64]) -> Result<Self> {
        let d = space.dim();
        if psi.len() != d {
            return Err(shape_err(format!("state of length {d}"), psi.len()));
        }
        let m = ComplexMatrix::from_fn(d, d, |i, j| psi[i] * psi[j].conj());
        Self::new(space, m)
    }

    /// Basis state with the given level on each factor.
    pub fn basis(space: HilbertSpace, levels: &[usize]) -> Result<Self> {
        if levels.len() != space.n_factors() {
            return Err(shape_err(format!("{} levels", space.n_factors()), levels.len()));
        }
        for (&l, &d) in levels.iter().zip(space.factor_dims()) {
            if l >= d {
                return Err(Error::LevelOutOfRange { level: l, dim: d });
            }
        }
        let idx = space.join_index(levels);
        let mut m = ComplexMatrix::zeros(space.dim(), space.dim());
        m[(idx, idx)] = C64::new(1.0, 0.0);
        Self::new(space, m)
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.matrix.hermiticity_error()
    }

    /// Smallest eigenvalue; computed on demand since it costs a full diagonalization.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        // symmetrize away rounding-level asymmetry before diagonalizing
        let h = &self.matrix + &self.matrix.dagger();
        let e = eigh(&h.scale(C64::new(0.5, 0.0)))?;
        Ok(e.values[0])
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut dims = self.space.factor_dims().to_vec();
        dims.extend_from_slice(other.space.factor_dims());
        Self::new(HilbertSpace::new(dims)?, self.matrix.kron(&other.matrix))
    }
}

/// Reduced state on the kept factors (kept in their original order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let space = rho.space();
    let n = space.n_factors();
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&bad) = keep.iter().find(|&&s| s >= n) {
        return Err(Error::SiteOutOfRange { site: bad, n_factors: n });
    }
    let dims = space.factor_dims();
    let traced: Vec<usize> = (0..n).filter(|s| !keep.contains(s)).collect();
    let kept_space = HilbertSpace::new(keep.iter().map(|&s| dims[s]).collect())?;
    let traced_dims: Vec<usize> = traced.iter().map(|&s| dims[s]).collect();
    let traced_count: usize = traced_dims.iter().product();
    let dk = kept_space.dim();

    let full_index = |kept_idx: usize, traced_idx: usize| -> usize {
        let kl = kept_space.split_index(kept_idx);
        let mut levels = vec![0; n];
        for (i, &s) in keep.iter().enumerate() {
            levels[s] = kl[i];
        }
        let mut t = traced_idx;
        for (i, &s) in traced.iter().enumerate().rev() {
            levels[s] = t % traced_dims[i];
            t /= traced_dims[i];
        }
        space.join_index(&levels)
    };
    let index_table: Vec<Vec<usize>> = (0..dk)
        .map(|k| (0..traced_count).map(|t| full_index(k, t)).collect())
        .collect();

    let m = rho.matrix();
    let out = ComplexMatrix::from_fn(dk, dk, |i, j| {
        index_table[i]
            .iter()
            .zip(&index_table[j])
            .map(|(&a, &b)| m[(a, b)])
            .sum()
    });
    DensityMatrix::new(kept_space, out)
}

/// `Tr[op ρ]`.
pub fn expect(op: &SparseOperator, rho: &DensityMatrix) -> Result<C64> {
    let d = rho.space().dim();
    if op.dim() != d {
        return Err(shape_err(format!("operator of dimension {d}"), op.dim()));
    }
    let m = rho.matrix();
    Ok(op.triplets().iter().map(|&(r, c, v)| v * m[(c, r)]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::{destroy, pauli, Axis};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn trace_out_resonator_of_product_state() {
        let q = HilbertSpace::new(vec![2]).unwrap();
        let rho_q = DensityMatrix::pure(q, &[c(0.6), C64::new(0.0, 0.8)]).unwrap();
        let vac = DensityMatrix::basis(HilbertSpace::new(vec![4]).unwrap(), &[0]).unwrap();
        let joint = rho_q.tensor(&vac).unwrap();
        let red = partial_trace(&joint, &[0]).unwrap();
        assert!(red.matrix().max_abs_diff(rho_q.matrix()) < 1e-15);
    }

    #[test]
    fn bell_state_reduces_to_mixed() {
        let s = HilbertSpace::new(vec![2, 2]).unwrap();
        let r = 0.5f64.sqrt();
        let bell = DensityMatrix::pure(s, &[c(r), c(0.0), c(0.0), c(r)]).unwrap();
        let red = partial_trace(&bell, &[1]).unwrap();
        let half = ComplexMatrix::identity(2).scale(c(0.5));
        assert!(red.matrix().max_abs_diff(&half) < 1e-15);
    }

    #[test]
    fn empty_keep_rejected() {
        let s = HilbertSpace::new(vec![2]).unwrap();
        let rho = DensityMatrix::basis(s, &[0]).unwrap();
        assert!(matches!(partial_trace(&rho, &[]), Err(Error::EmptyKeepSet)));
    }

    #[test]
    fn expectation_values() {
        let s = HilbertSpace::new(vec![5]).unwrap();
        let rho = DensityMatrix::basis(s.clone(), &[3]).unwrap();
        let a = destroy(5).unwrap();
        let num = SparseOperator::from_dense(&(&a.dagger() * &a)).unwrap();
        assert!((expect(&num, &rho).unwrap() - c(3.0)).norm() < 1e-14);
        let id = SparseOperator::identity(5);
        assert!((expect(&id, &rho).unwrap() - c(1.0)).norm() < 1e-15);

        let q = HilbertSpace::new(vec![2]).unwrap();
        let r = 0.5f64.sqrt();
        let plus = DensityMatrix::pure(q, &[c(r), c(r)]).unwrap();
        let sz = SparseOperator::from_dense(&pauli(Axis::Z)).unwrap();
        assert!(expect(&sz, &plus).unwrap().norm() < 1e-15);

        let wrong = SparseOperator::identity(3);
        assert!(expect(&wrong, &plus).is_err());
    }
}
