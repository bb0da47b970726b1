use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, SparseOperator, C64};
use crate::error::{shape_err, Error, Result};

/// Ordered tensor-product space, e.g. `[3, 3, 3, 3, 6]` for four qutrits and
/// a six-level resonator. Basis index is row-major over factors (last factor
/// fastest).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertSpace {
    factor_dims: Vec<usize>,
}

impl HilbertSpace {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self> {
        if factor_dims.is_empty() || factor_dims.contains(&0) {
            return Err(Error::InvalidParameter {
                field: "factor_dims",
                reason: format!("{factor_dims:?} must be non-empty with positive entries"),
            });
        }
        Ok(Self { factor_dims })
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn n_factors(&self) -> usize {
        self.factor_dims.len()
    }

    pub fn dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    /// Stride of a factor in the flattened index.
    pub fn stride(&self, site: usize) -> usize {
        self.factor_dims[site + 1..].iter().product()
    }

    pub fn split_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.factor_dims.len()];
        for (k, &d) in self.factor_dims.iter().enumerate().rev() {
            out[k] = idx % d;
            idx /= d;
        }
        out
    }

    pub fn join_index(&self, levels: &[usize]) -> usize {
        levels
            .iter()
            .zip(&self.factor_dims)
            .fold(0, |acc, (&l, &d)| acc * d + l)
    }

    fn check_site(&self, site: usize, op: &ComplexMatrix) -> Result<()> {
        if site >= self.factor_dims.len() {
            return Err(Error::SiteOutOfRange {
                site,
                n_factors: self.factor_dims.len(),
            });
        }
        let d = self.factor_dims[site];
        if op.rows() != d || op.cols() != d {
            return Err(shape_err(
                format!("{d}x{d} operator for site {site}"),
                format!("{}x{}", op.rows(), op.cols()),
            ));
        }
        Ok(())
    }

    /// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` on `site`.
    pub fn embed(&self, op: &ComplexMatrix, site: usize) -> Result<SparseOperator> {
        self.embed_product(&[(site, op)])
    }

    /// Tensor product of single-site operators on distinct sites, identity elsewhere.
    pub fn embed_product(&self, ops: &[(usize, &ComplexMatrix)]) -> Result<SparseOperator> {
        for (i, &(site, op)) in ops.iter().enumerate() {
            self.check_site(site, op)?;
            if ops[..i].iter().any(|&(s, _)| s == site) {
                return Err(Error::InvalidParameter {
                    field: "sites",
                    reason: format!("site {site} repeated in tensor product"),
                });
            }
        }
        let n = self.factor_dims.len();
        // Per-factor sparse lists of (row, col, value); identity where unspecified.
        let mut factors: Vec<Vec<(usize, usize, C64)>> = self
            .factor_dims
            .iter()
            .map(|&d| (0..d).map(|i| (i, i, C64::new(1.0, 0.0))).collect())
            .collect();
        for &(site, op) in ops {
            let d = self.factor_dims[site];
            factors[site] = (0..d)
                .flat_map(|i| (0..d).map(move |j| (i, j)))
                .filter_map(|(i, j)| {
                    let v = op[(i, j)];
                    (v != C64::new(0.0, 0.0)).then_some((i, j, v))
                })
                .collect();
        }
        let mut entries = vec![(0usize, 0usize, C64::new(1.0, 0.0))];
        for k in 0..n {
            let d = self.factor_dims[k];
            let mut next = Vec::with_capacity(entries.len() * factors[k].len());
            for &(r, c, v) in &entries {
                for &(fr, fc, fv) in &factors[k] {
                    next.push((r * d + fr, c * d + fc, v * fv));
                }
            }
            entries = next;
        }
        let sites = ops.iter().map(|&(s, _)| s).collect();
        Ok(SparseOperator::from_triplets(self.dim(), entries)?.with_sites(sites))
    }
}

/// Free-function form of [`HilbertSpace::embed`].
pub fn tensor_embed(op: &ComplexMatrix, site: usize, space: &HilbertSpace) -> Result<SparseOperator> {
    space.embed(op, site)
}
