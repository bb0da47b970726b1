use std::collections::BTreeMap;

use super::{ComplexMatrix, C64};
use crate::error::{shape_err, Result};

/// Square sparse operator in canonical triplet form.
///
/// Triplets are sorted by (row, col) with duplicates merged by summation and
/// exact zeros dropped, so two operators with the same entries compare equal.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    triplets: Vec<(usize, usize, C64)>,
    /// Tensor factors the operator acts on non-trivially; empty when unknown.
    sites: Vec<usize>,
}

impl SparseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            triplets: Vec::new(),
            sites: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            triplets: (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))).collect(),
            sites: Vec::new(),
        }
    }

    pub fn from_triplets(
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Result<Self> {
        let mut merged: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for (r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(shape_err(format!("indices < {dim}"), format!("({r}, {c})")));
            }
            *merged.entry((r, c)).or_default() += v;
        }
        Ok(Self {
            dim,
            triplets: merged
                .into_iter()
                .filter(|(_, v)| *v != C64::new(0.0, 0.0))
                .map(|((r, c), v)| (r, c, v))
                .collect(),
            sites: Vec::new(),
        })
    }

    pub fn from_dense(m: &ComplexMatrix) -> Result<Self> {
        m.ensure_square()?;
        let n = m.rows();
        Self::from_triplets(
            n,
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter_map(|(i, j)| {
                let v = m[(i, j)];
                (v != C64::new(0.0, 0.0)).then_some((i, j, v))
            }),
        )
    }

    pub fn with_sites(mut self, mut sites: Vec<usize>) -> Self {
        sites.sort_unstable();
        sites.dedup();
        self.sites = sites;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.triplets.len()
    }

    pub fn triplets(&self) -> &[(usize, usize, C64)] {
        &self.triplets
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.triplets {
            m[(r, c)] += v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut t: Vec<_> = self
            .triplets
            .iter()
            .map(|&(r, c, v)| (c, r, v.conj()))
            .collect();
        t.sort_unstable_by_key(|&(r, c, _)| (r, c));
        Self {
            dim: self.dim,
            triplets: t,
            sites: self.sites.clone(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        if s == C64::new(0.0, 0.0) {
            return Self::zeros(self.dim).with_sites(self.sites.clone());
        }
        Self {
            dim: self.dim,
            triplets: self.triplets.iter().map(|&(r, c, v)| (r, c, v * s)).collect(),
            sites: self.sites.clone(),
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(shape_err(format!("dimension {}", self.dim), other.dim));
        }
        Ok(())
    }

    fn merged_sites(&self, other: &Self) -> Vec<usize> {
        let mut s = self.sites.clone();
        s.extend_from_slice(&other.sites);
        s
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self::from_triplets(
            self.dim,
            self.triplets.iter().chain(&other.triplets).copied(),
        )?
        .with_sites(self.merged_sites(other)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let rhs = CsrMatrix::from_sparse(other);
        let mut out = Vec::new();
        for &(r, k, a) in &self.triplets {
            for (c, b) in rhs.row(k) {
                out.push((r, c, a * b));
            }
        }
        Ok(Self::from_triplets(self.dim, out)?.with_sites(self.merged_sites(other)))
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim {
            return Err(shape_err(format!("vector of length {}", self.dim), v.len()));
        }
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        for &(r, c, a) in &self.triplets {
            out[r] += a * v[c];
        }
        Ok(out)
    }

    /// Diagonal entries when the operator is diagonal, otherwise `None`.
    pub fn diagonal(&self) -> Option<Vec<C64>> {
        if self.triplets.iter().any(|&(r, c, _)| r != c) {
            return None;
        }
        let mut d = vec![C64::new(0.0, 0.0); self.dim];
        for &(r, _, v) in &self.triplets {
            d[r] = v;
        }
        Some(d)
    }

    /// Column map when every row holds at most one entry (ladder-type operators).
    pub fn monomial_rows(&self) -> Option<Vec<Option<(usize, C64)>>> {
        let mut rows = vec![None; self.dim];
        for &(r, c, v) in &self.triplets {
            if rows[r].is_some() {
                return None;
            }
            rows[r] = Some((c, v));
        }
        Some(rows)
    }
}

/// Compressed sparse row storage used on hot paths.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<C64>,
}

impl CsrMatrix {
    pub fn from_sparse(op: &SparseOperator) -> Self {
        let mut row_ptr = vec![0usize; op.dim + 1];
        for &(r, _, _) in &op.triplets {
            row_ptr[r + 1] += 1;
        }
        for i in 0..op.dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            dim: op.dim,
            row_ptr,
            col_idx: op.triplets.iter().map(|t| t.1).collect(),
            values: op.triplets.iter().map(|t| t.2).collect(),
        }
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// Position of entry (r, c) in `values`, if present.
    pub fn slot(&self, r: usize, c: usize) -> Option<usize> {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .binary_search(&c)
            .ok()
            .map(|k| span.start + k)
    }

    /// `out = self * dense`, where `dense` is a row-major `dim x dim` block.
    pub fn mul_dense_into(&self, dense: &[C64], out: &mut [C64]) {
        let d = self.dim;
        debug_assert_eq!(dense.len(), d * d);
        debug_assert_eq!(out.len(), d * d);
        for r in 0..d {
            let out_row = &mut out[r * d..(r + 1) * d];
            out_row.fill(C64::new(0.0, 0.0));
            for (c, v) in self.row(r) {
                let src = &dense[c * d..(c + 1) * d];
                for (o, &x) in out_row.iter_mut().zip(src) {
                    *o += v * x;
                }
            }
        }
    }
}
