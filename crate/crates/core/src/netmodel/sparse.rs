//! Minimal compressed-sparse-row operator over the enumerated basis.

use crate::{C64, Error, Result};
use nalgebra::{DMatrix, DVector};

/// Square sparse operator in CSR form.
///
/// Built from (row, col, value) triplets; duplicates are merged and exact
/// zeros dropped. Immutable after construction, so instances can be shared
/// freely between threads.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<C64>,
}

impl SparseOperator {
    /// Build from triplets. Entries with identical (row, col) are summed and
    /// exact zeros dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(u32, u32, C64)>) -> Result<Self> {
        for &(r, c, _) in &triplets {
            if r as usize >= dim || c as usize >= dim {
                return Err(Error::DimensionMismatch(format!(
                    "triplet ({r}, {c}) outside dimension {dim}"
                )));
            }
        }
        triplets.sort_unstable_by_key(|&(r, c, _)| ((r as u64) << 32) | c as u64);

        let mut merged: Vec<(u32, u32, C64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|t| t.2.norm_sqr() != 0.0);

        let mut row_ptr = vec![0usize; dim + 1];
        for &(r, _, _) in &merged {
            row_ptr[r as usize + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            dim,
            row_ptr,
            col_idx: merged.iter().map(|t| t.1).collect(),
            values: merged.iter().map(|t| t.2).collect(),
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: (0..=dim).collect(),
            col_idx: (0..dim as u32).collect(),
            values: vec![C64::new(1.0, 0.0); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1])
                .map(move |k| (r, self.col_idx[k] as usize, self.values[k]))
        })
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let triplets = self
            .iter()
            .map(|(r, c, v)| (c as u32, r as u32, v.conj()))
            .collect();
        Self::from_triplets(self.dim, triplets).expect("dagger preserves dimension")
    }

    /// Add a complex multiple of another operator.
    pub fn add_scaled(&self, other: &Self, factor: C64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "add_scaled: {} vs {}",
                self.dim, other.dim
            )));
        }
        let mut triplets: Vec<(u32, u32, C64)> = self
            .iter()
            .map(|(r, c, v)| (r as u32, c as u32, v))
            .collect();
        triplets.extend(other.iter().map(|(r, c, v)| (r as u32, c as u32, factor * v)));
        Self::from_triplets(self.dim, triplets)
    }

    /// Largest absolute deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.dagger();
        let mut defect: f64 = 0.0;
        // Both operators have sorted structure; walk entries of the difference.
        let mut entries = std::collections::HashMap::new();
        for (r, c, v) in self.iter() {
            entries.insert((r, c), v);
        }
        for (r, c, v) in adj.iter() {
            let d = entries.remove(&(r, c)).unwrap_or_default() - v;
            defect = defect.max(d.norm());
        }
        for (_, v) in entries {
            defect = defect.max(v.norm());
        }
        defect
    }

    /// y = A x.
    pub fn apply(&self, x: &DVector<C64>) -> DVector<C64> {
        let mut y = DVector::zeros(self.dim);
        self.apply_into(x.as_slice(), y.as_mut_slice());
        y
    }

    /// y = A x on raw slices.
    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for row in 0..self.dim {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.values[k] * x[self.col_idx[k] as usize];
            }
            y[row] = acc;
        }
    }

    /// Out = A M (left multiplication of a dense matrix).
    pub fn mul_dense_left(&self, m: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        debug_assert_eq!(m.nrows(), self.dim);
        debug_assert_eq!(out.shape(), m.shape());
        let ncols = m.ncols();
        for c in 0..ncols {
            let x = m.column(c);
            let x = x.as_slice();
            let y = &mut out.column_mut(c);
            for row in 0..self.dim {
                let mut acc = C64::new(0.0, 0.0);
                for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                    acc += self.values[k] * x[self.col_idx[k] as usize];
                }
                y[row] = acc;
            }
        }
    }

    /// Out = M A. Iterates rows of A^T through the adjoint-free identity
    /// (M A)_{:,j} = sum_k A_{k,j} M_{:,k}; the caller passes `self` = A
    /// already transposed as CSR of A^T for cache-friendly access.
    ///
    /// Prefer [`SparseOperator::mul_dense_right_via_adjoint`].
    pub fn mul_dense_right_transposed(&self, m: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        // self is AT in CSR; (M A)_{i,j} = sum_k M_{i,k} A_{k,j} = sum_k M_{i,k} AT_{j,k}
        debug_assert_eq!(m.ncols(), self.dim);
        out.fill(C64::new(0.0, 0.0));
        for j in 0..self.dim {
            let mut outc = out.column_mut(j);
            for k in self.row_ptr[j]..self.row_ptr[j + 1] {
                let a = self.values[k];
                let src = m.column(self.col_idx[k] as usize);
                let src = src.as_slice();
                let dst = outc.as_mut_slice();
                for i in 0..dst.len() {
                    dst[i] += a * src[i];
                }
            }
        }
    }

    /// Expectation value <x| A |x> (no normalization).
    pub fn expectation_vec(&self, x: &DVector<C64>) -> C64 {
        let ax = self.apply(x);
        x.dotc(&ax)
    }

    /// Tr(rho A).
    pub fn trace_with(&self, rho: &DMatrix<C64>) -> C64 {
        // Tr(rho A) = sum_{r,c} rho_{c,r} A_{r,c}
        let mut acc = C64::new(0.0, 0.0);
        for (r, c, v) in self.iter() {
            acc += rho[(c, r)] * v;
        }
        acc
    }

    /// Dense representation (test/diagnostic use).
    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.iter() {
            m[(r, c)] += v;
        }
        m
    }
}
