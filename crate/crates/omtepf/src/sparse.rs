//! Minimal sparse and dense linear-algebra containers.
//!
//! The crate needs exactly four things from its matrices: triplet-based
//! assembly, row iteration, matrix–vector products (plain and transposed),
//! and a dense fallback for small device-level computations. Everything is
//! deterministic: `from_triplets` sorts and merges duplicates, so the
//! compressed result is independent of emission order.

use serde::{Deserialize, Serialize};

/// Coordinate-list accumulator for building sparse matrices.
///
/// Duplicate `(row, col)` entries are summed when compressed; entries that
/// cancel to exactly zero are dropped.
#[derive(Debug, Clone, Default)]
pub struct Triplets {
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(cap: usize) -> Self {
        Self { entries: Vec::with_capacity(cap) }
    }

    /// Record `value` at `(row, col)`. Zero values are ignored.
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        if value != 0.0 {
            self.entries.push((row, col, value));
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Compress into CSR form with the given dimensions.
    ///
    /// Panics if any coordinate lies outside `nrows × ncols`; assembly bugs
    /// should fail loudly rather than silently truncate.
    pub fn to_csr(&self, nrows: usize, ncols: usize) -> SparseMat {
        let mut sorted = self.entries.clone();
        sorted.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        row_ptr.push(0usize);
        let mut cur_row = 0usize;
        let mut i = 0usize;
        while i < sorted.len() {
            let (r, c, mut v) = sorted[i];
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) outside {nrows}x{ncols}");
            i += 1;
            while i < sorted.len() && sorted[i].0 == r && sorted[i].1 == c {
                v += sorted[i].2;
                i += 1;
            }
            if v == 0.0 {
                continue;
            }
            while cur_row < r {
                row_ptr.push(col_idx.len());
                cur_row += 1;
            }
            col_idx.push(c);
            values.push(v);
        }
        while cur_row < nrows {
            row_ptr.push(col_idx.len());
            cur_row += 1;
        }
        SparseMat { nrows, ncols, row_ptr, col_idx, values }
    }
}

/// Compressed sparse-row matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMat {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(column, value)` pairs of row `r`, ordered by column.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        self.col_idx[lo..hi].iter().copied().zip(self.values[lo..hi].iter().copied())
    }

    /// Value at `(r, c)` (zero when absent). Binary search within the row.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        match self.col_idx[lo..hi].binary_search(&c) {
            Ok(pos) => self.values[lo + pos],
            Err(_) => 0.0,
        }
    }

    /// y = A·x.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "mul_vec dimension mismatch");
        let mut y = vec![0.0; self.nrows];
        for r in 0..self.nrows {
            let mut acc = 0.0;
            for (c, v) in self.row(r) {
                acc += v * x[c];
            }
            y[r] = acc;
        }
        y
    }

    /// y = Aᵀ·x without materializing the transpose.
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows, "tr_mul_vec dimension mismatch");
        let mut y = vec![0.0; self.ncols];
        for r in 0..self.nrows {
            let xr = x[r];
            if xr == 0.0 {
                continue;
            }
            for (c, v) in self.row(r) {
                y[c] += v * xr;
            }
        }
        y
    }

    /// Materialized transpose (CSR of Aᵀ, i.e. CSC view of A).
    pub fn transpose(&self) -> SparseMat {
        let mut t = Triplets::with_capacity(self.nnz());
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                t.push(c, r, v);
            }
        }
        t.to_csr(self.ncols, self.nrows)
    }

    /// Dense copy, row-major. Test/debug helper for small matrices.
    pub fn to_dense(&self) -> DMat {
        let mut d = DMat::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                d[(r, c)] = v;
            }
        }
        d
    }

    /// Sum of `|A·x − b|` infinity-norm style residual, used by audits.
    pub fn residual_inf(&self, x: &[f64], b: &[f64]) -> f64 {
        let ax = self.mul_vec(x);
        ax.iter().zip(b.iter()).map(|(a, bb)| (a - bb).abs()).fold(0.0, f64::max)
    }

    /// Iterate all stored entries as `(row, col, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    /// Vertically stack `self` above `other` (column counts must match).
    pub fn vstack(&self, other: &SparseMat) -> SparseMat {
        assert_eq!(self.ncols, other.ncols, "vstack column mismatch");
        let mut t = Triplets::with_capacity(self.nnz() + other.nnz());
        for (r, c, v) in self.iter() {
            t.push(r, c, v);
        }
        for (r, c, v) in other.iter() {
            t.push(self.nrows + r, c, v);
        }
        t.to_csr(self.nrows + other.nrows, self.ncols)
    }
}

/// Dense row-major matrix for small device-level systems.
#[derive(Debug, Clone, PartialEq)]
pub struct DMat {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl DMat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, data: vec![0.0; nrows * ncols] }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![0.0; self.nrows];
        for r in 0..self.nrows {
            let row = &self.data[r * self.ncols..(r + 1) * self.ncols];
            y[r] = row.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
        }
        y
    }
}

impl std::ops::Index<(usize, usize)> for DMat {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.ncols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.ncols + c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_merge_duplicates_and_drop_zeros() {
        let mut t = Triplets::new();
        t.push(0, 1, 2.0);
        t.push(0, 1, 3.0);
        t.push(1, 0, 1.5);
        t.push(1, 0, -1.5); // cancels to zero -> dropped
        t.push(0, 0, 0.0); // ignored outright
        let m = t.to_csr(2, 2);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), 5.0);
        assert_eq!(m.get(1, 0), 0.0);
    }

    #[test]
    fn compression_is_order_independent() {
        let mut a = Triplets::new();
        a.push(0, 0, 1.0);
        a.push(2, 1, 4.0);
        a.push(1, 2, 3.0);
        let mut b = Triplets::new();
        b.push(1, 2, 3.0);
        b.push(0, 0, 1.0);
        b.push(2, 1, 4.0);
        assert_eq!(a.to_csr(3, 3), b.to_csr(3, 3));
    }

    #[test]
    fn matvec_and_transpose_agree_with_dense() {
        let mut t = Triplets::new();
        t.push(0, 0, 1.0);
        t.push(0, 2, -2.0);
        t.push(1, 1, 3.0);
        let m = t.to_csr(2, 3);
        let x = [1.0, 2.0, 3.0];
        assert_eq!(m.mul_vec(&x), vec![-5.0, 6.0]);
        let y = [1.0, 1.0];
        assert_eq!(m.tr_mul_vec(&y), vec![1.0, 3.0, -2.0]);
        let mt = m.transpose();
        assert_eq!(mt.mul_vec(&y), m.tr_mul_vec(&y));
        assert_eq!(mt.nrows(), 3);
    }

    #[test]
    fn vstack_stacks_rows() {
        let mut t = Triplets::new();
        t.push(0, 0, 1.0);
        let a = t.to_csr(1, 2);
        let mut t2 = Triplets::new();
        t2.push(0, 1, 2.0);
        let b = t2.to_csr(1, 2);
        let s = a.vstack(&b);
        assert_eq!(s.nrows(), 2);
        assert_eq!(s.get(0, 0), 1.0);
        assert_eq!(s.get(1, 1), 2.0);
    }
}
