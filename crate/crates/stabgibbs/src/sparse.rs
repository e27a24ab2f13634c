//! Complex CSR matrices sized for operators on up to 2^24 basis states.
//!
//! Exact zeros produced during assembly are dropped; everything else is
//! kept so entrywise comparisons between independently assembled
//! operators stay meaningful.

use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;

const DROP_TOL: f64 = 0.0;

/// Sparse complex matrix in CSR form with sorted column indices per row.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    pub dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseOperator {
    pub fn zeros(dim: usize) -> Self {
        SparseOperator { dim, row_ptr: vec![0; dim + 1], col_idx: vec![], values: vec![] }
    }

    pub fn identity(dim: usize) -> Self {
        SparseOperator {
            dim,
            row_ptr: (0..=dim).collect(),
            col_idx: (0..dim).collect(),
            values: vec![Complex64::new(1.0, 0.0); dim],
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let dim = values.len();
        let mut triplets = Vec::with_capacity(dim);
        for (i, &v) in values.iter().enumerate() {
            triplets.push((i, i, Complex64::new(v, 0.0)));
        }
        Self::from_triplets(dim, triplets).expect("diagonal triplets are in range")
    }

    /// Build from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Result<Self> {
        for &(r, c, _) in &triplets {
            if r >= dim || c >= dim {
                return Err(Error::Dimension { expected: dim, got: r.max(c) + 1 });
            }
        }
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut rows: Vec<usize> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if let (Some(&lr), Some(&lc)) = (rows.last(), col_idx.last()) {
                if lr == r && lc == c {
                    *values.last_mut().expect("parallel to col_idx") += v;
                    continue;
                }
            }
            rows.push(r);
            col_idx.push(c);
            values.push(v);
        }
        for &r in &rows {
            row_ptr[r + 1] += 1;
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut m = SparseOperator { dim, row_ptr, col_idx, values };
        m.prune(DROP_TOL);
        Ok(m)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn iter_triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        match self.col_idx[lo..hi].binary_search(&col) {
            Ok(k) => self.values[lo + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Drop entries with |a_ij| <= tol.
    pub fn prune(&mut self, tol: f64) {
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut col_idx = Vec::with_capacity(self.col_idx.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.values[k].norm() > tol {
                    col_idx.push(self.col_idx[k]);
                    values.push(self.values[k]);
                }
            }
            row_ptr[r + 1] = col_idx.len();
        }
        self.row_ptr = row_ptr;
        self.col_idx = col_idx;
        self.values = values;
    }

    pub fn scale(&self, s: Complex64) -> SparseOperator {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= s;
        }
        out
    }

    pub fn add(&self, other: &SparseOperator) -> Result<SparseOperator> {
        self.add_scaled(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &SparseOperator) -> Result<SparseOperator> {
        self.add_scaled(other, Complex64::new(-1.0, 0.0))
    }

    pub fn add_scaled(&self, other: &SparseOperator, s: Complex64) -> Result<SparseOperator> {
        if self.dim != other.dim {
            return Err(Error::Dimension { expected: self.dim, got: other.dim });
        }
        let mut triplets: Vec<(usize, usize, Complex64)> =
            self.iter_triplets().collect();
        triplets.extend(other.iter_triplets().map(|(r, c, v)| (r, c, v * s)));
        SparseOperator::from_triplets(self.dim, triplets)
    }

    pub fn matmul(&self, other: &SparseOperator) -> Result<SparseOperator> {
        if self.dim != other.dim {
            return Err(Error::Dimension { expected: self.dim, got: other.dim });
        }
        let mut triplets = Vec::new();
        let mut acc: Vec<Complex64> = vec![Complex64::default(); self.dim];
        let mut touched: Vec<usize> = Vec::new();
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let mid = self.col_idx[k];
                let a = self.values[k];
                for k2 in other.row_ptr[mid]..other.row_ptr[mid + 1] {
                    let c = other.col_idx[k2];
                    if acc[c] == Complex64::default() {
                        touched.push(c);
                    }
                    acc[c] += a * other.values[k2];
                }
            }
            for &c in &touched {
                if acc[c].norm() > DROP_TOL {
                    triplets.push((r, c, acc[c]));
                }
                acc[c] = Complex64::default();
            }
            touched.clear();
        }
        SparseOperator::from_triplets(self.dim, triplets)
    }

    pub fn dagger(&self) -> SparseOperator {
        let triplets = self.iter_triplets().map(|(r, c, v)| (c, r, v.conj())).collect();
        SparseOperator::from_triplets(self.dim, triplets).expect("transpose stays in range")
    }

    pub fn transpose(&self) -> SparseOperator {
        let triplets = self.iter_triplets().map(|(r, c, v)| (c, r, v)).collect();
        SparseOperator::from_triplets(self.dim, triplets).expect("transpose stays in range")
    }

    pub fn conj(&self) -> SparseOperator {
        let triplets = self.iter_triplets().map(|(r, c, v)| (r, c, v.conj())).collect();
        SparseOperator::from_triplets(self.dim, triplets).expect("same sparsity")
    }

    /// Kronecker product; the right factor varies fastest (row-major
    /// vectorization convention).
    pub fn kron(&self, other: &SparseOperator) -> SparseOperator {
        let dim = self.dim * other.dim;
        let mut triplets = Vec::with_capacity(self.nnz() * other.nnz());
        for (r1, c1, v1) in self.iter_triplets() {
            for (r2, c2, v2) in other.iter_triplets() {
                triplets.push((r1 * other.dim + r2, c1 * other.dim + c2, v1 * v2));
            }
        }
        SparseOperator::from_triplets(dim, triplets).expect("kron indices in range")
    }

    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = Complex64::default();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yr = acc;
        }
    }

    pub fn apply_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::default(); self.dim];
        self.apply(x, &mut y);
        y
    }

    /// Hermiticity deviation max_ij |a_ij - conj(a_ji)|.
    pub fn hermiticity_deviation(&self) -> f64 {
        let adj = self.dagger();
        self.max_abs_diff(&adj)
    }

    /// max_ij |a_ij - b_ij| over the union of supports.
    pub fn max_abs_diff(&self, other: &SparseOperator) -> f64 {
        assert_eq!(self.dim, other.dim);
        let mut dev: f64 = 0.0;
        for (r, c, v) in self.iter_triplets() {
            dev = dev.max((v - other.get(r, c)).norm());
        }
        for (r, c, v) in other.iter_triplets() {
            dev = dev.max((v - self.get(r, c)).norm());
        }
        dev
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Max absolute row sum; upper bound on the spectral radius for
    /// hermitian input.
    pub fn inf_norm(&self) -> f64 {
        let mut best: f64 = 0.0;
        for r in 0..self.dim {
            let s: f64 = (self.row_ptr[r]..self.row_ptr[r + 1]).map(|k| self.values[k].norm()).sum();
            best = best.max(s);
        }
        best
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        let mut m = Array2::zeros((self.dim, self.dim));
        for (r, c, v) in self.iter_triplets() {
            m[[r, c]] += v;
        }
        m
    }

    /// Real part as a dense matrix; errors if any imaginary part exceeds
    /// `tol` (the spectral engine operates on real symmetric matrices).
    pub fn to_dense_real(&self, tol: f64) -> Result<Array2<f64>> {
        let mut m = Array2::zeros((self.dim, self.dim));
        for (r, c, v) in self.iter_triplets() {
            if v.im.abs() > tol {
                return Err(Error::NotReal(v.im.abs()));
            }
            m[[r, c]] += v.re;
        }
        Ok(m)
    }

    pub fn from_dense(m: &Array2<Complex64>, tol: f64) -> Self {
        let dim = m.nrows();
        let mut triplets = Vec::new();
        for r in 0..dim {
            for c in 0..dim {
                if m[[r, c]].norm() > tol {
                    triplets.push((r, c, m[[r, c]]));
                }
            }
        }
        SparseOperator::from_triplets(dim, triplets).expect("dense entries in range")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;

    fn random_sparse(rng: &mut impl Rng, dim: usize, fill: usize) -> SparseOperator {
        let mut t = Vec::new();
        for _ in 0..fill {
            t.push((
                rng.gen_range(0..dim),
                rng.gen_range(0..dim),
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            ));
        }
        SparseOperator::from_triplets(dim, t).unwrap()
    }

    #[test]
    fn matmul_matches_dense() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..10 {
            let a = random_sparse(&mut rng, 12, 30);
            let b = random_sparse(&mut rng, 12, 30);
            let ab = a.matmul(&b).unwrap().to_dense();
            let dd = a.to_dense().dot(&b.to_dense());
            let dev = (&ab - &dd).iter().map(|c| c.norm()).fold(0.0, f64::max);
            assert!(dev < 1e-13);
        }
    }

    #[test]
    fn kron_matches_dense() {
        let mut rng = StdRng::seed_from_u64(4);
        let a = random_sparse(&mut rng, 3, 5);
        let b = random_sparse(&mut rng, 4, 7);
        let k = a.kron(&b).to_dense();
        let (ad, bd) = (a.to_dense(), b.to_dense());
        for r1 in 0..3 {
            for c1 in 0..3 {
                for r2 in 0..4 {
                    for c2 in 0..4 {
                        let lhs = k[[r1 * 4 + r2, c1 * 4 + c2]];
                        let rhs = ad[[r1, c1]] * bd[[r2, c2]];
                        assert!((lhs - rhs).norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn duplicate_triplets_are_summed_and_zeros_dropped() {
        let t = vec![
            (0, 1, Complex64::new(1.0, 0.0)),
            (0, 1, Complex64::new(-1.0, 0.0)),
            (1, 0, Complex64::new(2.0, 0.0)),
        ];
        let m = SparseOperator::from_triplets(2, t).unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(1, 0), Complex64::new(2.0, 0.0));
    }

    #[test]
    fn out_of_range_triplet_rejected() {
        let t = vec![(2, 0, Complex64::new(1.0, 0.0))];
        assert!(SparseOperator::from_triplets(2, t).is_err());
    }

    #[test]
    fn apply_matches_dense_matvec() {
        let mut rng = StdRng::seed_from_u64(5);
        let a = random_sparse(&mut rng, 9, 25);
        let x: Vec<Complex64> =
            (0..9).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let y = a.apply_vec(&x);
        let d = a.to_dense();
        for r in 0..9 {
            let mut acc = Complex64::default();
            for c in 0..9 {
                acc += d[[r, c]] * x[c];
            }
            assert!((acc - y[r]).norm() < 1e-13);
        }
    }
}
