use std::sync::Once;

use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Par};

use super::{norm_inf, C64};
use crate::error::{Error, Result};

/// Accumulates (row, col, value) entries before compression.
#[derive(Debug, Clone)]
pub struct TripletBuilder {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl TripletBuilder {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self { n_rows, n_cols, entries: Vec::new() }
    }

    pub fn with_capacity(n_rows: usize, n_cols: usize, cap: usize) -> Self {
        Self { n_rows, n_cols, entries: Vec::with_capacity(cap) }
    }

    pub fn push(&mut self, row: usize, col: usize, value: C64) {
        debug_assert!(row < self.n_rows && col < self.n_cols);
        self.entries.push((row, col, value));
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn build(self) -> Result<SparseMatrix> {
        SparseMatrix::from_triplets(self.n_rows, self.n_cols, self.entries)
    }
}

/// Compressed-row complex matrix. Values are immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl SparseMatrix {
    /// Duplicates are summed in a canonical order (sorted by value) so the
    /// result does not depend on the order of `entries`. Exact zeros are dropped.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        mut entries: Vec<(usize, usize, C64)>,
    ) -> Result<Self> {
        if let Some(&(r, c, _)) = entries.iter().find(|(r, c, _)| *r >= n_rows || *c >= n_cols) {
            return Err(Error::Dimension(format!(
                "entry ({r},{c}) outside {n_rows}x{n_cols}"
            )));
        }
        entries.sort_by(|a, b| {
            (a.0, a.1)
                .cmp(&(b.0, b.1))
                .then(a.2.re.total_cmp(&b.2.re))
                .then(a.2.im.total_cmp(&b.2.im))
        });
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut i = 0;
        while i < entries.len() {
            let (r, c, _) = entries[i];
            let mut sum = C64::new(0.0, 0.0);
            while i < entries.len() && entries[i].0 == r && entries[i].1 == c {
                sum += entries[i].2;
                i += 1;
            }
            if sum != C64::new(0.0, 0.0) {
                col_idx.push(c);
                values.push(sum);
                row_ptr[r + 1] += 1;
            }
        }
        for r in 0..n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self { n_rows, n_cols, row_ptr, col_idx, values })
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self { n_rows, n_cols, row_ptr: vec![0; n_rows + 1], col_idx: vec![], values: vec![] }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![C64::new(1.0, 0.0); n],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of one row.
    pub fn row(&self, r: usize) -> (&[usize], &[C64]) {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n_rows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn mul_vec(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.n_cols {
            return Err(Error::Dimension(format!(
                "vector of length {} for {} columns",
                x.len(),
                self.n_cols
            )));
        }
        Ok((0..self.n_rows)
            .map(|r| {
                let (cols, vals) = self.row(r);
                cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
            })
            .collect())
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n_rows)
            .map(|r| self.row(r).1.iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn add(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(Error::Dimension("matrix sum of different shapes".into()));
        }
        SparseMatrix::from_triplets(
            self.n_rows,
            self.n_cols,
            self.triplets().chain(other.triplets()).collect(),
        )
    }

    pub fn transpose(&self) -> SparseMatrix {
        let t = self.triplets().map(|(r, c, v)| (c, r, v)).collect();
        SparseMatrix::from_triplets(self.n_cols, self.n_rows, t).expect("transpose stays in bounds")
    }

    /// max |A_ij − A_ji| / max |A_ij|; zero for a complex-symmetric matrix.
    pub fn symmetry_defect(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut defect = 0.0f64;
        for (r, c, v) in self.triplets() {
            defect = defect.max((v - self.get(c, r)).norm());
        }
        defect / scale
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, C64>> {
        let t: Vec<_> = self.triplets().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
        SparseColMat::try_new_from_triplets(self.n_rows, self.n_cols, &t)
            .map_err(|e| Error::Dimension(format!("sparse conversion: {e:?}")))
    }
}

static SEQUENTIAL: Once = Once::new();

/// Sparse LU factorization (fill-reducing ordering, partial pivoting), reusable
/// for any number of right-hand sides.
pub struct SparseLu {
    n: usize,
    lu: Lu<usize, C64>,
}

impl std::fmt::Debug for SparseLu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseLu").field("n", &self.n).finish()
    }
}

impl SparseLu {
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        if a.n_rows != a.n_cols {
            return Err(Error::Dimension(format!("{}x{} matrix is not square", a.n_rows, a.n_cols)));
        }
        // The sequential kernels give bitwise-reproducible factors.
        SEQUENTIAL.call_once(|| faer::set_global_parallelism(Par::Seq));
        let m = a.to_faer()?;
        let lu = m.sp_lu().map_err(|e| match e {
            faer::sparse::linalg::LuError::SymbolicSingular { index } => {
                Error::SingularPivot { index }
            }
            other => Error::Invalid(format!("sparse LU failed: {other:?}")),
        })?;
        Ok(Self { n: a.n_rows, lu })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        Ok(self.solve_many(&[b.to_vec()])?.pop().expect("one column"))
    }

    pub fn solve_many(&self, rhs: &[Vec<C64>]) -> Result<Vec<Vec<C64>>> {
        use faer::prelude::Solve;
        if let Some(b) = rhs.iter().find(|b| b.len() != self.n) {
            return Err(Error::Dimension(format!("rhs of length {} for n = {}", b.len(), self.n)));
        }
        let b = Mat::<C64>::from_fn(self.n, rhs.len(), |i, j| rhs[j][i]);
        let x = self.lu.solve(&b);
        let cols: Vec<Vec<C64>> =
            (0..rhs.len()).map(|j| (0..self.n).map(|i| x[(i, j)]).collect()).collect();
        for col in &cols {
            // A numerically zero pivot surfaces as a non-finite solution.
            if let Some(index) = col.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::SingularPivot { index });
            }
        }
        Ok(cols)
    }

    /// Solve with up to three steps of iterative refinement until
    /// ‖Ax−b‖∞ ≤ 1e-10·(‖A‖∞‖x‖∞ + ‖b‖∞).
    pub fn solve_refined(&self, a: &SparseMatrix, b: &[C64]) -> Result<Vec<C64>> {
        let mut x = self.solve(b)?;
        let a_norm = a.norm_inf();
        let b_norm = norm_inf(b);
        for step in 0..=3 {
            let ax = a.mul_vec(&x)?;
            let r: Vec<C64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            let residual = norm_inf(&r);
            let bound = 1e-10 * (a_norm * norm_inf(&x) + b_norm);
            if residual <= bound {
                return Ok(x);
            }
            if step == 3 {
                return Err(Error::Residual { residual, bound });
            }
            let dx = self.solve(&r)?;
            for (xi, d) in x.iter_mut().zip(dx) {
                *xi += d;
            }
        }
        unreachable!()
    }
}

/// Factor and solve in one call, with the residual guarantee of [`SparseLu::solve_refined`].
pub fn sparse_lu_solve(a: &SparseMatrix, b: &[C64]) -> Result<Vec<C64>> {
    if b.len() != a.n_rows {
        return Err(Error::Dimension(format!("rhs of length {} for n = {}", b.len(), a.n_rows)));
    }
    SparseLu::factor(a)?.solve_refined(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_returns_rhs() {
        let b = vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 0.0)];
        assert_eq!(sparse_lu_solve(&SparseMatrix::identity(3), &b).unwrap(), b);
    }

    #[test]
    fn diagonal() {
        let a = SparseMatrix::from_triplets(2, 2, vec![(0, 0, c(0.0, 2.0)), (1, 1, c(4.0, 0.0))])
            .unwrap();
        let x = sparse_lu_solve(&a, &[c(0.0, 2.0), c(8.0, 0.0)]).unwrap();
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((x[1] - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn duplicates_summed_and_zeros_dropped() {
        let a = SparseMatrix::from_triplets(
            2,
            2,
            vec![(0, 1, c(1.0, 0.0)), (0, 1, c(2.0, 1.0)), (1, 0, c(1.0, 0.0)), (1, 0, c(-1.0, 0.0))],
        )
        .unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 1), c(3.0, 1.0));
    }

    #[test]
    fn structurally_singular_reports_pivot() {
        let a = SparseMatrix::from_triplets(2, 2, vec![(0, 0, c(1.0, 0.0)), (1, 0, c(1.0, 0.0))])
            .unwrap();
        assert!(matches!(SparseLu::factor(&a), Err(Error::SingularPivot { .. })));
    }

    #[test]
    fn dimension_mismatch() {
        let a = SparseMatrix::identity(3);
        assert!(matches!(sparse_lu_solve(&a, &[c(1.0, 0.0)]), Err(Error::Dimension(_))));
        let rect = SparseMatrix::zeros(2, 3);
        assert!(matches!(SparseLu::factor(&rect), Err(Error::Dimension(_))));
    }
}
