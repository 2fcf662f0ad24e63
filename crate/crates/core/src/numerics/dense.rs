use faer::prelude::Solve;
use faer::Mat;

use super::C64;
use crate::error::{Error, Result};

/// Square dense system with one or more right-hand sides (row-major matrix).
#[derive(Debug, Clone)]
pub struct DenseComplexSystem {
    n: usize,
    matrix: Vec<C64>,
    rhs: Vec<Vec<C64>>,
}

impl DenseComplexSystem {
    pub fn new(n: usize, matrix: Vec<C64>, rhs: Vec<Vec<C64>>) -> Result<Self> {
        if matrix.len() != n * n {
            return Err(Error::Dimension(format!(
                "matrix has {} entries, expected {}x{n}",
                matrix.len(),
                n
            )));
        }
        if let Some(b) = rhs.iter().find(|b| b.len() != n) {
            return Err(Error::Dimension(format!("rhs of length {} for n = {n}", b.len())));
        }
        Ok(Self { n, matrix, rhs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, r: usize, c: usize) -> C64 {
        self.matrix[r * self.n + c]
    }

    pub fn rhs(&self) -> &[Vec<C64>] {
        &self.rhs
    }

    fn to_faer(&self) -> Mat<C64> {
        Mat::from_fn(self.n, self.n, |i, j| self.entry(i, j))
    }

    /// 2-norm condition number σ_max/σ_min (infinite when singular).
    pub fn condition_number(&self) -> f64 {
        condition_number(&self.to_faer())
    }

    /// Relative residual ‖Ax−b‖∞ / (‖A‖∞‖x‖∞ + ‖b‖∞) of a candidate solution column.
    pub fn relative_residual(&self, x: &[C64], col: usize) -> f64 {
        let b = &self.rhs[col];
        let mut r_max = 0.0f64;
        let mut a_norm = 0.0f64;
        for i in 0..self.n {
            let mut s = C64::new(0.0, 0.0);
            let mut row = 0.0;
            for j in 0..self.n {
                s += self.entry(i, j) * x[j];
                row += self.entry(i, j).norm();
            }
            r_max = r_max.max((s - b[i]).norm());
            a_norm = a_norm.max(row);
        }
        let x_norm = x.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let b_norm = b.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let denom = a_norm * x_norm + b_norm;
        if denom == 0.0 { 0.0 } else { r_max / denom }
    }
}

pub fn condition_number(m: &Mat<C64>) -> f64 {
    match m.singular_values() {
        Ok(s) if !s.is_empty() => {
            let (max, min) = s.iter().fold((0.0f64, f64::INFINITY), |(a, b), &v| (a.max(v), b.min(v)));
            if min == 0.0 { f64::INFINITY } else { max / min }
        }
        _ => f64::INFINITY,
    }
}

fn numerical_rank(m: &Mat<C64>) -> usize {
    let s = m.singular_values().unwrap_or_default();
    let max = s.iter().cloned().fold(0.0, f64::max);
    s.iter().filter(|&&v| v > 1e-13 * max).count()
}

/// LU with partial pivoting; one solution vector per right-hand side.
pub fn dense_solve(sys: &DenseComplexSystem) -> Result<Vec<Vec<C64>>> {
    let n = sys.n;
    let a = sys.to_faer();
    let rank = numerical_rank(&a);
    if rank < n {
        return Err(Error::RankDeficient { rank, n });
    }
    let b = Mat::<C64>::from_fn(n, sys.rhs.len(), |i, j| sys.rhs[j][i]);
    let lu = a.partial_piv_lu();
    let mut x = lu.solve(&b);
    // One refinement step brings the residual to working precision.
    let r = &b - &a * &x;
    let dx = lu.solve(&r);
    x += &dx;
    let cols: Vec<Vec<C64>> =
        (0..sys.rhs.len()).map(|j| (0..n).map(|i| x[(i, j)]).collect()).collect();
    for (j, col) in cols.iter().enumerate() {
        let rel = sys.relative_residual(col, j);
        if !rel.is_finite() || rel > 1e-12 {
            return Err(Error::Residual { residual: rel, bound: 1e-12 });
        }
    }
    Ok(cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn scalar() {
        let sys = DenseComplexSystem::new(1, vec![c(3.0, 4.0)], vec![vec![c(3.0, 4.0)]]).unwrap();
        let x = dense_solve(&sys).unwrap();
        assert!((x[0][0] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn unitary_column() {
        let (s, co) = (0.3f64.sin(), 0.3f64.cos());
        let m = vec![c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)];
        let sys = DenseComplexSystem::new(2, m, vec![vec![c(co, 0.0), c(0.0, -s)]]).unwrap();
        let x = dense_solve(&sys).unwrap();
        assert!((x[0][0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(x[0][1].norm() < 1e-15);
    }

    #[test]
    fn rank_deficient_reports_rank() {
        let m = vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)];
        let sys = DenseComplexSystem::new(2, m, vec![vec![c(1.0, 0.0), c(0.0, 0.0)]]).unwrap();
        assert!(matches!(dense_solve(&sys), Err(Error::RankDeficient { rank: 1, n: 2 })));
    }

    #[test]
    fn condition_of_identity_is_one() {
        let m = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let sys = DenseComplexSystem::new(2, m, vec![]).unwrap();
        assert!((sys.condition_number() - 1.0).abs() < 1e-14);
    }
}
