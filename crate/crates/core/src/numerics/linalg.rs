use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Domain("matrix must be square".into()));
        }
        Ok(CMatrix { n, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * x[j]).sum())
            .collect()
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinSolveReport {
    pub solution: Vec<Complex64>,
    /// `||A||_inf * ||A^-1||_inf`.
    pub condition_estimate: f64,
    /// `||A x - b||_inf` recomputed after the solve.
    pub residual_norm: f64,
}

struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(a: &CMatrix) -> Result<Lu> {
        let n = a.dim();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let max_row = (0..n)
            .map(|i| (0..n).map(|j| a[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let threshold = 1e-13 * max_row;
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
                .unwrap();
            if !(pivot > threshold) {
                return Err(Error::SingularMatrix { column: k, pivot, threshold });
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    let t = lu[(k, j)];
                    lu[(i, j)] -= f * t;
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.dim();
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let t = self.lu[(i, j)] * x[j];
                x[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = self.lu[(i, j)] * x[j];
                x[i] -= t;
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }
}

/// Gaussian elimination with partial pivoting, plus a residual and
/// infinity-norm condition number.
pub fn solve_linear(a: &CMatrix, b: &[Complex64]) -> Result<LinSolveReport> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::Domain(format!("rhs length {} != matrix size {n}", b.len())));
    }
    if n == 0 {
        return Ok(LinSolveReport { solution: vec![], condition_estimate: 1.0, residual_norm: 0.0 });
    }
    let lu = Lu::factor(a)?;
    let solution = lu.solve(b);

    let mut inv_norm = 0.0_f64;
    let mut inv_rows = vec![0.0_f64; n];
    for j in 0..n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[j] = Complex64::new(1.0, 0.0);
        let col = lu.solve(&e);
        for i in 0..n {
            inv_rows[i] += col[i].norm();
        }
    }
    for v in inv_rows {
        inv_norm = inv_norm.max(v);
    }
    let condition_estimate = a.norm_inf() * inv_norm;

    let ax = a.mul_vec(&solution);
    let residual_norm = ax
        .iter()
        .zip(b)
        .map(|(l, r)| (l - r).norm())
        .fold(0.0, f64::max);
    if !residual_norm.is_finite() || solution.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(Error::SingularMatrix { column: 0, pivot: f64::NAN, threshold: 0.0 });
    }
    Ok(LinSolveReport { solution, condition_estimate, residual_norm })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn identity_solve() {
        let rep = solve_linear(&CMatrix::identity(3), &cv(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(rep.solution, cv(&[1.0, 2.0, 3.0]));
        assert_eq!(rep.residual_norm, 0.0);
        assert!((rep.condition_estimate - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_solve() {
        let a = CMatrix::from_real_rows(&[&[2.0, 0.0], &[0.0, 4.0]]).unwrap();
        let rep = solve_linear(&a, &cv(&[2.0, 8.0])).unwrap();
        assert_eq!(rep.solution, cv(&[1.0, 2.0]));
    }

    #[test]
    fn singular_detected() {
        let a = CMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(matches!(solve_linear(&a, &cv(&[1.0, 1.0])), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn needs_pivoting() {
        let a = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let rep = solve_linear(&a, &cv(&[3.0, 5.0])).unwrap();
        assert_eq!(rep.solution, cv(&[5.0, 3.0]));
    }
}
