//! Small dense matrices: LU with partial pivoting and 1-norm conditioning.

use crate::error::{FouError, Result};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(FouError::Domain("matrix rows must be square".into()));
        }
        Ok(Self {
            n,
            data: rows.concat(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.n.max(1))
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for SquareMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// `PA = LU` with unit lower `L` stored below the diagonal.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: SquareMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn decompose(a: &SquareMatrix) -> Result<Self> {
        let n = a.dim();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.norm1();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| lu[(i, col)].abs().total_cmp(&lu[(j, col)].abs()))
                .unwrap_or(col);
            if !(lu[(pivot, col)].abs() > f64::EPSILON * scale) {
                return Err(FouError::Numerical(format!(
                    "matrix singular at column {col}"
                )));
            }
            if pivot != col {
                for j in 0..n {
                    let tmp = lu[(col, j)];
                    lu[(col, j)] = lu[(pivot, j)];
                    lu[(pivot, j)] = tmp;
                }
                perm.swap(col, pivot);
            }
            let d = lu[(col, col)];
            for i in col + 1..n {
                let f = lu[(i, col)] / d;
                lu[(i, col)] = f;
                for j in col + 1..n {
                    let u = lu[(col, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.dim();
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                y[i] -= self.lu[(i, k)] * y[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] -= self.lu[(i, k)] * y[k];
            }
            y[i] /= self.lu[(i, i)];
        }
        y
    }

    pub fn inverse(&self) -> SquareMatrix {
        let n = self.lu.dim();
        let mut inv = SquareMatrix::zeros(n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            for (i, v) in self.solve(&e).into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        inv
    }
}

/// `(I_p, a; a^T, b)^{-1}` by the block formula, valid for `b > |a|^2`.
pub fn unit_block_inverse(a: &[f64], b: f64) -> Result<SquareMatrix> {
    let p = a.len();
    let schur = b - a.iter().map(|v| v * v).sum::<f64>();
    if !(schur > 0.0) {
        return Err(FouError::Domain(format!(
            "b - |a|^2 = {schur} must be positive"
        )));
    }
    let mut m = SquareMatrix::zeros(p + 1);
    for i in 0..p {
        for j in 0..p {
            m[(i, j)] = if i == j { 1.0 } else { 0.0 } + a[i] * a[j] / schur;
        }
        m[(i, p)] = -a[i] / schur;
        m[(p, i)] = -a[i] / schur;
    }
    m[(p, p)] = 1.0 / schur;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn solves_with_pivoting() {
        let a = SquareMatrix::from_rows(&[
            vec![0.0, 2.0, 1.0],
            vec![1.0, 1.0, 0.0],
            vec![3.0, 0.0, 1.0],
        ])
        .unwrap();
        let lu = Lu::decompose(&a).unwrap();
        let x = lu.solve(&[5.0, 3.0, 6.0]);
        let back = a.mul_vec(&x);
        for (b, e) in back.iter().zip([5.0, 3.0, 6.0]) {
            assert!((b - e).abs() < 1e-14);
        }
        assert!(
            a.mul(&lu.inverse())
                .max_abs_diff(&SquareMatrix::identity(3))
                < 1e-14
        );
    }

    #[test]
    fn two_by_two_inverse_matches_explicit_formula() {
        let (a, b, c, d) = (4.0, 1.5, 1.5, 9.0);
        let m = SquareMatrix::from_rows(&[vec![a, b], vec![c, d]]).unwrap();
        let inv = Lu::decompose(&m).unwrap().inverse();
        let det = a * d - b * c;
        let expected =
            SquareMatrix::from_rows(&[vec![d / det, -b / det], vec![-c / det, a / det]]).unwrap();
        assert!(inv.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = SquareMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(Lu::decompose(&a).is_err());
        assert!(unit_block_inverse(&[1.0, 1.0], 2.0).is_err());
    }

    proptest! {
        #[test]
        fn block_inverse_identity(a in prop::collection::vec(-3.0f64..3.0, 1..6), slack in 0.05f64..10.0) {
            let b = a.iter().map(|v| v * v).sum::<f64>() + slack;
            let p = a.len();
            let mut m = SquareMatrix::identity(p + 1);
            for i in 0..p {
                m[(i, p)] = a[i];
                m[(p, i)] = a[i];
            }
            m[(p, p)] = b;
            let inv = unit_block_inverse(&a, b).unwrap();
            let err = m.mul(&inv).max_abs_diff(&SquareMatrix::identity(p + 1));
            prop_assert!(err <= 1e-10, "err {}", err);
        }
    }
}
