use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Dense complex matrix, column-major.
pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

pub fn from_real_diag(d: &[f64]) -> CMatrix {
    let n = d.len();
    let mut m = zeros(n, n);
    for (i, &x) in d.iter().enumerate() {
        m[(i, i)] = c64(x, 0.0);
    }
    m
}

/// Build a matrix from row-major real entries.
pub fn from_real_rows(rows: &[&[f64]]) -> CMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMatrix::from_fn(n, m, |i, j| c64(rows[i][j], 0.0))
}

pub fn matrix_unit(rows: usize, cols: usize, i: usize, j: usize) -> CMatrix {
    let mut m = zeros(rows, cols);
    m[(i, j)] = ONE;
    m
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Column-stacking vectorization: `vec(X)[i + rows·j] = X[i, j]`.
pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    assert_eq!(v.len(), rows * cols, "unvectorize: length mismatch");
    CMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Hilbert–Schmidt inner product `Tr(A† B)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.norm()
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

pub fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c64(0.5, 0.0)
}

pub fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Permutation matrix mapping `vec(X)` to `vec(Xᵀ)` for `n×n` operators.
pub fn transpose_permutation(n: usize) -> CMatrix {
    let mut p = zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            // vec(X)[i + n j] = X[i,j] goes to vec(Xᵀ)[j + n i]
            p[(j + n * i, i + n * j)] = ONE;
        }
    }
    p
}

/// Wire format shared by every module: row-major real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let (rows, cols) = m.shape();
        let re = (0..rows).map(|i| (0..cols).map(|j| m[(i, j)].re).collect()).collect();
        let im = (0..rows).map(|i| (0..cols).map(|j| m[(i, j)].im).collect()).collect();
        MatrixJson { rows, cols, re, im }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Parse("matrix must have positive dimensions".into()));
        }
        let check = |part: &Vec<Vec<f64>>, name: &str| -> Result<()> {
            if part.len() != self.rows || part.iter().any(|r| r.len() != self.cols) {
                return Err(Error::Parse(format!(
                    "`{name}` must be a {}x{} row-major array",
                    self.rows, self.cols
                )));
            }
            if part.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::Parse(format!("`{name}` contains non-finite entries")));
            }
            Ok(())
        };
        check(&self.re, "re")?;
        check(&self.im, "im")?;
        Ok(CMatrix::from_fn(self.rows, self.cols, |i, j| {
            c64(self.re[i][j], self.im[i][j])
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vec_convention_matches_kronecker_identity() {
        // vec(A X B) = (Bᵀ ⊗ A) vec(X)
        let a = CMatrix::from_fn(2, 2, |i, j| c64(i as f64 + 1.0, j as f64 - 0.5));
        let x = CMatrix::from_fn(2, 2, |i, j| c64((i * 2 + j) as f64, 1.0));
        let b = CMatrix::from_fn(2, 2, |i, j| c64(0.3 * i as f64, 0.7 - j as f64));
        let lhs = vectorize(&(&a * &x * &b));
        let rhs = kron(&b.transpose(), &a) * vectorize(&x);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn transpose_permutation_acts_as_transpose() {
        let x = CMatrix::from_fn(3, 3, |i, j| c64(i as f64, j as f64 * 2.0));
        let p = transpose_permutation(3);
        let got = unvectorize(&(p * vectorize(&x)), 3, 3);
        assert!((got - x.transpose()).norm() < 1e-14);
    }

    #[test]
    fn json_rejects_ragged_and_nonfinite() {
        let bad = MatrixJson { rows: 2, cols: 2, re: vec![vec![1.0, 0.0]], im: vec![vec![0.0; 2]; 2] };
        assert!(bad.to_matrix().is_err());
        let nan = MatrixJson {
            rows: 1,
            cols: 1,
            re: vec![vec![f64::NAN]],
            im: vec![vec![0.0]],
        };
        assert!(nan.to_matrix().is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = CMatrix::from_fn(2, 3, |i, j| c64(i as f64 - j as f64, 0.25 * j as f64));
        let back = MatrixJson::from_matrix(&m).to_matrix().unwrap();
        assert_eq!(m, back);
    }
}
