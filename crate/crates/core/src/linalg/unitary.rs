use super::matrix::{self, c64, CMatrix, CVector};
use crate::{Error, Result};

/// Modified Gram–Schmidt with one re-orthogonalization pass.
///
/// Returns the orthonormal columns that survive; columns whose residual norm
/// falls below `tol` are dropped.
pub fn orthonormalize(cols: &CMatrix, tol: f64) -> CMatrix {
    let n = cols.nrows();
    let mut basis: Vec<CVector> = Vec::new();
    for j in 0..cols.ncols() {
        let mut v: CVector = cols.column(j).into_owned();
        let start = v.norm();
        for _ in 0..2 {
            for q in &basis {
                let proj = q.dotc(&v);
                v -= q * proj;
            }
        }
        let nv = v.norm();
        if nv > tol * (1.0 + start) {
            basis.push(v / c64(nv, 0.0));
        }
    }
    let mut out = matrix::zeros(n, basis.len());
    for (j, q) in basis.iter().enumerate() {
        out.set_column(j, q);
    }
    out
}

/// Extend the orthonormal columns of `v` (n×k) to an n×n unitary whose first
/// `k` columns are `v`.
pub fn complete_to_unitary(v: &CMatrix) -> Result<CMatrix> {
    let n = v.nrows();
    let k = v.ncols();
    if k > n {
        return Err(Error::dim(format!("cannot complete {k} columns in dimension {n}")));
    }
    let defect = (v.adjoint() * v - matrix::identity(k)).norm();
    if defect > 1e-9 {
        return Err(Error::InvalidArgument(format!("columns are not orthonormal (defect {defect:.3e})")));
    }
    let mut stacked = matrix::zeros(n, k + n);
    stacked.columns_mut(0, k).copy_from(v);
    stacked.columns_mut(k, n).copy_from(&matrix::identity(n));
    let u = orthonormalize(&stacked, 1e-8);
    if u.ncols() != n {
        return Err(Error::Degenerate("unitary completion lost rank".into()));
    }
    Ok(u)
}

pub fn unitarity_defect(u: &CMatrix) -> f64 {
    (u.adjoint() * u - matrix::identity(u.ncols())).norm()
}
