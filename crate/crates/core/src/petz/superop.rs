use crate::channels::BipartiteDims;
use crate::linalg::matrix::{self, CMatrix};
use crate::linalg::HermitianOperator;
use crate::{Error, Result};

/// Linear map `𝓑(ℂ^in) → 𝓑(ℂ^out)` as an `out²×in²` matrix acting on
/// column-stacked operators, `vec(X)[i + n·j] = X[i, j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    mat: CMatrix,
    in_dim: usize,
    out_dim: usize,
}

impl Superoperator {
    pub fn from_matrix(mat: CMatrix, in_dim: usize, out_dim: usize) -> Result<Self> {
        if mat.shape() != (out_dim * out_dim, in_dim * in_dim) {
            return Err(Error::dim(format!(
                "superoperator {in_dim}->{out_dim} needs a {}x{} matrix, got {:?}",
                out_dim * out_dim,
                in_dim * in_dim,
                mat.shape()
            )));
        }
        Ok(Superoperator { mat, in_dim, out_dim })
    }

    /// Assemble column by column from the images of the matrix units.
    pub fn from_map(in_dim: usize, out_dim: usize, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        let mut mat = matrix::zeros(out_dim * out_dim, in_dim * in_dim);
        for j in 0..in_dim {
            for i in 0..in_dim {
                let image = f(&matrix::matrix_unit(in_dim, in_dim, i, j));
                assert_eq!(image.shape(), (out_dim, out_dim), "from_map: image has wrong shape");
                mat.set_column(i + in_dim * j, &matrix::vectorize(&image));
            }
        }
        Superoperator { mat, in_dim, out_dim }
    }

    pub fn identity(d: usize) -> Self {
        Superoperator { mat: matrix::identity(d * d), in_dim: d, out_dim: d }
    }

    /// `L_C(X) = C X`, i.e. `I ⊗ C`.
    pub fn left(c: &CMatrix) -> Self {
        let d = c.nrows();
        Superoperator { mat: matrix::kron(&matrix::identity(d), c), in_dim: d, out_dim: d }
    }

    /// `R_B(X) = X B`, i.e. `Bᵀ ⊗ I`.
    pub fn right(b: &CMatrix) -> Self {
        let d = b.nrows();
        Superoperator { mat: matrix::kron(&b.transpose(), &matrix::identity(d)), in_dim: d, out_dim: d }
    }

    pub fn partial_trace(dims: BipartiteDims) -> Self {
        Self::from_map(dims.d_ab(), dims.d_a, |x| {
            crate::channels::partial_trace_b_matrix(x, dims).expect("dimensions fixed")
        })
    }

    pub fn partial_trace_adjoint(dims: BipartiteDims) -> Self {
        Self::from_map(dims.d_a, dims.d_ab(), |x| matrix::kron(x, &matrix::identity(dims.d_b)))
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.shape() != (self.in_dim, self.in_dim) {
            return Err(Error::dim(format!("superoperator input must be {0}x{0}", self.in_dim)));
        }
        Ok(matrix::unvectorize(&(&self.mat * matrix::vectorize(x)), self.out_dim, self.out_dim))
    }

    /// Adjoint with respect to the Hilbert–Schmidt inner product.
    pub fn adjoint(&self) -> Self {
        Superoperator { mat: self.mat.adjoint(), in_dim: self.out_dim, out_dim: self.in_dim }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Superoperator) -> Result<Self> {
        if inner.out_dim != self.in_dim {
            return Err(Error::dim("superoperator composition dimensions do not chain"));
        }
        Ok(Superoperator { mat: &self.mat * &inner.mat, in_dim: inner.in_dim, out_dim: self.out_dim })
    }

    pub fn hermiticity_defect(&self) -> f64 {
        matrix::hermiticity_defect(&self.mat)
    }

    /// View a Hermitian superoperator as an operator on the vectorized space.
    pub fn to_hermitian(&self) -> Result<HermitianOperator> {
        if self.in_dim != self.out_dim {
            return Err(Error::dim("only square superoperators are Hermitian"));
        }
        HermitianOperator::new(self.mat.clone())
    }

    /// Largest deviation from `f` over the matrix-unit basis.
    pub fn formula_defect(&self, f: impl Fn(&CMatrix) -> CMatrix) -> f64 {
        let n = self.in_dim;
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                let e = matrix::matrix_unit(n, n, i, j);
                let diff = self.apply(&e).expect("shape") - f(&e);
                worst = worst.max(diff.norm());
            }
        }
        worst
    }
}
