use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::hermitian::psd_guard;
use crate::linalg::matrix::{self, c64, CMatrix, CVector, MatrixJson};
use crate::linalg::{loewner_gap, HermitianOperator, LoewnerCertificate};
use crate::petz::Superoperator;
use crate::states::DensityOperator;
use crate::tol::DEFAULT;
use crate::{Error, Result};

/// Orthonormal basis of `𝓑(ℂ^d)` for the Hilbert–Schmidt inner product.
#[derive(Clone, Debug)]
pub struct OperatorBasis {
    dim: usize,
    elements: Vec<CMatrix>,
}

impl OperatorBasis {
    /// Matrix units `E_{ij}` in column-stacking order `k = i + d·j`.
    pub fn matrix_units(d: usize) -> Self {
        let elements = (0..d * d).map(|k| matrix::matrix_unit(d, d, k % d, k / d)).collect();
        OperatorBasis { dim: d, elements }
    }

    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        let d = elements.first().map(|e| e.nrows()).ok_or_else(|| Error::dim("empty basis"))?;
        if elements.len() != d * d || elements.iter().any(|e| e.shape() != (d, d)) {
            return Err(Error::dim(format!("a basis of 𝓑(ℂ^{d}) needs {} square elements", d * d)));
        }
        let basis = OperatorBasis { dim: d, elements };
        let defect = basis.orthonormality_defect();
        if defect > DEFAULT.orthonormality {
            return Err(Error::InvalidArgument(format!("operator basis is not orthonormal (defect {defect:.3e})")));
        }
        Ok(basis)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    /// Columns are `vec(E_k)`.
    pub fn change_of_basis(&self) -> CMatrix {
        let n = self.len();
        let mut b = matrix::zeros(n, n);
        for (k, e) in self.elements.iter().enumerate() {
            b.set_column(k, &matrix::vectorize(e));
        }
        b
    }

    pub fn orthonormality_defect(&self) -> f64 {
        let b = self.change_of_basis();
        (b.adjoint() * &b - matrix::identity(self.len())).norm()
    }

    /// Coordinates `Tr(E_k† X)`.
    pub fn coordinates(&self, x: &CMatrix) -> CVector {
        CVector::from_iterator(self.len(), self.elements.iter().map(|e| matrix::hs_inner(e, x)))
    }

    pub fn operator(&self, coords: &CVector) -> CMatrix {
        let mut x = matrix::zeros(self.dim, self.dim);
        for (e, c) in self.elements.iter().zip(coords.iter()) {
            x += e * *c;
        }
        x
    }
}

/// Positive sesquilinear form `α(v, w) = v† G w` given by its Gram matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct PositiveForm {
    gram: CMatrix,
    psd_defect: f64,
}

impl PositiveForm {
    pub fn new(gram: CMatrix) -> Result<Self> {
        let op = HermitianOperator::new(gram)?;
        let spec = op.eig()?;
        psd_guard(&spec, spec.support_threshold())?;
        Ok(PositiveForm { psd_defect: (-spec.min_eigenvalue()).max(0.0), gram: op.into_matrix() })
    }

    /// Wrap a Gram matrix that is PSD by construction.
    pub(crate) fn from_raw(gram: CMatrix) -> Self {
        PositiveForm { gram: matrix::symmetrize(&gram), psd_defect: 0.0 }
    }

    pub fn zero(n: usize) -> Self {
        Self::from_raw(matrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_raw(matrix::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    pub fn psd_defect(&self) -> f64 {
        self.psd_defect
    }

    pub fn eval(&self, v: &CVector, w: &CVector) -> Complex64 {
        (v.adjoint() * &self.gram * w)[(0, 0)]
    }

    pub fn quadratic(&self, v: &CVector) -> f64 {
        self.eval(v, v).re
    }

    pub fn scale(&self, c: f64) -> Self {
        assert!(c >= 0.0, "PositiveForm::scale: negative factor");
        Self::from_raw(&self.gram * c64(c, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_dim(self, other)?;
        Ok(Self::from_raw(&self.gram + &other.gram))
    }

    /// `self ≤ other`.
    pub fn leq(&self, other: &Self, tol: f64) -> Result<LoewnerCertificate> {
        same_dim(self, other)?;
        loewner_gap(&(&other.gram - &self.gram), tol)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (&self.gram - &other.gram).norm()
    }

    /// `max |α(v, v)|` over an orthonormal basis of the numerical kernel.
    pub fn isotropy_defect(&self) -> Result<f64> {
        let spec = HermitianOperator::from_raw(self.gram.clone()).eig()?;
        let tau = spec.support_threshold();
        let mut worst: f64 = 0.0;
        for (k, &l) in spec.eigenvalues.iter().enumerate() {
            if l <= tau {
                let v = spec.eigenvectors.column(k).into_owned();
                worst = worst.max(self.eval(&v, &v).norm());
            }
        }
        Ok(worst)
    }

    pub fn to_json(&self) -> FormJson {
        FormJson { matrix: MatrixJson::from_matrix(&self.gram), basis: "matrix-units".into(), space_dim: self.dim() }
    }
}

pub(crate) fn same_dim(a: &PositiveForm, b: &PositiveForm) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::dim(format!("form dimensions {} and {} differ", a.dim(), b.dim())));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FormJson {
    #[serde(flatten)]
    pub matrix: MatrixJson,
    pub basis: String,
    pub space_dim: usize,
}

impl FormJson {
    pub fn to_form(&self) -> Result<PositiveForm> {
        if self.basis != "matrix-units" {
            return Err(Error::Schema(format!("unsupported form basis `{}`", self.basis)));
        }
        if self.matrix.rows != self.space_dim || self.matrix.cols != self.space_dim {
            return Err(Error::Schema("gram shape does not match space_dim".into()));
        }
        PositiveForm::new(self.matrix.to_matrix()?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `ρ_L(A, B) = Tr(A† ρ B)`.
    Left,
    /// `σ_R(A, B) = Tr(σ A† B)`.
    Right,
}

/// Gram matrix of `ρ_L` or `ρ_R`, evaluated entry by entry from traces.
pub fn form_from_operator_pair(rho: &DensityOperator, side: Side, basis: &OperatorBasis) -> Result<PositiveForm> {
    form_from_operator(rho.op(), side, basis)
}

pub fn form_from_operator(rho: &HermitianOperator, side: Side, basis: &OperatorBasis) -> Result<PositiveForm> {
    if rho.dim() != basis.dim() {
        return Err(Error::dim(format!("operator on ℂ^{} with a basis of 𝓑(ℂ^{})", rho.dim(), basis.dim())));
    }
    let n = basis.len();
    let m = rho.matrix();
    let e = basis.elements();
    let gram = CMatrix::from_fn(n, n, |i, j| match side {
        Side::Left => (e[i].adjoint() * m * &e[j]).trace(),
        Side::Right => (m * e[i].adjoint() * &e[j]).trace(),
    });
    PositiveForm::new(gram)
}

/// `‖gram − B† M B‖_F` where `M` is the Kronecker matrix of `L_ρ` or `R_ρ`.
pub fn superoperator_duality_defect(form: &PositiveForm, rho: &HermitianOperator, side: Side, basis: &OperatorBasis) -> f64 {
    let op = match side {
        Side::Left => Superoperator::left(rho.matrix()),
        Side::Right => Superoperator::right(rho.matrix()),
    };
    let b = basis.change_of_basis();
    (form.gram() - b.adjoint() * op.matrix() * &b).norm()
}

/// `ψ*α(u, u') = α(ψu, ψu')`; `psi` has shape `n_V × n_U`.
pub fn pullback_form(psi: &CMatrix, alpha: &PositiveForm) -> Result<PositiveForm> {
    if psi.nrows() != alpha.dim() {
        return Err(Error::dim(format!("map has {} output coordinates, form lives on {}", psi.nrows(), alpha.dim())));
    }
    Ok(PositiveForm::from_raw(psi.adjoint() * alpha.gram() * psi))
}
