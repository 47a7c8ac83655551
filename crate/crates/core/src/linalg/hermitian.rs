use std::fmt;

use serde::{Deserialize, Serialize};

use super::eig::jacobi_eigen;
use super::matrix::{self, c64, CMatrix};
use crate::tol::DEFAULT;
use crate::{Error, Result};

/// Square complex matrix certified Hermitian at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    mat: CMatrix,
    hermiticity_defect: f64,
}

impl HermitianOperator {
    /// Certify `mat` as Hermitian; the stored matrix is its exact Hermitian part.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::dim(format!("expected a square matrix, got {:?}", mat.shape())));
        }
        if !matrix::all_finite(&mat) {
            return Err(Error::Parse("matrix contains non-finite entries".into()));
        }
        let defect = matrix::hermiticity_defect(&mat);
        let tol = DEFAULT.hermitian * (1.0 + mat.norm());
        if defect > tol {
            return Err(Error::NotHermitian { defect, tol });
        }
        Ok(HermitianOperator { mat: matrix::symmetrize(&mat), hermiticity_defect: defect })
    }

    /// Wrap a matrix that is Hermitian by construction (up to rounding).
    pub(crate) fn from_raw(mat: CMatrix) -> Self {
        debug_assert!(mat.is_square());
        let hermiticity_defect = matrix::hermiticity_defect(&mat);
        HermitianOperator { mat: matrix::symmetrize(&mat), hermiticity_defect }
    }

    pub fn identity(d: usize) -> Self {
        HermitianOperator { mat: matrix::identity(d), hermiticity_defect: 0.0 }
    }

    pub fn zero(d: usize) -> Self {
        HermitianOperator { mat: matrix::zeros(d, d), hermiticity_defect: 0.0 }
    }

    pub fn diag(values: &[f64]) -> Self {
        HermitianOperator { mat: matrix::from_real_diag(values), hermiticity_defect: 0.0 }
    }

    /// Projector `|ψ⟩⟨ψ|` onto a (not necessarily normalized) vector.
    pub fn outer(psi: &matrix::CVector) -> Self {
        Self::from_raw(psi * psi.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.hermiticity_defect
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn eig(&self) -> Result<SpectralDecomposition> {
        eig_hermitian(self)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_dim(self, other)?;
        Ok(Self::from_raw(&self.mat + &other.mat))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_dim(self, other)?;
        Ok(Self::from_raw(&self.mat - &other.mat))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_raw(&self.mat * c64(s, 0.0))
    }

    /// `self + ε·I`.
    pub fn shifted(&self, eps: f64) -> Self {
        Self::from_raw(&self.mat + matrix::identity(self.dim()) * c64(eps, 0.0))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self::from_raw(matrix::kron(&self.mat, &other.mat))
    }

    /// `A X A†` for an arbitrary (possibly rectangular) `A`.
    pub fn conjugate_by(&self, a: &CMatrix) -> Result<Self> {
        if a.ncols() != self.dim() {
            return Err(Error::dim("conjugate_by: column count must match operator dimension"));
        }
        Ok(Self::from_raw(a * &self.mat * a.adjoint()))
    }

    /// Expectation `Tr(self · other)` as a real number.
    pub fn trace_product(&self, other: &Self) -> f64 {
        matrix::hs_inner(&self.mat, &other.mat).re
    }
}

fn same_dim(a: &HermitianOperator, b: &HermitianOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::dim(format!("operator dimensions {} and {} differ", a.dim(), b.dim())));
    }
    Ok(())
}

/// `A = U diag(λ) U†` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

pub fn eig_hermitian(a: &HermitianOperator) -> Result<SpectralDecomposition> {
    let (eigenvalues, eigenvectors) = jacobi_eigen(a.matrix())?;
    Ok(SpectralDecomposition { eigenvalues, eigenvectors })
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// Default numerical-kernel threshold `τ_support`.
    pub fn support_threshold(&self) -> f64 {
        DEFAULT.support * (1.0 + self.max_eigenvalue().max(0.0))
    }

    /// `U diag(f(λ)) U†` for real-valued spectral weights.
    pub fn map_real(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let weights: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.recompose_with(&weights)
    }

    pub fn recompose_with(&self, weights: &[f64]) -> CMatrix {
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for (j, &w) in weights.iter().enumerate() {
            scaled.column_mut(j).scale_mut(w);
        }
        scaled * u.adjoint()
    }

    pub fn recompose(&self) -> CMatrix {
        self.recompose_with(&self.eigenvalues)
    }

    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.dim();
        (self.eigenvectors.adjoint() * &self.eigenvectors - matrix::identity(n)).norm()
    }

    /// Orthogonal projectors onto eigenspaces, clustering eigenvalues within
    /// `τ_cluster = cluster·(1 + λ_max)`.
    pub fn eigen_projectors(&self) -> Vec<(f64, CMatrix)> {
        let tol = DEFAULT.cluster * (1.0 + self.max_eigenvalue().abs());
        let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
        for (i, &l) in self.eigenvalues.iter().enumerate() {
            match out.last_mut() {
                Some((rep, idx)) if (l - *rep).abs() <= tol => idx.push(i),
                _ => out.push((l, vec![i])),
            }
        }
        out.into_iter()
            .map(|(_, idx)| {
                let mean = idx.iter().map(|&i| self.eigenvalues[i]).sum::<f64>() / idx.len() as f64;
                let w: Vec<f64> =
                    (0..self.dim()).map(|i| if idx.contains(&i) { 1.0 } else { 0.0 }).collect();
                (mean, self.recompose_with(&w))
            })
            .collect()
    }
}

/// Interval endpoint for a matrix-function domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    Open(f64),
    Closed(f64),
    Unbounded,
}

/// Real interval on which a scalar function is declared.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub lo: Bound,
    pub hi: Bound,
}

impl Domain {
    pub const REALS: Domain = Domain { lo: Bound::Unbounded, hi: Bound::Unbounded };
    pub const POSITIVE: Domain = Domain { lo: Bound::Open(0.0), hi: Bound::Unbounded };
    pub const NONNEGATIVE: Domain = Domain { lo: Bound::Closed(0.0), hi: Bound::Unbounded };

    pub fn closed(lo: f64, hi: f64) -> Self {
        Domain { lo: Bound::Closed(lo), hi: Bound::Closed(hi) }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Domain { lo: Bound::Open(lo), hi: Bound::Open(hi) }
    }

    pub fn contains(&self, x: f64) -> bool {
        let lo_ok = match self.lo {
            Bound::Open(a) => x > a,
            Bound::Closed(a) => x >= a,
            Bound::Unbounded => true,
        };
        let hi_ok = match self.hi {
            Bound::Open(b) => x < b,
            Bound::Closed(b) => x <= b,
            Bound::Unbounded => true,
        };
        lo_ok && hi_ok
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lo {
            Bound::Open(a) => write!(f, "({a}, ")?,
            Bound::Closed(a) => write!(f, "[{a}, ")?,
            Bound::Unbounded => write!(f, "(-inf, ")?,
        }
        match self.hi {
            Bound::Open(b) => write!(f, "{b})"),
            Bound::Closed(b) => write!(f, "{b}]"),
            Bound::Unbounded => write!(f, "+inf)"),
        }
    }
}

/// `f(A) = U f(D) U†`, rejecting spectra outside the declared domain.
pub fn matrix_function(
    a: &HermitianOperator,
    f: impl Fn(f64) -> f64,
    domain: Domain,
) -> Result<HermitianOperator> {
    let spec = a.eig()?;
    spectral_function(&spec, f, domain)
}

pub fn spectral_function(
    spec: &SpectralDecomposition,
    f: impl Fn(f64) -> f64,
    domain: Domain,
) -> Result<HermitianOperator> {
    if let Some(&bad) = spec.eigenvalues.iter().find(|&&l| !domain.contains(l)) {
        return Err(Error::Domain { eigenvalue: bad, domain: domain.to_string() });
    }
    Ok(HermitianOperator::from_raw(spec.map_real(f)))
}

/// `log A` with its `-∞·P_0` part carried symbolically.
#[derive(Clone, Debug)]
pub struct LogExtended {
    /// `Σ_{λ_j > τ} log(λ_j) P_j`.
    pub finite_part: HermitianOperator,
    /// Orthogonal projector onto the numerical kernel.
    pub kernel_projector: HermitianOperator,
}

impl LogExtended {
    /// `exp(log A)`, with `exp(-∞) = 0` on the kernel.
    pub fn exp(&self) -> Result<HermitianOperator> {
        let e = matrix_function(&self.finite_part, f64::exp, Domain::REALS)?;
        let d = e.dim();
        let keep = matrix::identity(d) - self.kernel_projector.matrix();
        Ok(HermitianOperator::from_raw(e.matrix() * keep))
    }
}

pub fn log_extended(a: &HermitianOperator) -> Result<LogExtended> {
    let spec = a.eig()?;
    let tau = spec.support_threshold();
    if spec.min_eigenvalue() < -tau {
        return Err(Error::Order(format!(
            "log_extended requires a PSD operator, found eigenvalue {:.3e}",
            spec.min_eigenvalue()
        )));
    }
    let logs: Vec<f64> = spec.eigenvalues.iter().map(|&l| if l > tau { l.ln() } else { 0.0 }).collect();
    let kernel: Vec<f64> = spec.eigenvalues.iter().map(|&l| if l > tau { 0.0 } else { 1.0 }).collect();
    Ok(LogExtended {
        finite_part: HermitianOperator::from_raw(spec.recompose_with(&logs)),
        kernel_projector: HermitianOperator::from_raw(spec.recompose_with(&kernel)),
    })
}

/// Outcome of a Löwner-order test `A ≤ B`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoewnerCertificate {
    pub holds: bool,
    /// `λ_min(B − A)`.
    pub min_eig: f64,
}

pub fn loewner_leq(a: &HermitianOperator, b: &HermitianOperator, tol: f64) -> Result<LoewnerCertificate> {
    same_dim(a, b)?;
    loewner_gap(&(b.matrix() - a.matrix()), tol)
}

/// Löwner certificate for a Hermitian gap matrix `B − A` given directly.
pub fn loewner_gap(gap: &CMatrix, tol: f64) -> Result<LoewnerCertificate> {
    let min_eig = min_eigenvalue(gap)?;
    Ok(LoewnerCertificate { holds: min_eig >= -tol, min_eig })
}

pub fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    let (vals, _) = jacobi_eigen(m)?;
    Ok(vals.first().copied().unwrap_or(0.0))
}

pub fn max_eigenvalue(m: &CMatrix) -> Result<f64> {
    let (vals, _) = jacobi_eigen(m)?;
    Ok(vals.last().copied().unwrap_or(0.0))
}

/// Largest singular value of an arbitrary matrix.
pub fn spectral_norm(m: &CMatrix) -> Result<f64> {
    Ok(max_eigenvalue(&(m.adjoint() * m))?.max(0.0).sqrt())
}

/// Projector onto the span of eigenvectors with eigenvalue above `tol`.
pub fn support_projector(a: &HermitianOperator, tol: f64) -> Result<HermitianOperator> {
    let spec = a.eig()?;
    psd_guard(&spec, tol)?;
    Ok(projector_above(&spec, tol))
}

pub(crate) fn projector_above(spec: &SpectralDecomposition, tol: f64) -> HermitianOperator {
    let w: Vec<f64> = spec.eigenvalues.iter().map(|&l| if l > tol { 1.0 } else { 0.0 }).collect();
    HermitianOperator::from_raw(spec.recompose_with(&w))
}

pub(crate) fn psd_guard(spec: &SpectralDecomposition, tol: f64) -> Result<()> {
    if spec.min_eigenvalue() < -tol.max(spec.support_threshold()) {
        return Err(Error::Order(format!(
            "operator is not positive semi-definite (λ_min = {:.3e})",
            spec.min_eigenvalue()
        )));
    }
    Ok(())
}

/// Principal square root of a PSD operator; eigenvalues are clamped at zero first.
pub fn psd_sqrt(a: &HermitianOperator) -> Result<HermitianOperator> {
    let spec = a.eig()?;
    psd_guard(&spec, spec.support_threshold())?;
    Ok(HermitianOperator::from_raw(spec.map_real(|l| l.max(0.0).sqrt())))
}

/// `A^p` for a strictly positive-definite `A`.
pub fn pd_power(a: &HermitianOperator, p: f64) -> Result<HermitianOperator> {
    let spec = a.eig()?;
    require_pd(&spec)?;
    Ok(HermitianOperator::from_raw(spec.map_real(|l| l.powf(p))))
}

pub(crate) fn require_pd(spec: &SpectralDecomposition) -> Result<()> {
    if spec.min_eigenvalue() <= spec.support_threshold() {
        return Err(Error::Singular(format!(
            "smallest eigenvalue {:.3e} is not above the kernel threshold {:.3e}",
            spec.min_eigenvalue(),
            spec.support_threshold()
        )));
    }
    Ok(())
}
