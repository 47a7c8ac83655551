use serde::Serialize;

use crate::channels::{partial_trace_b_matrix, stinespring_dilate, QuantumChannel};
use crate::limits::{self, LimitEstimate};
use crate::linalg::extended::ExtendedReal;
use crate::linalg::hermitian::projector_above;
use crate::linalg::matrix::{self, CMatrix};
use crate::linalg::unitary::unitarity_defect;
use crate::linalg::{spectral_norm, HermitianOperator, SpectralDecomposition};
use crate::states::{DensityOperator, EpsSchedule, RegularizedState};
use crate::tol::DEFAULT;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Finite,
    InfiniteSupportViolation,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RelEntropyResult {
    pub value: ExtendedReal,
    pub branch: Branch,
    /// `‖(I − P_σ) P_ρ‖_2`.
    pub support_overlap: f64,
}

impl RelEntropyResult {
    pub fn finite(&self) -> Option<f64> {
        self.value.finite()
    }
}

/// Relative entropy of PSD operators of any trace from their spectra:
/// `Σ_j λ_j log λ_j − Σ_{j,k} λ_j log μ_k |⟨x_j, y_k⟩|²` over positive eigenvalues,
/// or `+∞` when the support of the first is not inside that of the second.
pub fn relative_entropy_spectral(
    a: &SpectralDecomposition,
    tau_a: f64,
    b: &SpectralDecomposition,
    tau_b: f64,
) -> Result<RelEntropyResult> {
    if a.dim() != b.dim() {
        return Err(Error::dim(format!("operator dimensions {} and {} differ", a.dim(), b.dim())));
    }
    let n = a.dim();
    let p_a = projector_above(a, tau_a);
    let p_b = projector_above(b, tau_b);
    let support_overlap = spectral_norm(&((matrix::identity(n) - p_b.matrix()) * p_a.matrix()))?;
    if support_overlap > DEFAULT.support_overlap {
        return Ok(RelEntropyResult {
            value: ExtendedReal::PosInfinity,
            branch: Branch::InfiniteSupportViolation,
            support_overlap,
        });
    }
    let overlaps = a.eigenvectors.adjoint() * &b.eigenvectors;
    let mut s = 0.0;
    for (j, &l) in a.eigenvalues.iter().enumerate() {
        if l <= tau_a {
            continue;
        }
        let mut cross = 0.0;
        for (k, &m) in b.eigenvalues.iter().enumerate() {
            if m > tau_b {
                cross += m.ln() * overlaps[(j, k)].norm_sqr();
            }
        }
        s += l * (l.ln() - cross);
    }
    Ok(RelEntropyResult { value: ExtendedReal::Finite(s), branch: Branch::Finite, support_overlap })
}

pub fn relative_entropy_psd(a: &HermitianOperator, b: &HermitianOperator) -> Result<RelEntropyResult> {
    let sa = a.eig()?;
    let sb = b.eig()?;
    relative_entropy_spectral(&sa, sa.support_threshold(), &sb, sb.support_threshold())
}

pub fn relative_entropy_support(rho: &DensityOperator, sigma: &DensityOperator) -> Result<RelEntropyResult> {
    relative_entropy_spectral(rho.spectrum(), rho.support_threshold(), sigma.spectrum(), sigma.support_threshold())
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularizedRelEntropy {
    pub epsilons: Vec<f64>,
    /// `Tr(ρ_ε log ρ_ε − ρ_ε log σ_ε)` per schedule entry.
    pub values: Vec<f64>,
    pub estimate: LimitEstimate,
    /// Extrapolated limit, or `+∞` when the sequence diverges.
    pub value: ExtendedReal,
    pub branch: Branch,
}

impl RegularizedRelEntropy {
    /// The term at the smallest regularization.
    pub fn last_term(&self) -> f64 {
        *self.values.last().expect("non-empty")
    }
}

/// Increment ratio above which an upward-moving sequence is called divergent.
/// Convergent sequences along a decade schedule contract by about a factor of 10.
pub const DIVERGENCE_RATIO: f64 = 0.5;

pub fn regularized_term(rho: &RegularizedState, sigma: &RegularizedState) -> f64 {
    let a = rho.spectrum();
    let b = sigma.spectrum();
    let overlaps = a.eigenvectors.adjoint() * &b.eigenvectors;
    let mut s = 0.0;
    for (j, &l) in a.eigenvalues.iter().enumerate() {
        let mut cross = 0.0;
        for (k, &m) in b.eigenvalues.iter().enumerate() {
            cross += m.ln() * overlaps[(j, k)].norm_sqr();
        }
        s += l * (l.ln() - cross);
    }
    s
}

pub fn relative_entropy_regularized(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    schedule: &EpsSchedule,
) -> Result<RegularizedRelEntropy> {
    if rho.dim() != sigma.dim() {
        return Err(Error::dim(format!("state dimensions {} and {} differ", rho.dim(), sigma.dim())));
    }
    let values: Vec<f64> = schedule
        .values()
        .iter()
        .map(|&e| {
            let r = RegularizedState::new(rho.clone(), e)?;
            let s = RegularizedState::new(sigma.clone(), e)?;
            Ok(regularized_term(&r, &s))
        })
        .collect::<Result<_>>()?;
    let estimate = limits::estimate(schedule.values(), &values, DIVERGENCE_RATIO, DEFAULT.divergence_floor);
    let (value, branch) = if estimate.diverges {
        (ExtendedReal::PosInfinity, Branch::InfiniteSupportViolation)
    } else {
        (ExtendedReal::Finite(estimate.extrapolated), Branch::Finite)
    };
    Ok(RegularizedRelEntropy { epsilons: schedule.values().to_vec(), values, estimate, value, branch })
}

/// `|a − b|` on finite branches, `0` when both are infinite, `∞` on branch mismatch.
pub fn branch_defect(a: &RelEntropyResult, b: &RelEntropyResult) -> f64 {
    match (a.finite(), b.finite()) {
        (Some(x), Some(y)) => (x - y).abs(),
        (None, None) => 0.0,
        _ => f64::INFINITY,
    }
}

pub fn check_unitary_invariance(rho: &DensityOperator, sigma: &DensityOperator, u: &CMatrix) -> Result<f64> {
    if !u.is_square() || u.nrows() != rho.dim() {
        return Err(Error::dim("unitary dimension must match the states"));
    }
    let defect = unitarity_defect(u);
    if defect > DEFAULT.orthonormality {
        return Err(Error::InvalidArgument(format!("U is not unitary (defect {defect:.3e})")));
    }
    let before = relative_entropy_support(rho, sigma)?;
    let after = relative_entropy_support(&rho.conjugate(u)?, &sigma.conjugate(u)?)?;
    Ok(branch_defect(&before, &after))
}

pub fn check_additivity(
    rho1: &DensityOperator,
    sigma1: &DensityOperator,
    rho2: &DensityOperator,
    sigma2: &DensityOperator,
) -> Result<f64> {
    if rho1.dim() * rho2.dim() > 16 {
        return Err(Error::dim("additivity check is limited to product dimension 16"));
    }
    let joint = relative_entropy_support(&rho1.kron(rho2), &sigma1.kron(sigma2))?;
    let s1 = relative_entropy_support(rho1, sigma1)?;
    let s2 = relative_entropy_support(rho2, sigma2)?;
    let sum = s1.value.checked_add(s2.value).expect("relative entropies are never -inf");
    let split = RelEntropyResult {
        value: sum,
        branch: if sum.is_finite() { Branch::Finite } else { Branch::InfiniteSupportViolation },
        support_overlap: s1.support_overlap.max(s2.support_overlap),
    };
    Ok(branch_defect(&joint, &split))
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainStep {
    pub name: &'static str,
    pub defect: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DpiCertificate {
    /// `S(𝒞(ρ)‖𝒞(σ))`.
    pub lhs: ExtendedReal,
    /// `S(ρ‖σ)`.
    pub rhs: ExtendedReal,
    /// `rhs − lhs` when both are finite.
    pub gap: Option<f64>,
    pub holds: bool,
    pub steps: Vec<ChainStep>,
}

fn entropy_of_matrices(a: &CMatrix, b: &CMatrix) -> Result<RelEntropyResult> {
    relative_entropy_psd(&HermitianOperator::from_raw(a.clone()), &HermitianOperator::from_raw(b.clone()))
}

/// Data processing through the dilation chain
/// `S(𝒞ρ‖𝒞σ) = S(Tr_E U(ρ⊗τ)U† ‖ ·) ≤ S(U(ρ⊗τ)U† ‖ ·) = S(ρ⊗τ‖σ⊗τ) = S(ρ‖σ)`.
pub fn dpi_via_stinespring(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    ch: &QuantumChannel,
) -> Result<DpiCertificate> {
    let tol = DEFAULT.dpi;
    let dil = stinespring_dilate(ch)?;
    let tau = &dil.env_state;
    let u = &dil.unitary;

    let lhs = relative_entropy_support(&ch.apply(rho)?, &ch.apply(sigma)?)?;
    let rhs = relative_entropy_support(rho, sigma)?;

    let rho_env = matrix::kron(rho.matrix(), tau.matrix());
    let sigma_env = matrix::kron(sigma.matrix(), tau.matrix());
    let rho_u = u * &rho_env * u.adjoint();
    let sigma_u = u * &sigma_env * u.adjoint();
    let reduced = entropy_of_matrices(
        &partial_trace_b_matrix(&rho_u, dil.dims())?,
        &partial_trace_b_matrix(&sigma_u, dil.dims())?,
    )?;
    let rotated = entropy_of_matrices(&rho_u, &sigma_u)?;
    let extended = entropy_of_matrices(&rho_env, &sigma_env)?;

    let mono = match (reduced.finite(), rotated.finite()) {
        (Some(a), Some(b)) => (a - b).max(0.0),
        (_, None) => 0.0,
        (None, Some(_)) => f64::INFINITY,
    };
    let step = |name, defect: f64| ChainStep { name, defect, holds: defect <= tol };
    let steps = vec![
        step("dilation", branch_defect(&lhs, &reduced)),
        step("partial-trace-monotonicity", mono),
        step("unitary-invariance", branch_defect(&rotated, &extended)),
        step("additivity", branch_defect(&extended, &rhs)),
    ];
    let (gap, holds) = match (lhs.finite(), rhs.finite()) {
        (Some(l), Some(r)) => (Some(r - l), l <= r + tol),
        (_, None) => (None, true),
        (None, Some(_)) => (None, false),
    };
    Ok(DpiCertificate { lhs: lhs.value, rhs: rhs.value, gap, holds, steps })
}
