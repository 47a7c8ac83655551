use rand::Rng;
use serde::Serialize;

use super::compatible::{build_compatible_pair, build_weighted_pair, check_t, interpolate, CompatiblePair};
use super::forms::{pullback_form, same_dim, PositiveForm};
use crate::linalg::eig::jacobi_eigen;
use crate::linalg::matrix::{self, c64, CMatrix, CVector};
use crate::linalg::{spectral_norm, HermitianOperator};
use crate::rng;
use crate::tol::DEFAULT;
use crate::{Error, Result};

/// `k / 2^n` for `k = 0..=2^n`.
pub fn dyadic_grid(n: u32) -> Vec<f64> {
    let m = 1u32 << n;
    (0..=m).map(|k| k as f64 / m as f64).collect()
}

fn psd_power(a: &CMatrix, p: f64) -> Result<CMatrix> {
    if p == 0.0 {
        return Ok(matrix::identity(a.nrows()));
    }
    let (vals, u) = jacobi_eigen(a)?;
    let tau = DEFAULT.support * (1.0 + vals.last().copied().unwrap_or(0.0).abs());
    let f: Vec<f64> = vals.iter().map(|&l| if l > tau { l.powf(p) } else { 0.0 }).collect();
    Ok(&u * matrix::from_real_diag(&f) * u.adjoint())
}

/// `γ^t_{ρ_L→σ_R}` from the superoperator `L_{ρ^{1−t}} R_{σ^t} = (σ^t)ᵀ ⊗ ρ^{1−t}`.
pub fn direct_interpolation(rho: &HermitianOperator, sigma: &HermitianOperator, t: f64) -> Result<PositiveForm> {
    check_t(t)?;
    if rho.dim() != sigma.dim() {
        return Err(Error::dim("ρ and σ must act on the same space"));
    }
    let left = psd_power(rho.matrix(), 1.0 - t)?;
    let right = psd_power(sigma.matrix(), t)?;
    Ok(PositiveForm::from_raw(matrix::kron(&right.transpose(), &left)))
}

/// Largest pairwise Frobenius distance between `γ^t` computed through
/// `rep_count` distinct compatible pairs (different weights and rotations).
pub fn check_representation_independence(
    alpha: &PositiveForm,
    beta: &PositiveForm,
    t: f64,
    rep_count: usize,
    seed: u64,
) -> Result<f64> {
    if rep_count < 2 {
        return Err(Error::InvalidArgument("at least two representations are needed".into()));
    }
    check_t(t)?;
    let mut r = rng::stream(seed, 0);
    let mut grams = Vec::with_capacity(rep_count);
    for k in 0..rep_count {
        let weight = if k == 0 { 1.0 } else { (r.random_range(-1.5..1.5f64)).exp() };
        let base = build_weighted_pair(alpha, beta, weight)?;
        let pair = if k == 0 { base } else { base.rotated(&rng::haar_unitary(&mut r, base.target_dim()))? };
        grams.push(pair.interpolate(t)?);
    }
    let mut worst: f64 = 0.0;
    for i in 0..grams.len() {
        for j in (i + 1)..grams.len() {
            worst = worst.max(grams[i].distance(&grams[j]));
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EqualityCertificate {
    pub defect: f64,
    pub holds: bool,
}

/// `γ^t_{γ^{t1}→γ^{t2}} = γ^{t1(1−t)+t2 t}`.
pub fn interpolation_of_interpolations(
    alpha: &PositiveForm,
    beta: &PositiveForm,
    t1: f64,
    t2: f64,
    t: f64,
) -> Result<EqualityCertificate> {
    let g1 = interpolate(alpha, beta, t1)?;
    let g2 = interpolate(alpha, beta, t2)?;
    let lhs = interpolate(&g1, &g2, t)?;
    let rhs = interpolate(alpha, beta, t1 * (1.0 - t) + t2 * t)?;
    let defect = lhs.distance(&rhs);
    Ok(EqualityCertificate { defect, holds: defect <= DEFAULT.composition })
}

/// `√(αβ) = γ^{1/2}_{α→β}`.
pub fn geometric_mean(alpha: &PositiveForm, beta: &PositiveForm) -> Result<PositiveForm> {
    interpolate(alpha, beta, 0.5)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DominationCertificate {
    pub probes: usize,
    /// Largest `(|r(v,w)|² − α(v,v) β(w,w)) / (‖G_α‖ ‖G_β‖ |v|² |w|²)`.
    pub worst_excess: f64,
    pub holds: bool,
}

fn random_vector(rng: &mut impl Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| rng::complex_gaussian(rng))
}

/// Probe `|r(v, w)|² ≤ α(v, v) β(w, w)` on random vector pairs.
pub fn check_domination(
    r: &PositiveForm,
    alpha: &PositiveForm,
    beta: &PositiveForm,
    probes: usize,
    rng: &mut impl Rng,
) -> Result<DominationCertificate> {
    same_dim(r, alpha)?;
    same_dim(r, beta)?;
    let n = r.dim();
    let scale = alpha.gram().norm() * beta.gram().norm();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..probes {
        let v = random_vector(rng, n);
        let w = random_vector(rng, n);
        let lhs = r.eval(&v, &w).norm_sqr();
        let rhs = alpha.quadratic(&v) * beta.quadratic(&w);
        let norm = scale * v.norm_squared() * w.norm_squared();
        let excess = if norm > 0.0 { (lhs - rhs) / norm } else { lhs - rhs };
        worst = worst.max(excess);
    }
    let holds = probes == 0 || worst <= DEFAULT.form_order;
    Ok(DominationCertificate { probes, worst_excess: if probes == 0 { 0.0 } else { worst }, holds })
}

/// Exact test of `|r(v,w)|² ≤ α(v,v) β(w,w)` for all `v, w`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExactDomination {
    /// `‖α^{+1/2} G_r β^{+1/2}‖` on the supports.
    pub norm: f64,
    /// `‖P_{ker α} G_r‖ + ‖G_r P_{ker β}‖`.
    pub kernel_leakage: f64,
}

impl ExactDomination {
    /// `norm ≤ 1 + tol` with kernel leakage at rounding level.
    pub fn dominated(&self, tol: f64) -> bool {
        self.norm <= 1.0 + tol && self.kernel_leakage <= DEFAULT.support
    }
}

fn pinv_sqrt_and_kernel(g: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let (vals, u) = jacobi_eigen(g)?;
    let tau = DEFAULT.support * (1.0 + vals.last().copied().unwrap_or(0.0).abs());
    let inv: Vec<f64> = vals.iter().map(|&l| if l > tau { 1.0 / l.sqrt() } else { 0.0 }).collect();
    let ker: Vec<f64> = vals.iter().map(|&l| if l > tau { 0.0 } else { 1.0 }).collect();
    Ok((&u * matrix::from_real_diag(&inv) * u.adjoint(), &u * matrix::from_real_diag(&ker) * u.adjoint()))
}

pub fn domination_norm(r: &PositiveForm, alpha: &PositiveForm, beta: &PositiveForm) -> Result<ExactDomination> {
    same_dim(r, alpha)?;
    same_dim(r, beta)?;
    let (ia, ka) = pinv_sqrt_and_kernel(alpha.gram())?;
    let (ib, kb) = pinv_sqrt_and_kernel(beta.gram())?;
    let norm = spectral_norm(&(&ia * r.gram() * &ib))?;
    let kernel_leakage = spectral_norm(&(&ka * r.gram()))? + spectral_norm(&(r.gram() * &kb))?;
    Ok(ExactDomination { norm, kernel_leakage })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MaximalityCertificate {
    pub candidates: usize,
    pub attempts: usize,
    /// `‖α^{+1/2} √(αβ) β^{+1/2}‖`, equal to one when the mean itself is extremal.
    pub mean_domination_norm: f64,
    /// Smallest `λ_min(√(αβ) − r)` over accepted candidates.
    pub worst_min_eig: f64,
    pub holds: bool,
}

/// Contraction `X^{1/2} C X^{1/2}` with random `0 ≤ C ≤ I`, so the result is `≤ X`.
pub fn random_contraction(rng: &mut impl Rng, g: &CMatrix) -> Result<CMatrix> {
    let n = g.nrows();
    let c = HermitianOperator::from_raw({
        let u = rng::haar_unitary(rng, n);
        let d: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        &u * matrix::from_real_diag(&d) * u.adjoint()
    });
    let s = psd_power(g, 0.5)?;
    Ok(&s * c.matrix() * &s)
}

fn random_candidate(
    rng: &mut impl Rng,
    kind: usize,
    mean: &PositiveForm,
    alpha: &PositiveForm,
    beta: &PositiveForm,
) -> Result<CMatrix> {
    let n = mean.dim();
    let c = rng.random_range(0.0..1.0f64).max(1e-3);
    Ok(match kind {
        0 => mean.gram() * c64(c, 0.0),
        1 => {
            let x = rng::ginibre(rng, n, n);
            let (_, support) = pinv_sqrt_and_kernel(mean.gram())?;
            let support = matrix::identity(n) - support;
            let p = &support * &x * x.adjoint() * &support;
            let delta = 10f64.powf(rng.random_range(-6.0..-1.0)) * mean.gram().norm() / p.norm();
            mean.gram() * c64(c, 0.0) + p * c64(delta, 0.0)
        }
        _ => {
            let a = PositiveForm::from_raw(random_contraction(rng, alpha.gram())?);
            let b = PositiveForm::from_raw(random_contraction(rng, beta.gram())?);
            geometric_mean(&a, &b)?.gram().clone()
        }
    })
}

/// Sample positive forms dominated by `α, β` and certify each lies below `√(αβ)`.
///
/// Candidates are scaled means, scaled means plus a random PSD perturbation,
/// and means of contracted forms; only exactly dominated PSD ones are kept.
pub fn check_geometric_mean_maximality(
    alpha: &PositiveForm,
    beta: &PositiveForm,
    candidate_count: usize,
    seed: u64,
) -> Result<MaximalityCertificate> {
    let mean = geometric_mean(alpha, beta)?;
    let mut r = rng::stream(seed, 1);
    let mean_norm = domination_norm(&mean, alpha, beta)?.norm;
    let mut accepted = 0;
    let mut attempts = 0;
    let mut worst = f64::INFINITY;
    let max_attempts = 50 * candidate_count.max(1);
    while accepted < candidate_count && attempts < max_attempts {
        let kind = attempts % 3;
        attempts += 1;
        let g = random_candidate(&mut r, kind, &mean, alpha, beta)?;
        let cand = PositiveForm::from_raw(g);
        let (vals, _) = jacobi_eigen(cand.gram())?;
        if vals.first().copied().unwrap_or(0.0) < -f64::EPSILON * (1.0 + cand.gram().norm()) {
            continue;
        }
        if !check_domination(&cand, alpha, beta, 32, &mut r)?.holds {
            continue;
        }
        if !domination_norm(&cand, alpha, beta)?.dominated(0.0) {
            continue;
        }
        accepted += 1;
        worst = worst.min(cand.leq(&mean, DEFAULT.form_order)?.min_eig);
    }
    if accepted < candidate_count {
        return Err(Error::Degenerate(format!("only {accepted} of {candidate_count} sampled candidates were dominated")));
    }
    let worst_min_eig = if accepted == 0 { 0.0 } else { worst };
    Ok(MaximalityCertificate {
        candidates: accepted,
        attempts,
        mean_domination_norm: mean_norm,
        worst_min_eig,
        holds: worst_min_eig >= -DEFAULT.form_order,
    })
}

/// `None` when `α + β = 0`, whose interpolations all vanish.
fn pair_or_zero(alpha: &PositiveForm, beta: &PositiveForm) -> Result<Option<CompatiblePair>> {
    match build_compatible_pair(alpha, beta) {
        Ok(p) => Ok(Some(p)),
        Err(Error::Degenerate(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn interpolate_or_zero(pair: &Option<CompatiblePair>, n: usize, t: f64) -> Result<PositiveForm> {
    match pair {
        Some(p) => p.interpolate(t),
        None => {
            check_t(t)?;
            Ok(PositiveForm::zero(n))
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GridPoint {
    pub t: f64,
    /// `λ_min(upper − lower)`.
    pub min_eig: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderCertificate {
    pub points: Vec<GridPoint>,
    pub holds: bool,
}

fn order_points(
    grid: &[f64],
    mut pair_at: impl FnMut(f64) -> Result<(PositiveForm, PositiveForm)>,
) -> Result<OrderCertificate> {
    let mut points = Vec::with_capacity(grid.len());
    for &t in grid {
        let (lower, upper) = pair_at(t)?;
        let cert = lower.leq(&upper, DEFAULT.form_order)?;
        points.push(GridPoint { t, min_eig: cert.min_eig, holds: cert.holds });
    }
    let holds = points.iter().all(|p| p.holds);
    Ok(OrderCertificate { points, holds })
}

/// `γ^t_{α'→β'} ≤ γ^t_{α→β}` on `t_grid`, given `α' ≤ α` and `β' ≤ β`.
pub fn check_interpolation_monotonicity(
    alpha_lo: &PositiveForm,
    alpha: &PositiveForm,
    beta_lo: &PositiveForm,
    beta: &PositiveForm,
    t_grid: &[f64],
) -> Result<OrderCertificate> {
    let ca = alpha_lo.leq(alpha, DEFAULT.form_order)?;
    let cb = beta_lo.leq(beta, DEFAULT.form_order)?;
    if !ca.holds || !cb.holds {
        return Err(Error::Precondition(format!(
            "forms are not ordered (λ_min(α−α') = {:.3e}, λ_min(β−β') = {:.3e})",
            ca.min_eig, cb.min_eig
        )));
    }
    let lo = pair_or_zero(alpha_lo, beta_lo)?;
    let hi = pair_or_zero(alpha, beta)?;
    let n = alpha.dim();
    order_points(t_grid, |t| Ok((interpolate_or_zero(&lo, n, t)?, interpolate_or_zero(&hi, n, t)?)))
}

/// `ψ*γ^t_{α→β} ≤ γ^t_{ψ*α→ψ*β}` on `t_grid`.
pub fn check_pullback_inequality(
    psi: &CMatrix,
    alpha: &PositiveForm,
    beta: &PositiveForm,
    t_grid: &[f64],
) -> Result<OrderCertificate> {
    let pa = pullback_form(psi, alpha)?;
    let pb = pullback_form(psi, beta)?;
    let outer = pair_or_zero(alpha, beta)?;
    let inner = pair_or_zero(&pa, &pb)?;
    order_points(t_grid, |t| {
        Ok((pullback_form(psi, &interpolate_or_zero(&outer, alpha.dim(), t)?)?, interpolate_or_zero(&inner, pa.dim(), t)?))
    })
}
