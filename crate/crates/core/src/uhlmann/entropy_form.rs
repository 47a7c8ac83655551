use serde::{Deserialize, Serialize};

use super::compatible::{build_compatible_pair, CompatiblePair, CompatibleSummary};
use super::forms::{form_from_operator_pair, pullback_form, OperatorBasis, PositiveForm, Side};
use crate::channels::{partial_trace_state, BipartiteDims};
use crate::entropy::Branch;
use crate::limits::{self, LimitEstimate};
use crate::linalg::matrix::{self, CMatrix, CVector};
use crate::linalg::{ExtendedReal, LoewnerCertificate};
use crate::petz::Superoperator;
use crate::states::DensityOperator;
use crate::tol::DEFAULT;
use crate::{Error, Result};

/// Increments of `−q(t)` contract by ~1/2 per halving of `t` when the limit is
/// finite and grow by ~2 when it diverges like `1/t`.
pub const QUOTIENT_RATIO_THRESHOLD: f64 = 1.0;
/// Increments below this (relative) size are treated as rounding noise.
pub const QUOTIENT_NOISE_FLOOR: f64 = 1e-6;

/// Strictly decreasing interpolation parameters in `(0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TSchedule(Vec<f64>);

impl TSchedule {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::Schedule("a t-schedule needs at least three points".into()));
        }
        if values.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
            return Err(Error::Schedule("t-schedule entries must lie in (0, 1]".into()));
        }
        if values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Schedule("t-schedule must be strictly decreasing".into()));
        }
        Ok(TSchedule(values))
    }

    /// `2^{-k}` for `k = k0..=k1`.
    pub fn dyadic(k0: i32, k1: i32) -> Result<Self> {
        Self::new((k0..=k1).map(|k| 2f64.powi(-k)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl Default for TSchedule {
    fn default() -> Self {
        TSchedule((3..=20).map(|k| 2f64.powi(-k)).collect())
    }
}

impl TryFrom<Vec<f64>> for TSchedule {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<TSchedule> for Vec<f64> {
    fn from(s: TSchedule) -> Self {
        s.0
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct QuotientPoint {
    pub t: f64,
    /// `Re[γ^t(A, B) − γ^0(A, B)] / t`.
    pub quotient: f64,
    pub running_inf: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyFormResult {
    pub value: ExtendedReal,
    pub branch: Branch,
    pub points: Vec<QuotientPoint>,
    /// Limit diagnostics of `−running_inf`.
    pub estimate: LimitEstimate,
    /// The quotient never increases as `t` decreases (up to rounding).
    pub monotone: bool,
}

impl EntropyFormResult {
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("t,quotient,running_inf\n");
        for p in &self.points {
            out.push_str(&format!("{:e},{:.17e},{:.17e}\n", p.t, p.quotient, p.running_inf));
        }
        out
    }
}

fn quotient_limit(pair: &CompatiblePair, v: &CVector, w: &CVector, schedule: &TSchedule) -> Result<EntropyFormResult> {
    let base = pair.interpolate_at(0.0, v, w)?.re;
    let ts = schedule.values();
    let mut points = Vec::with_capacity(ts.len());
    let mut inf = f64::INFINITY;
    let mut monotone = true;
    let mut prev: Option<f64> = None;
    for &t in ts {
        let q = (pair.interpolate_at(t, v, w)?.re - base) / t;
        if let Some(p) = prev {
            let noise = 1e3 * f64::EPSILON * (1.0 + base.abs()) / t;
            monotone &= q <= p + noise;
        }
        prev = Some(q);
        inf = inf.min(q);
        points.push(QuotientPoint { t, quotient: q, running_inf: inf });
    }
    let s: Vec<f64> = points.iter().map(|p| -p.running_inf).collect();
    let estimate = limits::estimate(ts, &s, QUOTIENT_RATIO_THRESHOLD, QUOTIENT_NOISE_FLOOR);
    let (value, branch) = if estimate.diverges {
        (ExtendedReal::PosInfinity, Branch::InfiniteSupportViolation)
    } else {
        (ExtendedReal::Finite(estimate.extrapolated), Branch::Finite)
    };
    Ok(EntropyFormResult { value, branch, points, estimate, monotone })
}

fn left_right_pair(rho: &DensityOperator, sigma: &DensityOperator) -> Result<(PositiveForm, PositiveForm, CompatiblePair)> {
    if rho.dim() != sigma.dim() {
        return Err(Error::dim("ρ and σ must act on the same space"));
    }
    let basis = OperatorBasis::matrix_units(rho.dim());
    let alpha = form_from_operator_pair(rho, Side::Left, &basis)?;
    let beta = form_from_operator_pair(sigma, Side::Right, &basis)?;
    let pair = build_compatible_pair(&alpha, &beta)?;
    Ok((alpha, beta, pair))
}

/// `S_{ρ‖σ}(A, B) = −liminf_{t→0+} [γ^t_{ρ_L→σ_R}(A, B) − ρ_L(A, B)] / t`.
///
/// With `A = B = I` this is `S(ρ‖σ)`.
pub fn entropy_form(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    probe_a: &CMatrix,
    probe_b: &CMatrix,
    schedule: &TSchedule,
) -> Result<EntropyFormResult> {
    let d = rho.dim();
    if probe_a.shape() != (d, d) || probe_b.shape() != (d, d) {
        return Err(Error::dim("probes must be operators on the state space"));
    }
    let (_, _, pair) = left_right_pair(rho, sigma)?;
    quotient_limit(&pair, &matrix::vectorize(probe_a), &matrix::vectorize(probe_b), schedule)
}

pub fn relative_entropy_form(rho: &DensityOperator, sigma: &DensityOperator) -> Result<EntropyFormResult> {
    let id = matrix::identity(rho.dim());
    entropy_form(rho, sigma, &id, &id, &TSchedule::default())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct UhlmannStep {
    pub t: f64,
    /// `γ^t_{ρ_L→σ_R}(I_ab, I_ab)`.
    pub gamma_full: f64,
    /// `γ^t_{ψ*ρ_L→ψ*σ_R}(I_a, I_a)`.
    pub gamma_pulled: f64,
    /// `γ^t_{Tr_b(ρ)_L→Tr_b(σ)_R}(I_a, I_a)`.
    pub gamma_reduced: f64,
    /// `λ_min(γ^t_{ψ*ρ_L→ψ*σ_R} − ψ*γ^t_{ρ_L→σ_R})` on the whole space.
    pub pullback_min_eig: f64,
    pub quotient_full: f64,
    pub quotient_reduced: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct UhlmannChainCertificate {
    pub regularized: bool,
    pub steps: Vec<UhlmannStep>,
    /// `ψ*ρ_L ≤ Tr_b(ρ)_L`.
    pub schwarz_rho: LoewnerCertificate,
    /// `ψ*σ_R ≤ Tr_b(σ)_R`.
    pub schwarz_sigma: LoewnerCertificate,
    /// `|ρ_L(I, I) − Tr_b(ρ)_L(I, I)|`.
    pub trace_identity_defect: f64,
    pub full_pair: CompatibleSummary,
    pub reduced_pair: CompatibleSummary,
    pub s_full: EntropyFormResult,
    pub s_reduced: EntropyFormResult,
    /// `S(ρ‖σ) − S(Tr_b ρ‖Tr_b σ)`, infinite when the full side diverges.
    pub final_gap: ExtendedReal,
    pub holds: bool,
}

/// Per-`t` certificate of `γ^t_full(I, I) ≤ γ^t_reduced(I, I)` via the pull-back along
/// `ψ = Tr_b†`, followed by the difference-quotient comparison. No invertibility is needed.
pub fn uhlmann_monotonicity(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    dims: BipartiteDims,
    schedule: &TSchedule,
) -> Result<UhlmannChainCertificate> {
    if rho.dim() != dims.d_ab() || sigma.dim() != dims.d_ab() {
        return Err(Error::dim(format!("states must act on ℂ^{}", dims.d_ab())));
    }
    let tol = DEFAULT.form_order;
    let (alpha, beta, full) = left_right_pair(rho, sigma)?;
    let rho_a = partial_trace_state(rho, dims)?;
    let sigma_a = partial_trace_state(sigma, dims)?;
    let (alpha_a, beta_a, reduced) = left_right_pair(&rho_a, &sigma_a)?;

    let psi = Superoperator::partial_trace_adjoint(dims).matrix().clone();
    let pulled_alpha = pullback_form(&psi, &alpha)?;
    let pulled_beta = pullback_form(&psi, &beta)?;
    let schwarz_rho = pulled_alpha.leq(&alpha_a, tol)?;
    let schwarz_sigma = pulled_beta.leq(&beta_a, tol)?;
    let pulled = build_compatible_pair(&pulled_alpha, &pulled_beta)?;

    let id_ab = matrix::vectorize(&matrix::identity(dims.d_ab()));
    let id_a = matrix::vectorize(&matrix::identity(dims.d_a));
    let trace_identity_defect = (alpha.quadratic(&id_ab) - alpha_a.quadratic(&id_a)).abs();

    let base_full = full.interpolate_at(0.0, &id_ab, &id_ab)?.re;
    let base_red = reduced.interpolate_at(0.0, &id_a, &id_a)?.re;
    let mut steps = Vec::with_capacity(schedule.values().len());
    for &t in schedule.values() {
        let gamma_full = full.interpolate_at(t, &id_ab, &id_ab)?.re;
        let gamma_pulled = pulled.interpolate_at(t, &id_a, &id_a)?.re;
        let gamma_reduced = reduced.interpolate_at(t, &id_a, &id_a)?.re;
        let lhs = pullback_form(&psi, &full.interpolate(t)?)?;
        let pullback_min_eig = lhs.leq(&pulled.interpolate(t)?, tol)?.min_eig;
        let quotient_full = (gamma_full - base_full) / t;
        let quotient_reduced = (gamma_reduced - base_red) / t;
        let holds = gamma_full <= gamma_pulled + tol
            && gamma_pulled <= gamma_reduced + tol
            && pullback_min_eig >= -tol
            && quotient_full <= quotient_reduced + (tol + trace_identity_defect) / t;
        steps.push(UhlmannStep {
            t,
            gamma_full,
            gamma_pulled,
            gamma_reduced,
            pullback_min_eig,
            quotient_full,
            quotient_reduced,
            holds,
        });
    }

    let s_full = quotient_limit(&full, &id_ab, &id_ab, schedule)?;
    let s_reduced = quotient_limit(&reduced, &id_a, &id_a, schedule)?;
    let (final_gap, final_ok) = match (s_full.value, s_reduced.value) {
        (ExtendedReal::PosInfinity, _) => (ExtendedReal::PosInfinity, true),
        (ExtendedReal::Finite(f), ExtendedReal::Finite(r)) => (ExtendedReal::Finite(f - r), f - r >= -DEFAULT.chain * (1.0 + f.abs())),
        _ => (ExtendedReal::NegInfinity, false),
    };
    let holds = steps.iter().all(|s| s.holds)
        && schwarz_rho.holds
        && schwarz_sigma.holds
        && trace_identity_defect <= DEFAULT.unit_trace
        && final_ok;
    Ok(UhlmannChainCertificate {
        regularized: false,
        steps,
        schwarz_rho,
        schwarz_sigma,
        trace_identity_defect,
        full_pair: full.summary(),
        reduced_pair: reduced.summary(),
        s_full,
        s_reduced,
        final_gap,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::relative_entropy_support;
    use crate::{rng, states};

    #[test]
    fn equal_states_give_zero() {
        let mut r = rng::stream(1, 0);
        let rho = states::random_density(&mut r, 3, 3).unwrap();
        let res = relative_entropy_form(&rho, &rho).unwrap();
        assert!(res.value.finite().unwrap().abs() < 1e-9);
    }

    #[test]
    fn commuting_pair_matches_scalar_formula() {
        let rho = DensityOperator::from_diag(&[0.5, 0.5]).unwrap();
        let sigma = DensityOperator::from_diag(&[0.75, 0.25]).unwrap();
        let res = relative_entropy_form(&rho, &sigma).unwrap();
        let expect = 0.5 * (0.5f64 / 0.75).ln() + 0.5 * (0.5f64 / 0.25).ln();
        assert!((res.value.finite().unwrap() - expect).abs() < 1e-9);
        assert!((expect - 0.143841).abs() < 1e-6);
        assert!(res.monotone);
        let csv = res.trace_csv();
        assert!(csv.starts_with("t,quotient,running_inf\n"));
        assert_eq!(csv.lines().count(), 19);
    }

    #[test]
    fn disjoint_supports_diverge() {
        let res = relative_entropy_form(&DensityOperator::basis(2, 0), &DensityOperator::basis(2, 1)).unwrap();
        assert_eq!(res.value, ExtendedReal::PosInfinity);
        assert_eq!(res.branch, Branch::InfiniteSupportViolation);
        assert!((res.estimate.increment_ratio - 2.0).abs() < 1e-6);
    }

    #[test]
    fn random_pairs_match_support_definition() {
        let mut r = rng::stream(2, 0);
        for d in [2, 3, 4] {
            let rho = states::random_density(&mut r, d, d).unwrap();
            let sigma = states::random_density(&mut r, d, d).unwrap();
            let form = relative_entropy_form(&rho, &sigma).unwrap().value.finite().unwrap();
            let supp = relative_entropy_support(&rho, &sigma).unwrap().finite().unwrap();
            assert!((form - supp).abs() < 1e-7, "d = {d}: {form} vs {supp}");
        }
    }

    #[test]
    fn nested_rank_deficient_pair_is_finite() {
        let mut r = rng::stream(3, 0);
        let (rho, sigma) = states::random_nested_pair(&mut r, 3, 1, 2).unwrap();
        let form = relative_entropy_form(&rho, &sigma).unwrap();
        let supp = relative_entropy_support(&rho, &sigma).unwrap().finite().unwrap();
        assert!((form.value.finite().unwrap() - supp).abs() < 1e-7);
    }

    #[test]
    fn schedule_validation() {
        assert!(TSchedule::new(vec![0.5, 0.25]).is_err());
        assert!(TSchedule::new(vec![0.5, 0.5, 0.25]).is_err());
        assert!(TSchedule::new(vec![2.0, 0.5, 0.25]).is_err());
        assert_eq!(TSchedule::default(), TSchedule::dyadic(3, 20).unwrap());
    }

    #[test]
    fn chain_for_equal_and_random_states() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        let mut r = rng::stream(4, 0);
        let rho = states::random_density(&mut r, 4, 4).unwrap();
        let eq = uhlmann_monotonicity(&rho, &rho, dims, &TSchedule::default()).unwrap();
        assert!(eq.holds);
        assert!(eq.final_gap.finite().unwrap().abs() < 1e-8);
        let sigma = states::random_density(&mut r, 4, 4).unwrap();
        let cert = uhlmann_monotonicity(&rho, &sigma, dims, &TSchedule::default()).unwrap();
        assert!(cert.holds, "{:?}", cert.steps.iter().find(|s| !s.holds));
        assert!(!cert.regularized);
        let supp = relative_entropy_support(&rho, &sigma).unwrap().finite().unwrap();
        assert!((cert.s_full.value.finite().unwrap() - supp).abs() < 1e-7);
    }

    #[test]
    fn chain_for_nested_and_disjoint_states() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        let mut r = rng::stream(5, 0);
        let (rho, sigma) = states::random_nested_pair(&mut r, 4, 1, 3).unwrap();
        let cert = uhlmann_monotonicity(&rho, &sigma, dims, &TSchedule::default()).unwrap();
        assert!(cert.holds);
        assert!(cert.s_full.value.is_finite());
        let disjoint = uhlmann_monotonicity(
            &DensityOperator::basis(4, 0),
            &DensityOperator::basis(4, 3),
            dims,
            &TSchedule::default(),
        )
        .unwrap();
        assert!(disjoint.holds);
        assert_eq!(disjoint.final_gap, ExtendedReal::PosInfinity);
    }
}
