use serde::Serialize;

use crate::channels::{partial_trace_b, partial_trace_state, BipartiteDims};
use crate::entropy::{relative_entropy_psd, relative_entropy_support, Branch};
use crate::limits;
use crate::linalg::extended::ExtendedReal;
use crate::linalg::matrix::{self, CMatrix};
use crate::linalg::hermitian::spectral_function;
use crate::linalg::{loewner_gap, matrix_function, Domain, HermitianOperator};
use crate::petz::modular::{quadratic_form, ModularPair};
use crate::petz::vrho::{build_v_rho, compress};
use crate::states::{DensityOperator, EpsSchedule};
use crate::tol::DEFAULT;
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct Link {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// `λ_min` of the operator gap certifying the link, where one exists.
    pub operator_min_eig: Option<f64>,
    pub holds: bool,
}

/// One pass of the corrected chain on positive-definite operators.
#[derive(Clone, Debug, Serialize)]
pub struct PetzChainInstance {
    pub epsilon: f64,
    /// `−⟨T^{1/2}, log(Δ^a) T^{1/2}⟩`.
    pub s_reduced: f64,
    /// `−⟨T^{1/2}, log(V†ΔV) T^{1/2}⟩`.
    pub middle: f64,
    /// `−⟨V T^{1/2}, log(Δ) V T^{1/2}⟩`.
    pub s_full: f64,
    pub isometry_defect: f64,
    /// Rounding allowance added to the operator-link tolerances.
    pub rounding_floor: f64,
    pub log_rounding_floor: f64,
    pub links: Vec<Link>,
    pub holds: bool,
}

/// Multiple of `ε_mach·‖Δ‖` accepted as rounding in the operator links.
pub const ROUNDING_FACTOR: f64 = 4.0;

fn scaled(tol: f64, x: f64) -> f64 {
    tol * (1.0 + x.abs())
}

/// `S(Tr_b ρ‖Tr_b σ) ≤ ⟨·, −log(V†ΔV) ·⟩ ≤ ⟨·, −V† log(Δ) V ·⟩ = S(ρ‖σ)` with
/// the two inequalities certified at operator level (operator monotonicity of
/// `log` and the isometric Jensen inequality).
pub fn petz_chain_instance(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    dims: BipartiteDims,
    epsilon: f64,
) -> Result<PetzChainInstance> {
    let pair = ModularPair::new(rho, sigma, dims, epsilon)?;
    let v = build_v_rho(rho, dims)?;
    let delta_ab = pair.delta_ab.to_hermitian()?;
    let delta_a = pair.delta_a.to_hermitian()?;
    let full_spec = delta_ab.eig()?;
    let log_full = spectral_function(&full_spec, f64::ln, Domain::POSITIVE)?;
    let log_reduced = matrix_function(&delta_a, f64::ln, Domain::POSITIVE)?;
    let compressed = compress(&v, delta_ab.matrix());
    let comp_spec = compressed.eig()?;
    let log_compressed = spectral_function(&comp_spec, f64::ln, Domain::POSITIVE)?;
    let vm = v.op.matrix();
    let pulled_log: CMatrix = vm.adjoint() * log_full.matrix() * vm;

    let t_half = v.reduced_sqrt.matrix();
    let s_reduced = -quadratic_form(log_reduced.matrix(), t_half);
    let middle = -quadratic_form(log_compressed.matrix(), t_half);
    let s_full = -quadratic_form(log_full.matrix(), &v.op.apply(t_half)?);

    // Forming V†ΔV loses about ε_mach·‖Δ‖ absolutely; after the logarithm that
    // becomes relative to the smallest compressed eigenvalue.
    let floor = ROUNDING_FACTOR * f64::EPSILON * full_spec.max_eigenvalue();
    let log_floor = floor / comp_spec.min_eigenvalue().abs().max(f64::MIN_POSITIVE);
    let key = loewner_gap(
        &matrix::symmetrize(&(delta_a.matrix() - compressed.matrix())),
        DEFAULT.key_inequality + floor,
    )?;
    let mono = loewner_gap(
        &matrix::symmetrize(&(log_reduced.matrix() - log_compressed.matrix())),
        DEFAULT.key_inequality + log_floor,
    )?;
    let jensen = loewner_gap(
        &matrix::symmetrize(&(log_compressed.matrix() - &pulled_log)),
        DEFAULT.key_inequality + log_floor,
    )?;
    let scalar_floor = log_floor * v.reduced_sqrt.frobenius_norm().powi(2);
    let tol = DEFAULT.chain;
    let links = vec![
        Link {
            name: "key-inequality",
            lhs: 0.0,
            rhs: 0.0,
            operator_min_eig: Some(key.min_eig),
            holds: key.holds,
        },
        Link {
            name: "log-monotonicity",
            lhs: s_reduced,
            rhs: middle,
            operator_min_eig: Some(mono.min_eig),
            holds: mono.holds && s_reduced <= middle + scaled(tol, middle) + scalar_floor,
        },
        Link {
            name: "isometric-jensen",
            lhs: middle,
            rhs: s_full,
            operator_min_eig: Some(jensen.min_eig),
            holds: jensen.holds && middle <= s_full + scaled(tol, s_full) + scalar_floor,
        },
    ];
    let holds = links.iter().all(|l| l.holds) && v.isometry_defect <= DEFAULT.isometry;
    Ok(PetzChainInstance {
        epsilon,
        s_reduced,
        middle,
        s_full,
        isometry_defect: v.isometry_defect,
        rounding_floor: floor,
        log_rounding_floor: log_floor,
        links,
        holds,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EndpointCheck {
    pub name: &'static str,
    /// Support-based value of the endpoint.
    pub expected: ExtendedReal,
    /// Extrapolated chain value (exact single value for invertible inputs).
    pub observed: ExtendedReal,
    pub defect: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PetzChainCertificate {
    pub regularized: bool,
    pub schedule: Vec<f64>,
    pub instances: Vec<PetzChainInstance>,
    pub endpoints: Vec<EndpointCheck>,
    /// `S(ρ‖σ) − S(Tr_b ρ‖Tr_b σ)` on the finite branch.
    pub final_gap: Option<f64>,
    pub branch: Branch,
    pub holds: bool,
}

fn endpoint(name: &'static str, expected: ExtendedReal, params: &[f64], values: &[f64], tol: f64) -> EndpointCheck {
    let (observed, defect) = if params.is_empty() {
        let v = values[0];
        (ExtendedReal::Finite(v), expected.finite().map_or(f64::INFINITY, |e| (e - v).abs()))
    } else {
        let est = limits::estimate(params, values, crate::entropy::DIVERGENCE_RATIO, DEFAULT.divergence_floor);
        if est.diverges {
            let d = if expected.is_finite() { f64::INFINITY } else { 0.0 };
            (ExtendedReal::PosInfinity, d)
        } else {
            let d = expected.finite().map_or(f64::INFINITY, |e| (e - est.extrapolated).abs() / (1.0 + e.abs()));
            (ExtendedReal::Finite(est.extrapolated), d)
        }
    };
    EndpointCheck { name, expected, observed, defect, holds: defect <= tol }
}

/// Corrected Petz monotonicity for `Tr_b`. Invertible pairs are certified
/// directly; otherwise the chain runs on `(ρ + εI, σ + εI)` along `schedule`
/// and both endpoints are compared with their support-based limits.
pub fn corrected_monotonicity(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    dims: BipartiteDims,
    schedule: &EpsSchedule,
) -> Result<PetzChainCertificate> {
    if rho.dim() != dims.d_ab() || sigma.dim() != dims.d_ab() {
        return Err(Error::dim(format!("states must act on a {}-dimensional space", dims.d_ab())));
    }
    let full = relative_entropy_support(rho, sigma)?;
    let reduced = relative_entropy_support(&partial_trace_state(rho, dims)?, &partial_trace_state(sigma, dims)?)?;
    let invertible = rho.is_full_rank() && sigma.is_full_rank();
    let eps_list: Vec<f64> = if invertible { vec![0.0] } else { schedule.values().to_vec() };
    let instances = eps_list
        .iter()
        .map(|&e| {
            let (r, s) = if e == 0.0 {
                (rho.op().clone(), sigma.op().clone())
            } else {
                (rho.op().shifted(e), sigma.op().shifted(e))
            };
            petz_chain_instance(&r, &s, dims, e)
        })
        .collect::<Result<Vec<_>>>()?;

    let tol = if invertible { DEFAULT.modular_agreement } else { DEFAULT.limit_agreement };
    let params: &[f64] = if invertible { &[] } else { schedule.values() };
    let fulls: Vec<f64> = instances.iter().map(|i| i.s_full).collect();
    let reds: Vec<f64> = instances.iter().map(|i| i.s_reduced).collect();
    let mut endpoints = vec![endpoint("full", full.value, params, &fulls, tol)];
    // an infinite full side makes the reduced limit irrelevant to monotonicity
    if full.branch == Branch::Finite {
        endpoints.push(endpoint("reduced", reduced.value, params, &reds, tol));
    }
    let final_gap = match (full.finite(), reduced.finite()) {
        (Some(f), Some(r)) => Some(f - r),
        _ => None,
    };
    let gap_ok = match (full.branch, reduced.branch) {
        (Branch::Finite, Branch::Finite) => final_gap.unwrap() >= -DEFAULT.chain,
        (Branch::InfiniteSupportViolation, _) => true,
        (Branch::Finite, Branch::InfiniteSupportViolation) => false,
    };
    let holds = gap_ok && instances.iter().all(|i| i.holds) && endpoints.iter().all(|e| e.holds);
    Ok(PetzChainCertificate {
        regularized: !invertible,
        schedule: if invertible { vec![] } else { schedule.values().to_vec() },
        instances,
        endpoints,
        final_gap,
        branch: full.branch,
        holds,
    })
}

/// Chain endpoints for positive-definite operators of arbitrary trace, via the entropy module.
pub fn chain_endpoints_psd(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    dims: BipartiteDims,
) -> Result<(f64, f64)> {
    let full = relative_entropy_psd(rho, sigma)?;
    let red = relative_entropy_psd(&partial_trace_b(rho, dims)?, &partial_trace_b(sigma, dims)?)?;
    match (full.finite(), red.finite()) {
        (Some(f), Some(r)) => Ok((f, r)),
        _ => Err(Error::InfiniteBranch("positive-definite inputs have finite relative entropy".into())),
    }
}
