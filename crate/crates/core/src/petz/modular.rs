use crate::channels::{partial_trace_b, BipartiteDims};
use crate::linalg::hermitian::require_pd;
use crate::linalg::matrix::{self, CMatrix};
use crate::linalg::{matrix_function, Domain, ExtendedReal, HermitianOperator};
use crate::petz::Superoperator;
use crate::{Error, Result};

/// `L_σ`, `R_ρ` and `Δ_{ρ,σ} = L_σ R_ρ^{-1}`, so `Δ(X) = σ X ρ^{-1}`.
#[derive(Clone, Debug)]
pub struct ModularOperators {
    pub left_sigma: Superoperator,
    pub right_rho: Superoperator,
    pub delta: Superoperator,
    /// `‖[L_σ, R_ρ]‖_F`.
    pub commutator_defect: f64,
}

pub(crate) fn pd_inverse(a: &HermitianOperator) -> Result<CMatrix> {
    let spec = a.eig()?;
    require_pd(&spec)?;
    Ok(spec.map_real(|l| 1.0 / l))
}

pub fn build_left_right(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<ModularOperators> {
    if rho.dim() != sigma.dim() {
        return Err(Error::dim("ρ and σ must have the same dimension"));
    }
    let rho_inv = pd_inverse(rho)
        .map_err(|e| Error::Singular(format!("ρ must be invertible; regularize first ({e})")))?;
    let left_sigma = Superoperator::left(sigma.matrix());
    let right_rho = Superoperator::right(rho.matrix());
    let delta = left_sigma.compose(&Superoperator::right(&rho_inv))?;
    let commutator_defect =
        matrix::commutator(left_sigma.matrix(), right_rho.matrix()).norm();
    Ok(ModularOperators { left_sigma, right_rho, delta, commutator_defect })
}

/// `log Δ` from the eigendecomposition of the superoperator matrix.
pub fn log_delta(ops: &ModularOperators) -> Result<HermitianOperator> {
    matrix_function(&ops.delta.to_hermitian()?, f64::ln, Domain::POSITIVE)
}

/// `‖log Δ − (I ⊗ log σ − (log ρ)ᵀ ⊗ I)‖_F`.
pub fn log_split_defect(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<f64> {
    let ops = build_left_right(rho, sigma)?;
    let direct = log_delta(&ops)?;
    let log_rho = matrix_function(rho, f64::ln, Domain::POSITIVE)?;
    let log_sigma = matrix_function(sigma, f64::ln, Domain::POSITIVE)?;
    let split = Superoperator::left(log_sigma.matrix()).matrix() - Superoperator::right(log_rho.matrix()).matrix();
    Ok((direct.matrix() - split).norm())
}

/// `⟨v, M v⟩` for a vectorized operator `v`.
pub(crate) fn quadratic_form(m: &CMatrix, x: &CMatrix) -> f64 {
    let v = matrix::vectorize(x);
    v.dotc(&(m * &v)).re
}

/// `−⟨ρ^{1/2}, log(Δ_{ρ,σ}) ρ^{1/2}⟩` for positive-definite `ρ`, `σ` of any trace.
pub fn entropy_via_modular(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<f64> {
    let ops = build_left_right(rho, sigma)?;
    require_pd(&sigma.eig()?).map_err(|e| Error::Singular(format!("σ must be invertible ({e})")))?;
    let log_d = log_delta(&ops)?;
    let sqrt_rho = crate::linalg::psd_sqrt(rho)?;
    Ok(-quadratic_form(log_d.matrix(), sqrt_rho.matrix()))
}

/// Modular route for singular states: `entropy_via_modular(ρ + εI, σ + εI)` along
/// `schedule`, extrapolated to `ε → 0` or `+∞` when the sequence diverges.
pub fn entropy_via_modular_regularized(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    schedule: &crate::states::EpsSchedule,
) -> Result<ExtendedReal> {
    let values = schedule
        .values()
        .iter()
        .map(|&e| entropy_via_modular(&rho.shifted(e), &sigma.shifted(e)))
        .collect::<Result<Vec<_>>>()?;
    let est = crate::limits::estimate(
        schedule.values(),
        &values,
        crate::entropy::DIVERGENCE_RATIO,
        crate::tol::DEFAULT.divergence_floor,
    );
    Ok(if est.diverges { ExtendedReal::PosInfinity } else { ExtendedReal::Finite(est.extrapolated) })
}

/// `Δ_{ρ,σ}` on `𝓑(𝓗_ab)` together with `Δ^a = L_{Tr_b σ} R_{Tr_b ρ}^{-1}` on `𝓑(𝓗_a)`.
#[derive(Clone, Debug)]
pub struct ModularPair {
    pub delta_ab: Superoperator,
    pub delta_a: Superoperator,
    pub regularization_eps: f64,
}

impl ModularPair {
    pub fn new(rho: &HermitianOperator, sigma: &HermitianOperator, dims: BipartiteDims, eps: f64) -> Result<Self> {
        let full = build_left_right(rho, sigma)?;
        let reduced = build_left_right(&partial_trace_b(rho, dims)?, &partial_trace_b(sigma, dims)?)?;
        Ok(ModularPair { delta_ab: full.delta, delta_a: reduced.delta, regularization_eps: eps })
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.delta_ab.hermiticity_defect().max(self.delta_a.hermiticity_defect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::relative_entropy_support;
    use crate::linalg::psd_sqrt;
    use crate::rng;
    use crate::states::{random_density, DensityOperator};

    #[test]
    fn maximally_mixed_gives_identity() {
        let m = DensityOperator::maximally_mixed(3);
        let ops = build_left_right(m.op(), m.op()).unwrap();
        assert!((ops.delta.matrix() - matrix::identity(9)).norm() < 1e-14);
    }

    #[test]
    fn diagonal_pair_gives_ratio_diagonal() {
        let rho = HermitianOperator::diag(&[0.3, 0.7]);
        let sigma = HermitianOperator::diag(&[0.6, 0.4]);
        let ops = build_left_right(&rho, &sigma).unwrap();
        // Δ(E_kj) = σ_k/ρ_j E_kj at vec index k + 2j
        for j in 0..2 {
            for k in 0..2 {
                let r = [0.6, 0.4][k] / [0.3, 0.7][j];
                assert!((ops.delta.matrix()[(k + 2 * j, k + 2 * j)].re - r).abs() < 1e-14);
            }
        }
        assert!((ops.delta.matrix() - matrix::from_real_diag(&[2.0, 4.0 / 3.0, 6.0 / 7.0, 4.0 / 7.0])).norm() < 1e-14);
    }

    #[test]
    fn log_delta_on_sqrt_rho() {
        let mut g = rng::stream(3, 0);
        let rho = random_density(&mut g, 3, 3).unwrap();
        let sigma = random_density(&mut g, 3, 3).unwrap();
        let ops = build_left_right(rho.op(), sigma.op()).unwrap();
        assert!(ops.commutator_defect < 1e-12);
        let ld = log_delta(&ops).unwrap();
        let s = psd_sqrt(rho.op()).unwrap();
        let lhs = matrix::unvectorize(&(ld.matrix() * matrix::vectorize(s.matrix())), 3, 3);
        let lr = matrix_function(rho.op(), f64::ln, Domain::POSITIVE).unwrap();
        let ls = matrix_function(sigma.op(), f64::ln, Domain::POSITIVE).unwrap();
        let rhs = ls.matrix() * s.matrix() - s.matrix() * lr.matrix();
        assert!((lhs - rhs).norm() < 1e-10);
        assert!(log_split_defect(rho.op(), sigma.op()).unwrap() < 1e-9);
    }

    #[test]
    fn modular_entropy_examples() {
        let mut g = rng::stream(4, 0);
        let rho = random_density(&mut g, 2, 2).unwrap();
        assert!(entropy_via_modular(rho.op(), rho.op()).unwrap().abs() < 1e-12);
        let a = HermitianOperator::diag(&[0.5, 0.5]);
        let b = HermitianOperator::diag(&[0.75, 0.25]);
        let oracle = 0.5 * (0.5f64 / 0.75).ln() + 0.5 * (0.5f64 / 0.25).ln();
        assert!((entropy_via_modular(&a, &b).unwrap() - oracle).abs() < 1e-13);
        let sigma = random_density(&mut g, 2, 2).unwrap();
        let direct = relative_entropy_support(&rho, &sigma).unwrap().finite().unwrap();
        assert!((entropy_via_modular(rho.op(), sigma.op()).unwrap() - direct).abs() < 1e-8);
    }

    #[test]
    fn singular_rho_is_rejected() {
        let p = HermitianOperator::diag(&[1.0, 0.0]);
        assert!(matches!(build_left_right(&p, &HermitianOperator::identity(2)), Err(Error::Singular(_))));
    }
}
