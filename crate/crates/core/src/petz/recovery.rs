use serde::Serialize;

use crate::channels::{partial_trace_b, BipartiteDims, QuantumChannel};
use crate::entropy::relative_entropy_support;
use crate::linalg::hermitian::require_pd;
use crate::linalg::matrix::CMatrix;
use crate::linalg::{pd_power, psd_sqrt, HermitianOperator};
use crate::petz::vrho::build_v_rho;
use crate::petz::Superoperator;
use crate::states::DensityOperator;
use crate::tol::DEFAULT;
use crate::{Error, Result};

/// `X ↦ σ^{1/2} 𝒞†(𝒞(σ)^{-1/2} X 𝒞(σ)^{-1/2}) σ^{1/2}`.
#[derive(Clone, Debug)]
pub struct PetzRecovery {
    channel: QuantumChannel,
    sigma_half: CMatrix,
    out_inv_half: CMatrix,
}

impl PetzRecovery {
    pub fn new(sigma: &DensityOperator, channel: &QuantumChannel) -> Result<Self> {
        if sigma.dim() != channel.d_in() {
            return Err(Error::dim("σ must live on the channel input space"));
        }
        require_pd(sigma.spectrum()).map_err(|e| Error::Singular(format!("σ must be full rank ({e})")))?;
        let out = channel.apply_hermitian(sigma.op())?;
        let out_inv_half = pd_power(&out, -0.5).map_err(|e| Error::Singular(format!("𝒞(σ) must be full rank ({e})")))?;
        Ok(PetzRecovery {
            channel: channel.clone(),
            sigma_half: sigma.sqrt().into_matrix(),
            out_inv_half: out_inv_half.into_matrix(),
        })
    }

    pub fn apply_matrix(&self, x: &CMatrix) -> Result<CMatrix> {
        let inner = &self.out_inv_half * x * &self.out_inv_half;
        Ok(&self.sigma_half * self.channel.adjoint_apply(&inner)? * &self.sigma_half)
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        DensityOperator::new(HermitianOperator::from_raw(self.apply_matrix(rho.matrix())?))
    }

    pub fn superoperator(&self) -> Superoperator {
        Superoperator::from_map(self.channel.d_out(), self.channel.d_in(), |x| {
            self.apply_matrix(x).expect("shape fixed")
        })
    }
}

pub fn petz_recovery(sigma: &DensityOperator, channel: &QuantumChannel, rho: &DensityOperator) -> Result<DensityOperator> {
    PetzRecovery::new(sigma, channel)?.apply(rho)
}

/// `‖𝒫_{σ,𝒞}(𝒞(σ)) − σ‖_F`.
pub fn recovery_identity_defect(sigma: &DensityOperator, channel: &QuantumChannel) -> Result<f64> {
    let map = PetzRecovery::new(sigma, channel)?;
    let out = channel.apply_matrix(sigma.matrix())?;
    Ok((map.apply_matrix(&out)? - sigma.matrix()).norm())
}

/// `‖V_σ − L_{σ^{-1/2}} ∘ 𝒫_{σ,Tr_b} ∘ L^a_{Tr_b(σ)^{1/2}}‖_F` over the matrix-unit basis.
pub fn factorization_defect(sigma: &DensityOperator, dims: BipartiteDims) -> Result<f64> {
    let v = build_v_rho(sigma.op(), dims)?;
    let petz = PetzRecovery::new(sigma, &QuantumChannel::partial_trace(dims))?.superoperator();
    let left_inv = Superoperator::left(pd_power(sigma.op(), -0.5)?.matrix());
    let reduced_half = psd_sqrt(&partial_trace_b(sigma.op(), dims)?)?;
    let left_a = Superoperator::left(reduced_half.matrix());
    let rebuilt = left_inv.compose(&petz)?.compose(&left_a)?;
    Ok((v.op.matrix() - rebuilt.matrix()).norm())
}

/// Root fidelity `F(ρ, τ) = Tr √(√ρ τ √ρ)`.
pub fn fidelity(rho: &DensityOperator, tau: &DensityOperator) -> Result<f64> {
    fidelity_psd(rho.op(), tau.op())
}

pub fn fidelity_psd(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::dim("fidelity arguments must have equal dimension"));
    }
    let ra = psd_sqrt(a)?;
    let inner = HermitianOperator::from_raw(ra.matrix() * b.matrix() * ra.matrix());
    let spec = inner.eig()?;
    Ok(spec.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).sum())
}

#[derive(Clone, Debug, Serialize)]
pub struct FawziRennerCertificate {
    /// `S(ρ‖σ) − S(𝒞ρ‖𝒞σ)`.
    pub entropy_loss: f64,
    /// `F(ρ, 𝒫(𝒞(ρ)))`.
    pub fidelity: f64,
    /// `−2 log F`.
    pub bound: f64,
    /// `entropy_loss − bound`.
    pub slack: f64,
    pub fidelity_symmetry_defect: f64,
    pub holds: bool,
}

pub fn fawzi_renner_check(rho: &DensityOperator, sigma: &DensityOperator, channel: &QuantumChannel) -> Result<FawziRennerCertificate> {
    let before = relative_entropy_support(rho, sigma)?;
    let after = relative_entropy_support(&channel.apply(rho)?, &channel.apply(sigma)?)?;
    let (s0, s1) = match (before.finite(), after.finite()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::InfiniteBranch("the bound needs finite relative entropies".into())),
    };
    let map = PetzRecovery::new(sigma, channel)?;
    let recovered = HermitianOperator::from_raw(map.apply_matrix(&channel.apply_matrix(rho.matrix())?)?);
    let f = fidelity_psd(rho.op(), &recovered)?;
    let f_rev = fidelity_psd(&recovered, rho.op())?;
    let bound = -2.0 * f.ln();
    let entropy_loss = s0 - s1;
    let slack = entropy_loss - bound;
    Ok(FawziRennerCertificate {
        entropy_loss,
        fidelity: f,
        bound,
        slack,
        fidelity_symmetry_defect: (f - f_rev).abs(),
        holds: slack >= -DEFAULT.fawzi_renner,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::states::random_density;

    #[test]
    fn reference_state_is_recovered() {
        let mut g = rng::stream(1, 0);
        let sigma = random_density(&mut g, 3, 3).unwrap();
        let ch = QuantumChannel::random(&mut g, 3, 2, 2).unwrap();
        assert!(recovery_identity_defect(&sigma, &ch).unwrap() < 1e-9);
        let out = ch.apply(&sigma).unwrap();
        let back = petz_recovery(&sigma, &ch, &out).unwrap();
        assert!((back.matrix() - sigma.matrix()).norm() < 1e-9);
    }

    #[test]
    fn unitary_channel_is_inverted() {
        let mut g = rng::stream(2, 0);
        let sigma = random_density(&mut g, 3, 3).unwrap();
        let rho = random_density(&mut g, 3, 2).unwrap();
        let u = rng::haar_unitary(&mut g, 3);
        let ch = QuantumChannel::unitary(&u).unwrap();
        let back = petz_recovery(&sigma, &ch, &ch.apply(&rho).unwrap()).unwrap();
        assert!((back.matrix() - rho.matrix()).norm() < 1e-10);
    }

    #[test]
    fn partial_trace_factorization() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        let sigma = random_density(&mut rng::stream(3, 0), 4, 4).unwrap();
        assert!(factorization_defect(&sigma, dims).unwrap() < 1e-9);
    }

    #[test]
    fn fidelity_properties() {
        let mut g = rng::stream(4, 0);
        let rho = random_density(&mut g, 2, 2).unwrap();
        let tau = random_density(&mut g, 2, 2).unwrap();
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-12);
        let f = fidelity(&rho, &tau).unwrap();
        assert!(f > 0.0 && f <= 1.0 + 1e-12);
        assert!((f - fidelity(&tau, &rho).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn fawzi_renner_examples() {
        let mut g = rng::stream(5, 0);
        let rho = random_density(&mut g, 2, 2).unwrap();
        let sigma = random_density(&mut g, 2, 2).unwrap();
        let c = fawzi_renner_check(&rho, &sigma, &QuantumChannel::identity(2)).unwrap();
        assert!(c.entropy_loss.abs() < 1e-12 && c.bound.abs() < 1e-9 && c.holds);
        let ch = QuantumChannel::random(&mut g, 2, 2, 2).unwrap();
        let c = fawzi_renner_check(&sigma, &sigma, &ch).unwrap();
        assert!(c.entropy_loss.abs() < 1e-12 && c.bound <= 1e-9);
    }
}
