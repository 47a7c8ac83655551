use serde::Serialize;

use crate::channels::{partial_trace_b, BipartiteDims};
use crate::linalg::hermitian::require_pd;
use crate::linalg::matrix::{self, CMatrix};
use crate::linalg::{max_eigenvalue, pd_power, psd_sqrt, HermitianOperator};
use crate::petz::Superoperator;
use crate::{Error, Result};

/// `V_ρ(X) = (X Tr_b(ρ)^{-1/2} ⊗ I_b) ρ^{1/2}`, a map `𝓑(𝓗_a) → 𝓑(𝓗_ab)`.
#[derive(Clone, Debug)]
pub struct VRho {
    pub op: Superoperator,
    pub dims: BipartiteDims,
    /// `‖V†V − I‖_F`.
    pub isometry_defect: f64,
    /// `‖V(Tr_b(ρ)^{1/2}) − ρ^{1/2}‖_F`.
    pub bridge_defect: f64,
    /// Largest singular value.
    pub norm: f64,
    pub reduced_sqrt: HermitianOperator,
    pub sqrt: HermitianOperator,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct VRhoSummary {
    pub isometry_defect: f64,
    pub bridge_defect: f64,
    pub norm: f64,
}

impl VRho {
    pub fn summary(&self) -> VRhoSummary {
        VRhoSummary { isometry_defect: self.isometry_defect, bridge_defect: self.bridge_defect, norm: self.norm }
    }
}

pub fn build_v_rho(rho: &HermitianOperator, dims: BipartiteDims) -> Result<VRho> {
    if rho.dim() != dims.d_ab() {
        return Err(Error::dim(format!("ρ has dimension {}, expected {}", rho.dim(), dims.d_ab())));
    }
    require_pd(&rho.eig()?).map_err(|e| Error::Singular(format!("V_ρ needs ρ > 0 ({e})")))?;
    let reduced = partial_trace_b(rho, dims)?;
    let t_inv_sqrt = pd_power(&reduced, -0.5)?;
    let reduced_sqrt = psd_sqrt(&reduced)?;
    let sqrt = psd_sqrt(rho)?;
    let id_b = matrix::identity(dims.d_b);
    let op = Superoperator::from_map(dims.d_a, dims.d_ab(), |x| {
        matrix::kron(&(x * t_inv_sqrt.matrix()), &id_b) * sqrt.matrix()
    });
    let gram = op.matrix().adjoint() * op.matrix();
    let isometry_defect = (&gram - matrix::identity(dims.d_a * dims.d_a)).norm();
    let bridge_defect = (op.apply(reduced_sqrt.matrix())? - sqrt.matrix()).norm();
    let norm = max_eigenvalue(&gram)?.max(0.0).sqrt();
    Ok(VRho { op, dims, isometry_defect, bridge_defect, norm, reduced_sqrt, sqrt })
}

/// `V†ΔV` as a Hermitian operator on the vectorized `𝓑(𝓗_a)`.
pub fn compress(v: &VRho, delta: &CMatrix) -> HermitianOperator {
    HermitianOperator::from_raw(v.op.matrix().adjoint() * delta * v.op.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::states::{random_density, DensityOperator};

    #[test]
    fn product_state_closed_form() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        let sa = random_density(&mut rng::stream(1, 0), 2, 2).unwrap();
        let rho = sa.kron(&DensityOperator::maximally_mixed(2));
        let v = build_v_rho(rho.op(), dims).unwrap();
        let scale = matrix::c64(1.0 / 2f64.sqrt(), 0.0);
        let f = |x: &CMatrix| matrix::kron(x, &matrix::identity(2)) * scale;
        // (X σ_a^{-1/2} ⊗ I)(σ_a^{1/2} ⊗ I/√2) = X ⊗ I/√2
        assert!(v.op.formula_defect(f) < 1e-12);
        assert!(v.isometry_defect < 1e-12);
    }

    #[test]
    fn random_full_rank_is_isometric() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        let mut g = rng::stream(2, 0);
        for _ in 0..10 {
            let rho = random_density(&mut g, 4, 4).unwrap();
            let v = build_v_rho(rho.op(), dims).unwrap();
            assert!(v.isometry_defect <= 1e-10, "{}", v.isometry_defect);
            assert!(v.bridge_defect <= 1e-9);
            assert!((v.norm - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn singular_rho_rejected() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        let rho = random_density(&mut rng::stream(3, 0), 4, 2).unwrap();
        assert!(build_v_rho(rho.op(), dims).is_err());
    }
}
