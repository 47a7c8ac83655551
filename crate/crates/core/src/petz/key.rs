use serde::Serialize;

use crate::channels::{partial_trace_b_matrix, BipartiteDims};
use crate::linalg::matrix::{self, CMatrix};
use crate::linalg::{loewner_gap, HermitianOperator};
use crate::petz::modular::{quadratic_form, ModularPair};
use crate::petz::vrho::{build_v_rho, compress};
use crate::tol::DEFAULT;
use crate::{rng, Result};

#[derive(Clone, Debug, Serialize)]
pub struct KeyInequalityCertificate {
    /// `λ_min(Δ^a − V†ΔV)`.
    pub min_eig: f64,
    pub holds: bool,
    /// Worst `|⟨Δ^a(X)T^{1/2}, X T^{1/2}⟩ − Tr[X X† T_σ]|` over probes.
    pub trace_identity_defect: f64,
    /// Worst `⟨V†ΔV(X T^{1/2}), X T^{1/2}⟩ − Tr[X X† T_σ]` over probes (should be ≤ 0).
    pub probe_excess: f64,
    pub probes: usize,
}

/// Certify `V_ρ† Δ_{ρ,σ} V_ρ ≤ Δ^a_{ρ,σ}` for positive-definite `ρ`, `σ`.
pub fn check_key_inequality(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    dims: BipartiteDims,
    probes: usize,
    seed: u64,
) -> Result<KeyInequalityCertificate> {
    let pair = ModularPair::new(rho, sigma, dims, 0.0)?;
    let v = build_v_rho(rho, dims)?;
    let compressed = compress(&v, pair.delta_ab.matrix());
    let gap = pair.delta_a.matrix() - compressed.matrix();
    let cert = loewner_gap(&matrix::symmetrize(&gap), DEFAULT.key_inequality)?;

    let t_half = v.reduced_sqrt.matrix();
    let t_sigma = partial_trace_b_matrix(sigma.matrix(), dims)?;
    let mut g = rng::stream(seed, 0);
    let mut trace_identity_defect: f64 = 0.0;
    let mut probe_excess = f64::NEG_INFINITY;
    for _ in 0..probes {
        let x: CMatrix = rng::ginibre(&mut g, dims.d_a, dims.d_a);
        let y = &x * t_half;
        let target = (&x * x.adjoint() * &t_sigma).trace().re;
        let reduced = quadratic_form(pair.delta_a.matrix(), &y);
        let full = quadratic_form(compressed.matrix(), &y);
        trace_identity_defect = trace_identity_defect.max((reduced - target).abs() / (1.0 + target.abs()));
        probe_excess = probe_excess.max((full - target) / (1.0 + target.abs()));
    }
    Ok(KeyInequalityCertificate {
        min_eig: cert.min_eig,
        holds: cert.holds,
        trace_identity_defect,
        probe_excess,
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{random_density, DensityOperator};

    #[test]
    fn maximally_mixed_saturates() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        let m = DensityOperator::maximally_mixed(4);
        let c = check_key_inequality(m.op(), m.op(), dims, 5, 1).unwrap();
        assert!(c.holds && c.min_eig.abs() < 1e-12);
    }

    #[test]
    fn random_pairs_hold() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        let mut g = rng::stream(5, 0);
        for i in 0..20 {
            let rho = random_density(&mut g, 4, 4).unwrap();
            let sigma = random_density(&mut g, 4, 4).unwrap();
            let c = check_key_inequality(rho.op(), sigma.op(), dims, 10, i).unwrap();
            assert!(c.holds, "{c:?}");
            assert!(c.trace_identity_defect < 1e-10);
            assert!(c.probe_excess < 1e-10);
        }
    }

    #[test]
    fn product_states_give_equality() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        let mut g = rng::stream(6, 0);
        let r = |g: &mut rng::Stream| random_density(g, 2, 2).unwrap();
        let rho = r(&mut g).kron(&r(&mut g));
        let sigma = r(&mut g).kron(&r(&mut g));
        let c = check_key_inequality(rho.op(), sigma.op(), dims, 5, 2).unwrap();
        assert!(c.holds && c.min_eig.abs() < 1e-10, "{c:?}");
    }
}
