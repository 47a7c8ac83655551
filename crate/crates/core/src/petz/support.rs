use serde::Serialize;

use crate::channels::{partial_trace_b, partial_trace_state, BipartiteDims};
use crate::linalg::hermitian::projector_above;
use crate::linalg::HermitianOperator;
use crate::states::{support_overlap_defect, DensityOperator};
use crate::tol::DEFAULT;
use crate::{Error, Result};

/// Projector onto `ker T` for PSD `T`.
fn kernel_projector(t: &HermitianOperator) -> Result<HermitianOperator> {
    let spec = t.eig()?;
    let tau = spec.support_threshold();
    let w: Vec<f64> = spec.eigenvalues.iter().map(|&l| if l > tau { 0.0 } else { 1.0 }).collect();
    Ok(HermitianOperator::from_raw(spec.recompose_with(&w)))
}

/// `‖P_{ker(T1+T2)} − P_{ker T1 ∩ ker T2}‖_F` for PSD `T1`, `T2`. The intersection
/// projector is read off the eigenvalue-1 space of `K1 K2 K1`.
pub fn kernel_lemma_defect(t1: &HermitianOperator, t2: &HermitianOperator) -> Result<f64> {
    let k_sum = kernel_projector(&t1.add(t2)?)?;
    let k1 = kernel_projector(t1)?;
    let k2 = kernel_projector(t2)?;
    let sandwich = HermitianOperator::from_raw(k1.matrix() * k2.matrix() * k1.matrix());
    let spec = sandwich.eig()?;
    let k_cap = projector_above(&spec, 1.0 - 1e-8);
    Ok((k_sum.matrix() - k_cap.matrix()).norm())
}

#[derive(Clone, Debug, Serialize)]
pub struct SupportInclusionCertificate {
    /// `‖(I − P_{Tr_b σ}) P_{Tr_b ρ}‖_2`.
    pub overlap_after: f64,
    pub nested_after: bool,
    /// `‖Q² − Q‖_F` for `Q = Π − P`.
    pub complement_projector_defect: f64,
    pub lemma_defect: f64,
    pub holds: bool,
}

pub fn support_inclusion_after_trace(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    dims: BipartiteDims,
) -> Result<SupportInclusionCertificate> {
    if support_overlap_defect(rho, sigma)? > DEFAULT.support_overlap {
        return Err(Error::Precondition("supp ρ is not contained in supp σ".into()));
    }
    let p = rho.support_projector();
    let pi = sigma.support_projector();
    let q = pi.sub(&p)?;
    let complement_projector_defect = (q.matrix() * q.matrix() - q.matrix()).norm();
    let lemma_defect = kernel_lemma_defect(&partial_trace_b(&p, dims)?, &partial_trace_b(&q, dims)?)?;
    let overlap_after =
        support_overlap_defect(&partial_trace_state(rho, dims)?, &partial_trace_state(sigma, dims)?)?;
    let nested_after = overlap_after <= DEFAULT.support_overlap;
    let holds = nested_after && complement_projector_defect <= 1e-8 && lemma_defect <= 1e-8;
    Ok(SupportInclusionCertificate { overlap_after, nested_after, complement_projector_defect, lemma_defect, holds })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::states::{random_density, random_nested_pair};

    fn d22() -> BipartiteDims {
        BipartiteDims::new(2, 2).unwrap()
    }

    #[test]
    fn full_rank_pair_is_nested() {
        let mut g = rng::stream(1, 0);
        let rho = random_density(&mut g, 4, 4).unwrap();
        let sigma = random_density(&mut g, 4, 4).unwrap();
        assert!(support_inclusion_after_trace(&rho, &sigma, d22()).unwrap().holds);
    }

    #[test]
    fn rank_one_in_rank_two() {
        let (rho, sigma) = random_nested_pair(&mut rng::stream(2, 0), 4, 1, 2).unwrap();
        let c = support_inclusion_after_trace(&rho, &sigma, d22()).unwrap();
        assert!(c.holds, "{c:?}");
    }

    #[test]
    fn kernel_lemma_on_diagonals() {
        let t1 = HermitianOperator::diag(&[1.0, 0.0, 0.0]);
        let t2 = HermitianOperator::diag(&[0.0, 1.0, 0.0]);
        assert!(kernel_lemma_defect(&t1, &t2).unwrap() < 1e-14);
        let k = kernel_projector(&t1.add(&t2).unwrap()).unwrap();
        assert_eq!(k.matrix(), HermitianOperator::diag(&[0.0, 0.0, 1.0]).matrix());
    }

    #[test]
    fn non_nested_input_is_a_precondition_error() {
        let e0 = DensityOperator::basis(4, 0);
        let e1 = DensityOperator::basis(4, 1);
        assert!(matches!(support_inclusion_after_trace(&e0, &e1, d22()), Err(Error::Precondition(_))));
    }
}
