use serde::Serialize;

use super::hermitian::{loewner_gap, matrix_function, Bound, Domain, HermitianOperator};
use super::matrix::{c64, MatrixJson};
use crate::rng;
use crate::Result;

/// Outcome of sampling midpoint operator convexity `f((A+B)/2) ≤ (f(A)+f(B))/2`.
///
/// Only the dimensions listed in `dims_checked` were sampled; a clean report
/// is evidence in those dimensions, not a proof of operator convexity.
#[derive(Clone, Debug, Serialize)]
pub struct ConvexityReport {
    pub trials: usize,
    pub dims_checked: Vec<usize>,
    pub violations: usize,
    /// Most negative `λ_min((f(A)+f(B))/2 − f((A+B)/2))` seen.
    pub worst_min_eig: f64,
    pub witness: Option<(MatrixJson, MatrixJson)>,
}

fn sample_eigenvalue(rng: &mut impl rand::Rng, domain: Domain) -> f64 {
    let lo = match domain.lo {
        Bound::Open(a) | Bound::Closed(a) => Some(a),
        Bound::Unbounded => None,
    };
    let hi = match domain.hi {
        Bound::Open(b) | Bound::Closed(b) => Some(b),
        Bound::Unbounded => None,
    };
    loop {
        let x = match (lo, hi) {
            (Some(a), Some(b)) => rng.random_range(a..=b),
            // half-lines: log-uniform offsets cover several scales
            (Some(a), None) => a + rng.random_range(-4.0f64..2.5).exp(),
            (None, Some(b)) => b - rng.random_range(-4.0f64..2.5).exp(),
            (None, None) => rng.random_range(-5.0..5.0),
        };
        if domain.contains(x) {
            return x;
        }
    }
}

fn random_in_domain(rng: &mut impl rand::Rng, d: usize, domain: Domain) -> HermitianOperator {
    let vals: Vec<f64> = (0..d).map(|_| sample_eigenvalue(rng, domain)).collect();
    let u = rng::haar_unitary(rng, d);
    HermitianOperator::diag(&vals).conjugate_by(&u).expect("square")
}

pub fn check_operator_convexity(
    f: impl Fn(f64) -> f64,
    domain: Domain,
    trials: usize,
    dim: usize,
    seed: u64,
) -> Result<ConvexityReport> {
    let mut rng = rng::stream(seed, dim as u64);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for _ in 0..trials {
        let a = random_in_domain(&mut rng, dim, domain);
        let b = random_in_domain(&mut rng, dim, domain);
        let mid = a.add(&b)?.scale(0.5);
        let fa = matrix_function(&a, &f, domain)?;
        let fb = matrix_function(&b, &f, domain)?;
        let fm = matrix_function(&mid, &f, domain)?;
        let gap = (fa.matrix() + fb.matrix()) * c64(0.5, 0.0) - fm.matrix();
        let scale = 1.0 + fa.frobenius_norm() + fb.frobenius_norm();
        let cert = loewner_gap(&gap, 1e-10 * scale)?;
        if cert.min_eig < worst {
            worst = cert.min_eig;
        }
        if !cert.holds {
            violations += 1;
            if witness.is_none() {
                witness = Some((MatrixJson::from_matrix(a.matrix()), MatrixJson::from_matrix(b.matrix())));
            }
        }
    }
    Ok(ConvexityReport { trials, dims_checked: vec![dim], violations, worst_min_eig: worst, witness })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_log_is_operator_convex() {
        let r = check_operator_convexity(|x| -x.ln(), Domain::POSITIVE, 100, 3, 11).unwrap();
        assert_eq!(r.violations, 0);
        assert_eq!(r.dims_checked, vec![3]);
    }

    #[test]
    fn square_is_operator_convex() {
        let r = check_operator_convexity(|x| x * x, Domain::REALS, 100, 3, 5).unwrap();
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn cube_is_not_operator_convex() {
        let r = check_operator_convexity(|x| x * x * x, Domain::POSITIVE, 200, 2, 9).unwrap();
        assert!(r.violations > 0, "worst {}", r.worst_min_eig);
        assert!(r.witness.is_some());
    }
}
