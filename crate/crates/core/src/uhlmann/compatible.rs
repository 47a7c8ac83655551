use serde::Serialize;

use super::forms::{same_dim, PositiveForm};
use crate::linalg::eig::jacobi_eigen;
use crate::linalg::matrix::{self, c64, CMatrix, CVector};
use crate::linalg::HermitianOperator;
use crate::tol::DEFAULT;
use crate::{Error, Result};

/// Bound on `‖[A, B]‖_F` and `‖A + w·B − I‖_F`.
pub const PAIR_TOL: f64 = 1e-9;

/// `α(v, w) = ⟨h v, A h w⟩` with a surjective `h: ℂ^n → ℂ^r`.
#[derive(Clone, Debug)]
pub struct FormRepresentation {
    pub target_dim: usize,
    pub h: CMatrix,
    pub a: HermitianOperator,
}

impl FormRepresentation {
    pub fn form(&self) -> PositiveForm {
        PositiveForm::from_raw(self.h.adjoint() * self.a.matrix() * &self.h)
    }

    /// `‖h† A h − G_α‖_F`.
    pub fn reproduction_defect(&self, alpha: &PositiveForm) -> f64 {
        self.form().distance(alpha)
    }

    /// Smallest singular value of `h`; positive iff `h` is onto.
    pub fn min_singular_value(&self) -> Result<f64> {
        let (vals, _) = jacobi_eigen(&(&self.h * self.h.adjoint()))?;
        Ok(vals.first().copied().unwrap_or(0.0).max(0.0).sqrt())
    }
}

/// Two representations sharing `h` with commuting operators, `A + w·B = I`.
#[derive(Clone, Debug)]
pub struct CompatiblePair {
    h: CMatrix,
    a: CMatrix,
    b: CMatrix,
    weight: f64,
    /// Joint eigenbasis and the clipped spectra of `A` and `B` in it.
    u: CMatrix,
    a_eigs: Vec<f64>,
    b_eigs: Vec<f64>,
    pub commutator_norm: f64,
    pub sum_defect: f64,
    /// Off-diagonal mass of `U† B U`.
    pub joint_diagonal_defect: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CompatibleSummary {
    pub target_dim: usize,
    pub weight: f64,
    pub commutator_norm: f64,
    pub sum_defect: f64,
    pub joint_diagonal_defect: f64,
}

/// Quotient construction over `N = ker(α + β)`.
pub fn build_compatible_pair(alpha: &PositiveForm, beta: &PositiveForm) -> Result<CompatiblePair> {
    build_weighted_pair(alpha, beta, 1.0)
}

/// Same construction over the form `α + w·β`, giving `A + w·B = I`.
pub fn build_weighted_pair(alpha: &PositiveForm, beta: &PositiveForm, weight: f64) -> Result<CompatiblePair> {
    same_dim(alpha, beta)?;
    if !(weight > 0.0 && weight.is_finite()) {
        return Err(Error::InvalidArgument(format!("pair weight must be positive, got {weight}")));
    }
    let g = alpha.gram() + beta.gram() * c64(weight, 0.0);
    let (vals, q) = jacobi_eigen(&g)?;
    let lmax = vals.last().copied().unwrap_or(0.0);
    let tau = DEFAULT.support * (1.0 + lmax.abs());
    let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > tau).collect();
    if keep.is_empty() {
        return Err(Error::Degenerate("α + β vanishes; the quotient space is trivial".into()));
    }
    let n = alpha.dim();
    let r = keep.len();
    let qs = CMatrix::from_fn(n, r, |i, k| q[(i, keep[k])]);
    let w: Vec<f64> = keep.iter().map(|&k| vals[k].sqrt()).collect();
    let winv = matrix::from_real_diag(&w.iter().map(|x| 1.0 / x).collect::<Vec<_>>());
    let h = matrix::from_real_diag(&w) * qs.adjoint();
    let a = &winv * qs.adjoint() * alpha.gram() * &qs * &winv;
    let b = &winv * qs.adjoint() * beta.gram() * &qs * &winv;
    CompatiblePair::from_parts(h, a, b, weight)
}

impl CompatiblePair {
    fn from_parts(h: CMatrix, a: CMatrix, b: CMatrix, weight: f64) -> Result<Self> {
        let a = matrix::symmetrize(&a);
        let b = matrix::symmetrize(&b);
        let r = a.nrows();
        let commutator_norm = matrix::commutator(&a, &b).norm();
        let sum_defect = (&a + &b * c64(weight, 0.0) - matrix::identity(r)).norm();
        let (raw_a, u) = jacobi_eigen(&a)?;
        let bu = u.adjoint() * &b * &u;
        let mut off = 0.0;
        for j in 0..r {
            for i in 0..r {
                if i != j {
                    off += bu[(i, j)].norm_sqr();
                }
            }
        }
        let tau = DEFAULT.support;
        let a_eigs = raw_a.iter().map(|&x| if x > tau { x } else { 0.0 }).collect();
        let b_eigs = (0..r).map(|i| bu[(i, i)].re).map(|x| if x * weight > tau { x } else { 0.0 }).collect();
        Ok(CompatiblePair { h, a, b, weight, u, a_eigs, b_eigs, commutator_norm, sum_defect, joint_diagonal_defect: off.sqrt() })
    }

    /// The pair `(R h, R A R†, R B R†)` for a unitary `R` on the target space.
    pub fn rotated(&self, rot: &CMatrix) -> Result<Self> {
        if rot.shape() != (self.target_dim(), self.target_dim()) {
            return Err(Error::dim("rotation must act on the target space"));
        }
        let h = rot * &self.h;
        let a = rot * &self.a * rot.adjoint();
        let b = rot * &self.b * rot.adjoint();
        Self::from_parts(h, a, b, self.weight)
    }

    pub fn target_dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn h(&self) -> &CMatrix {
        &self.h
    }

    pub fn rep_alpha(&self) -> FormRepresentation {
        FormRepresentation { target_dim: self.target_dim(), h: self.h.clone(), a: HermitianOperator::from_raw(self.a.clone()) }
    }

    pub fn rep_beta(&self) -> FormRepresentation {
        FormRepresentation { target_dim: self.target_dim(), h: self.h.clone(), a: HermitianOperator::from_raw(self.b.clone()) }
    }

    pub fn summary(&self) -> CompatibleSummary {
        CompatibleSummary {
            target_dim: self.target_dim(),
            weight: self.weight,
            commutator_norm: self.commutator_norm,
            sum_defect: self.sum_defect,
            joint_diagonal_defect: self.joint_diagonal_defect,
        }
    }

    pub fn certified(&self) -> bool {
        self.commutator_norm <= PAIR_TOL && self.sum_defect <= PAIR_TOL
    }

    fn weights(&self, t: f64) -> Vec<f64> {
        self.a_eigs.iter().zip(&self.b_eigs).map(|(&a, &b)| interpolation_weight(a, b, t)).collect()
    }

    /// Gram matrix of `γ^t(v, w) = ⟨h v, A^{1−t} B^t h w⟩`.
    pub fn interpolate(&self, t: f64) -> Result<PositiveForm> {
        check_t(t)?;
        let uh = self.u.adjoint() * &self.h;
        let f = matrix::from_real_diag(&self.weights(t));
        Ok(PositiveForm::from_raw(uh.adjoint() * f * &uh))
    }

    /// `γ^t(v, w)` evaluated without forming the Gram matrix.
    pub fn interpolate_at(&self, t: f64, v: &CVector, w: &CVector) -> Result<num_complex::Complex64> {
        check_t(t)?;
        let zv = self.u.adjoint() * (&self.h * v);
        let zw = self.u.adjoint() * (&self.h * w);
        let f = self.weights(t);
        Ok(zv.iter().zip(zw.iter()).zip(&f).map(|((x, y), &c)| x.conj() * y * c).sum())
    }
}

/// `f^t(a, b) = a^{1−t} b^t` with `0^s = 0` for `s > 0`.
pub fn interpolation_weight(a: f64, b: f64, t: f64) -> f64 {
    if t == 0.0 {
        a
    } else if t == 1.0 {
        b
    } else if a <= 0.0 || b <= 0.0 {
        0.0
    } else {
        a.powf(1.0 - t) * b.powf(t)
    }
}

pub(crate) fn check_t(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("interpolation parameter {t} is outside [0, 1]")));
    }
    Ok(())
}

/// The interpolation `γ^t_{α→β}`; zero when `α + β = 0`.
pub fn interpolate(alpha: &PositiveForm, beta: &PositiveForm, t: f64) -> Result<PositiveForm> {
    check_t(t)?;
    match build_compatible_pair(alpha, beta) {
        Err(Error::Degenerate(_)) => Ok(PositiveForm::zero(alpha.dim())),
        other => other?.interpolate(t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn random_form(seed: u64, n: usize, rank: usize) -> PositiveForm {
        let mut r = rng::stream(seed, 0);
        let x = rng::ginibre(&mut r, n, rank);
        let g = &x * x.adjoint();
        let tr = g.trace().re;
        PositiveForm::new(g * c64(1.0 / tr, 0.0)).unwrap()
    }

    #[test]
    fn equal_forms_split_symmetrically() {
        let id = PositiveForm::identity(4);
        let pair = build_compatible_pair(&id, &id).unwrap();
        assert!((pair.a.clone() - matrix::identity(4) * c64(0.5, 0.0)).norm() < 1e-14);
        let h = pair.h();
        // h = √2 · unitary
        assert!((h.adjoint() * h - matrix::identity(4) * c64(2.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn representations_reproduce_forms_with_kernel() {
        let alpha = random_form(1, 5, 2);
        let beta = random_form(2, 5, 1);
        let pair = build_compatible_pair(&alpha, &beta).unwrap();
        assert_eq!(pair.target_dim(), 3);
        assert!(pair.certified());
        assert!(pair.rep_alpha().reproduction_defect(&alpha) < 1e-12);
        assert!(pair.rep_beta().reproduction_defect(&beta) < 1e-12);
        assert!(pair.rep_alpha().min_singular_value().unwrap() > 1e-6);
    }

    #[test]
    fn weighted_pair_has_weighted_sum() {
        let alpha = random_form(3, 4, 4);
        let beta = random_form(4, 4, 4);
        let pair = build_weighted_pair(&alpha, &beta, 2.5).unwrap();
        assert!(pair.sum_defect < 1e-12 && pair.commutator_norm < 1e-12);
        assert!(pair.rep_beta().reproduction_defect(&beta) < 1e-12);
    }

    #[test]
    fn commuting_diagonal_forms_give_diagonal_operators() {
        let alpha = PositiveForm::new(matrix::from_real_diag(&[0.5, 0.2, 0.1])).unwrap();
        let beta = PositiveForm::new(matrix::from_real_diag(&[0.1, 0.3, 0.6])).unwrap();
        let pair = build_compatible_pair(&alpha, &beta).unwrap();
        let ha = pair.h.adjoint() * &pair.a * &pair.h;
        assert!((ha - alpha.gram()).norm() < 1e-14);
        let off = |m: &CMatrix| (m - CMatrix::from_diagonal(&m.diagonal())).norm();
        assert!(off(&pair.a) < 1e-14 && off(&pair.b) < 1e-14);
    }

    #[test]
    fn zero_sum_is_degenerate() {
        let z = PositiveForm::zero(3);
        assert!(matches!(build_compatible_pair(&z, &z), Err(Error::Degenerate(_))));
    }

    #[test]
    fn endpoints_and_midpoint_of_diagonal_forms() {
        let alpha = PositiveForm::new(matrix::from_real_diag(&[0.5, 0.2, 0.0])).unwrap();
        let beta = PositiveForm::new(matrix::from_real_diag(&[0.1, 0.0, 0.6])).unwrap();
        assert!(interpolate(&alpha, &beta, 0.0).unwrap().distance(&alpha) < 1e-14);
        assert!(interpolate(&alpha, &beta, 1.0).unwrap().distance(&beta) < 1e-14);
        let mid = interpolate(&alpha, &beta, 0.5).unwrap();
        let expect = matrix::from_real_diag(&[0.05f64.sqrt(), 0.0, 0.0]);
        assert!((mid.gram() - expect).norm() < 1e-14);
        assert!(interpolate(&alpha, &beta, 1.5).is_err());
    }

    #[test]
    fn scalar_interpolation_is_power_mean() {
        let a = PositiveForm::new(matrix::from_real_diag(&[2.0])).unwrap();
        let b = PositiveForm::new(matrix::from_real_diag(&[8.0])).unwrap();
        let g = interpolate(&a, &b, 1.0 / 3.0).unwrap();
        assert!((g.gram()[(0, 0)].re - 2f64.powf(2.0 / 3.0) * 8f64.powf(1.0 / 3.0)).abs() < 1e-13);
    }

    #[test]
    fn pointwise_evaluation_matches_gram() {
        let alpha = random_form(5, 4, 3);
        let beta = random_form(6, 4, 4);
        let pair = build_compatible_pair(&alpha, &beta).unwrap();
        let mut r = rng::stream(7, 0);
        let v = CVector::from_fn(4, |_, _| rng::complex_gaussian(&mut r));
        let w = CVector::from_fn(4, |_, _| rng::complex_gaussian(&mut r));
        let g = pair.interpolate(0.3).unwrap();
        assert!((g.eval(&v, &w) - pair.interpolate_at(0.3, &v, &w).unwrap()).norm() < 1e-13);
    }
}
