//! Seeded random ensembles. Every sampler takes an explicit generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::linalg::matrix::{c64, CMatrix};
use crate::linalg::unitary::orthonormalize;
use crate::linalg::HermitianOperator;

pub type Stream = ChaCha20Rng;

/// Independent substream `stream` of the generator seeded by `seed`.
pub fn stream(seed: u64, stream: u64) -> Stream {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn complex_gaussian(rng: &mut impl Rng) -> num_complex::Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im)
}

/// `rows×cols` matrix of independent standard complex Gaussians.
pub fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    // fill column-major so the stream layout is independent of nalgebra internals
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

/// `rows×cols` isometry (`cols ≤ rows`) from Gram–Schmidt of a Ginibre matrix.
pub fn random_isometry(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    assert!(cols <= rows, "random_isometry: cols must not exceed rows");
    loop {
        let q = orthonormalize(&ginibre(rng, rows, cols), 1e-8);
        if q.ncols() == cols {
            return q;
        }
    }
}

pub fn haar_unitary(rng: &mut impl Rng, d: usize) -> CMatrix {
    random_isometry(rng, d, d)
}

/// GUE-like Hermitian matrix `(G + G†)/2`.
pub fn random_hermitian(rng: &mut impl Rng, d: usize) -> HermitianOperator {
    let g = ginibre(rng, d, d);
    HermitianOperator::from_raw((&g + g.adjoint()) * c64(0.5, 0.0))
}

/// Hermitian matrix with eigenvalues drawn uniformly from `[lo, hi]` in a Haar-random basis.
pub fn random_hermitian_with_spectrum(rng: &mut impl Rng, d: usize, lo: f64, hi: f64) -> HermitianOperator {
    let vals: Vec<f64> = (0..d).map(|_| rng.random_range(lo..=hi)).collect();
    let u = haar_unitary(rng, d);
    HermitianOperator::diag(&vals).conjugate_by(&u).expect("square")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitary::unitarity_defect;

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let a = ginibre(&mut stream(7, 0), 2, 2);
        let b = ginibre(&mut stream(7, 0), 2, 2);
        let c = ginibre(&mut stream(7, 1), 2, 2);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let u = haar_unitary(&mut stream(3, 0), 5);
        assert!(unitarity_defect(&u) < 1e-13);
    }

    #[test]
    fn prescribed_spectrum_lands_in_range() {
        let h = random_hermitian_with_spectrum(&mut stream(1, 2), 4, 0.5, 2.0);
        let s = h.eig().unwrap();
        assert!(s.min_eigenvalue() >= 0.5 - 1e-12 && s.max_eigenvalue() <= 2.0 + 1e-12);
    }
}
