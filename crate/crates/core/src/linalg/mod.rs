pub mod convexity;
pub mod eig;
pub mod hermitian;
pub mod matrix;
pub mod unitary;

pub use convexity::{check_operator_convexity, ConvexityReport};
pub use hermitian::{
    eig_hermitian, log_extended, loewner_gap, loewner_leq, matrix_function, max_eigenvalue, min_eigenvalue, pd_power,
    psd_sqrt, spectral_norm, support_projector, Bound, Domain, HermitianOperator, LoewnerCertificate,
    LogExtended, SpectralDecomposition,
};
pub use matrix::{CMatrix, CVector, MatrixJson};
pub mod extended;
pub use extended::ExtendedReal;
