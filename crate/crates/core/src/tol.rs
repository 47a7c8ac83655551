//! Central tolerance table.
//!
//! Every module reads its thresholds from [`DEFAULT`]; the campaign runner
//! accepts partial overrides through [`Tolerances`] deserialization.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative Hermiticity defect accepted at construction, scaled by `1 + ‖A‖_F`.
    pub hermitian: f64,
    /// Numerical-kernel threshold, scaled by `1 + λ_max`.
    pub support: f64,
    /// Eigenvalue clustering threshold for spectral projectors, scaled by `1 + λ_max`.
    pub cluster: f64,
    pub recomposition: f64,
    pub orthonormality: f64,
    pub unit_trace: f64,
    pub completeness: f64,
    pub dilation: f64,
    pub linear_identity: f64,
    /// Spectral-norm threshold on `(I - P_σ) P_ρ` for support nesting.
    pub support_overlap: f64,
    pub klein: f64,
    pub klein_equality: f64,
    pub unitary_invariance: f64,
    pub additivity: f64,
    pub dpi: f64,
    pub isometry: f64,
    pub key_inequality: f64,
    pub modular_agreement: f64,
    pub chain: f64,
    pub limit_agreement: f64,
    pub equivalence: f64,
    pub method_agreement: f64,
    pub recovery: f64,
    pub fawzi_renner: f64,
    pub fidelity_symmetry: f64,
    pub representation: f64,
    pub composition: f64,
    pub form_order: f64,
    pub cross_proof: f64,
    /// Increment floor below which a limit sequence is treated as converged.
    pub divergence_floor: f64,
}

pub const DEFAULT: Tolerances = Tolerances {
    hermitian: 1e-10,
    support: 1e-10,
    cluster: 1e-8,
    recomposition: 1e-10,
    orthonormality: 1e-10,
    unit_trace: 1e-10,
    completeness: 1e-10,
    dilation: 1e-9,
    linear_identity: 1e-10,
    support_overlap: 1e-8,
    klein: 1e-9,
    klein_equality: 1e-7,
    unitary_invariance: 1e-8,
    additivity: 1e-8,
    dpi: 1e-8,
    isometry: 1e-9,
    key_inequality: 1e-9,
    modular_agreement: 1e-8,
    chain: 1e-8,
    limit_agreement: 1e-5,
    equivalence: 1e-5,
    method_agreement: 1e-7,
    recovery: 1e-9,
    fawzi_renner: 1e-7,
    fidelity_symmetry: 1e-8,
    representation: 1e-8,
    composition: 1e-8,
    form_order: 1e-9,
    cross_proof: 1e-7,
    divergence_floor: 1e-10,
};

impl Default for Tolerances {
    fn default() -> Self {
        DEFAULT
    }
}

impl Tolerances {
    /// Parse a TOML or JSON override file; unspecified fields keep their defaults.
    pub fn from_str_any(text: &str) -> crate::Result<Self> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            Ok(serde_json::from_str(text)?)
        } else {
            toml::from_str(text).map_err(|e| crate::Error::Parse(e.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_override_keeps_defaults() {
        let t = Tolerances::from_str_any("dpi = 1e-6\n").unwrap();
        assert_eq!(t.dpi, 1e-6);
        assert_eq!(t.isometry, DEFAULT.isometry);
        let j = Tolerances::from_str_any(r#"{"isometry": 2e-9}"#).unwrap();
        assert_eq!(j.isometry, 2e-9);
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(Tolerances::from_str_any("no_such = 1.0").is_err());
    }
}
