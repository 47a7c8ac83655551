pub mod chain;
pub mod jensen;
pub mod key;
pub mod modular;
pub mod recovery;
pub mod superop;
pub mod support;
pub mod vrho;

pub use chain::{corrected_monotonicity, petz_chain_instance, PetzChainCertificate, PetzChainInstance};
pub use jensen::{default_grid, flawed_step_counterexample, rows_to_csv, Figure, FigureRow};
pub use key::{check_key_inequality, KeyInequalityCertificate};
pub use modular::{build_left_right, entropy_via_modular, entropy_via_modular_regularized, ModularOperators, ModularPair};
pub use recovery::{fawzi_renner_check, fidelity, petz_recovery, FawziRennerCertificate, PetzRecovery};
pub use superop::Superoperator;
pub use support::{kernel_lemma_defect, support_inclusion_after_trace, SupportInclusionCertificate};
pub use vrho::{build_v_rho, VRho};
