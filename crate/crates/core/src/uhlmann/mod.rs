pub mod compatible;
pub mod entropy_form;
pub mod forms;
pub mod means;

pub use compatible::{build_compatible_pair, build_weighted_pair, interpolate, CompatiblePair, FormRepresentation};
pub use forms::{form_from_operator_pair, pullback_form, OperatorBasis, PositiveForm, Side};
pub use means::{
    check_geometric_mean_maximality, check_interpolation_monotonicity, check_pullback_inequality,
    check_representation_independence, direct_interpolation, geometric_mean, interpolation_of_interpolations,
};
pub use entropy_form::{entropy_form, relative_entropy_form, uhlmann_monotonicity, EntropyFormResult, TSchedule, UhlmannChainCertificate};
