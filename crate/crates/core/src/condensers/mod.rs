//! Condensers for uniform (2,3)-SHELA sources.
//!
//! Two output-light seeded extractors are provided: one sampled by a random
//! process ([`random_process`]) and one explicit ([`explicit`]). [`wrap`]
//! turns either into a condenser on three blocks and certifies it against
//! adversaries in each of the three positions.

pub mod explicit;
pub mod random_process;
pub mod wrap;

pub use explicit::{
    explicit_ext, explicit_output_light, fiber_census, fiber_count, ExplicitCfg, ExplicitExt,
    ReachProfile,
};
pub use random_process::{
    audit_sampled, derive_params, heaviest_outputs, sample_output_light, subset_tv,
    validate_constraints, ConstraintRow, Profile, RandomProcessParams, SampledAudit,
    SampledCondenser,
};
pub use wrap::{
    certify_with_summary, certify_wrapped, enumerate_reach, explicit_reach_summary,
    position3_adversary, positions12_audit, wrap_condenser, PositionOutcome, ReachEnumerable,
    ReachSummary, WrapCertificate, WrappedCondenser,
};
