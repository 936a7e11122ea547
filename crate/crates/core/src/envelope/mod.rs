//! Envelope descriptions as exact piecewise-linear expressions in the
//! extremal-function values `h_1..h_N`.

pub mod builder;
pub mod compare;
pub mod expr;
pub mod nine;
pub mod rules;

pub use builder::{
    build_envelope, CertifiedConflict, EnvelopeBuilder, EnvelopeDescription, EnvelopeError,
};
pub use compare::{
    desc_equal, desc_equal_report, qtilde_check, qtilde_expr, systems_equiv_check, Comparison,
    ConditionSystems, DescReport, QtildeReport, SampleSpec, SystemsReport,
};
pub use expr::{int, rat, AffineForm, CompiledExpr, ExprError, HExpr, Rational};
pub use nine::{certified_lookup, nine_cases, CertifiedCase};
pub use rules::{
    close_inner, max_lifting_local, nk_envelope, polyhedral_local, rule_claim_q6, rule_claim_q7,
    rule_env_in_env, rule_prop_center, InnerDomain, RuleId, RuleSet,
};
