//! Explicit bounds for retarded nonlinear integral inequalities.
//!
//! A family of Gronwall-Bellman-Pachpatte-type theorems turns implicit
//! integral (or integro-differential) hypotheses on an unknown `u` into
//! explicit bound functions built from the problem data alone. This crate
//! evaluates those bounds numerically and verifies them three ways:
//!
//! * against the saturated equation (the hypothesis with `<=` replaced by
//!   `=`), whose Picard solution no admissible `u` can exceed;
//! * against the classical Gronwall, Bellman and Pachpatte oracles under
//!   the parameter substitutions that collapse the general bounds onto them;
//! * against two fully worked instances with independently integrated
//!   closed forms.
//!
//! Problem data (forcing, retardation, factor, kernels) are closed-form
//! expressions of one variable, parsed by [`expr`] and differentiated
//! exactly where a bound needs `a'` or `Phi'`.

#![allow(clippy::redundant_guards, clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod expr;
pub mod inequality;
pub mod instances;
pub mod numerics;
pub mod verifier;

pub use bounds::{
    bound_additive, bound_at, bound_bellman, bound_curve, bound_factored, bound_gronwall,
    bound_integrodiff_mixed, bound_integrodiff_power, bound_outer_power, bound_pachpatte,
    BoundCurve, BoundError, EvalOptions,
};
pub use expr::{parse_expr, Expr, ParseDiagnostic};
pub use inequality::{
    check_hypotheses, power_sum_rhs, zeta_constants, zhao_rhs, zhao_tangent_kappa, GammaParams,
    HypothesisReport, HypothesisStatus, InequalityProblem, Theorem, Zeta6Denominator,
    ZetaConstants,
};
pub use numerics::{
    integrate, invert_monotone, sample_grid, CumulativeIntegral, Grid, NumericsError,
    QuadratureConfig,
};
pub use verifier::{
    check_dominance, check_reduction, solve_saturated_integral, solve_saturated_integrodiff,
    DominanceMode, DominanceReport, IntegralForm, IntegrodiffForm, PicardConfig, Reduction,
    ReductionReport, Trajectory, Verdict, VerifierError,
};
