//! Built-in demonstration instances.
//!
//! Two fully worked problem instances ship with the crate, each paired with
//! an independently integrated closed-form bound. The `reproduce` command
//! and the acceptance tests compare the numerical pipeline against these
//! closed forms pointwise.

use crate::expr::{parse_expr, Expr};
use crate::inequality::{GammaParams, InequalityProblem, Theorem};

/// Horizon the built-in instances are defined on.
pub const INSTANCE_HORIZON: f64 = 4.0;

/// First worked instance (outer-power form):
/// `u^5 <= (delta + int_0^sqrt(delta) 2 u + int_0^sqrt(delta) 3 (u^4 + int xi u^3)^(1/4))^3`.
pub fn example1_problem() -> InequalityProblem {
    let mut kernels: [Expr; 6] = std::array::from_fn(|_| Expr::lit(0.0));
    kernels[0] = Expr::lit(2.0);
    kernels[1] = Expr::lit(3.0);
    kernels[2] = Expr::var();
    InequalityProblem {
        forcing: Expr::var(),
        retardation: parse_expr("sqrt(x)").expect("static expression"),
        factor: Expr::lit(1.0),
        kernels,
        gamma: GammaParams::new(5.0, 4.0, 3.0, 3.0),
        kappa: 1.0,
        horizon: INSTANCE_HORIZON,
    }
}

/// Closed form of the first instance's bound at `kappa = 1`:
/// `(2/5) e^(18 sqrt(delta)/5) + (5/1296)(5 e^(18 sqrt(delta)/5) - 18 sqrt(delta) - 5)`.
///
/// Obtained by integrating `int_0^s (xi/4) e^(18(s - xi)/5) dxi` by parts
/// with `s = sqrt(delta)`.
pub fn example1_closed_form(delta: f64) -> f64 {
    let s = delta.sqrt();
    let e = (18.0 * s / 5.0).exp();
    0.4 * e + 5.0 / 1296.0 * (5.0 * e - 18.0 * s - 5.0)
}

/// Second worked instance (additive form):
/// `u^3 <= 1 + 2 delta + int_0^cbrt(delta) (2u + theta)
///  + int_0^cbrt(delta) {5 (u^3 + int (7 u^2 + xi))^(1/3) + theta}`.
pub fn example2_problem() -> InequalityProblem {
    let mut kernels: [Expr; 6] = std::array::from_fn(|_| Expr::lit(0.0));
    kernels[0] = Expr::lit(2.0);
    kernels[1] = Expr::var();
    kernels[2] = Expr::lit(5.0);
    kernels[3] = Expr::lit(7.0);
    kernels[4] = Expr::var();
    kernels[5] = Expr::var();
    InequalityProblem {
        forcing: parse_expr("1 + 2*x").expect("static expression"),
        retardation: parse_expr("cbrt(x)").expect("static expression"),
        factor: Expr::lit(1.0),
        kernels,
        gamma: GammaParams::new(3.0, 2.0, 1.0, 1.0),
        kappa: 1.0,
        horizon: INSTANCE_HORIZON,
    }
}

/// Closed form of the second instance's bound at `kappa = 1`:
/// `{e^(7 cbrt(delta)) + (3/49)(22 e^(7 cbrt(delta)) - 22 - 7 cbrt(delta))}^(1/3)`.
///
/// Obtained by integrating `int_0^s (9 + 3 xi) e^(7(s - xi)) dxi` by parts
/// with `s = cbrt(delta)`.
pub fn example2_closed_form(delta: f64) -> f64 {
    let s = delta.cbrt();
    let e = (7.0 * s).exp();
    (e + 3.0 / 49.0 * (22.0 * e - 22.0 - 7.0 * s)).cbrt()
}

/// A worked instance: the problem, its theorem, and the closed-form bound.
pub type WorkedInstance = (InequalityProblem, Theorem, fn(f64) -> f64);

/// Instance selector used by the command line.
pub fn example_problem(which: u8) -> Option<WorkedInstance> {
    match which {
        1 => Some((example1_problem(), Theorem::OuterPower, example1_closed_form)),
        2 => Some((example2_problem(), Theorem::Additive, example2_closed_form)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn closed_forms_at_zero() {
        assert_relative_eq!(example1_closed_form(0.0), 0.4);
        assert_relative_eq!(example2_closed_form(0.0), 1.0);
    }

    #[test]
    fn closed_form_values_match_spot_checks() {
        // independent spot evaluation at delta = 1
        let e36 = 3.6_f64.exp();
        assert_relative_eq!(
            example1_closed_form(1.0),
            0.4 * e36 + 5.0 / 1296.0 * (5.0 * e36 - 23.0),
            max_relative = 1e-15
        );
        let e7 = 7.0_f64.exp();
        assert_relative_eq!(
            example2_closed_form(1.0),
            (e7 + 3.0 / 49.0 * (22.0 * e7 - 29.0)).cbrt(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn instances_are_structurally_valid() {
        example1_problem().validate().unwrap();
        example2_problem().validate().unwrap();
    }
}
