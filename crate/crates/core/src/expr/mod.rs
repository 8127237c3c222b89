//! Closed-form scalar functions of one variable.
//!
//! Problem definitions describe their kernels, forcing and retardation as
//! small expressions over the variable `x`, for example `1 + 2*x` or
//! `sqrt(x)`. This module holds the node tree, an evaluator with domain
//! checking, and an exact symbolic derivative. The grammar is deliberately
//! closed under differentiation: `^` only takes constant exponents, and the
//! derivative of `u^c` with `0 < c < 1` is rewritten as `c*u' / u^(1-c)` so
//! no negative literal is ever needed.

mod parse;

pub use parse::{parse_expr, ParseDiagnostic};

use std::fmt;
use thiserror::Error;

/// Expression tree over the single variable `x`.
///
/// Literals are finite and nonnegative; `^` carries its constant exponent
/// directly on the node. Values are immutable after construction and safe to
/// share across threads.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Var,
    Lit(f64),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Base raised to a constant exponent.
    Pow(Box<Expr>, f64),
    Exp(Box<Expr>),
    Sqrt(Box<Expr>),
    Cbrt(Box<Expr>),
}

/// Domain failure while evaluating an expression at a point.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("division by zero in `{subexpr}` at x = {x}")]
    DivisionByZero { subexpr: String, x: f64 },
    #[error("square root of negative value in `{subexpr}` at x = {x}")]
    NegativeSqrt { subexpr: String, x: f64 },
    #[error("non-finite value from `{subexpr}` at x = {x}")]
    NonFinite { subexpr: String, x: f64 },
}

impl Expr {
    pub fn var() -> Self {
        Expr::Var
    }

    /// Nonnegative finite constant.
    pub fn lit(v: f64) -> Self {
        debug_assert!(v.is_finite() && v >= 0.0, "literal must be finite and >= 0");
        Expr::Lit(v)
    }

    /// True if the tree contains no `Var` node.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Var => false,
            Expr::Lit(_) => true,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.is_constant() && b.is_constant()
            }
            Expr::Pow(a, _) => a.is_constant(),
            Expr::Exp(a) | Expr::Sqrt(a) | Expr::Cbrt(a) => a.is_constant(),
        }
    }

    /// Evaluate at `x`, reporting the offending subexpression on domain errors.
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Var => x,
            Expr::Lit(v) => *v,
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => {
                let denom = b.eval(x)?;
                if denom == 0.0 {
                    return Err(EvalError::DivisionByZero {
                        subexpr: self.to_string(),
                        x,
                    });
                }
                a.eval(x)? / denom
            }
            Expr::Pow(a, e) => a.eval(x)?.powf(*e),
            Expr::Exp(a) => a.eval(x)?.exp(),
            Expr::Sqrt(a) => {
                let base = a.eval(x)?;
                if base < 0.0 {
                    return Err(EvalError::NegativeSqrt {
                        subexpr: self.to_string(),
                        x,
                    });
                }
                base.sqrt()
            }
            Expr::Cbrt(a) => a.eval(x)?.cbrt(),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite {
                subexpr: self.to_string(),
                x,
            })
        }
    }

    /// Exact symbolic derivative. Total on the supported node set.
    pub fn differentiate(&self) -> Expr {
        match self {
            Expr::Var => Expr::Lit(1.0),
            Expr::Lit(_) => Expr::Lit(0.0),
            Expr::Add(a, b) => add(a.differentiate(), b.differentiate()),
            Expr::Sub(a, b) => sub(a.differentiate(), b.differentiate()),
            Expr::Mul(a, b) => add(
                mul(a.differentiate(), (**b).clone()),
                mul((**a).clone(), b.differentiate()),
            ),
            // (u/v)' = (u'v - uv') / v^2
            Expr::Div(a, b) => div(
                sub(
                    mul(a.differentiate(), (**b).clone()),
                    mul((**a).clone(), b.differentiate()),
                ),
                mul((**b).clone(), (**b).clone()),
            ),
            Expr::Pow(a, e) => {
                let du = a.differentiate();
                if *e == 0.0 {
                    Expr::Lit(0.0)
                } else if *e == 1.0 {
                    du
                } else if *e >= 1.0 {
                    // c * u^(c-1) * u'
                    mul(mul(Expr::Lit(*e), pow((**a).clone(), e - 1.0)), du)
                } else {
                    // 0 < c < 1: keep the exponent nonnegative via c*u' / u^(1-c)
                    div(mul(Expr::Lit(*e), du), pow((**a).clone(), 1.0 - e))
                }
            }
            Expr::Exp(a) => mul(Expr::Exp(a.clone()), a.differentiate()),
            // sqrt(u)' = u' / (2 sqrt(u))
            Expr::Sqrt(a) => div(
                a.differentiate(),
                mul(Expr::Lit(2.0), Expr::Sqrt(a.clone())),
            ),
            // cbrt(u)' = u' / (3 cbrt(u)^2)
            Expr::Cbrt(a) => div(
                a.differentiate(),
                mul(Expr::Lit(3.0), pow(Expr::Cbrt(a.clone()), 2.0)),
            ),
        }
    }
}

// Folding constructors used by differentiation. They collapse the additive
// and multiplicative identities and fold literal-literal arithmetic where the
// result stays a valid (nonnegative, finite) literal, so that e.g.
// d/dx (1 + 2*x) comes out as the plain literal `2`.

fn add(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Lit(x), e) if x == 0.0 => e,
        (e, Expr::Lit(x)) if x == 0.0 => e,
        (Expr::Lit(x), Expr::Lit(y)) if (x + y).is_finite() => Expr::Lit(x + y),
        (a, b) => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (e, Expr::Lit(x)) if x == 0.0 => e,
        (Expr::Lit(x), Expr::Lit(y)) if x >= y => Expr::Lit(x - y),
        (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Lit(x), _) if x == 0.0 => Expr::Lit(0.0),
        (_, Expr::Lit(x)) if x == 0.0 => Expr::Lit(0.0),
        (Expr::Lit(x), e) if x == 1.0 => e,
        (e, Expr::Lit(x)) if x == 1.0 => e,
        (Expr::Lit(x), Expr::Lit(y)) if (x * y).is_finite() => Expr::Lit(x * y),
        (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Lit(x), _) if x == 0.0 => Expr::Lit(0.0),
        (e, Expr::Lit(x)) if x == 1.0 => e,
        (Expr::Lit(x), Expr::Lit(y)) if y != 0.0 && (x / y).is_finite() => Expr::Lit(x / y),
        (a, b) => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn pow(base: Expr, e: f64) -> Expr {
    if e == 1.0 {
        return base;
    }
    match base {
        Expr::Lit(x) if x.powf(e).is_finite() => Expr::Lit(x.powf(e)),
        base => Expr::Pow(Box::new(base), e),
    }
}

// Pretty-printer. Parenthesisation follows the left-associative grammar so
// that parsing the printed form reproduces the tree exactly.

#[derive(PartialEq, PartialOrd)]
enum Prec {
    Sum,
    Product,
    Atom,
}

fn prec(e: &Expr) -> Prec {
    match e {
        Expr::Add(..) | Expr::Sub(..) => Prec::Sum,
        Expr::Mul(..) | Expr::Div(..) | Expr::Pow(..) => Prec::Product,
        _ => Prec::Atom,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn paren(f: &mut fmt::Formatter<'_>, e: &Expr, needs: bool) -> fmt::Result {
            if needs {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Var => write!(f, "x"),
            Expr::Lit(v) => write!(f, "{v}"),
            Expr::Add(a, b) => {
                paren(f, a, prec(a) < Prec::Sum)?;
                write!(f, " + ")?;
                // right operand of +/- is a term in the grammar
                paren(f, b, prec(b) <= Prec::Sum)
            }
            Expr::Sub(a, b) => {
                paren(f, a, prec(a) < Prec::Sum)?;
                write!(f, " - ")?;
                paren(f, b, prec(b) <= Prec::Sum)
            }
            Expr::Mul(a, b) => {
                paren(f, a, prec(a) < Prec::Product)?;
                write!(f, "*")?;
                paren(f, b, prec(b) <= Prec::Product && !matches!(**b, Expr::Pow(..)))
            }
            Expr::Div(a, b) => {
                paren(f, a, prec(a) < Prec::Product)?;
                write!(f, "/")?;
                paren(f, b, prec(b) <= Prec::Product && !matches!(**b, Expr::Pow(..)))
            }
            Expr::Pow(a, e) => {
                // the base of ^ must be an atom
                let base_is_atom = matches!(
                    **a,
                    Expr::Var | Expr::Lit(_) | Expr::Exp(_) | Expr::Sqrt(_) | Expr::Cbrt(_)
                );
                paren(f, a, !base_is_atom)?;
                write!(f, "^{e}")
            }
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
            Expr::Cbrt(a) => write!(f, "cbrt({a})"),
        }
    }
}
