//! Problem data model, algebraic lemmas and hypothesis checking.
//!
//! The bound formulas all hinge on two elementary inequalities: the
//! power-sum estimate `(w1 + w2)^g <= 2^(g-1) (w1^g + w2^g)` for `g >= 1`,
//! and Zhao's tangent-line estimate
//! `w^(g2/g1) <= (g2/g1) k^((g2-g1)/g1) w + ((g1-g2)/g1) k^(g2/g1)`
//! for `g1 >= g2 >= 0`, `g1 != 0`, any `k > 0`, with equality at `w = k`.
//! Applying the latter with the various exponent pairs produces the ten zeta
//! coefficients shared by the theorems.

use crate::expr::Expr;
use crate::numerics::uniform_abscissae;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum InequalityError {
    #[error("power-sum lemma needs gamma >= 1, got {gamma}")]
    PowerSumGamma { gamma: f64 },
    #[error("power-sum lemma needs nonnegative arguments, got ({w1}, {w2})")]
    PowerSumNegative { w1: f64, w2: f64 },
    #[error("Zhao's lemma needs gamma1 >= gamma2 >= 0 and gamma1 != 0, got ({gamma1}, {gamma2})")]
    ZhaoExponentOrder { gamma1: f64, gamma2: f64 },
    #[error("Zhao's lemma needs kappa > 0, got {kappa}")]
    ZhaoKappa { kappa: f64 },
    #[error("Zhao's lemma needs omega >= 0, got {omega}")]
    ZhaoNegativeOmega { omega: f64 },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
}

/// Right-hand side of the power-sum lemma, `2^(g-1) (w1^g + w2^g)`.
///
/// Always dominates `(w1 + w2)^g` on the admissible domain.
pub fn power_sum_rhs(w1: f64, w2: f64, gamma: f64) -> Result<f64, InequalityError> {
    if !(gamma >= 1.0) {
        return Err(InequalityError::PowerSumGamma { gamma });
    }
    if w1 < 0.0 || w2 < 0.0 {
        return Err(InequalityError::PowerSumNegative { w1, w2 });
    }
    Ok(2.0_f64.powf(gamma - 1.0) * (w1.powf(gamma) + w2.powf(gamma)))
}

/// Right-hand side of Zhao's lemma,
/// `(g2/g1) k^((g2-g1)/g1) w + ((g1-g2)/g1) k^(g2/g1)`.
///
/// Dominates `w^(g2/g1)` and is tangent to it at `w = kappa`.
pub fn zhao_rhs(omega: f64, gamma1: f64, gamma2: f64, kappa: f64) -> Result<f64, InequalityError> {
    if !(gamma1 >= gamma2 && gamma2 >= 0.0) || gamma1 == 0.0 {
        return Err(InequalityError::ZhaoExponentOrder { gamma1, gamma2 });
    }
    if !(kappa > 0.0) {
        return Err(InequalityError::ZhaoKappa { kappa });
    }
    if omega < 0.0 {
        return Err(InequalityError::ZhaoNegativeOmega { omega });
    }
    Ok(gamma2 / gamma1 * kappa.powf((gamma2 - gamma1) / gamma1) * omega
        + (gamma1 - gamma2) / gamma1 * kappa.powf(gamma2 / gamma1))
}

/// The kappa that makes Zhao's estimate exact at `omega` (the tangency point).
pub fn zhao_tangent_kappa(omega: f64) -> Option<f64> {
    (omega > 0.0 && omega.is_finite()).then_some(omega)
}

/// Exponents of a problem instance. `gamma4` only matters for the
/// outer-power theorem and defaults to 1 elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
}

impl Default for GammaParams {
    fn default() -> Self {
        Self {
            gamma1: 1.0,
            gamma2: 1.0,
            gamma3: 1.0,
            gamma4: 1.0,
        }
    }
}

impl GammaParams {
    pub fn new(gamma1: f64, gamma2: f64, gamma3: f64, gamma4: f64) -> Self {
        Self {
            gamma1,
            gamma2,
            gamma3,
            gamma4,
        }
    }
}

/// Denominator used in the zeta6 coefficient.
///
/// The bound tables state `zeta6 = (gamma3 - 1)/gamma1 * kappa^(1/gamma3)`,
/// which breaks the pattern of the companion coefficients (zeta2 and zeta10
/// divide by their own exponent). Both readings are available; `Gamma1` is
/// the default because it is what is printed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Zeta6Denominator {
    #[default]
    Gamma1,
    Gamma3,
}

/// The ten zeta coefficients, derived from the exponents and a single shared
/// `kappa > 0`.
///
/// Entries are only meaningful under the owning theorem's exponent
/// constraints; e.g. `z5`/`z6` require `gamma3 >= 1` and come out non-finite
/// for `gamma3 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaConstants {
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
    pub z4: f64,
    pub z5: f64,
    pub z6: f64,
    pub z7: f64,
    pub z8: f64,
    pub z9: f64,
    pub z10: f64,
    pub kappa: f64,
}

/// Compute the zeta table for the given exponents and `kappa`.
pub fn zeta_constants(
    gamma: &GammaParams,
    kappa: f64,
    zeta6_denominator: Zeta6Denominator,
) -> ZetaConstants {
    let GammaParams {
        gamma1: g1,
        gamma2: g2,
        gamma3: g3,
        gamma4: g4,
    } = *gamma;
    debug_assert!(kappa > 0.0, "kappa must be positive");
    let z6_denom = match zeta6_denominator {
        Zeta6Denominator::Gamma1 => g1,
        Zeta6Denominator::Gamma3 => g3,
    };
    ZetaConstants {
        z1: 1.0 / g1 * kappa.powf((1.0 - g1) / g1),
        z2: (g1 - 1.0) / g1 * kappa.powf(1.0 / g1),
        z3: g2 / g1 * kappa.powf((g2 - g1) / g1),
        z4: (g1 - g2) / g1 * kappa.powf(g2 / g1),
        z5: 1.0 / g3 * kappa.powf((1.0 - g3) / g3),
        z6: (g3 - 1.0) / z6_denom * kappa.powf(1.0 / g3),
        z7: (g1 - g4) / g1 * kappa.powf(g4 / g1),
        z8: g4 / g1 * kappa.powf((g4 - g1) / g1),
        z9: 1.0 / g2 * kappa.powf((1.0 - g2) / g2),
        z10: (g2 - 1.0) / g2 * kappa.powf(1.0 / g2),
        kappa,
    }
}

/// Which bound theorem a problem instance targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem {
    /// `(u')^g1 <= a + int Psi1 u + int Psi2 (u^g2 + int Psi3 u^g3)^(1/g2)`
    IntegrodiffPower,
    /// `(u')^g1 <= a + int Psi1 u + int Psi2 ((u')^g2 + int Psi3 u)^(1/g3)`
    IntegrodiffMixed,
    /// `u^g1 <= (a + int Psi1 u + int Psi2 (u^g2 + int Psi3 u^g3)^(1/g2))^g4`
    OuterPower,
    /// `u^g1 <= a + int (Psi1 u + Psi2) + int {Psi3 (u^g1 + int (Psi4 u^g2 + Psi5))^(1/g1) + Psi6}`
    Additive,
    /// `u^g1 <= Phi [a + int Psi1 u + int Psi2 (u^g1 + int Psi3 u^g2)^(1/g2)]`
    Factored,
}

impl Theorem {
    pub const ALL: [Theorem; 5] = [
        Theorem::IntegrodiffPower,
        Theorem::IntegrodiffMixed,
        Theorem::OuterPower,
        Theorem::Additive,
        Theorem::Factored,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Theorem::IntegrodiffPower => "integrodiff_power",
            Theorem::IntegrodiffMixed => "integrodiff_mixed",
            Theorem::OuterPower => "outer_power",
            Theorem::Additive => "additive",
            Theorem::Factored => "factored",
        }
    }

    pub fn from_name(name: &str) -> Option<Theorem> {
        Theorem::ALL.iter().copied().find(|t| t.name() == name)
    }

    /// The integro-differential bounds carry suspected misprints, so their
    /// dominance checks default to report-only.
    pub fn default_dominance_is_strict(&self) -> bool {
        !matches!(
            self,
            Theorem::IntegrodiffPower | Theorem::IntegrodiffMixed
        )
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A full problem instance: data functions, exponents, `kappa` and horizon.
#[derive(Debug, Clone)]
pub struct InequalityProblem {
    /// Forcing `a`.
    pub forcing: Expr,
    /// Retardation `f`, with `f(0) = 0`.
    pub retardation: Expr,
    /// Factor `Phi` (only the factored theorem reads it).
    pub factor: Expr,
    /// Kernels `Psi1..Psi6`; unused ones stay at the zero default.
    pub kernels: [Expr; 6],
    pub gamma: GammaParams,
    pub kappa: f64,
    /// Horizon `T > 0`; all checks and curves live on `[0, T]`.
    pub horizon: f64,
}

impl InequalityProblem {
    /// A problem with identity retardation, unit forcing and factor, zero
    /// kernels, unit exponents and `kappa = 1` on the given horizon.
    pub fn with_defaults(horizon: f64) -> Self {
        Self {
            forcing: Expr::lit(1.0),
            retardation: Expr::var(),
            factor: Expr::lit(1.0),
            kernels: std::array::from_fn(|_| Expr::lit(0.0)),
            gamma: GammaParams::default(),
            kappa: 1.0,
            horizon,
        }
    }

    pub fn kernel(&self, index: usize) -> &Expr {
        &self.kernels[index - 1]
    }

    /// Structural validity: positive finite horizon and kappa, nonnegative
    /// finite exponents with `gamma1 > 0`, and `f(0) = 0` within 1e-12.
    pub fn validate(&self) -> Result<(), InequalityError> {
        let bad = |msg: String| Err(InequalityError::InvalidProblem(msg));
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return bad(format!("kappa must be positive, got {}", self.kappa));
        }
        let g = &self.gamma;
        for (name, v) in [
            ("gamma1", g.gamma1),
            ("gamma2", g.gamma2),
            ("gamma3", g.gamma3),
            ("gamma4", g.gamma4),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if g.gamma1 <= 0.0 {
            return bad("gamma1 must be positive".to_string());
        }
        match self.retardation.eval(0.0) {
            Ok(f0) if f0.abs() <= 1e-12 => Ok(()),
            Ok(f0) => bad(format!("retardation must vanish at 0, got f(0) = {f0}")),
            Err(e) => bad(format!("retardation not evaluable at 0: {e}")),
        }
    }

    pub fn zetas(&self, zeta6_denominator: Zeta6Denominator) -> ZetaConstants {
        zeta_constants(&self.gamma, self.kappa, zeta6_denominator)
    }
}

/// Outcome of a single hypothesis check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HypothesisStatus {
    Holds,
    /// Violated, but tolerated so the bound can still be evaluated (the
    /// worked instances themselves violate `a >= 1` near zero).
    Warning,
    Violated,
}

#[derive(Debug, Clone)]
pub struct HypothesisCheck {
    pub name: &'static str,
    pub status: HypothesisStatus,
    /// First grid point where the hypothesis fails, if it does.
    pub first_failure: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct HypothesisReport {
    pub theorem: Theorem,
    pub checks: Vec<HypothesisCheck>,
}

impl HypothesisReport {
    pub fn hard_failure(&self) -> Option<&HypothesisCheck> {
        self.checks
            .iter()
            .find(|c| c.status == HypothesisStatus::Violated)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &HypothesisCheck> {
        self.checks
            .iter()
            .filter(|c| c.status == HypothesisStatus::Warning)
    }
}

/// Number of sample points used by [`check_hypotheses`].
pub const HYPOTHESIS_GRID: usize = 512;

/// Evaluate the selected theorem's hypotheses on a 512-point grid over
/// `[0, T]`.
///
/// `a >= 1` (and `Phi >= 1`) violations are warnings, matching the worked
/// instances which break them near zero. `f <= delta` violations are
/// warnings while `f` stays within the horizon, and hard violations once
/// `f(delta) > T` (the retarded history would leave the computational
/// domain). Non-evaluable functions and decreasing retardations are hard
/// violations.
pub fn check_hypotheses(p: &InequalityProblem, theorem: Theorem) -> HypothesisReport {
    let xs = uniform_abscissae(0.0, p.horizon, HYPOTHESIS_GRID);
    let mut checks = Vec::new();

    let eval_all = |e: &Expr| -> Result<Vec<f64>, f64> {
        xs.iter()
            .map(|&x| e.eval(x).map_err(|_| x))
            .collect::<Result<Vec<_>, _>>()
    };

    // retardation: f(0) = 0, nondecreasing, f <= delta / within horizon
    match eval_all(&p.retardation) {
        Err(x) => {
            checks.push(HypothesisCheck {
                name: "f evaluable on [0, T]",
                status: HypothesisStatus::Violated,
                first_failure: Some(x),
            });
        }
        Ok(fv) => {
            let f0_ok = fv[0].abs() <= 1e-12;
            checks.push(HypothesisCheck {
                name: "f(0) = 0",
                status: if f0_ok {
                    HypothesisStatus::Holds
                } else {
                    HypothesisStatus::Violated
                },
                first_failure: (!f0_ok).then_some(0.0),
            });
            let nondecr = fv.windows(2).position(|w| w[1] < w[0]);
            checks.push(HypothesisCheck {
                name: "f nondecreasing",
                status: if nondecr.is_none() {
                    HypothesisStatus::Holds
                } else {
                    HypothesisStatus::Violated
                },
                first_failure: nondecr.map(|i| xs[i + 1]),
            });
            // f(delta) <= delta checked away from the origin, where equality
            // holds by f(0) = 0
            let first_above = (1..xs.len()).find(|&i| fv[i] > xs[i]);
            let escapes = fv.iter().any(|&v| v > p.horizon);
            let status = match (first_above, escapes) {
                (None, _) => HypothesisStatus::Holds,
                (Some(_), false) => HypothesisStatus::Warning,
                (Some(_), true) => HypothesisStatus::Violated,
            };
            checks.push(HypothesisCheck {
                name: "f(delta) <= delta",
                status,
                first_failure: first_above.map(|i| xs[i]),
            });
        }
    }

    // forcing: nondecreasing and >= 1, both warning-level
    match eval_all(&p.forcing) {
        Err(x) => {
            checks.push(HypothesisCheck {
                name: "a evaluable on [0, T]",
                status: HypothesisStatus::Violated,
                first_failure: Some(x),
            });
        }
        Ok(av) => {
            let nondecr = av.windows(2).position(|w| w[1] < w[0]);
            checks.push(HypothesisCheck {
                name: "a nondecreasing",
                status: if nondecr.is_none() {
                    HypothesisStatus::Holds
                } else {
                    HypothesisStatus::Warning
                },
                first_failure: nondecr.map(|i| xs[i + 1]),
            });
            let below = av.iter().position(|&v| v < 1.0);
            checks.push(HypothesisCheck {
                name: "a(delta) >= 1",
                status: if below.is_none() {
                    HypothesisStatus::Holds
                } else {
                    HypothesisStatus::Warning
                },
                first_failure: below.map(|i| xs[i]),
            });
        }
    }

    if theorem == Theorem::Factored {
        match eval_all(&p.factor) {
            Err(x) => {
                checks.push(HypothesisCheck {
                    name: "Phi evaluable on [0, T]",
                    status: HypothesisStatus::Violated,
                    first_failure: Some(x),
                });
            }
            Ok(pv) => {
                let below = pv.iter().position(|&v| v < 1.0);
                checks.push(HypothesisCheck {
                    name: "Phi(delta) >= 1",
                    status: if below.is_none() {
                        HypothesisStatus::Holds
                    } else {
                        HypothesisStatus::Warning
                    },
                    first_failure: below.map(|i| xs[i]),
                });
                let nondecr = pv.windows(2).position(|w| w[1] < w[0]);
                checks.push(HypothesisCheck {
                    name: "Phi nondecreasing",
                    status: if nondecr.is_none() {
                        HypothesisStatus::Holds
                    } else {
                        HypothesisStatus::Warning
                    },
                    first_failure: nondecr.map(|i| xs[i + 1]),
                });
            }
        }
    }

    // exponent constraints of the selected theorem
    let g = &p.gamma;
    let (name, ok): (&'static str, bool) = match theorem {
        Theorem::IntegrodiffPower => (
            "gamma1 >= 1, gamma2 >= 2, gamma3 >= 1, gamma2 != gamma3",
            g.gamma1 >= 1.0 && g.gamma2 >= 2.0 && g.gamma3 >= 1.0 && g.gamma2 != g.gamma3,
        ),
        Theorem::IntegrodiffMixed => (
            "gamma1 >= gamma2 >= 1, gamma3 >= 1",
            g.gamma1 >= g.gamma2 && g.gamma2 >= 1.0 && g.gamma3 >= 1.0,
        ),
        Theorem::OuterPower => (
            "gamma1 >= gamma4 > 0, gamma2 > gamma3 >= 0",
            g.gamma1 >= g.gamma4 && g.gamma4 > 0.0 && g.gamma2 > g.gamma3 && g.gamma3 >= 0.0,
        ),
        Theorem::Additive | Theorem::Factored => (
            "gamma1 >= gamma2 >= 1",
            g.gamma1 >= g.gamma2 && g.gamma2 >= 1.0,
        ),
    };
    checks.push(HypothesisCheck {
        name,
        status: if ok {
            HypothesisStatus::Holds
        } else {
            HypothesisStatus::Violated
        },
        first_failure: None,
    });

    HypothesisReport { theorem, checks }
}
