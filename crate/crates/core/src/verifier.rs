//! Saturated solutions, dominance checks and reduction certification.
//!
//! The sharpest numerical test of a bound theorem replaces `<=` with `=` in
//! its hypothesis and solves the resulting retarded Volterra equation: no
//! admissible trajectory can exceed that saturated solution, so the explicit
//! bound must dominate it pointwise. Saturated solutions are computed by
//! Picard iteration on a uniform grid with trapezoidal inner integrals;
//! retarded reads `u(f(theta))` interpolate the current iterate linearly.
//! Sweeps are Jacobi style (each new iterate is built entirely from the
//! previous one), which stays well defined even where `f(delta) > delta`,
//! as happens near zero for the worked instances.

use crate::bounds::{bound_at, bound_bellman, bound_pachpatte, BoundCurve, BoundError, EvalOptions};
use crate::expr::{parse_expr, EvalError, Expr};
use crate::inequality::{GammaParams, InequalityProblem, Theorem};
use crate::numerics::{uniform_abscissae, Grid, NumericsError};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum VerifierError {
    #[error("Picard iteration did not converge in {max_sweeps} sweeps; last residual {last:?}")]
    NonConvergence { max_sweeps: usize, last: Option<f64>, residuals: Vec<f64> },
    #[error("iterate exceeded {threshold}; blow-up detected, last finite delta = {last_finite_delta}")]
    BlowUp { threshold: f64, last_finite_delta: f64 },
    #[error("iterate became non-finite at delta = {delta}")]
    NonFiniteIterate { delta: f64 },
    #[error("saturated solver needs n >= 64 grid points, got {n}")]
    GridTooSmall { n: usize },
    #[error("retardation leaves the horizon: f({delta}) = {value} > {horizon}")]
    RetardationEscapes { delta: f64, value: f64, horizon: f64 },
    #[error("trajectory and bound curve do not share abscissae")]
    GridMismatch,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Bound(#[from] BoundError),
}

/// Integral-form hypotheses solvable in saturated form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegralForm {
    OuterPower,
    Additive,
    Factored,
}

/// Integro-differential hypotheses solvable in saturated form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrodiffForm {
    /// `(u')^g1 = a + int Psi1 u + int Psi2 (u^g2 + int Psi3 u^g3)^(1/g2)`
    UPower,
    /// `(u')^g1 = a + int Psi1 u + int Psi2 ((u')^g2 + int Psi3 u)^(1/g3)`
    Mixed,
}

/// Stopping rules for the Picard sweeps.
#[derive(Debug, Clone, Copy)]
pub struct PicardConfig {
    /// Sup-norm change between sweeps that counts as converged.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Any iterate value beyond this aborts with a blow-up report.
    pub blowup_threshold: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_sweeps: 200,
            blowup_threshold: 1e12,
        }
    }
}

/// A converged saturated solution.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: Grid,
    pub iterations: usize,
    /// Sup-norm change of the final sweep.
    pub residual: f64,
}

/// Successive iterates and residuals, for convergence diagnostics.
#[derive(Debug, Clone)]
pub struct PicardTrace {
    pub iterates: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
}

fn cumtrapz(xs: &[f64], g: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(g.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..g.len() {
        acc += 0.5 * (g[i - 1] + g[i]) * (xs[i] - xs[i - 1]);
        out.push(acc);
    }
    out
}

// Clamped linear interpolation over sorted abscissae.
fn lerp(xs: &[f64], vals: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return vals[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return vals[last];
    }
    let idx = match xs.binary_search_by(|a| a.partial_cmp(&x).unwrap()) {
        Ok(i) => return vals[i],
        Err(i) => i,
    };
    let t = (x - xs[idx - 1]) / (xs[idx] - xs[idx - 1]);
    vals[idx - 1] + t * (vals[idx] - vals[idx - 1])
}

// Node-sampled problem data shared by the sweep loops.
struct Sampled {
    xs: Vec<f64>,
    a: Vec<f64>,
    f: Vec<f64>,
    phi: Vec<f64>,
    psi: [Vec<f64>; 6],
}

fn sample_problem(p: &InequalityProblem, n: usize) -> Result<Sampled, VerifierError> {
    if n < 64 {
        return Err(VerifierError::GridTooSmall { n });
    }
    p.validate().map_err(BoundError::Problem)?;
    let xs = uniform_abscissae(0.0, p.horizon, n);
    let eval_on = |e: &Expr| -> Result<Vec<f64>, VerifierError> {
        xs.iter().map(|&x| e.eval(x).map_err(Into::into)).collect()
    };
    let f = eval_on(&p.retardation)?;
    for (i, &fi) in f.iter().enumerate() {
        if fi > p.horizon * (1.0 + 1e-12) {
            return Err(VerifierError::RetardationEscapes {
                delta: xs[i],
                value: fi,
                horizon: p.horizon,
            });
        }
    }
    Ok(Sampled {
        a: eval_on(&p.forcing)?,
        phi: eval_on(&p.factor)?,
        psi: [
            eval_on(&p.kernels[0])?,
            eval_on(&p.kernels[1])?,
            eval_on(&p.kernels[2])?,
            eval_on(&p.kernels[3])?,
            eval_on(&p.kernels[4])?,
            eval_on(&p.kernels[5])?,
        ],
        xs,
        f,
    })
}

fn powv(v: &[f64], e: f64) -> Vec<f64> {
    if e == 1.0 {
        v.to_vec()
    } else {
        v.iter().map(|&u| u.powf(e)).collect()
    }
}

fn guard_iterate(xs: &[f64], u: &[f64], cfg: &PicardConfig) -> Result<(), VerifierError> {
    for (i, &v) in u.iter().enumerate() {
        if !v.is_finite() {
            return Err(VerifierError::NonFiniteIterate { delta: xs[i] });
        }
        if v.abs() > cfg.blowup_threshold {
            return Err(VerifierError::BlowUp {
                threshold: cfg.blowup_threshold,
                last_finite_delta: if i == 0 { 0.0 } else { xs[i - 1] },
            });
        }
    }
    Ok(())
}

fn run_picard(
    s: &Sampled,
    cfg: &PicardConfig,
    mut sweep: impl FnMut(&[f64]) -> Vec<f64>,
) -> Result<(Trajectory, PicardTrace), VerifierError> {
    let n = s.xs.len();
    let mut u = vec![0.0; n];
    let mut trace = PicardTrace {
        iterates: Vec::new(),
        residuals: Vec::new(),
    };
    for sweep_no in 1..=cfg.max_sweeps {
        let next = sweep(&u);
        guard_iterate(&s.xs, &next, cfg)?;
        let residual = u
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        trace.iterates.push(next.clone());
        trace.residuals.push(residual);
        u = next;
        if residual <= cfg.tol {
            let grid = Grid::new(s.xs.clone(), u)?;
            return Ok((
                Trajectory {
                    grid,
                    iterations: sweep_no,
                    residual,
                },
                trace,
            ));
        }
    }
    Err(VerifierError::NonConvergence {
        max_sweeps: cfg.max_sweeps,
        last: trace.residuals.last().copied(),
        residuals: trace.residuals,
    })
}

/// Solve the saturated integral-form hypothesis on an `n`-point uniform grid.
pub fn solve_saturated_integral(
    p: &InequalityProblem,
    form: IntegralForm,
    n: usize,
    cfg: &PicardConfig,
) -> Result<Trajectory, VerifierError> {
    solve_saturated_integral_traced(p, form, n, cfg).map(|(t, _)| t)
}

/// Like [`solve_saturated_integral`], also returning the Picard iterates.
pub fn solve_saturated_integral_traced(
    p: &InequalityProblem,
    form: IntegralForm,
    n: usize,
    cfg: &PicardConfig,
) -> Result<(Trajectory, PicardTrace), VerifierError> {
    let s = sample_problem(p, n)?;
    let g = p.gamma;
    let sweep = |u: &[f64]| -> Vec<f64> {
        match form {
            IntegralForm::OuterPower => {
                let inner3 = cumtrapz(&s.xs, &mul(&s.psi[2], &powv(u, g.gamma3)));
                let integrand2: Vec<f64> = (0..u.len())
                    .map(|j| s.psi[1][j] * (u[j].powf(g.gamma2) + inner3[j]).powf(1.0 / g.gamma2))
                    .collect();
                let cum1 = cumtrapz(&s.xs, &mul(&s.psi[0], u));
                let cum2 = cumtrapz(&s.xs, &integrand2);
                (0..u.len())
                    .map(|i| {
                        let rhs =
                            s.a[i] + lerp(&s.xs, &cum1, s.f[i]) + lerp(&s.xs, &cum2, s.f[i]);
                        rhs.powf(g.gamma4 / g.gamma1)
                    })
                    .collect()
            }
            IntegralForm::Additive => {
                let inner45 = cumtrapz(
                    &s.xs,
                    &(0..u.len())
                        .map(|j| s.psi[3][j] * u[j].powf(g.gamma2) + s.psi[4][j])
                        .collect::<Vec<_>>(),
                );
                let integrand_b: Vec<f64> = (0..u.len())
                    .map(|j| {
                        s.psi[2][j] * (u[j].powf(g.gamma1) + inner45[j]).powf(1.0 / g.gamma1)
                            + s.psi[5][j]
                    })
                    .collect();
                let integrand_a: Vec<f64> = (0..u.len())
                    .map(|j| s.psi[0][j] * u[j] + s.psi[1][j])
                    .collect();
                let cum_a = cumtrapz(&s.xs, &integrand_a);
                let cum_b = cumtrapz(&s.xs, &integrand_b);
                (0..u.len())
                    .map(|i| {
                        let rhs =
                            s.a[i] + lerp(&s.xs, &cum_a, s.f[i]) + lerp(&s.xs, &cum_b, s.f[i]);
                        rhs.powf(1.0 / g.gamma1)
                    })
                    .collect()
            }
            IntegralForm::Factored => {
                let inner3 = cumtrapz(&s.xs, &mul(&s.psi[2], &powv(u, g.gamma2)));
                let integrand2: Vec<f64> = (0..u.len())
                    .map(|j| s.psi[1][j] * (u[j].powf(g.gamma1) + inner3[j]).powf(1.0 / g.gamma2))
                    .collect();
                let cum1 = cumtrapz(&s.xs, &mul(&s.psi[0], u));
                let cum2 = cumtrapz(&s.xs, &integrand2);
                (0..u.len())
                    .map(|i| {
                        let rhs = s.phi[i]
                            * (s.a[i]
                                + lerp(&s.xs, &cum1, s.f[i])
                                + lerp(&s.xs, &cum2, s.f[i]));
                        rhs.powf(1.0 / g.gamma1)
                    })
                    .collect()
            }
        }
    };
    run_picard(&s, cfg, sweep)
}

fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

/// Solve the saturated integro-differential hypothesis, `u(0) = 0`.
///
/// The derivative is recovered as `u' = RHS^(1/g1)` from the previous
/// iterate and integrated forward by the trapezoidal rule; the mixed form
/// keeps the previous derivative history as well, since its right-hand side
/// reads `(u')^g2` inside the integral.
pub fn solve_saturated_integrodiff(
    p: &InequalityProblem,
    form: IntegrodiffForm,
    n: usize,
    cfg: &PicardConfig,
) -> Result<Trajectory, VerifierError> {
    solve_saturated_integrodiff_traced(p, form, n, cfg).map(|(t, _)| t)
}

/// Like [`solve_saturated_integrodiff`], also returning the Picard iterates.
pub fn solve_saturated_integrodiff_traced(
    p: &InequalityProblem,
    form: IntegrodiffForm,
    n: usize,
    cfg: &PicardConfig,
) -> Result<(Trajectory, PicardTrace), VerifierError> {
    let s = sample_problem(p, n)?;
    let g = p.gamma;
    // the mixed form reads the previous derivative history inside its
    // integral, so the sweep carries both u and u'
    let mut state_du: Vec<f64> = vec![0.0; s.xs.len()];
    run_picard(&s, cfg, |u| {
        let inner3 = match form {
            IntegrodiffForm::UPower => cumtrapz(&s.xs, &mul(&s.psi[2], &powv(u, g.gamma3))),
            IntegrodiffForm::Mixed => cumtrapz(&s.xs, &mul(&s.psi[2], u)),
        };
        let integrand2: Vec<f64> = (0..u.len())
            .map(|j| match form {
                IntegrodiffForm::UPower => {
                    s.psi[1][j] * (u[j].powf(g.gamma2) + inner3[j]).powf(1.0 / g.gamma2)
                }
                IntegrodiffForm::Mixed => {
                    s.psi[1][j] * (state_du[j].powf(g.gamma2) + inner3[j]).powf(1.0 / g.gamma3)
                }
            })
            .collect();
        let cum1 = cumtrapz(&s.xs, &mul(&s.psi[0], u));
        let cum2 = cumtrapz(&s.xs, &integrand2);
        let new_du: Vec<f64> = (0..u.len())
            .map(|i| {
                let rhs = s.a[i] + lerp(&s.xs, &cum1, s.f[i]) + lerp(&s.xs, &cum2, s.f[i]);
                rhs.powf(1.0 / g.gamma1)
            })
            .collect();
        let new_u = cumtrapz(&s.xs, &new_du);
        state_du = new_du;
        new_u
    })
}

/// Outcome of a dominance comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Violated,
    /// A violation was found but the check ran in report-only mode.
    ReportOnly,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::ReportOnly => "report-only",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DominanceMode {
    Strict,
    ReportOnly,
}

/// Pointwise margins `bound - u_sat` and the resulting verdict.
#[derive(Debug, Clone)]
pub struct DominanceReport {
    pub margins: Vec<f64>,
    pub min_margin: f64,
    pub min_margin_delta: f64,
    /// First grid point where the margin drops below `-slack`.
    pub first_violation: Option<f64>,
    pub slack: f64,
    pub verdict: Verdict,
    /// Hypothesis warnings carried alongside the verdict.
    pub hypothesis_warnings: Vec<String>,
}

/// Compare a saturated trajectory against a bound curve on shared abscissae.
///
/// The slack is `1e-8 * max(1, bound scale)`. In strict mode a margin below
/// `-slack` yields [`Verdict::Violated`]; report-only mode records it as
/// [`Verdict::ReportOnly`] instead.
pub fn check_dominance(
    trajectory: &Trajectory,
    bound: &BoundCurve,
    mode: DominanceMode,
) -> Result<DominanceReport, VerifierError> {
    let tx = trajectory.grid.abscissae();
    let bx = bound.grid.abscissae();
    if tx.len() != bx.len()
        || tx
            .iter()
            .zip(bx)
            .any(|(a, b)| (a - b).abs() > 1e-9 * (1.0 + a.abs().max(b.abs())))
    {
        return Err(VerifierError::GridMismatch);
    }
    let margins: Vec<f64> = bound
        .grid
        .values()
        .iter()
        .zip(trajectory.grid.values())
        .map(|(b, u)| b - u)
        .collect();
    let scale = bound
        .grid
        .values()
        .iter()
        .fold(1.0_f64, |m, v| m.max(v.abs()));
    let slack = 1e-8 * scale;
    let (mut min_margin, mut min_idx) = (f64::INFINITY, 0);
    for (i, &m) in margins.iter().enumerate() {
        if m < min_margin {
            min_margin = m;
            min_idx = i;
        }
    }
    let first_violation = margins
        .iter()
        .position(|&m| m < -slack)
        .map(|i| tx[i]);
    let verdict = if min_margin >= -slack {
        Verdict::Holds
    } else {
        match mode {
            DominanceMode::Strict => Verdict::Violated,
            DominanceMode::ReportOnly => Verdict::ReportOnly,
        }
    };
    Ok(DominanceReport {
        margins,
        min_margin,
        min_margin_delta: tx[min_idx],
        first_violation,
        slack,
        verdict,
        hypothesis_warnings: Vec::new(),
    })
}

/// The parameter substitutions that collapse the general bounds onto the
/// classical oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    T1ToBellman,
    T4ToPachpatte,
    T5ToBellman,
    T1ToBainov,
    T4ToBainov,
    T5ToPachpatte,
}

impl Reduction {
    pub const ALL: [Reduction; 6] = [
        Reduction::T1ToBellman,
        Reduction::T4ToPachpatte,
        Reduction::T5ToBellman,
        Reduction::T1ToBainov,
        Reduction::T4ToBainov,
        Reduction::T5ToPachpatte,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Reduction::T1ToBellman => "t1_to_bellman",
            Reduction::T4ToPachpatte => "t4_to_pachpatte",
            Reduction::T5ToBellman => "t5_to_bellman",
            Reduction::T1ToBainov => "t1_to_bainov",
            Reduction::T4ToBainov => "t4_to_bainov",
            Reduction::T5ToPachpatte => "t5_to_pachpatte",
        }
    }
}

/// Classical oracle an instance is compared against.
#[derive(Debug, Clone)]
pub enum OracleSpec {
    Bellman { c: f64, kernel: Expr },
    Pachpatte { c: f64, w: Expr, w_tilde: Expr },
}

impl OracleSpec {
    pub fn eval(&self, delta: f64, opts: &EvalOptions) -> Result<f64, BoundError> {
        match self {
            OracleSpec::Bellman { c, kernel } => {
                bound_bellman(*c, kernel, delta, &opts.quadrature)
            }
            OracleSpec::Pachpatte { c, w, w_tilde } => {
                bound_pachpatte(*c, w, w_tilde, delta, &opts.quadrature)
            }
        }
    }
}

/// A concrete problem/oracle pair for a reduction check.
#[derive(Debug, Clone)]
pub struct ReductionInstance {
    pub problem: InequalityProblem,
    pub theorem: Theorem,
    pub oracle: OracleSpec,
    pub oracle_label: &'static str,
}

/// The built-in instance exercising a reduction.
///
/// The two `*_to_bainov` rows target a theorem whose statement is not
/// restated alongside the reductions, so they are certified against the
/// Bellman oracle with the two active kernels merged, and labeled as such.
/// The Pachpatte rows likewise merge the outer and inner kernels (and zero
/// the trailing one), which is exactly the substitution under which the
/// Pachpatte expression coincides with the general bound.
pub fn reduction_instance(reduction: Reduction) -> ReductionInstance {
    let e = |s: &str| parse_expr(s).expect("static expression");
    let mut p = InequalityProblem::with_defaults(1.0);
    match reduction {
        Reduction::T1ToBellman => {
            p.forcing = e("2");
            p.gamma = GammaParams::new(1.0, 2.0, 1.0, 1.0);
            p.kernels[0] = e("1 + x");
            ReductionInstance {
                problem: p,
                theorem: Theorem::OuterPower,
                oracle: OracleSpec::Bellman {
                    c: 2.0,
                    kernel: e("1 + x"),
                },
                oracle_label: "bellman",
            }
        }
        Reduction::T1ToBainov => {
            p.forcing = e("1.5");
            p.gamma = GammaParams::new(1.0, 2.0, 1.0, 1.0);
            p.kernels[1] = e("2*x");
            ReductionInstance {
                problem: p,
                theorem: Theorem::OuterPower,
                oracle: OracleSpec::Bellman {
                    c: 1.5,
                    kernel: e("2*x"),
                },
                oracle_label: "bellman, merged kernel psi2+psi3",
            }
        }
        Reduction::T4ToPachpatte => {
            p.kernels[2] = e("1");
            p.kernels[3] = e("1");
            ReductionInstance {
                problem: p,
                theorem: Theorem::Additive,
                oracle: OracleSpec::Pachpatte {
                    c: 1.0,
                    w: e("2"),
                    w_tilde: Expr::lit(0.0),
                },
                oracle_label: "pachpatte, merged kernel psi3+psi4",
            }
        }
        Reduction::T4ToBainov => {
            p.forcing = e("2");
            p.kernels[2] = e("x");
            p.kernels[3] = e("1");
            ReductionInstance {
                problem: p,
                theorem: Theorem::Additive,
                oracle: OracleSpec::Bellman {
                    c: 2.0,
                    kernel: e("x + 1"),
                },
                oracle_label: "bellman, merged kernel psi3+psi4",
            }
        }
        Reduction::T5ToBellman => {
            p.forcing = e("3");
            p.kernels[0] = e("0.5 + x");
            ReductionInstance {
                problem: p,
                theorem: Theorem::Factored,
                oracle: OracleSpec::Bellman {
                    c: 3.0,
                    kernel: e("0.5 + x"),
                },
                oracle_label: "bellman",
            }
        }
        Reduction::T5ToPachpatte => {
            p.kernels[1] = e("1");
            p.kernels[2] = e("1");
            ReductionInstance {
                problem: p,
                theorem: Theorem::Factored,
                oracle: OracleSpec::Pachpatte {
                    c: 1.0,
                    w: e("2"),
                    w_tilde: Expr::lit(0.0),
                },
                oracle_label: "pachpatte, merged kernel psi2+psi3",
            }
        }
    }
}

/// Result of one reduction row.
#[derive(Debug, Clone)]
pub struct ReductionReport {
    pub name: &'static str,
    pub oracle_label: String,
    pub max_rel_dev: f64,
    pub worst_delta: f64,
    pub tol: f64,
    pub pass: bool,
}

fn rel_dev(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Evaluate one reduction instance on the given abscissae.
pub fn check_reduction_instance(
    name: &'static str,
    instance: &ReductionInstance,
    deltas: &[f64],
    tol: f64,
    opts: &EvalOptions,
) -> Result<ReductionReport, VerifierError> {
    let mut max_rel_dev = 0.0_f64;
    let mut worst_delta = deltas.first().copied().unwrap_or(0.0);
    for &d in deltas {
        let general = bound_at(&instance.problem, instance.theorem, d, opts)?;
        let oracle = instance.oracle.eval(d, opts)?;
        let dev = rel_dev(general, oracle);
        if dev > max_rel_dev {
            max_rel_dev = dev;
            worst_delta = d;
        }
    }
    Ok(ReductionReport {
        name,
        oracle_label: instance.oracle_label.to_string(),
        max_rel_dev,
        worst_delta,
        tol,
        pass: max_rel_dev <= tol,
    })
}

/// Run a built-in reduction on the given abscissae.
pub fn check_reduction(
    reduction: Reduction,
    deltas: &[f64],
    tol: f64,
    opts: &EvalOptions,
) -> Result<ReductionReport, VerifierError> {
    let instance = reduction_instance(reduction);
    check_reduction_instance(reduction.name(), &instance, deltas, tol, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::bound_curve;
    use crate::instances::example1_problem;
    use approx::assert_relative_eq;

    fn cfg() -> PicardConfig {
        PicardConfig::default()
    }

    #[test]
    fn example1_saturated_starts_at_zero() {
        let p = example1_problem();
        let t = solve_saturated_integral(&p, IntegralForm::OuterPower, 64, &cfg()).unwrap();
        assert_eq!(t.grid.values()[0], 0.0);
        assert!(t.residual <= cfg().tol);
    }

    #[test]
    fn constant_problem_has_immediate_fixed_point() {
        // all kernels zero, a = c, gamma1 = gamma4: u = c^(gamma4/gamma1) = c
        let mut p = InequalityProblem::with_defaults(1.0);
        p.forcing = Expr::lit(1.0);
        p.gamma = GammaParams::new(2.0, 3.0, 1.0, 2.0);
        let t = solve_saturated_integral(&p, IntegralForm::OuterPower, 64, &cfg()).unwrap();
        for &v in t.grid.values() {
            assert_relative_eq!(v, 1.0, epsilon = 1e-12);
        }
        assert!(t.iterations <= 2);
    }

    #[test]
    fn bellman_saturated_matches_exponential() {
        // u = 1 + int_0^delta u has the exact solution e^delta
        let mut p = InequalityProblem::with_defaults(1.0);
        p.gamma = GammaParams::new(1.0, 2.0, 1.0, 1.0);
        p.kernels[0] = Expr::lit(1.0);
        let t = solve_saturated_integral(&p, IntegralForm::OuterPower, 512, &cfg()).unwrap();
        for (x, u) in t.grid.points() {
            assert_relative_eq!(u, x.exp(), max_relative = 1e-5);
        }
    }

    #[test]
    fn integrodiff_trivial_solutions() {
        // a = 1, kernels 0: u' = 1 so u = delta, for either gamma1
        for g1 in [1.0, 2.0] {
            let mut p = InequalityProblem::with_defaults(1.0);
            p.gamma = GammaParams::new(g1, 2.0, 1.0, 1.0);
            let t = solve_saturated_integrodiff(&p, IntegrodiffForm::UPower, 64, &cfg()).unwrap();
            for (x, u) in t.grid.points() {
                assert_relative_eq!(u, x, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn integrodiff_grid_refinement_consistency() {
        let mut p = InequalityProblem::with_defaults(1.0);
        p.retardation = parse_expr("x/2").unwrap();
        p.gamma = GammaParams::new(1.0, 3.0, 1.0, 1.0);
        p.kernels[0] = Expr::lit(1.0);
        let coarse = solve_saturated_integrodiff(&p, IntegrodiffForm::UPower, 256, &cfg()).unwrap();
        let fine = solve_saturated_integrodiff(&p, IntegrodiffForm::UPower, 512, &cfg()).unwrap();
        let at_end = |t: &Trajectory| *t.grid.values().last().unwrap();
        assert_relative_eq!(at_end(&coarse), at_end(&fine), max_relative = 1e-4);
    }

    #[test]
    fn blow_up_is_detected_on_extended_horizon() {
        let mut p = InequalityProblem::with_defaults(3.0);
        p.forcing = parse_expr("exp(10*x)").unwrap();
        match solve_saturated_integral(&p, IntegralForm::Additive, 128, &cfg()) {
            Err(VerifierError::BlowUp {
                last_finite_delta, ..
            }) => {
                assert!(last_finite_delta < 3.0);
            }
            other => panic!("expected BlowUp, got {other:?}"),
        }
        // the same forcing completes on a short horizon
        p.horizon = 1.0;
        assert!(solve_saturated_integral(&p, IntegralForm::Additive, 128, &cfg()).is_ok());
    }

    #[test]
    fn solver_rejects_tiny_grids() {
        let p = InequalityProblem::with_defaults(1.0);
        assert!(matches!(
            solve_saturated_integral(&p, IntegralForm::Additive, 10, &cfg()),
            Err(VerifierError::GridTooSmall { n: 10 })
        ));
    }

    #[test]
    fn dominance_scaled_bound_always_holds() {
        let mut p = InequalityProblem::with_defaults(1.0);
        p.gamma = GammaParams::new(1.0, 2.0, 1.0, 1.0);
        p.kernels[0] = Expr::lit(1.0);
        let n = 65;
        let t = solve_saturated_integral(&p, IntegralForm::OuterPower, n, &cfg()).unwrap();
        let curve = bound_curve(
            &p,
            Theorem::OuterPower,
            0.0,
            1.0,
            n,
            &EvalOptions::default(),
        )
        .unwrap();
        let scaled = BoundCurve {
            grid: Grid::new(
                curve.grid.abscissae().to_vec(),
                curve.grid.values().iter().map(|v| v * 2.0).collect(),
            )
            .unwrap(),
            ..curve
        };
        let report = check_dominance(&t, &scaled, DominanceMode::Strict).unwrap();
        assert_eq!(report.verdict, Verdict::Holds);
        assert!(report.min_margin > 0.0);
    }

    #[test]
    fn dominance_grid_mismatch_is_an_error() {
        let mut p = InequalityProblem::with_defaults(1.0);
        p.kernels[0] = Expr::lit(1.0);
        p.gamma = GammaParams::new(1.0, 2.0, 1.0, 1.0);
        let t = solve_saturated_integral(&p, IntegralForm::OuterPower, 65, &cfg()).unwrap();
        let curve = bound_curve(
            &p,
            Theorem::OuterPower,
            0.0,
            1.0,
            33,
            &EvalOptions::default(),
        )
        .unwrap();
        assert!(matches!(
            check_dominance(&t, &curve, DominanceMode::Strict),
            Err(VerifierError::GridMismatch)
        ));
    }

    #[test]
    fn all_reductions_pass_at_tolerance() {
        let deltas = uniform_abscissae(0.0, 1.0, 33);
        for r in Reduction::ALL {
            let report = check_reduction(r, &deltas, 1e-6, &EvalOptions::default()).unwrap();
            assert!(
                report.pass,
                "{} deviated by {}",
                report.name, report.max_rel_dev
            );
        }
    }

    #[test]
    fn degenerate_reduction_has_zero_deviation() {
        // all kernels zero: both sides are identically c
        let mut instance = reduction_instance(Reduction::T1ToBellman);
        instance.problem.kernels[0] = Expr::lit(0.0);
        instance.oracle = OracleSpec::Bellman {
            c: 2.0,
            kernel: Expr::lit(0.0),
        };
        let deltas = uniform_abscissae(0.0, 1.0, 9);
        let report =
            check_reduction_instance("degenerate", &instance, &deltas, 1e-6, &EvalOptions::default())
                .unwrap();
        assert_eq!(report.max_rel_dev, 0.0);
    }
}
