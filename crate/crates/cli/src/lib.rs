//! Command-line surface for bound evaluation and verification.
//!
//! Commands:
//!
//! * `eval <file> -o <csv>` — bound curve of a problem file
//! * `verify <file> -o <csv>` — saturated solution + dominance check
//! * `reproduce <1|2> -o <csv>` — built-in instance vs its closed form
//! * `reductions` — certify the classical-oracle reductions
//! * `hypotheses <file>` — report the theorem's hypothesis checks
//!
//! Exit codes: 0 success, 1 parse/numeric error, 2 hypothesis hard-failure,
//! 3 strict dominance violation. Diagnostics go to stderr; data goes to the
//! `-o` target (`-` for stdout).

pub mod problem_file;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use gronwall_bounds::bounds::{bound_at, bound_curve, EvalOptions};
use gronwall_bounds::inequality::{
    check_hypotheses, HypothesisReport, HypothesisStatus, Theorem, Zeta6Denominator,
};
use gronwall_bounds::instances;
use gronwall_bounds::numerics::{uniform_abscissae, QuadratureConfig};
use gronwall_bounds::verifier::{
    check_dominance, check_reduction, solve_saturated_integral, solve_saturated_integrodiff,
    DominanceMode, IntegralForm, IntegrodiffForm, PicardConfig, Reduction, Trajectory, Verdict,
    VerifierError,
};
use problem_file::{parse_problem_file, NumericsSection, ProblemFile};
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_DOMINANCE: i32 = 3;

const REPRODUCE_POINTS: usize = 65;
const REPRODUCE_HORIZON: f64 = 4.0;
const REPRODUCE_TOL: f64 = 1e-6;
const REDUCTION_POINTS: usize = 33;
const REDUCTION_HORIZON: f64 = 1.0;
const REDUCTION_TOL: f64 = 1e-6;
const DEFAULT_GRID: usize = 65;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Zeta6Arg {
    Gamma1,
    Gamma3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DominanceArg {
    Strict,
    #[value(name = "report-only")]
    ReportOnly,
}

#[derive(Debug, Parser)]
#[command(
    name = "gronwall",
    about = "Explicit bounds for retarded integral inequalities, with verification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Absolute quadrature tolerance.
    #[arg(long, global = true)]
    pub tol_abs: Option<f64>,

    /// Relative quadrature tolerance.
    #[arg(long, global = true)]
    pub tol_rel: Option<f64>,

    /// Curve / solver grid size.
    #[arg(long, global = true)]
    pub grid: Option<usize>,

    /// Evaluate ambiguously printed integral limits exactly as printed.
    #[arg(long, global = true)]
    pub strict_limits: bool,

    /// Denominator reading for the zeta6 coefficient.
    #[arg(long, global = true, value_enum)]
    pub zeta6_denom: Option<Zeta6Arg>,

    /// Dominance verdict handling for `verify`.
    #[arg(long, global = true, value_enum)]
    pub dominance: Option<DominanceArg>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the bound curve of a problem file.
    Eval {
        problem: PathBuf,
        /// CSV output path, `-` for stdout.
        #[arg(short, long)]
        output: String,
    },
    /// Solve the saturated equation and check the bound dominates it.
    Verify {
        problem: PathBuf,
        /// CSV output path, `-` for stdout.
        #[arg(short, long)]
        output: String,
    },
    /// Re-derive a built-in worked instance and diff it against its closed form.
    Reproduce {
        /// Which instance, 1 or 2.
        example: u8,
        /// CSV output path, `-` for stdout.
        #[arg(short, long)]
        output: String,
    },
    /// Certify the classical-oracle reductions.
    Reductions,
    /// Report the hypothesis checks for a problem file.
    Hypotheses { problem: PathBuf },
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_ERROR,
            };
            let _ = e.print();
            return code;
        }
    };
    dispatch(&cli)
}

fn dispatch(cli: &Cli) -> i32 {
    match &cli.command {
        Command::Eval { problem, output } => cmd_eval(problem, output, cli),
        Command::Verify { problem, output } => cmd_verify(problem, output, cli),
        Command::Reproduce { example, output } => cmd_reproduce(*example, output, cli),
        Command::Reductions => cmd_reductions(cli),
        Command::Hypotheses { problem } => cmd_hypotheses(problem, cli),
    }
}

// 12 significant digits, scientific; byte-stable across runs.
fn sig12(v: f64) -> String {
    format!("{:.11e}", v)
}

fn write_output(target: &str, data: &str) -> Result<(), String> {
    if target == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(data.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| format!("write to stdout failed: {e}"))
    } else {
        fs::write(target, data).map_err(|e| format!("write to `{target}` failed: {e}"))
    }
}

struct Effective {
    opts: EvalOptions,
    grid: usize,
    dominance: Option<DominanceMode>,
}

// Command-line flags win over the file's [numerics] section, which wins
// over built-in defaults.
fn effective_options(file: Option<&NumericsSection>, cli: &Cli) -> Effective {
    let defaults = QuadratureConfig::default();
    let file = file.cloned().unwrap_or_default();
    let quadrature = QuadratureConfig {
        abs_tol: cli.tol_abs.or(file.tol_abs).unwrap_or(defaults.abs_tol),
        rel_tol: cli.tol_rel.or(file.tol_rel).unwrap_or(defaults.rel_tol),
        max_depth: defaults.max_depth,
    };
    let zeta6 = cli
        .zeta6_denom
        .map(|z| match z {
            Zeta6Arg::Gamma1 => Zeta6Denominator::Gamma1,
            Zeta6Arg::Gamma3 => Zeta6Denominator::Gamma3,
        })
        .or(file.zeta6_denominator)
        .unwrap_or_default();
    let opts = EvalOptions {
        quadrature,
        strict_limits: cli.strict_limits || file.strict_limits.unwrap_or(false),
        zeta6_denominator: zeta6,
        ..EvalOptions::default()
    };
    let dominance = cli
        .dominance
        .map(|d| match d {
            DominanceArg::Strict => DominanceMode::Strict,
            DominanceArg::ReportOnly => DominanceMode::ReportOnly,
        })
        .or(file.dominance);
    Effective {
        opts,
        grid: cli.grid.or(file.grid).unwrap_or(DEFAULT_GRID),
        dominance,
    }
}

fn load_problem(path: &Path) -> Result<ProblemFile, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read `{}`: {e}", path.display()))?;
    let pf = parse_problem_file(&text).map_err(|e| e.to_string())?;
    pf.problem.validate().map_err(|e| e.to_string())?;
    Ok(pf)
}

fn report_warnings(report: &HypothesisReport) {
    for w in report.warnings() {
        match w.first_failure {
            Some(d) => eprintln!(
                "warning: hypothesis `{}` fails from delta = {d:.6} (tolerated)",
                w.name
            ),
            None => eprintln!("warning: hypothesis `{}` does not hold (tolerated)", w.name),
        }
    }
}

// Ok(report) when no hard failure; Err(message) names the failed hypothesis.
fn gate_hypotheses(pf: &ProblemFile) -> Result<HypothesisReport, String> {
    let report = check_hypotheses(&pf.problem, pf.theorem);
    if let Some(hard) = report.hard_failure() {
        let at = hard
            .first_failure
            .map(|d| format!(" at delta = {d:.6}"))
            .unwrap_or_default();
        return Err(format!(
            "hypothesis hard-failure: `{}` violated{at}",
            hard.name
        ));
    }
    Ok(report)
}

fn cmd_eval(path: &Path, output: &str, cli: &Cli) -> i32 {
    let pf = match load_problem(path) {
        Ok(pf) => pf,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    let eff = effective_options(Some(&pf.numerics), cli);
    let report = match gate_hypotheses(&pf) {
        Ok(r) => r,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_HYPOTHESIS;
        }
    };
    report_warnings(&report);
    let curve = match bound_curve(
        &pf.problem,
        pf.theorem,
        0.0,
        pf.problem.horizon,
        eff.grid,
        &eff.opts,
    ) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    let values = curve.grid.values();
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    eprintln!(
        "bound [{}] over [0, {}]: min = {min:.6e}, max = {max:.6e}",
        pf.theorem, pf.problem.horizon
    );
    let mut data = String::from("delta,value\n");
    for (x, v) in curve.grid.points() {
        data.push_str(&format!("{},{}\n", sig12(x), sig12(v)));
    }
    match write_output(output, &data) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn solve_saturated(
    pf: &ProblemFile,
    n: usize,
    picard: &PicardConfig,
) -> Result<Trajectory, VerifierError> {
    match pf.theorem {
        Theorem::OuterPower => {
            solve_saturated_integral(&pf.problem, IntegralForm::OuterPower, n, picard)
        }
        Theorem::Additive => {
            solve_saturated_integral(&pf.problem, IntegralForm::Additive, n, picard)
        }
        Theorem::Factored => {
            solve_saturated_integral(&pf.problem, IntegralForm::Factored, n, picard)
        }
        Theorem::IntegrodiffPower => {
            solve_saturated_integrodiff(&pf.problem, IntegrodiffForm::UPower, n, picard)
        }
        Theorem::IntegrodiffMixed => {
            solve_saturated_integrodiff(&pf.problem, IntegrodiffForm::Mixed, n, picard)
        }
    }
}

fn cmd_verify(path: &Path, output: &str, cli: &Cli) -> i32 {
    let pf = match load_problem(path) {
        Ok(pf) => pf,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    let eff = effective_options(Some(&pf.numerics), cli);
    let report = match gate_hypotheses(&pf) {
        Ok(r) => r,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_HYPOTHESIS;
        }
    };
    report_warnings(&report);
    let picard = PicardConfig::default();
    let trajectory = match solve_saturated(&pf, eff.grid, &picard) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: saturated solve failed: {e}");
            if let VerifierError::NonConvergence { residuals, .. } = &e {
                let tail: Vec<String> = residuals
                    .iter()
                    .rev()
                    .take(8)
                    .map(|r| format!("{r:.3e}"))
                    .collect();
                eprintln!("  last residuals (newest first): {}", tail.join(", "));
            }
            return EXIT_ERROR;
        }
    };
    let curve = match bound_curve(
        &pf.problem,
        pf.theorem,
        0.0,
        pf.problem.horizon,
        eff.grid,
        &eff.opts,
    ) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    let mode = eff
        .dominance
        .unwrap_or(if pf.theorem.default_dominance_is_strict() {
            DominanceMode::Strict
        } else {
            DominanceMode::ReportOnly
        });
    let mut dom = match check_dominance(&trajectory, &curve, mode) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    dom.hypothesis_warnings = report.warnings().map(|w| w.name.to_string()).collect();
    eprintln!(
        "dominance: verdict {}, min margin {:.6e} at delta = {:.6}, slack {:.3e} ({} sweeps, residual {:.3e})",
        dom.verdict,
        dom.min_margin,
        dom.min_margin_delta,
        dom.slack,
        trajectory.iterations,
        trajectory.residual
    );
    if let Some(d) = dom.first_violation {
        eprintln!("  first margin crossing at delta = {d:.6}");
    }
    let mut data = String::from("delta,value,u_sat,margin\n");
    for (i, (x, b)) in curve.grid.points().enumerate() {
        let u = trajectory.grid.values()[i];
        data.push_str(&format!(
            "{},{},{},{}\n",
            sig12(x),
            sig12(b),
            sig12(u),
            sig12(dom.margins[i])
        ));
    }
    if let Err(e) = write_output(output, &data) {
        eprintln!("error: {e}");
        return EXIT_ERROR;
    }
    if dom.verdict == Verdict::Violated {
        EXIT_DOMINANCE
    } else {
        EXIT_OK
    }
}

fn cmd_reproduce(example: u8, output: &str, cli: &Cli) -> i32 {
    let Some((problem, theorem, closed_form)) = instances::example_problem(example) else {
        eprintln!("error: no built-in example `{example}`; use 1 or 2");
        return EXIT_ERROR;
    };
    let eff = effective_options(None, cli);
    let deltas = uniform_abscissae(0.0, REPRODUCE_HORIZON, REPRODUCE_POINTS);
    let mut data = String::from("delta,pipeline_bound,closedform_bound,rel_diff\n");
    let mut max_rel_diff = 0.0_f64;
    for &d in &deltas {
        let pipeline = match bound_at(&problem, theorem, d, &eff.opts) {
            Ok(v) => v,
            Err(e) => {
                eprintln!("error: bound evaluation failed at delta = {d}: {e}");
                return EXIT_ERROR;
            }
        };
        let reference = closed_form(d);
        let rel = (pipeline - reference).abs() / reference.abs().max(f64::MIN_POSITIVE);
        max_rel_diff = max_rel_diff.max(rel);
        data.push_str(&format!(
            "{},{},{},{}\n",
            sig12(d),
            sig12(pipeline),
            sig12(reference),
            sig12(rel)
        ));
    }
    if let Err(e) = write_output(output, &data) {
        eprintln!("error: {e}");
        return EXIT_ERROR;
    }
    eprintln!(
        "example {example}: max relative difference {max_rel_diff:.3e} over {REPRODUCE_POINTS} points (tolerance {REPRODUCE_TOL:.0e})"
    );
    if max_rel_diff <= REPRODUCE_TOL {
        EXIT_OK
    } else {
        eprintln!("error: reproduction exceeded tolerance");
        EXIT_ERROR
    }
}

fn cmd_reductions(cli: &Cli) -> i32 {
    let eff = effective_options(None, cli);
    let deltas = uniform_abscissae(0.0, REDUCTION_HORIZON, REDUCTION_POINTS);
    let mut all_pass = true;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(
        out,
        "{:<18} {:<42} {:>12} {:>9} {:>7}",
        "reduction", "oracle", "max_rel_dev", "at_delta", "status"
    );
    for r in Reduction::ALL {
        match check_reduction(r, &deltas, REDUCTION_TOL, &eff.opts) {
            Ok(report) => {
                all_pass &= report.pass;
                let _ = writeln!(
                    out,
                    "{:<18} {:<42} {:>12.3e} {:>9.4} {:>7}",
                    report.name,
                    report.oracle_label,
                    report.max_rel_dev,
                    report.worst_delta,
                    if report.pass { "pass" } else { "FAIL" }
                );
            }
            Err(e) => {
                all_pass = false;
                let _ = writeln!(out, "{:<18} error: {e}", r.name());
            }
        }
    }
    if eff.opts.strict_limits {
        // the as-printed limits are numerically visible wherever a forcing
        // term is active; diff the first worked instance both ways
        let corrected = EvalOptions {
            strict_limits: false,
            ..eff.opts.clone()
        };
        let p = instances::example1_problem();
        let mut max_dev = 0.0_f64;
        let mut worst = 0.0;
        let mut failure: Option<String> = None;
        for &d in &deltas {
            match (
                bound_at(&p, Theorem::OuterPower, d, &eff.opts),
                bound_at(&p, Theorem::OuterPower, d, &corrected),
            ) {
                (Ok(a), Ok(b)) => {
                    let dev = (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
                    if dev > max_dev {
                        max_dev = dev;
                        worst = d;
                    }
                }
                (Err(e), _) | (_, Err(e)) => {
                    failure = Some(e.to_string());
                    break;
                }
            }
        }
        let pass = failure.is_none() && max_dev <= REDUCTION_TOL;
        all_pass &= pass;
        match failure {
            Some(e) => {
                let _ = writeln!(out, "{:<18} error: {e}", "strict_vs_fixed");
            }
            None => {
                let _ = writeln!(
                    out,
                    "{:<18} {:<42} {:>12.3e} {:>9.4} {:>7}",
                    "strict_vs_fixed",
                    "as-printed vs corrected limits, instance 1",
                    max_dev,
                    worst,
                    if pass { "pass" } else { "FAIL" }
                );
            }
        }
    }
    if all_pass {
        EXIT_OK
    } else {
        eprintln!("error: at least one reduction row failed");
        EXIT_ERROR
    }
}

fn cmd_hypotheses(path: &Path, _cli: &Cli) -> i32 {
    let pf = match load_problem(path) {
        Ok(pf) => pf,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    let report = check_hypotheses(&pf.problem, pf.theorem);
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "theorem: {}", report.theorem);
    for c in &report.checks {
        let status = match c.status {
            HypothesisStatus::Holds => "holds",
            HypothesisStatus::Warning => "warning",
            HypothesisStatus::Violated => "violated",
        };
        match c.first_failure {
            Some(d) => {
                let _ = writeln!(
                    out,
                    "{:<55} {status} (first failure at delta = {d:.6})",
                    c.name
                );
            }
            None => {
                let _ = writeln!(out, "{:<55} {status}", c.name);
            }
        }
    }
    if report.hard_failure().is_some() {
        EXIT_HYPOTHESIS
    } else {
        EXIT_OK
    }
}
