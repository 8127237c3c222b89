//! Problem-definition files.
//!
//! A flat INI-style format with three sections:
//!
//! ```text
//! [problem]
//! theorem = "outer_power"      # integrodiff_power | integrodiff_mixed |
//!                              # outer_power | additive | factored
//! horizon = 4.0
//! kappa = 1.0
//! gamma1 = 5.0
//! gamma2 = 4.0
//! gamma3 = 3.0
//! gamma4 = 3.0
//!
//! [functions]                  # expression strings over x; absent keys
//! a = "x"                      # keep their defaults (a = 1, f = x,
//! f = "sqrt(x)"                # phi = 1, psi1..psi6 = 0)
//! psi1 = "2"
//!
//! [numerics]                   # all optional
//! tol_abs = 1e-10
//! tol_rel = 1e-9
//! grid = 65
//! zeta6_denominator = "gamma1" # or "gamma3"
//! strict_limits = false
//! dominance = "strict"         # or "report-only"
//! ```
//!
//! Lines starting with `#` are comments. Unknown sections and keys are
//! rejected.

use gronwall_bounds::expr::{parse_expr, ParseDiagnostic};
use gronwall_bounds::inequality::{InequalityProblem, Theorem, Zeta6Denominator};
use gronwall_bounds::verifier::DominanceMode;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum ProblemFileError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown section `[{name}]`")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: key `{key}` outside any section")]
    KeyOutsideSection { line: usize, key: String },
    #[error("line {line}: unknown key `{key}` in section [{section}]")]
    UnknownKey {
        line: usize,
        section: &'static str,
        key: String,
    },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: invalid value for `{key}`: {message}")]
    Value {
        line: usize,
        key: String,
        message: String,
    },
    #[error("line {line}: expression for `{key}` failed to parse: {diagnostic}")]
    Expr {
        line: usize,
        key: String,
        diagnostic: ParseDiagnostic,
    },
    #[error("missing required key `{key}` in section [{section}]")]
    Missing {
        section: &'static str,
        key: &'static str,
    },
}

/// Per-file numerics overrides; unset keys fall back to command-line flags
/// and built-in defaults.
#[derive(Debug, Clone, Default)]
pub struct NumericsSection {
    pub tol_abs: Option<f64>,
    pub tol_rel: Option<f64>,
    pub grid: Option<usize>,
    pub zeta6_denominator: Option<Zeta6Denominator>,
    pub strict_limits: Option<bool>,
    pub dominance: Option<DominanceMode>,
}

/// A fully parsed problem file.
#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub theorem: Theorem,
    pub problem: InequalityProblem,
    pub numerics: NumericsSection,
}

#[derive(PartialEq, Clone, Copy)]
enum Section {
    None,
    Problem,
    Functions,
    Numerics,
}

struct RawEntry {
    line: usize,
    value: String,
}

pub fn parse_problem_file(text: &str) -> Result<ProblemFile, ProblemFileError> {
    let mut section = Section::None;
    let mut entries: Vec<(Section, String, RawEntry)> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = match name.trim() {
                "problem" => Section::Problem,
                "functions" => Section::Functions,
                "numerics" => Section::Numerics,
                other => {
                    return Err(ProblemFileError::UnknownSection {
                        line: line_no,
                        name: other.to_string(),
                    })
                }
            };
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ProblemFileError::Syntax { line: line_no });
        };
        let key = key.trim().to_string();
        let value = unquote(value.trim());
        if section == Section::None {
            return Err(ProblemFileError::KeyOutsideSection { line: line_no, key });
        }
        if entries
            .iter()
            .any(|(s, k, _)| *s == section && *k == key)
        {
            return Err(ProblemFileError::DuplicateKey { line: line_no, key });
        }
        entries.push((
            section,
            key,
            RawEntry {
                line: line_no,
                value,
            },
        ));
    }

    let mut theorem: Option<Theorem> = None;
    let mut problem = InequalityProblem::with_defaults(1.0);
    let mut horizon_seen = false;
    let mut numerics = NumericsSection::default();

    for (section, key, entry) in &entries {
        match section {
            Section::Problem => match key.as_str() {
                "theorem" => {
                    theorem = Some(Theorem::from_name(&entry.value).ok_or_else(|| {
                        ProblemFileError::Value {
                            line: entry.line,
                            key: key.clone(),
                            message: format!(
                                "unknown theorem `{}`; expected one of {}",
                                entry.value,
                                Theorem::ALL
                                    .iter()
                                    .map(|t| t.name())
                                    .collect::<Vec<_>>()
                                    .join(", ")
                            ),
                        }
                    })?);
                }
                "horizon" => {
                    problem.horizon = parse_f64(key, entry)?;
                    horizon_seen = true;
                }
                "kappa" => problem.kappa = parse_f64(key, entry)?,
                "gamma1" => problem.gamma.gamma1 = parse_f64(key, entry)?,
                "gamma2" => problem.gamma.gamma2 = parse_f64(key, entry)?,
                "gamma3" => problem.gamma.gamma3 = parse_f64(key, entry)?,
                "gamma4" => problem.gamma.gamma4 = parse_f64(key, entry)?,
                _ => return Err(unknown_key("problem", key, entry)),
            },
            Section::Functions => {
                let expr = parse_expr(&entry.value).map_err(|diagnostic| {
                    ProblemFileError::Expr {
                        line: entry.line,
                        key: key.clone(),
                        diagnostic,
                    }
                })?;
                match key.as_str() {
                    "a" => problem.forcing = expr,
                    "f" => problem.retardation = expr,
                    "phi" => problem.factor = expr,
                    "psi1" => problem.kernels[0] = expr,
                    "psi2" => problem.kernels[1] = expr,
                    "psi3" => problem.kernels[2] = expr,
                    "psi4" => problem.kernels[3] = expr,
                    "psi5" => problem.kernels[4] = expr,
                    "psi6" => problem.kernels[5] = expr,
                    _ => return Err(unknown_key("functions", key, entry)),
                }
            }
            Section::Numerics => match key.as_str() {
                "tol_abs" => numerics.tol_abs = Some(parse_f64(key, entry)?),
                "tol_rel" => numerics.tol_rel = Some(parse_f64(key, entry)?),
                "grid" => {
                    numerics.grid =
                        Some(entry.value.parse::<usize>().map_err(|e| {
                            ProblemFileError::Value {
                                line: entry.line,
                                key: key.clone(),
                                message: e.to_string(),
                            }
                        })?)
                }
                "zeta6_denominator" => {
                    numerics.zeta6_denominator = Some(match entry.value.as_str() {
                        "gamma1" => Zeta6Denominator::Gamma1,
                        "gamma3" => Zeta6Denominator::Gamma3,
                        other => {
                            return Err(ProblemFileError::Value {
                                line: entry.line,
                                key: key.clone(),
                                message: format!(
                                    "expected `gamma1` or `gamma3`, got `{other}`"
                                ),
                            })
                        }
                    })
                }
                "strict_limits" => {
                    numerics.strict_limits = Some(parse_bool(key, entry)?);
                }
                "dominance" => {
                    numerics.dominance = Some(match entry.value.as_str() {
                        "strict" => DominanceMode::Strict,
                        "report-only" | "report_only" => DominanceMode::ReportOnly,
                        other => {
                            return Err(ProblemFileError::Value {
                                line: entry.line,
                                key: key.clone(),
                                message: format!(
                                    "expected `strict` or `report-only`, got `{other}`"
                                ),
                            })
                        }
                    })
                }
                _ => return Err(unknown_key("numerics", key, entry)),
            },
            Section::None => unreachable!(),
        }
    }

    let theorem = theorem.ok_or(ProblemFileError::Missing {
        section: "problem",
        key: "theorem",
    })?;
    if !horizon_seen {
        return Err(ProblemFileError::Missing {
            section: "problem",
            key: "horizon",
        });
    }
    Ok(ProblemFile {
        theorem,
        problem,
        numerics,
    })
}

fn unquote(value: &str) -> String {
    if value.len() >= 2 && value.starts_with('"') && value.ends_with('"') {
        value[1..value.len() - 1].to_string()
    } else {
        value.to_string()
    }
}

fn unknown_key(section: &'static str, key: &str, entry: &RawEntry) -> ProblemFileError {
    ProblemFileError::UnknownKey {
        line: entry.line,
        section,
        key: key.to_string(),
    }
}

fn parse_f64(key: &str, entry: &RawEntry) -> Result<f64, ProblemFileError> {
    entry
        .value
        .parse::<f64>()
        .map_err(|e| ProblemFileError::Value {
            line: entry.line,
            key: key.to_string(),
            message: e.to_string(),
        })
}

fn parse_bool(key: &str, entry: &RawEntry) -> Result<bool, ProblemFileError> {
    match entry.value.as_str() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(ProblemFileError::Value {
            line: entry.line,
            key: key.to_string(),
            message: format!("expected `true` or `false`, got `{other}`"),
        }),
    }
}
