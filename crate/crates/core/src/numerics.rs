//! Quadrature, monotone inversion and grid sampling.
//!
//! Every bound formula in this crate is a combination of integrals of smooth
//! nonnegative integrands, inverse retardations `f^-1`, and sampled curves.
//! This module provides that substrate: adaptive Simpson integration with a
//! Richardson error estimate, bisection-based inversion of nondecreasing
//! functions, uniform grids, and a piecewise-linear cumulative integral used
//! to evaluate the `exp(int_xi^F ...)` factors of nested integrals without
//! re-integrating from scratch at every outer quadrature node.

use thiserror::Error;

/// Tolerances for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_depth: 40,
        }
    }
}

impl QuadratureConfig {
    /// Same tolerances scaled by `factor` (used for refinement checks).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            max_depth: self.max_depth,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NumericsError {
    #[error("quadrature depth exhausted; best estimate {estimate} with error bound {error_bound}")]
    DepthExhausted { estimate: f64, error_bound: f64 },
    #[error("integrand is not finite at x = {x}")]
    NonFiniteSample { x: f64 },
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("bracket violation: fn(lo) = {f_lo}, fn(hi) = {f_hi} do not enclose y = {target}")]
    BracketViolation { f_lo: f64, f_hi: f64, target: f64 },
    #[error("grid needs at least two points, got {n}")]
    GridTooSmall { n: usize },
    #[error("grid abscissae must be strictly increasing (index {index})")]
    NotIncreasing { index: usize },
    #[error("grid abscissae/value lengths differ: {abscissae} vs {values}")]
    LengthMismatch { abscissae: usize, values: usize },
}

struct Adaptive<'f> {
    f: &'f dyn Fn(f64) -> f64,
    max_depth: u32,
    // set when some subinterval bottomed out before meeting its tolerance
    exhausted: bool,
    worst_error: f64,
}

impl Adaptive<'_> {
    fn sample(&self, x: f64) -> Result<f64, NumericsError> {
        let v = (self.f)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(NumericsError::NonFiniteSample { x })
        }
    }

    // Classic adaptive Simpson: accept a subinterval when the two-panel
    // refinement agrees with the one-panel estimate to 15*eps, then apply the
    // Richardson correction (S2 - S1)/15.
    #[allow(clippy::too_many_arguments)]
    fn simpson(
        &mut self,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> Result<f64, NumericsError> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.sample(lm)?;
        let frm = self.sample(rm)?;
        let h = b - a;
        let left = h / 12.0 * (fa + 4.0 * flm + fm);
        let right = h / 12.0 * (fm + 4.0 * frm + fb);
        let refined = left + right;
        let err = refined - whole;
        if err.abs() <= 15.0 * eps || h / 2.0 <= f64::EPSILON * (a.abs() + b.abs()) {
            return Ok(refined + err / 15.0);
        }
        if depth == 0 {
            self.exhausted = true;
            self.worst_error = self.worst_error.max(err.abs() / 15.0);
            return Ok(refined + err / 15.0);
        }
        let l = self.simpson(a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)?;
        let r = self.simpson(m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)?;
        Ok(l + r)
    }
}

/// Adaptive Simpson estimate of the integral of `f` over `[lo, hi]`.
///
/// The result error is controlled to `max(abs_tol, rel_tol * |result|)`.
/// `integrate(f, a, a)` returns exactly 0. Exhausting the subdivision depth
/// yields [`NumericsError::DepthExhausted`] carrying the best estimate.
pub fn integrate(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, NumericsError> {
    debug_assert!(
        cfg.abs_tol > 0.0 && cfg.rel_tol > 0.0 && cfg.max_depth >= 1,
        "quadrature tolerances must be positive and depth >= 1"
    );
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(NumericsError::InvalidInterval { lo, hi });
    }
    if lo == hi {
        return Ok(0.0);
    }
    let mut state = Adaptive {
        f: &f,
        max_depth: cfg.max_depth,
        exhausted: false,
        worst_error: 0.0,
    };
    let fa = state.sample(lo)?;
    let m = 0.5 * (lo + hi);
    let fm = state.sample(m)?;
    let fb = state.sample(hi)?;
    let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    let eps = cfg.abs_tol.max(cfg.rel_tol * whole.abs());
    let depth = state.max_depth;
    let value = state.simpson(lo, hi, fa, fm, fb, whole, eps, depth)?;
    if state.exhausted && state.worst_error > cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
        return Err(NumericsError::DepthExhausted {
            estimate: value,
            error_bound: state.worst_error,
        });
    }
    Ok(value)
}

/// Invert a nondecreasing function by bisection.
///
/// Returns `x` in `[lo, hi]` with the bracket narrowed below `tol`; a `tol`
/// of 0 bisects down to one ulp. Fails with the endpoint values when `y` is
/// not enclosed by `fn(lo)..fn(hi)`.
pub fn invert_monotone(
    f: impl Fn(f64) -> f64,
    y: f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64, NumericsError> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(NumericsError::InvalidInterval { lo, hi });
    }
    let f_lo = f(lo);
    let f_hi = f(hi);
    if !(f_lo <= y && y <= f_hi) {
        return Err(NumericsError::BracketViolation {
            f_lo,
            f_hi,
            target: y,
        });
    }
    let (mut a, mut b) = (lo, hi);
    // the cap covers the ulp descent through subnormals
    for _ in 0..2000 {
        if b - a <= tol {
            break;
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break; // bracket narrower than one ulp
        }
        if f(mid) < y {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Ordered abscissae paired with values.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    abscissae: Vec<f64>,
    values: Vec<f64>,
}

impl Grid {
    pub fn new(abscissae: Vec<f64>, values: Vec<f64>) -> Result<Self, NumericsError> {
        if abscissae.len() != values.len() {
            return Err(NumericsError::LengthMismatch {
                abscissae: abscissae.len(),
                values: values.len(),
            });
        }
        if abscissae.len() < 2 {
            return Err(NumericsError::GridTooSmall {
                n: abscissae.len(),
            });
        }
        for i in 1..abscissae.len() {
            if abscissae[i] <= abscissae[i - 1] {
                return Err(NumericsError::NotIncreasing { index: i });
            }
        }
        Ok(Self { abscissae, values })
    }

    pub fn len(&self) -> usize {
        self.abscissae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissae.is_empty()
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.abscissae
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.abscissae
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }

    /// Linear interpolation, clamped to the grid range.
    pub fn interpolate(&self, x: f64) -> f64 {
        let xs = &self.abscissae;
        if x <= xs[0] {
            return self.values[0];
        }
        if x >= xs[xs.len() - 1] {
            return self.values[xs.len() - 1];
        }
        let idx = match xs.binary_search_by(|a| a.partial_cmp(&x).unwrap()) {
            Ok(i) => return self.values[i],
            Err(i) => i,
        };
        let (x0, x1) = (xs[idx - 1], xs[idx]);
        let (y0, y1) = (self.values[idx - 1], self.values[idx]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// Evaluate `f` on `n` uniformly spaced points covering `[lo, hi]` inclusive.
pub fn sample_grid(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<Grid, NumericsError> {
    if n < 2 {
        return Err(NumericsError::GridTooSmall { n });
    }
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(NumericsError::InvalidInterval { lo, hi });
    }
    let abscissae = uniform_abscissae(lo, hi, n);
    let values = abscissae.iter().map(|&x| f(x)).collect();
    Grid::new(abscissae, values)
}

/// The `n` uniformly spaced points of [`sample_grid`], endpoints exact.
pub fn uniform_abscissae(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + i as f64 * step })
        .collect()
}

/// `n` geometrically spaced points from `lo` to `hi`, endpoints exact.
/// Requires `0 < lo < hi`; falls back to uniform spacing when the span is
/// too narrow for a geometric progression in f64.
pub fn geometric_abscissae(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    debug_assert!(lo > 0.0 && hi > lo);
    let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
    if !(ratio > 1.0 + 1e-12) {
        return uniform_abscissae(lo, hi, n);
    }
    let mut out: Vec<f64> = Vec::with_capacity(n);
    let mut x = lo;
    for i in 0..n {
        out.push(if i == n - 1 { hi } else { x });
        x *= ratio;
    }
    out
}

/// Piecewise-linear cumulative integral `C(x) = int_lo^x f` on `[lo, hi]`.
///
/// Each of the `segments` uniform segments is integrated adaptively, so the
/// node values carry quadrature accuracy while lookups between nodes
/// interpolate linearly. Nested bound integrals use this to turn
/// `int_xi^F g` into `C(F) - C(xi)`.
#[derive(Debug, Clone)]
pub struct CumulativeIntegral {
    grid: Grid,
}

impl CumulativeIntegral {
    pub fn build(
        f: impl Fn(f64) -> f64,
        lo: f64,
        hi: f64,
        segments: usize,
        cfg: &QuadratureConfig,
    ) -> Result<Self, NumericsError> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(NumericsError::InvalidInterval { lo, hi });
        }
        let segments = segments.max(1);
        let nodes = uniform_abscissae(lo, hi.max(lo + f64::MIN_POSITIVE), segments + 1);
        Self::build_on_nodes(f, nodes, cfg)
    }

    /// Build over explicit node positions (strictly increasing). Integrands
    /// with an endpoint singularity want geometrically graded nodes so the
    /// interpolated table resolves the boundary layer.
    pub fn build_on_nodes(
        f: impl Fn(f64) -> f64,
        nodes: Vec<f64>,
        cfg: &QuadratureConfig,
    ) -> Result<Self, NumericsError> {
        let segments = nodes.len().saturating_sub(1).max(1);
        // split the absolute budget across segments
        let seg_cfg = QuadratureConfig {
            abs_tol: cfg.abs_tol / segments as f64,
            ..*cfg
        };
        let mut cums = Vec::with_capacity(nodes.len());
        let mut acc = 0.0;
        cums.push(0.0);
        for w in nodes.windows(2) {
            acc += integrate(&f, w[0], w[1], &seg_cfg)?;
            cums.push(acc);
        }
        Ok(Self {
            grid: Grid::new(nodes, cums)?,
        })
    }

    /// `C(x)` by linear interpolation, clamped to `[lo, hi]`.
    pub fn at(&self, x: f64) -> f64 {
        self.grid.interpolate(x)
    }

    /// The node positions the table was built on.
    pub fn nodes(&self) -> &[f64] {
        self.grid.abscissae()
    }

    /// `int_a^b f = C(b) - C(a)`.
    pub fn between(&self, a: f64, b: f64) -> f64 {
        self.at(b) - self.at(a)
    }

    pub fn total(&self) -> f64 {
        *self.grid.values().last().unwrap()
    }
}
