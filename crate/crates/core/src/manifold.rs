//! Level sets `M_θ = {u : W(u)(π) = θ}` as graphs over a hyperplane.
//!
//! Fix a direction `p > 0` on `(0, π)` and split `X = H ⊕ span(p)`
//! orthogonally. For strictly convex or concave `f`, the map
//! `λ ↦ W(h + λp)(π)` is strictly monotone (its derivative is the pairing
//! with `p`, whose integrand has the sign of `f''`), so every line
//! `h + λp` meets each nonempty `M_θ` exactly once. Its limits as
//! `λ → ±∞` are the free arguments at the ends of the range of `f'`, and
//! `C_k = M_{kπ}` is nonempty exactly when `-k²` is interior to that range.

use std::f64::consts::PI;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, GridFunctionSpec};
use crate::nonlinearity::Nonlinearity;
use crate::pruefer::{free_argument, integrate_argument, integrate_potential, ArgumentPath};
use crate::report::fmt_f64;
use crate::scan::ScanRange;
use crate::variational::dw_pairing;

/// The direction `p` with the Simpson-weighted orthogonal splitting it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct LineFamily {
    p: GridFunction,
    p_norm2: f64,
}

impl LineFamily {
    pub fn new(p: GridFunction) -> Result<Self> {
        if !p.is_dirichlet() {
            let v = p.values();
            return Err(Error::NotDirichlet {
                left: v[0],
                right: v[v.len() - 1],
            });
        }
        let n = p.grid().intervals();
        if let Some((index, &value)) = p.values()[1..n]
            .iter()
            .enumerate()
            .find(|(_, &v)| v.is_nan() || v <= 0.0)
        {
            return Err(Error::NotPositive {
                index: index + 1,
                value,
            });
        }
        let p_norm2 = p.inner(&p)?;
        Ok(Self { p, p_norm2 })
    }

    /// `p = sin t`.
    pub fn sine(grid: Grid) -> Self {
        Self::new(GridFunction::sin(grid)).expect("sin t is positive on (0, π)")
    }

    pub fn direction(&self) -> &GridFunction {
        &self.p
    }

    pub fn grid(&self) -> Grid {
        self.p.grid()
    }

    /// Coefficient of `u` along `p`.
    pub fn coordinate(&self, u: &GridFunction) -> Result<f64> {
        Ok(u.inner(&self.p)? / self.p_norm2)
    }

    /// Orthogonal projection onto `H`.
    pub fn project(&self, h: &GridFunction) -> Result<GridFunction> {
        let c = self.coordinate(h)?;
        if c == 0.0 {
            return Ok(h.clone());
        }
        h.combine(1.0, &self.p, -c)
    }

    /// `h + λp`.
    pub fn compose(&self, h: &GridFunction, lambda: f64) -> Result<GridFunction> {
        h.combine(1.0, &self.p, lambda)
    }

    /// `u = h + λp` with `h ⊥ p`.
    pub fn decompose(&self, u: &GridFunction) -> Result<(GridFunction, f64)> {
        let lambda = self.coordinate(u)?;
        Ok((u.combine(1.0, &self.p, -lambda)?, lambda))
    }
}

/// Splits `u` along a positive direction `p`: `λ = ⟨u,p⟩/⟨p,p⟩`, `h = u − λp`.
pub fn decompose(u: &GridFunction, p: &GridFunction) -> Result<(GridFunction, f64)> {
    LineFamily::new(p.clone())?.decompose(u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Bracket expansion gives up once `|λ|` would exceed this.
    pub bracket_limit: f64,
    pub substeps: usize,
    pub residual_tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            bracket_limit: 1e6,
            substeps: crate::pruefer::DEFAULT_SUBSTEPS,
            residual_tol: 1e-8,
        }
    }
}

/// A certified point `u = h + λ* p` of `M_θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldPoint {
    pub theta: f64,
    pub h: GridFunction,
    pub lambda_star: f64,
    pub u: GridFunction,
    /// `|W(u)(π) − θ|`.
    pub residual: f64,
    /// `DW(u)(π)·p`; its sign is `-sign(f'')`.
    pub transversality: f64,
    pub k: Option<u32>,
    pub path: ArgumentPath,
}

/// JSON form of a [`ManifoldPoint`].
#[derive(Debug, Clone, Serialize)]
pub struct ChartRecord {
    pub theta: f64,
    pub k: Option<u32>,
    pub lambda_star: f64,
    pub residual: f64,
    pub transversality: f64,
    pub h: GridFunctionSpec,
    pub u: GridFunctionSpec,
}

impl ManifoldPoint {
    pub fn record(&self) -> ChartRecord {
        ChartRecord {
            theta: self.theta,
            k: self.k,
            lambda_star: self.lambda_star,
            residual: self.residual,
            transversality: self.transversality,
            h: self.h.to_spec(),
            u: self.u.to_spec(),
        }
    }
}

struct LineEval<'a> {
    f: &'a Nonlinearity,
    line: &'a LineFamily,
    h: &'a GridFunction,
    substeps: usize,
}

impl LineEval<'_> {
    fn at(&self, lambda: f64) -> Result<(GridFunction, ArgumentPath)> {
        let u = self.line.compose(self.h, lambda)?;
        let path = integrate_argument(self.f, &u, self.substeps)?;
        Ok((u, path))
    }

    fn w(&self, lambda: f64) -> Result<f64> {
        Ok(self.at(lambda)?.1.w_pi())
    }
}

const BISECTION_WIDTH: f64 = 1e-6;
const MAX_POLISH: usize = 50;

/// Finds the unique `λ*` with `W(h + λ* p)(π) = θ`.
///
/// `h` is first projected onto `H`. The bracket starts at `[-1, 1]` and
/// doubles towards the side the monotone direction indicates, then
/// bisection narrows it to `1e-6` and Newton steps with the analytic
/// derivative (kept inside the bracket) polish the residual.
pub fn find_lambda(
    f: &Nonlinearity,
    h: &GridFunction,
    line: &LineFamily,
    theta: f64,
    opts: &SearchOptions,
) -> Result<ManifoldPoint> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "theta must be positive and finite, got {theta}"
        )));
    }
    // W(h + λp)(π) is increasing in λ when dir = +1.
    let dir = -f.strict_curvature_sign()?;
    let h = line.project(h)?;
    let eval = LineEval {
        f,
        line,
        h: &h,
        substeps: opts.substeps,
    };
    let g = |lambda: f64| -> Result<f64> { Ok(dir * (eval.w(lambda)? - theta)) };

    let limit = opts.bracket_limit;
    let unattainable = || Error::RangeUnattainable { theta, limit };
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    let (mut g_lo, mut g_hi) = (g(lo)?, g(hi)?);
    while g_hi < 0.0 {
        if hi >= limit {
            return Err(unattainable());
        }
        lo = hi;
        g_lo = g_hi;
        hi = (2.0 * hi).min(limit);
        g_hi = g(hi)?;
    }
    while g_lo > 0.0 {
        if -lo >= limit {
            return Err(unattainable());
        }
        hi = lo;
        lo = (2.0 * lo).max(-limit);
        g_lo = g(lo)?;
    }

    while hi - lo > BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid)?;
        if gm == 0.0 {
            lo = mid;
            hi = mid;
        } else if gm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mut lambda = 0.5 * (lo + hi);
    let mut best: Option<(f64, f64)> = None;
    for _ in 0..MAX_POLISH {
        let (u, path) = eval.at(lambda)?;
        let r = path.w_pi() - theta;
        if best.is_none_or(|(_, br)| r.abs() < br.abs()) {
            best = Some((lambda, r));
        }
        if r.abs() <= 1e-3 * opts.residual_tol {
            break;
        }
        if dir * r < 0.0 {
            lo = lambda;
        } else {
            hi = lambda;
        }
        let slope = dw_pairing(f, &u, line.direction(), &path)?.value;
        let mut next = lambda - r / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - lambda).abs() <= 4.0 * f64::EPSILON * lambda.abs().max(1.0) {
            break;
        }
        lambda = next;
    }

    let (lambda_star, _) = best.expect("at least one polish iteration");
    let (u, path) = eval.at(lambda_star)?;
    let residual = (path.w_pi() - theta).abs();
    if residual > opts.residual_tol {
        return Err(Error::NoConvergence(format!(
            "residual {residual:e} above {:e} at lambda = {lambda_star}",
            opts.residual_tol
        )));
    }
    let transversality = dw_pairing(f, &u, line.direction(), &path)?.value;
    Ok(ManifoldPoint {
        theta,
        h,
        lambda_star,
        u,
        residual,
        transversality,
        k: None,
        path,
    })
}

/// Point of `C_k = M_{kπ}` on the line through `h`.
pub fn chart_point(
    f: &Nonlinearity,
    h: &GridFunction,
    line: &LineFamily,
    k: u32,
    opts: &SearchOptions,
) -> Result<ManifoldPoint> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "critical components are indexed from k = 1".into(),
        ));
    }
    let mut point = find_lambda(f, h, line, k as f64 * PI, opts)?;
    point.k = Some(k);
    Ok(point)
}

fn certified_strict(f: &Nonlinearity) -> Result<f64> {
    let range = f.derivative_range();
    if !range.certified {
        return Err(Error::NotApplicable(
            "the range of f' is not certified".into(),
        ));
    }
    let sign = f.strict_curvature_sign()?;
    if range.is_degenerate() {
        return Err(Error::NotApplicable(
            "the range of f' is a single point".into(),
        ));
    }
    Ok(sign)
}

/// `C_k ≠ ∅` iff `-k²` lies in the open range of `f'`.
pub fn is_ck_nonempty(f: &Nonlinearity, k: u32) -> Result<bool> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    certified_strict(f)?;
    Ok(f.derivative_range()
        .contains_interior(-((k as f64).powi(2))))
}

/// `W₁(ω, π)` extended to `ω = ±∞`.
fn free_argument_extended(omega: f64) -> f64 {
    if omega == f64::INFINITY {
        f64::INFINITY
    } else if omega == f64::NEG_INFINITY {
        0.0
    } else {
        free_argument(omega)
    }
}

/// Limits of `W(h + λp)(π)` as `λ → -∞` and `λ → +∞` (independent of `h`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Asymptotes {
    pub lambda_to_neg_inf: f64,
    pub lambda_to_pos_inf: f64,
}

impl Asymptotes {
    /// Multiples `kπ`, `k ≥ 1`, strictly between the two limits.
    pub fn crossed_levels(&self) -> Vec<u32> {
        let lo = self.lambda_to_neg_inf.min(self.lambda_to_pos_inf);
        let hi = self.lambda_to_neg_inf.max(self.lambda_to_pos_inf);
        let first = ((lo / PI).floor() as i64 + 1).max(1);
        let last = if hi.is_infinite() {
            i64::MAX
        } else {
            (hi / PI).ceil() as i64 - 1
        };
        // Infinite limits cross every level; cap the list for the caller.
        (first..=last.min(first + 1000)).map(|k| k as u32).collect()
    }
}

pub fn asymptotic_arguments(f: &Nonlinearity) -> Result<Asymptotes> {
    let sign = certified_strict(f)?;
    let r = f.derivative_range();
    // Along λ → +∞, u → +∞ on (0, π): f' tends to sup for convex f, inf for concave.
    let (q_plus, q_minus) = if sign > 0.0 {
        (r.sup, r.inf)
    } else {
        (r.inf, r.sup)
    };
    Ok(Asymptotes {
        lambda_to_neg_inf: free_argument_extended(-q_minus),
        lambda_to_pos_inf: free_argument_extended(-q_plus),
    })
}

/// Terms of the comparison identity `E(π)U(π) = ∫₀^π E(t)H(t) dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonIdentity {
    /// `U(π) = W₁(ω, π) − W(h + λp)(π)`.
    pub u_pi: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

const REMOVABLE_GAP: f64 = 1e-8;

/// Checks the comparison identity between the constant-potential argument
/// `W₁(ω, ·)` and `W₂ = W(h + λp)`.
///
/// `U = W₁ − W₂` solves `U' + gU = H` with `H = (ω + f'(u)) sin²W₂` and
/// `g = −(1 − ω)(cos²W₁ − cos²W₂)/(W₁ − W₂)`; where `|U| < 1e-8` the
/// divided difference is replaced by its limit, `g = (1 − ω) sin 2W₂`.
/// `E = exp(∫₀^t g)`.
pub fn comparison_identity_residual(
    f: &Nonlinearity,
    h: &GridFunction,
    line: &LineFamily,
    lambda: f64,
    omega: f64,
    substeps: usize,
) -> Result<ComparisonIdentity> {
    if !omega.is_finite() || !lambda.is_finite() {
        return Err(Error::InvalidParameter(
            "lambda and omega must be finite".into(),
        ));
    }
    let u = line.compose(h, lambda)?;
    if !u.is_dirichlet() {
        let v = u.values();
        return Err(Error::NotDirichlet {
            left: v[0],
            right: v[v.len() - 1],
        });
    }
    // Quadrature runs on the RK4 step grid; the angles there coincide with
    // the node-grid paths at shared points.
    let grid = Grid::new(line.grid().intervals() * substeps.max(1))?;
    let u_fine: Vec<f64> = grid.nodes().map(|t| u.eval(t)).collect();
    let w2 = integrate_potential(grid, 1, |t| f.f1(u.eval(t)))?;
    let w1 = integrate_potential(grid, 1, |_| -omega)?;
    let (a1, a2) = (w1.angle(), w2.angle());

    let g: Vec<f64> = a1
        .iter()
        .zip(a2)
        .map(|(&x, &y)| {
            let diff = x - y;
            if diff.abs() < REMOVABLE_GAP {
                (1.0 - omega) * (2.0 * y).sin()
            } else {
                -(1.0 - omega) * (x.cos().powi(2) - y.cos().powi(2)) / diff
            }
        })
        .collect();
    let e: Vec<f64> = grid
        .cumulative_integral(&g)
        .into_iter()
        .map(f64::exp)
        .collect();
    let eh: Vec<f64> = u_fine
        .iter()
        .zip(a2)
        .zip(&e)
        .map(|((&uv, &y), &ev)| ev * (omega + f.f1(uv)) * y.sin().powi(2))
        .collect();

    let n = grid.intervals();
    let u_pi = a1[n] - a2[n];
    let lhs = e[n] * u_pi;
    let rhs = grid.simpson(&eh);
    let residual = (lhs - rhs).abs();
    if !residual.is_finite() {
        return Err(Error::NonFiniteValue("comparison identity"));
    }
    Ok(ComparisonIdentity {
        u_pi,
        lhs,
        rhs,
        residual,
    })
}

/// `W(h + λp)(π)` over a range of `λ`, evaluated in parallel, in index order.
pub fn lambda_scan(
    f: &Nonlinearity,
    h: &GridFunction,
    line: &LineFamily,
    range: &ScanRange,
    substeps: usize,
) -> Result<Vec<(f64, f64)>> {
    range.validate()?;
    let eval = LineEval {
        f,
        line,
        h,
        substeps,
    };
    range
        .points()
        .into_par_iter()
        .map(|lambda| Ok((lambda, eval.w(lambda)?)))
        .collect()
}

/// `W₁(ω, π)` over a range of `ω`.
pub fn omega_scan(range: &ScanRange) -> Result<Vec<(f64, f64)>> {
    range.validate()?;
    Ok(range
        .points()
        .into_iter()
        .map(|w| (w, free_argument(w)))
        .collect())
}

/// Writes `(x, W_pi)` pairs as CSV with the given first column name.
pub fn write_scan_csv<W: Write>(mut out: W, column: &str, rows: &[(f64, f64)]) -> io::Result<()> {
    writeln!(out, "{column},W_pi")?;
    for (x, w) in rows {
        writeln!(out, "{},{}", fmt_f64(*x), fmt_f64(*w))?;
    }
    Ok(())
}

/// +1 if strictly increasing, -1 if strictly decreasing, 0 otherwise.
pub fn monotonicity(rows: &[(f64, f64)]) -> i8 {
    let inc = rows.windows(2).all(|w| w[1].1 > w[0].1);
    let dec = rows.windows(2).all(|w| w[1].1 < w[0].1);
    match (inc, dec) {
        (true, false) => 1,
        (false, true) => -1,
        _ => 0,
    }
}
