//! Prüfer-angle integration of the linearized problem
//! `v'' = f'(u(t)) v`, `v(0) = 0`, `v'(0) = 1`.
//!
//! With `v = r sin W` and `v' = r cos W` the system becomes
//!
//! ```text
//! W' = cos²W − q(t) sin²W
//! ρ' = (1 + q(t)) sin W cos W,      ρ = log r,   q = f'(u(t))
//! ```
//!
//! which stays representable where `(v, v')` itself would overflow. The
//! argument `W` is independent of the positive scale of `v'(0)`, so only the
//! normalization `v'(0) = 1` is exposed.

use std::f64::consts::PI;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::nonlinearity::Nonlinearity;
use crate::report::fmt_f64;

/// Default number of RK4 steps per grid interval.
pub const DEFAULT_SUBSTEPS: usize = 2;

/// Data at `t = π`, with the kernel values rescaled by `exp(-ρ_max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Terminal {
    pub w_pi: f64,
    pub rho_pi: f64,
    pub rho_max: f64,
    /// `exp(ρ(π) − ρ_max) sin W(π)`
    pub v_pi_scaled: f64,
    /// `exp(ρ(π) − ρ_max) cos W(π)`
    pub vp_pi_scaled: f64,
}

/// Prüfer angle and log-amplitude sampled at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ArgumentPath {
    grid: Grid,
    w: Vec<f64>,
    rho: Vec<f64>,
    terminal: Terminal,
}

impl ArgumentPath {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Continuous (unwrapped) argument at the nodes.
    pub fn angle(&self) -> &[f64] {
        &self.w
    }

    pub fn log_amplitude(&self) -> &[f64] {
        &self.rho
    }

    pub fn terminal(&self) -> Terminal {
        self.terminal
    }

    pub fn w_pi(&self) -> f64 {
        self.terminal.w_pi
    }

    /// Writes the path as CSV with columns `t,W,rho`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,W,rho")?;
        for (i, t) in self.grid.nodes().enumerate() {
            writeln!(
                out,
                "{},{},{}",
                fmt_f64(t),
                fmt_f64(self.w[i]),
                fmt_f64(self.rho[i])
            )?;
        }
        Ok(())
    }
}

#[inline]
fn angle_rhs(w: f64, q: f64) -> (f64, f64) {
    let (s, c) = w.sin_cos();
    (c * c - q * s * s, (1.0 + q) * s * c)
}

/// Integrates the angle/log-amplitude system for an arbitrary potential
/// `q(t)` with classical RK4, `substeps` steps per grid interval.
///
/// `q` is sampled once at every step endpoint and midpoint.
pub fn integrate_potential<Q>(grid: Grid, substeps: usize, q: Q) -> Result<ArgumentPath>
where
    Q: Fn(f64) -> f64,
{
    if substeps == 0 {
        return Err(Error::InvalidGrid("substeps must be at least 1".into()));
    }
    let steps = grid.intervals() * substeps;
    let h = PI / steps as f64;
    let half_points = 2 * steps;
    let time = |j: usize| {
        if j == half_points {
            PI
        } else {
            j as f64 * (PI / half_points as f64)
        }
    };
    let qs: Vec<f64> = (0..=half_points).map(|j| q(time(j))).collect();
    if let Some(j) = qs.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState { t: time(j) });
    }

    let mut w_nodes = Vec::with_capacity(grid.len());
    let mut rho_nodes = Vec::with_capacity(grid.len());
    let (mut w, mut rho) = (0.0f64, 0.0f64);
    w_nodes.push(w);
    rho_nodes.push(rho);

    for step in 0..steps {
        let (q0, qm, q1) = (qs[2 * step], qs[2 * step + 1], qs[2 * step + 2]);
        let (k1w, k1r) = angle_rhs(w, q0);
        let (k2w, k2r) = angle_rhs(w + 0.5 * h * k1w, qm);
        let (k3w, k3r) = angle_rhs(w + 0.5 * h * k2w, qm);
        let (k4w, k4r) = angle_rhs(w + h * k3w, q1);
        w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        rho += h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
        if !(w.is_finite() && rho.is_finite()) {
            return Err(Error::NonFiniteState {
                t: time(2 * step + 2),
            });
        }
        if (step + 1) % substeps == 0 {
            w_nodes.push(w);
            rho_nodes.push(rho);
        }
    }

    let rho_max = rho_nodes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = (rho - rho_max).exp();
    let (s, c) = w.sin_cos();
    Ok(ArgumentPath {
        grid,
        w: w_nodes,
        rho: rho_nodes,
        terminal: Terminal {
            w_pi: w,
            rho_pi: rho,
            rho_max,
            v_pi_scaled: scale * s,
            vp_pi_scaled: scale * c,
        },
    })
}

/// Prüfer argument `W(u)` of the linearization at `u`, with potential
/// `q(t) = f'(u(t))`.
///
/// `u` is evaluated at the RK4 stage times through its own interpolant and
/// `f'` is applied afterwards, so `q` never leaves the range of `f'`.
pub fn integrate_argument(
    f: &Nonlinearity,
    u: &GridFunction,
    substeps: usize,
) -> Result<ArgumentPath> {
    if !u.is_dirichlet() {
        let v = u.values();
        return Err(Error::NotDirichlet {
            left: v[0],
            right: v[v.len() - 1],
        });
    }
    integrate_potential(u.grid(), substeps, |t| f.f1(u.eval(t)))
}

/// Argument at time `t` of `v'' + ω v = 0`, `v(0) = 0`, `v'(0) = 1`, in closed form.
pub fn free_argument_at(omega: f64, t: f64) -> f64 {
    if omega > 0.0 {
        let s = omega.sqrt();
        let x = s * t;
        // W crosses kπ exactly when s t = kπ; within a branch it is the
        // angle of (cos x, sin x / s) shifted back by the branch index.
        let k = (x / PI).floor();
        let phase = x - k * PI;
        k * PI + (phase.sin() / s).atan2(phase.cos())
    } else if omega == 0.0 {
        t.atan()
    } else {
        let s = (-omega).sqrt();
        ((s * t).tanh() / s).atan()
    }
}

/// `W₁(ω, π)` for the constant potential `q ≡ -ω`.
pub fn free_argument(omega: f64) -> f64 {
    free_argument_at(omega, PI)
}

/// Kernel candidate `v(t) = exp(ρ(t) − ρ_max) sin W(t)` at the nodes.
pub fn reconstruct_kernel(path: &ArgumentPath) -> GridFunction {
    let rho_max = path.terminal.rho_max;
    let values = path
        .w
        .iter()
        .zip(&path.rho)
        .map(|(w, r)| (r - rho_max).exp() * w.sin())
        .collect();
    GridFunction::from_nodes(path.grid, values).expect("path values are finite")
}

/// Number of sign changes in a sequence, ignoring exact zeros.
pub fn sign_changes(values: &[f64]) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for &v in values {
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = v;
    }
    count
}
