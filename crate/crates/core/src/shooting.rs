//! Shooting for `-u'' + f(u) = g`, `u(0) = u(π) = 0`.
//!
//! The boundary value problem is turned into the initial value problem
//! `u'' = f(u) − g`, `u(0) = 0`, `u'(0) = s`, and solutions are roots of
//! the terminal map `s ↦ u_s(π)`. Counts are empirical and only cover the
//! scanned slope window.

use std::f64::consts::PI;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::nonlinearity::Nonlinearity;
use crate::pruefer::{sign_changes, DEFAULT_SUBSTEPS};
use crate::report::fmt_f64;
use crate::scan::ScanRange;

/// Trajectories whose state exceeds this magnitude are treated as blown up.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;

/// Result of one shot.
#[derive(Debug, Clone, PartialEq)]
pub struct ShootingRecord {
    pub slope: f64,
    /// `u_s(π)`, or a signed infinity after blow-up.
    pub terminal: f64,
    /// Node values of `u_s`; `None` after blow-up.
    pub trajectory: Option<GridFunction>,
    pub blew_up: bool,
    pub escape_time: Option<f64>,
}

impl ShootingRecord {
    /// The trajectory with the linear correction `t u(π)/π` removed, so it
    /// satisfies the Dirichlet condition exactly. Meaningful only near a root.
    pub fn as_dirichlet(&self) -> Option<GridFunction> {
        let traj = self.trajectory.as_ref()?;
        let grid = traj.grid();
        let end = self.terminal;
        let values: Vec<f64> = grid
            .nodes()
            .zip(traj.values())
            .map(|(t, u)| u - end * t / PI)
            .collect();
        GridFunction::from_nodes_dirichlet(grid, values).ok()
    }
}

struct Shot {
    terminal: f64,
    blew_up: bool,
    escape_time: Option<f64>,
    nodes: Option<Vec<f64>>,
}

/// Fixed-step RK4 integrator for the shooting IVP with `g` pre-sampled at
/// every step endpoint and midpoint.
pub struct Shooter<'a> {
    f: &'a Nonlinearity,
    grid: Grid,
    substeps: usize,
    g_half: Vec<f64>,
}

impl<'a> Shooter<'a> {
    pub fn new(f: &'a Nonlinearity, g: &GridFunction, substeps: usize) -> Result<Self> {
        if substeps == 0 {
            return Err(Error::InvalidGrid("substeps must be at least 1".into()));
        }
        let grid = g.grid();
        let half_points = 2 * grid.intervals() * substeps;
        let g_half = (0..=half_points)
            .map(|j| {
                g.eval(if j == half_points {
                    PI
                } else {
                    j as f64 * PI / half_points as f64
                })
            })
            .collect();
        Ok(Self {
            f,
            grid,
            substeps,
            g_half,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    fn run(&self, slope: f64, keep: bool) -> Shot {
        let steps = self.grid.intervals() * self.substeps;
        let h = PI / steps as f64;
        let f = self.f;
        let rhs = |u: f64, v: f64, g: f64| (v, f.f(u) - g);
        let (mut u, mut v) = (0.0f64, slope);
        let mut nodes = keep.then(|| {
            let mut n = Vec::with_capacity(self.grid.len());
            n.push(0.0);
            n
        });
        for step in 0..steps {
            let (g0, gm, g1) = (
                self.g_half[2 * step],
                self.g_half[2 * step + 1],
                self.g_half[2 * step + 2],
            );
            let k1 = rhs(u, v, g0);
            let k2 = rhs(u + 0.5 * h * k1.0, v + 0.5 * h * k1.1, gm);
            let k3 = rhs(u + 0.5 * h * k2.0, v + 0.5 * h * k2.1, gm);
            let k4 = rhs(u + h * k3.0, v + h * k3.1, g1);
            let u_next = u + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            let v_next = v + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            if !(u_next.abs() <= BLOW_UP_THRESHOLD && v_next.abs() <= BLOW_UP_THRESHOLD) {
                let sign = if u_next.is_nan() {
                    u.signum()
                } else {
                    u_next.signum()
                };
                return Shot {
                    terminal: sign * f64::INFINITY,
                    blew_up: true,
                    escape_time: Some((step + 1) as f64 * h),
                    nodes: None,
                };
            }
            u = u_next;
            v = v_next;
            if let Some(n) = nodes.as_mut() {
                if (step + 1) % self.substeps == 0 {
                    n.push(u);
                }
            }
        }
        Shot {
            terminal: u,
            blew_up: false,
            escape_time: None,
            nodes,
        }
    }

    /// Integrates with initial slope `s` and keeps the trajectory.
    pub fn shoot(&self, slope: f64) -> ShootingRecord {
        let shot = self.run(slope, true);
        let trajectory = shot
            .nodes
            .map(|v| GridFunction::from_nodes(self.grid, v).expect("finite trajectory"));
        ShootingRecord {
            slope,
            terminal: shot.terminal,
            trajectory,
            blew_up: shot.blew_up,
            escape_time: shot.escape_time,
        }
    }

    /// `u_s(π)` only (signed infinity after blow-up).
    pub fn terminal(&self, slope: f64) -> f64 {
        self.run(slope, false).terminal
    }
}

/// Shoots once with the default resolution.
pub fn shoot(f: &Nonlinearity, g: &GridFunction, slope: f64) -> ShootingRecord {
    Shooter::new(f, g, DEFAULT_SUBSTEPS)
        .expect("default substeps are valid")
        .shoot(slope)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountOptions {
    pub window: ScanRange,
    pub substeps: usize,
    /// Roots are refined until `|u_s(π)|` is at most this.
    pub root_tol: f64,
    /// A scan extremum with `|u_s(π)|` at most this is reported as one tangential root.
    pub tangent_tol: f64,
}

impl Default for CountOptions {
    fn default() -> Self {
        Self {
            window: ScanRange {
                min: -200.0,
                max: 200.0,
                samples: 2001,
            },
            substeps: DEFAULT_SUBSTEPS,
            root_tol: 1e-8,
            tangent_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanSample {
    pub s: f64,
    pub u_pi: f64,
    pub blew_up: bool,
}

/// A solution of `F(u) = g` found by shooting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub s: f64,
    /// `|u_s(π)|`.
    pub residual: f64,
    /// Interior sign changes of `u`.
    pub zeros_of_u: usize,
    /// Double root of the terminal map (a fold point within tolerance).
    pub tangential: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSet {
    pub solutions: Vec<Solution>,
    /// Scan samples that blew up before `t = π`.
    pub blow_ups: usize,
    pub scan: Vec<ScanSample>,
}

impl SolutionSet {
    /// Number of solutions, each tangential root counted once.
    pub fn count(&self) -> usize {
        self.solutions.len()
    }

    pub fn write_scan_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "s,u_pi,blew_up")?;
        for r in &self.scan {
            writeln!(out, "{},{},{}", fmt_f64(r.s), fmt_f64(r.u_pi), r.blew_up)?;
        }
        Ok(())
    }
}

const MAX_BISECTIONS: usize = 200;

/// Bisection on a bracket with a sign change, stopping at `|T| ≤ tol`.
fn refine_root(shooter: &Shooter, mut a: f64, mut ta: f64, mut b: f64, tb: f64, tol: f64) -> f64 {
    debug_assert!((ta < 0.0) != (tb < 0.0));
    if ta.abs() <= tol {
        return a;
    }
    if tb.abs() <= tol {
        return b;
    }
    for _ in 0..MAX_BISECTIONS {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let tm = shooter.terminal(m);
        if tm.abs() <= tol {
            return m;
        }
        if (tm < 0.0) == (ta < 0.0) {
            a = m;
            ta = tm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Golden-section minimization of `sign·T` on `[a, b]`; returns the argmin and `T` there.
fn refine_extremum(shooter: &Shooter, mut a: f64, mut b: f64, sign: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let obj = |s: f64| sign * shooter.terminal(s);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (obj(x1), obj(x2));
    while b - a > 1e-8 * a.abs().max(b.abs()).max(1.0) {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = obj(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = obj(x2);
        }
    }
    if f1 < f2 {
        (x1, sign * f1)
    } else {
        (x2, sign * f2)
    }
}

fn solution_at(shooter: &Shooter, s: f64, tangential: bool) -> Solution {
    let rec = shooter.shoot(s);
    let zeros_of_u = rec
        .trajectory
        .as_ref()
        .map(|u| {
            let v = u.values();
            sign_changes(&v[1..v.len() - 1])
        })
        .unwrap_or(0);
    Solution {
        s,
        residual: rec.terminal.abs(),
        zeros_of_u,
        tangential,
    }
}

/// Scans `u_s(π)` over the slope window and refines every root.
///
/// Sign changes between neighbouring samples are bisected. Local minima of
/// `|u_s(π)|` without a sign change are refined by golden section: if the
/// extremum dips through zero by more than `tangent_tol` it yields two
/// roots, if it stays within `tangent_tol` of zero it is reported once as
/// a tangential root. Intervals touching a blown-up sample are skipped.
pub fn count_solutions(
    f: &Nonlinearity,
    g: &GridFunction,
    opts: &CountOptions,
) -> Result<SolutionSet> {
    opts.window.validate()?;
    let shooter = Shooter::new(f, g, opts.substeps)?;
    let scan: Vec<ScanSample> = opts
        .window
        .points()
        .into_par_iter()
        .map(|s| {
            let shot = shooter.run(s, false);
            ScanSample {
                s,
                u_pi: shot.terminal,
                blew_up: shot.blew_up,
            }
        })
        .collect();
    let blow_ups = scan.iter().filter(|r| r.blew_up).count();

    let mut roots: Vec<(f64, bool)> = Vec::new();
    let n = scan.len();
    for i in 0..n {
        let cur = scan[i];
        if cur.blew_up {
            continue;
        }
        if cur.u_pi == 0.0 {
            roots.push((cur.s, false));
            continue;
        }
        if i + 1 < n {
            let next = scan[i + 1];
            if !next.blew_up && next.u_pi != 0.0 && (cur.u_pi < 0.0) != (next.u_pi < 0.0) {
                let s = refine_root(&shooter, cur.s, cur.u_pi, next.s, next.u_pi, opts.root_tol);
                roots.push((s, false));
            }
        }
        if i == 0 || i + 1 == n {
            continue;
        }
        let (prev, next) = (scan[i - 1], scan[i + 1]);
        let same_sign = |x: f64| x != 0.0 && (x < 0.0) == (cur.u_pi < 0.0);
        if prev.blew_up || next.blew_up || !same_sign(prev.u_pi) || !same_sign(next.u_pi) {
            continue;
        }
        if cur.u_pi.abs() < prev.u_pi.abs() && cur.u_pi.abs() <= next.u_pi.abs() {
            let sign = cur.u_pi.signum();
            let (s_ext, t_ext) = refine_extremum(&shooter, prev.s, next.s, sign);
            if t_ext.abs() <= opts.tangent_tol {
                roots.push((s_ext, true));
            } else if (t_ext < 0.0) != (cur.u_pi < 0.0) {
                roots.push((
                    refine_root(&shooter, prev.s, prev.u_pi, s_ext, t_ext, opts.root_tol),
                    false,
                ));
                roots.push((
                    refine_root(&shooter, s_ext, t_ext, next.s, next.u_pi, opts.root_tol),
                    false,
                ));
            }
        }
    }
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));

    let solutions = roots
        .into_iter()
        .map(|(s, tangential)| solution_at(&shooter, s, tangential))
        .collect();
    Ok(SolutionSet {
        solutions,
        blow_ups,
        scan,
    })
}

/// Transition of the solution count along `g = τ·shape`.
#[derive(Debug, Clone, PartialEq)]
pub struct Fold {
    pub tau: f64,
    /// Solution count at `tau` (1 when the tangential root was resolved).
    pub count: usize,
    /// Shot through the extremum of the terminal map at `tau`.
    pub record: ShootingRecord,
}

/// Locates the parameter `τ*` where the solution count of `F(u) = τ·shape`
/// changes, by bisection on `τ` between `tau_a` and `tau_b` (which must
/// have different counts), to width `tau_tol` or until a count of one
/// (a tangential root) is observed.
pub fn locate_fold(
    f: &Nonlinearity,
    shape: &GridFunction,
    tau_a: f64,
    tau_b: f64,
    opts: &CountOptions,
    tau_tol: f64,
) -> Result<Fold> {
    let count = |tau: f64| count_solutions(f, &shape.scale(tau), opts);
    let (mut a, mut b) = (tau_a, tau_b);
    let count_a = count(a)?.count();
    let count_b = count(b)?.count();
    if count_a == count_b {
        return Err(Error::InvalidParameter(format!(
            "both ends of the tau bracket have {count_a} solutions"
        )));
    }
    let mut found = None;
    while (b - a).abs() > tau_tol {
        let mid = 0.5 * (a + b);
        let set = count(mid)?;
        match set.count() {
            1 => {
                found = Some((mid, set));
                break;
            }
            c if c == count_a => a = mid,
            _ => b = mid,
        }
    }
    let (tau, set) = match found {
        Some(x) => x,
        None => {
            // Take the side with more roots; the fold sits between its two closest ones.
            let tau = if count_a > count_b { a } else { b };
            (tau, count(tau)?)
        }
    };

    let g = shape.scale(tau);
    let shooter = Shooter::new(f, &g, opts.substeps)?;
    let slope = match set.solutions.iter().find(|s| s.tangential) {
        Some(s) => s.s,
        None => {
            let pair = set
                .solutions
                .windows(2)
                .min_by(|x, y| (x[1].s - x[0].s).total_cmp(&(y[1].s - y[0].s)))
                .ok_or_else(|| Error::NoConvergence("no root pair near the fold".into()))?;
            let mid_sign = shooter.terminal(0.5 * (pair[0].s + pair[1].s)).signum();
            refine_extremum(&shooter, pair[0].s, pair[1].s, -mid_sign).0
        }
    };
    Ok(Fold {
        tau,
        count: set.count(),
        record: shooter.shoot(slope),
    })
}

/// Max interior residual of `-u'' + f(u) − g` with fourth-order differences
/// (second order at the nodes next to the boundary).
pub fn bvp_residual(f: &Nonlinearity, g: &GridFunction, u: &GridFunction) -> Result<f64> {
    u.ensure_same_grid(g)?;
    let grid = u.grid();
    let n = grid.intervals();
    let h2 = grid.step().powi(2);
    let y = u.values();
    let mut worst: f64 = 0.0;
    for i in 1..n {
        let d2 = if i == 1 || i == n - 1 {
            (y[i - 1] - 2.0 * y[i] + y[i + 1]) / h2
        } else {
            (-y[i - 2] + 16.0 * y[i - 1] - 30.0 * y[i] + 16.0 * y[i + 1] - y[i + 2]) / (12.0 * h2)
        };
        worst = worst.max((-d2 + f.f(y[i]) - g.values()[i]).abs());
    }
    Ok(worst)
}
