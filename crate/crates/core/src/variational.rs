//! Directional derivative of `u ↦ W(u)(π)`.
//!
//! Differentiating the linearized problem in `u` and solving the resulting
//! inhomogeneous problem by variation of constants collapses to
//!
//! ```text
//! DW(u)(π)·φ = −(v(π)² + v'(π)²)⁻¹ ∫₀^π f''(u) φ v² dt
//! ```
//!
//! The inhomogeneous solution `μ = Dv(u)·φ` is never materialized. With
//! `v = e^ρ sin W`, `v(t)²/r(π)² = exp(2(ρ(t) − ρ(π))) sin²W(t)`, and the
//! integral is evaluated in that form so the amplitude never overflows.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::nonlinearity::Nonlinearity;
use crate::pruefer::{integrate_argument, ArgumentPath};

/// `DW(u)(π)·φ` together with its integrand.
#[derive(Debug, Clone, PartialEq)]
pub struct Pairing {
    pub value: f64,
    /// `2ρ(π) = log(v(π)² + v'(π)²)`.
    pub denominator_log: f64,
    /// `f''(u)·φ·exp(2(ρ − ρ(π)))·sin²W` at the nodes; `value` is minus its integral.
    pub integrand: Vec<f64>,
}

/// Evaluates the derivative formula by composite Simpson on the grid nodes.
/// `path` must be the argument path of `(f, u)`.
pub fn dw_pairing(
    f: &Nonlinearity,
    u: &GridFunction,
    phi: &GridFunction,
    path: &ArgumentPath,
) -> Result<Pairing> {
    u.ensure_same_grid(phi)?;
    if path.grid() != u.grid() {
        return Err(Error::GridMismatch {
            left: u.grid().intervals(),
            right: path.grid().intervals(),
        });
    }
    let rho_pi = path.terminal().rho_pi;
    let integrand: Vec<f64> = u
        .values()
        .iter()
        .zip(phi.values())
        .zip(path.angle().iter().zip(path.log_amplitude()))
        .map(|((&u, &phi), (&w, &rho))| {
            let s = w.sin();
            f.f2(u) * phi * (2.0 * (rho - rho_pi)).exp() * s * s
        })
        .collect();
    let value = -u.grid().simpson(&integrand);
    if !value.is_finite() {
        return Err(Error::NonFiniteValue("DW(u)(pi) pairing"));
    }
    Ok(Pairing {
        value,
        denominator_log: 2.0 * rho_pi,
        integrand,
    })
}

/// Central difference `(W(u+εφ)(π) − W(u−εφ)(π)) / 2ε`; the verification
/// oracle for [`dw_pairing`].
pub fn fd_dw(
    f: &Nonlinearity,
    u: &GridFunction,
    phi: &GridFunction,
    epsilon: f64,
    substeps: usize,
) -> Result<f64> {
    if !(1e-8..=1e-2).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in [1e-8, 1e-2], got {epsilon}"
        )));
    }
    let plus = integrate_argument(f, &u.combine(1.0, phi, epsilon)?, substeps)?;
    let minus = integrate_argument(f, &u.combine(1.0, phi, -epsilon)?, substeps)?;
    Ok((plus.w_pi() - minus.w_pi()) / (2.0 * epsilon))
}

/// Whether `W(π)` sits on a critical level `kπ`, `k ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Criticality {
    pub critical: bool,
    pub k: Option<u32>,
    /// `min_{k≥1} |W(π) − kπ|`.
    pub distance: f64,
}

impl Criticality {
    pub fn of_argument(w_pi: f64, tol: f64) -> Self {
        assert!(tol > 0.0, "tolerance must be positive");
        let nearest = (w_pi / PI).round().max(1.0);
        let distance = (w_pi - nearest * PI).abs();
        let critical = distance <= tol;
        Criticality {
            critical,
            k: critical.then_some(nearest as u32),
            distance,
        }
    }
}

pub fn is_critical(path: &ArgumentPath, tol: f64) -> Criticality {
    Criticality::of_argument(path.w_pi(), tol)
}
