//! Numerical analysis of the critical set of `F(u) = -u'' + f(u)` on
//! `[0, π]` with Dirichlet conditions.
//!
//! `u` is critical exactly when the Prüfer argument `W(u)(π)` of the
//! linearized solution `v'' = f'(u) v`, `v(0) = 0`, `v'(0) = 1` is a
//! positive multiple of `π`. The crate provides:
//!
//! * [`nonlinearity`]: the scalar `f` with `f'`, `f''` and convexity classification,
//! * [`pruefer`]: overflow-safe integration of the argument and log-amplitude,
//! * [`variational`]: the closed-form derivative `DW(u)(π)·φ` and its finite-difference check,
//! * [`manifold`]: level sets `M_θ` as graphs over a hyperplane, emptiness and asymptotics,
//! * [`shooting`]: solution counting for `F(u) = g` by shooting,
//! * [`verify`]: the property suite behind `critset verify`.

pub mod error;
pub mod grid;
pub mod manifold;
pub mod nonlinearity;
pub mod pruefer;
pub mod report;
pub mod scan;
pub mod shooting;
pub mod variational;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{Grid, GridFunction, GridFunctionSpec, Representation};
pub use manifold::{
    asymptotic_arguments, chart_point, comparison_identity_residual, decompose, find_lambda,
    is_ck_nonempty, lambda_scan, Asymptotes, ComparisonIdentity, LineFamily, ManifoldPoint,
    SearchOptions,
};
pub use nonlinearity::{ConvexityReport, Curvature, Family, Hypothesis, Nonlinearity};
pub use pruefer::{
    free_argument, integrate_argument, integrate_potential, reconstruct_kernel, ArgumentPath,
};
pub use scan::ScanRange;
pub use shooting::{
    count_solutions, locate_fold, shoot, CountOptions, ShootingRecord, Solution, SolutionSet,
};
pub use variational::{dw_pairing, fd_dw, is_critical, Criticality, Pairing};
pub use verify::{CheckResult, Group, VerifyOptions};
