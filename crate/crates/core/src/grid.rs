//! Uniform grids on `[0, π]` and functions sampled on them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid `t_i = i π / n`, `i = 0..=n`, with `n` even (Simpson) and at least 16.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub const DEFAULT_INTERVALS: usize = 2048;

    pub fn new(n: usize) -> Result<Self> {
        if n < 16 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "number of intervals must be even and >= 16, got {n}"
            )));
        }
        Ok(Self { n })
    }

    /// Number of intervals.
    pub fn intervals(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        PI / self.n as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        if i == self.n {
            PI
        } else {
            i as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(move |i| self.node(i))
    }

    /// Composite Simpson weight of node `i`.
    #[inline]
    pub fn simpson_weight(&self, i: usize) -> f64 {
        let h3 = self.step() / 3.0;
        if i == 0 || i == self.n {
            h3
        } else if i % 2 == 1 {
            4.0 * h3
        } else {
            2.0 * h3
        }
    }

    /// Composite Simpson rule over `[0, π]` for node samples.
    pub fn simpson(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        values
            .iter()
            .enumerate()
            .map(|(i, v)| self.simpson_weight(i) * v)
            .sum()
    }

    /// Cumulative integral `∫_0^{t_i}` at every node, fourth order accurate.
    ///
    /// Each cell uses the cubic through the four surrounding nodes (shifted
    /// inwards at the two boundary cells).
    pub fn cumulative_integral(&self, values: &[f64]) -> Vec<f64> {
        debug_assert_eq!(values.len(), self.len());
        let n = self.n;
        let h24 = self.step() / 24.0;
        let y = values;
        let mut out = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for i in 0..n {
            let cell = if i == 0 {
                9.0 * y[0] + 19.0 * y[1] - 5.0 * y[2] + y[3]
            } else if i == n - 1 {
                9.0 * y[n] + 19.0 * y[n - 1] - 5.0 * y[n - 2] + y[n - 3]
            } else {
                -y[i - 1] + 13.0 * y[i] + 13.0 * y[i + 1] - y[i + 2]
            };
            acc += h24 * cell;
            out.push(acc);
        }
        out
    }
}

/// How a [`GridFunction`] is represented between nodes.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    /// Node samples, interpolated by cubic Hermite with fourth-order finite-difference slopes.
    NodeValues { slopes: Vec<f64> },
    /// `Σ_k c_k sin(k t)`, `coeffs[k-1] = c_k`, evaluated exactly.
    SineSeries { coeffs: Vec<f64> },
}

/// A real function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
    repr: Representation,
}

/// Evaluates `Σ c_k sin(k t)` with the Chebyshev recurrence.
#[inline]
fn sine_sum(coeffs: &[f64], t: f64) -> f64 {
    let (s1, c1) = t.sin_cos();
    let two_cos = 2.0 * c1;
    let (mut prev, mut cur) = (0.0, s1);
    let mut acc = 0.0;
    for &c in coeffs {
        acc += c * cur;
        let next = two_cos * cur - prev;
        prev = cur;
        cur = next;
    }
    acc
}

fn node_slopes(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len() - 1;
    let y = values;
    (0..=n)
        .map(|i| {
            if i == 0 {
                (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) / (12.0 * h)
            } else if i == 1 {
                (-3.0 * y[0] - 10.0 * y[1] + 18.0 * y[2] - 6.0 * y[3] + y[4]) / (12.0 * h)
            } else if i == n {
                (25.0 * y[n] - 48.0 * y[n - 1] + 36.0 * y[n - 2] - 16.0 * y[n - 3] + 3.0 * y[n - 4])
                    / (12.0 * h)
            } else if i == n - 1 {
                (3.0 * y[n] + 10.0 * y[n - 1] - 18.0 * y[n - 2] + 6.0 * y[n - 3] - y[n - 4])
                    / (12.0 * h)
            } else {
                (-y[i + 2] + 8.0 * y[i + 1] - 8.0 * y[i - 1] + y[i - 2]) / (12.0 * h)
            }
        })
        .collect()
}

const DIRICHLET_TOL: f64 = 1e-12;

impl GridFunction {
    /// Node samples with no boundary requirement (right-hand sides `g`).
    pub fn from_nodes(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} node values for n = {}, got {}",
                grid.len(),
                grid.intervals(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue("grid function node values"));
        }
        let slopes = node_slopes(&values, grid.step());
        Ok(Self {
            grid,
            values,
            repr: Representation::NodeValues { slopes },
        })
    }

    /// Node samples of an element of `X`. Endpoint values within `1e-12`
    /// of zero are snapped to exactly zero; anything larger is rejected.
    pub fn from_nodes_dirichlet(grid: Grid, mut values: Vec<f64>) -> Result<Self> {
        if let (Some(&left), Some(&right)) = (values.first(), values.last()) {
            if left.abs() > DIRICHLET_TOL || right.abs() > DIRICHLET_TOL {
                return Err(Error::NotDirichlet { left, right });
            }
        }
        if let Some(v) = values.first_mut() {
            *v = 0.0;
        }
        if let Some(v) = values.last_mut() {
            *v = 0.0;
        }
        Self::from_nodes(grid, values)
    }

    /// Samples a closure at the nodes.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_nodes(grid, grid.nodes().map(f).collect())
    }

    pub fn sine_series(grid: Grid, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteValue("sine coefficients"));
        }
        let mut values: Vec<f64> = grid.nodes().map(|t| sine_sum(&coeffs, t)).collect();
        values[0] = 0.0;
        values[grid.intervals()] = 0.0;
        Ok(Self {
            grid,
            values,
            repr: Representation::SineSeries { coeffs },
        })
    }

    /// `sin t`.
    pub fn sin(grid: Grid) -> Self {
        Self::sine_series(grid, vec![1.0]).expect("finite coefficients")
    }

    pub fn zero(grid: Grid) -> Self {
        Self::sine_series(grid, Vec::new()).expect("finite coefficients")
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn sine_coefficients(&self) -> Option<&[f64]> {
        match &self.repr {
            Representation::SineSeries { coeffs } => Some(coeffs),
            Representation::NodeValues { .. } => None,
        }
    }

    pub fn is_dirichlet(&self) -> bool {
        self.values[0] == 0.0 && self.values[self.grid.intervals()] == 0.0
    }

    /// Value at an arbitrary `t ∈ [0, π]`.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match &self.repr {
            Representation::SineSeries { coeffs } => sine_sum(coeffs, t),
            Representation::NodeValues { slopes } => {
                let h = self.grid.step();
                let n = self.grid.intervals();
                let i = ((t / h).floor().max(0.0) as usize).min(n - 1);
                let s = (t - self.grid.node(i)) / h;
                let s2 = s * s;
                let s3 = s2 * s;
                let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
                let h10 = s3 - 2.0 * s2 + s;
                let h01 = -2.0 * s3 + 3.0 * s2;
                let h11 = s3 - s2;
                h00 * self.values[i]
                    + h10 * h * slopes[i]
                    + h01 * self.values[i + 1]
                    + h11 * h * slopes[i + 1]
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn ensure_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                left: self.grid.intervals(),
                right: other.grid.intervals(),
            });
        }
        Ok(())
    }

    /// `a·self + b·other`. Stays a sine series when both operands are.
    pub fn combine(&self, a: f64, other: &GridFunction, b: f64) -> Result<GridFunction> {
        self.ensure_same_grid(other)?;
        match (&self.repr, &other.repr) {
            (
                Representation::SineSeries { coeffs: x },
                Representation::SineSeries { coeffs: y },
            ) => {
                let m = x.len().max(y.len());
                let coeffs = (0..m)
                    .map(|k| {
                        a * x.get(k).copied().unwrap_or(0.0) + b * y.get(k).copied().unwrap_or(0.0)
                    })
                    .collect();
                GridFunction::sine_series(self.grid, coeffs)
            }
            _ => {
                let values = self
                    .values
                    .iter()
                    .zip(&other.values)
                    .map(|(x, y)| a * x + b * y)
                    .collect();
                GridFunction::from_nodes(self.grid, values)
            }
        }
    }

    pub fn scale(&self, a: f64) -> GridFunction {
        match &self.repr {
            Representation::SineSeries { coeffs } => {
                GridFunction::sine_series(self.grid, coeffs.iter().map(|c| a * c).collect())
                    .expect("scaling keeps coefficients finite")
            }
            Representation::NodeValues { .. } => {
                GridFunction::from_nodes(self.grid, self.values.iter().map(|v| a * v).collect())
                    .expect("scaling keeps values finite")
            }
        }
    }

    /// Discrete `L²` inner product with Simpson weights.
    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        self.ensure_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (x, y))| self.grid.simpson_weight(i) * x * y)
            .sum())
    }

    pub fn to_spec(&self) -> GridFunctionSpec {
        match &self.repr {
            Representation::SineSeries { coeffs } => GridFunctionSpec::Sine {
                coeffs: coeffs.clone(),
            },
            Representation::NodeValues { .. } => GridFunctionSpec::Nodes {
                n: self.grid.intervals(),
                values: self.values.clone(),
            },
        }
    }
}

/// JSON form of a grid function:
/// `{"type":"sine","coeffs":[...]}` or `{"type":"nodes","n":2048,"values":[...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum GridFunctionSpec {
    Sine { coeffs: Vec<f64> },
    Nodes { n: usize, values: Vec<f64> },
}

impl GridFunctionSpec {
    /// Realizes the spec on `grid`. With `dirichlet`, node data must vanish
    /// at both endpoints.
    pub fn build(&self, grid: Grid, dirichlet: bool) -> Result<GridFunction> {
        match self {
            GridFunctionSpec::Sine { coeffs } => GridFunction::sine_series(grid, coeffs.clone()),
            GridFunctionSpec::Nodes { n, values } => {
                if *n != grid.intervals() {
                    return Err(Error::InvalidGrid(format!(
                        "node data is for n = {n} but the grid has n = {}",
                        grid.intervals()
                    )));
                }
                if dirichlet {
                    GridFunction::from_nodes_dirichlet(grid, values.clone())
                } else {
                    GridFunction::from_nodes(grid, values.clone())
                }
            }
        }
    }
}
