//! The JSON run configuration shared by all subcommands.

use std::path::PathBuf;

use critset::{Family, Grid, GridFunction, GridFunctionSpec, Nonlinearity, ScanRange};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Required by every subcommand except `verify`.
    pub nonlinearity: Option<Family>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub inputs: Inputs,
    /// Target level for `critical` (ignored when `k` is given).
    pub theta: Option<f64>,
    /// Critical component index for `critical`.
    pub k: Option<u32>,
    /// Line coordinate range for `scan`.
    pub lambda: Option<ScanRange>,
    /// Constant-potential range for `scan`.
    pub omega: Option<ScanRange>,
    /// Slope window for `count`.
    pub slopes: Option<ScanRange>,
    /// Criticality tolerance for `argument`.
    pub tolerance: Option<f64>,
    pub bracket_limit: Option<f64>,
    pub root_tol: Option<f64>,
    pub tangent_tol: Option<f64>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n: usize,
    pub substeps: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n: Grid::DEFAULT_INTERVALS,
            substeps: critset::pruefer::DEFAULT_SUBSTEPS,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub u: Option<GridFunctionSpec>,
    pub h: Option<GridFunctionSpec>,
    pub p: Option<GridFunctionSpec>,
    pub g: Option<GridFunctionSpec>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// Summary JSON on stdout.
    #[default]
    Json,
    /// The command's main table as CSV on stdout.
    Csv,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// A validated configuration.
pub struct Resolved {
    pub raw: RunConfig,
    pub grid: Grid,
    pub substeps: usize,
    pub f: Option<Nonlinearity>,
    pub u: GridFunction,
    pub h: GridFunction,
    pub p: GridFunction,
    pub g: Option<GridFunction>,
}

fn positive(name: &str, x: Option<f64>) -> Result<(), CliError> {
    match x {
        Some(v) if !(v > 0.0 && v.is_finite()) => {
            Err(CliError::Input(format!("{name} must be positive, got {v}")))
        }
        _ => Ok(()),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Input(format!("invalid configuration: {e}")))
    }

    pub fn resolve(self) -> Result<Resolved, CliError> {
        let grid = Grid::new(self.grid.n)?;
        if self.grid.substeps == 0 {
            return Err(CliError::Input("grid.substeps must be at least 1".into()));
        }
        let f = self.nonlinearity.map(Nonlinearity::new).transpose()?;
        let build = |spec: &Option<GridFunctionSpec>, dirichlet: bool| {
            spec.as_ref().map(|s| s.build(grid, dirichlet)).transpose()
        };
        let u = build(&self.inputs.u, true)?.unwrap_or_else(|| GridFunction::zero(grid));
        let h = build(&self.inputs.h, true)?.unwrap_or_else(|| GridFunction::zero(grid));
        let p = build(&self.inputs.p, true)?.unwrap_or_else(|| GridFunction::sin(grid));
        let g = build(&self.inputs.g, false)?;
        for (name, r) in [
            ("lambda", &self.lambda),
            ("omega", &self.omega),
            ("slopes", &self.slopes),
        ] {
            if let Some(r) = r {
                r.validate()
                    .map_err(|e| CliError::Input(format!("{name}: {e}")))?;
            }
        }
        positive("tolerance", self.tolerance)?;
        positive("bracket_limit", self.bracket_limit)?;
        positive("root_tol", self.root_tol)?;
        positive("tangent_tol", self.tangent_tol)?;
        if let Some(t) = self.theta {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Input(format!("theta must be positive, got {t}")));
            }
        }
        if self.k == Some(0) {
            return Err(CliError::Input("k must be at least 1".into()));
        }
        Ok(Resolved {
            substeps: self.grid.substeps,
            raw: self,
            grid,
            f,
            u,
            h,
            p,
            g,
        })
    }
}

impl Resolved {
    pub fn nonlinearity(&self) -> Result<&Nonlinearity, CliError> {
        self.f
            .as_ref()
            .ok_or_else(|| CliError::Input("missing key `nonlinearity`".into()))
    }
}
