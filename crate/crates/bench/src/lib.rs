//! Shared inputs for the benchmarks.

use critset::{Grid, GridFunction, Nonlinearity};

pub fn canonical() -> Nonlinearity {
    Nonlinearity::softplus(-12.0, 3.0).expect("valid parameters")
}

pub fn grid(n: usize) -> Grid {
    Grid::new(n).expect("even and at least 16")
}

/// `2 sin t + sin 2t` sampled at the nodes, so evaluation goes through the Hermite interpolant.
pub fn node_input(grid: Grid) -> GridFunction {
    let values = grid
        .nodes()
        .map(|t| 2.0 * t.sin() + (2.0 * t).sin())
        .collect();
    GridFunction::from_nodes_dirichlet(grid, values).expect("vanishes at both ends")
}
