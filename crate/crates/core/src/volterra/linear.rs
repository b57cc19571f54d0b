use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::kernels::KernelSpec;

use super::convolution::ConvolutionWeights;

/// `x(t) + multiplier * int_0^t K(t - s) x(s) ds = f(t)` on a grid from 0.
#[derive(Debug, Clone)]
pub struct LinearVieProblem {
    pub kernel: KernelSpec,
    pub multiplier: f64,
    pub forcing: Vec<f64>,
    pub grid: TimeGrid,
}

impl LinearVieProblem {
    pub fn new(kernel: KernelSpec, multiplier: f64, forcing: Vec<f64>, grid: TimeGrid) -> Self {
        Self { kernel, multiplier, forcing, grid }
    }

    /// Problem with the forcing sampled from `f` at the grid nodes.
    pub fn with_forcing_fn<F: Fn(f64) -> f64>(
        kernel: KernelSpec,
        multiplier: f64,
        f: F,
        grid: TimeGrid,
    ) -> Self {
        let forcing = grid.times().into_iter().map(f).collect();
        Self { kernel, multiplier, forcing, grid }
    }
}

/// Implicit product-trapezoidal solution at the grid nodes.
pub fn solve_linear_vie(problem: &LinearVieProblem) -> Result<Vec<f64>> {
    let LinearVieProblem { kernel, multiplier, forcing, grid } = problem;
    kernel.validate()?;
    grid.require_origin()?;
    grid.require_samples(forcing.len(), "forcing")?;
    if !multiplier.is_finite() {
        return Err(Error::InvalidArgument(format!("multiplier must be finite, got {multiplier}")));
    }
    if let Some(i) = forcing.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("forcing is not finite at node {i}")));
    }
    if *multiplier == 0.0 {
        return Ok(forcing.clone());
    }
    let weights = ConvolutionWeights::new(kernel, grid);
    solve_with_weights(&weights, *multiplier, forcing)
}

pub(crate) fn solve_with_weights(
    weights: &ConvolutionWeights,
    multiplier: f64,
    forcing: &[f64],
) -> Result<Vec<f64>> {
    let pivot = 1.0 + multiplier * weights.diagonal();
    if pivot.abs() < 1e-14 {
        return Err(Error::Numeric("linear Volterra step is singular; refine the grid".into()));
    }
    let mut x = Vec::with_capacity(forcing.len());
    x.push(forcing[0]);
    for (n, f) in forcing.iter().enumerate().skip(1) {
        let rhs = f - multiplier * weights.history(&x, n);
        x.push(rhs / pivot);
    }
    Ok(x)
}
