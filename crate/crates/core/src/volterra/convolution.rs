//! Product-integration weights for `(K * x)(t_n) = int_0^{t_n} K(t_n - s) x(s) ds`
//! on a uniform grid.
//!
//! The kernel is integrated exactly against the hat functions of the grid,
//! so the rule is exact for piecewise-linear `x` and is unaffected by the
//! integrable singularity of fractional kernels at the origin.

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::kernels::KernelSpec;

/// Lag-indexed weights. On a uniform grid they depend only on `n - j`.
#[derive(Debug, Clone)]
pub struct ConvolutionWeights {
    /// Rectangle (left point) weights: cell integral of `K` at lag `m`.
    rect: Vec<f64>,
    /// Trapezoid weight on `x_j`, `d = n - j` in `0..n`.
    interior: Vec<f64>,
    /// Trapezoid weight on `x_0` at node `n` (index `n`, entry 0 unused).
    first: Vec<f64>,
}

impl ConvolutionWeights {
    pub fn new(kernel: &KernelSpec, grid: &TimeGrid) -> Self {
        let n = grid.n_steps();
        let h = grid.spacing();
        let moments: Vec<(f64, f64)> = (0..n).map(|m| kernel.cell_moments(h, m)).collect();
        let rect: Vec<f64> = moments.iter().map(|m| m.0).collect();
        let mut interior = vec![0.0; n + 1];
        interior[0] = moments[0].0 - moments[0].1;
        for d in 1..n {
            interior[d] = moments[d].0 - moments[d].1 + moments[d - 1].1;
        }
        let mut first = vec![0.0; n + 1];
        for d in 1..=n {
            first[d] = moments[d - 1].1;
        }
        Self { rect, interior, first }
    }

    pub fn n_steps(&self) -> usize {
        self.rect.len()
    }

    /// Weight on the newest sample `x_n` in the trapezoid rule.
    pub fn diagonal(&self) -> f64 {
        self.interior[0]
    }

    /// Trapezoid convolution at node `n` using `x_0..x_{n-1}` only.
    pub fn history(&self, x: &[f64], n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let mut acc = self.first[n] * x[0];
        for (j, xj) in x.iter().enumerate().take(n).skip(1) {
            acc += self.interior[n - j] * xj;
        }
        acc
    }

    /// Full trapezoid convolution at node `n`.
    pub fn at(&self, x: &[f64], n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        self.history(x, n) + self.diagonal() * x[n]
    }

    /// Left-point rectangle convolution at node `n` (the Adams predictor).
    pub fn rectangle(&self, x: &[f64], n: usize) -> f64 {
        (0..n).map(|j| self.rect[n - 1 - j] * x[j]).sum()
    }
}

/// `K * x` at every node of `grid`, with `x` interpolated linearly.
pub fn convolve(kernel: &KernelSpec, curve: &[f64], grid: &TimeGrid) -> Result<Vec<f64>> {
    kernel.validate()?;
    grid.require_samples(curve.len(), "curve")?;
    if curve.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("curve contains non-finite samples".into()));
    }
    let w = ConvolutionWeights::new(kernel, grid);
    Ok((0..grid.len()).map(|n| w.at(curve, n)).collect())
}
