//! Uniform time grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trading days per year used as the default resolution.
pub const DEFAULT_STEPS_PER_YEAR: usize = 250;

/// A uniform grid `t_start = t_0 < t_1 < ... < t_n = t_end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidArgument("time grid needs at least one step".into()));
        }
        if !t_start.is_finite() || !t_end.is_finite() || t_end <= t_start {
            return Err(Error::InvalidArgument(format!(
                "time grid bounds must be finite and increasing, got [{t_start}, {t_end}]"
            )));
        }
        Ok(Self { t_start, t_end, n_steps })
    }

    /// Grid on `[0, horizon]` with `steps_per_year` steps per unit of time
    /// (rounded to the nearest integer, at least one step).
    pub fn with_resolution(horizon: f64, steps_per_year: usize) -> Result<Self> {
        let n = (horizon * steps_per_year as f64).round().max(1.0) as usize;
        Self::new(0.0, horizon, n)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of nodes, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.t_end - self.t_start) / self.n_steps as f64
    }

    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn time(&self, i: usize) -> f64 {
        if i == self.n_steps {
            self.t_end
        } else {
            self.t_start + i as f64 * self.spacing()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    /// The grid shifted to start at zero (same spacing and length).
    pub fn from_origin(&self) -> Self {
        Self { t_start: 0.0, t_end: self.duration(), n_steps: self.n_steps }
    }

    pub(crate) fn require_origin(&self) -> Result<()> {
        if self.t_start != 0.0 {
            return Err(Error::InvalidArgument(format!(
                "grid must start at 0, starts at {}",
                self.t_start
            )));
        }
        Ok(())
    }

    pub(crate) fn require_samples(&self, len: usize, what: &str) -> Result<()> {
        if len != self.len() {
            return Err(Error::InvalidArgument(format!(
                "{what} has {len} samples but the grid has {} nodes",
                self.len()
            )));
        }
        Ok(())
    }

    /// True if both grids have the same node set up to rounding.
    pub fn matches(&self, other: &TimeGrid) -> bool {
        let tol = 1e-12 * self.duration().abs().max(1.0);
        self.n_steps == other.n_steps
            && (self.t_start - other.t_start).abs() <= tol
            && (self.t_end - other.t_end).abs() <= tol
    }
}

/// Linear interpolation of `values` sampled on `grid`, clamped at the ends.
pub fn interpolate(grid: &TimeGrid, values: &[f64], t: f64) -> f64 {
    let h = grid.spacing();
    let x = ((t - grid.t_start()) / h).clamp(0.0, grid.n_steps() as f64);
    let i = (x.floor() as usize).min(grid.n_steps() - 1);
    let w = x - i as f64;
    values[i] * (1.0 - w) + values[i + 1] * w
}

/// Composite trapezoid of samples on a uniform grid, returning the running
/// integral from the first node.
pub fn cumulative_trapezoid(h: f64, values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}
