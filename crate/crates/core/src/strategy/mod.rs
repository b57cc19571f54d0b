//! Equilibrium strategies and value-function coefficients for the constant
//! and log mean-variance objectives and for log utility with non-exponential
//! discounting.
//!
//! Strategy curves live on a calendar grid over `[0, T]` and store the
//! coefficient of the state (`sqrt(nu_t)` or a power of `nu_t`); the
//! simulator multiplies by the state.

mod const_mv;
mod crossover;
mod curve;
mod log_mv;
mod market;
mod nonexp;
mod objective;

pub use const_mv::const_mv_strategy;
pub use crossover::prefer_rough_crossover;
pub use curve::{admissibility_constant, ControlForm, StrategyCurve, ValueCoefficients};
pub use log_mv::{log_mv_coefficients, log_mv_psi, log_mv_strategy, log_mv_strategy_with};
pub use market::{MarketParams, RateCurve};
pub use nonexp::{
    nonexp_forward_variance, nonexp_log_strategy, nonexp_v1, nonexp_value_coeffs, NonExpStrategy,
    NonExpValueCoeffs, ThetaCurve,
};
pub use objective::{DiscountFunction, Objective, ObjectiveSpec};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

fn check_strategy_grid(grid: &TimeGrid, horizon: f64) -> Result<()> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidArgument(format!("horizon must be > 0, got {horizon}")));
    }
    grid.require_origin()?;
    if (grid.t_end() - horizon).abs() > 1e-12 * horizon.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "strategy grid ends at {} but the horizon is {horizon}",
            grid.t_end()
        )));
    }
    Ok(())
}
