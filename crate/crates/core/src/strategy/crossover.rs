use crate::error::{Error, Result};
use crate::grid::TimeGrid;

use super::const_mv::const_mv_strategy;
use super::log_mv::log_mv_strategy;
use super::market::MarketParams;
use super::objective::{Objective, ObjectiveSpec};

/// Latest calendar time at which `total_rough - total_smooth` changes sign,
/// linearly interpolated between the bracketing nodes. Exact zeros are
/// skipped, so the common value at `t = T` never counts as a crossing.
/// `None` when the sign never changes.
pub fn prefer_rough_crossover(
    market_rough: &MarketParams,
    market_smooth: &MarketParams,
    objective: &ObjectiveSpec,
    grid: &TimeGrid,
) -> Result<Option<f64>> {
    if !market_rough.same_except_kernel(market_smooth) {
        return Err(Error::InvalidArgument("the two markets must differ only in their kernel".into()));
    }
    objective.validate()?;
    let horizon = objective.horizon;
    let (rough, smooth) = match objective.objective {
        Objective::ConstMv { gamma } => (
            const_mv_strategy(market_rough, gamma, horizon, grid)?,
            const_mv_strategy(market_smooth, gamma, horizon, grid)?,
        ),
        Objective::LogMv { gamma, delta } => (
            log_mv_strategy(market_rough, gamma, delta, horizon, grid)?,
            log_mv_strategy(market_smooth, gamma, delta, horizon, grid)?,
        ),
        Objective::NonExpLog { .. } => {
            return Err(Error::UnsupportedVariant(
                "the non-exponential strategy does not depend on the kernel, so it has no crossover".into(),
            ))
        }
    };
    let diff: Vec<f64> = rough.total.iter().zip(&smooth.total).map(|(a, b)| a - b).collect();
    Ok(last_sign_change(grid, &diff))
}

pub(crate) fn last_sign_change(grid: &TimeGrid, diff: &[f64]) -> Option<f64> {
    let mut later: Option<usize> = None;
    for i in (0..diff.len()).rev() {
        if diff[i] == 0.0 {
            continue;
        }
        if let Some(j) = later {
            if diff[i].signum() != diff[j].signum() {
                let (ti, tj) = (grid.time(i), grid.time(j));
                return Some(ti + (tj - ti) * diff[i] / (diff[i] - diff[j]));
            }
        }
        later = Some(i);
    }
    None
}
