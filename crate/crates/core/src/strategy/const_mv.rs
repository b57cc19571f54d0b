use crate::error::Result;
use crate::grid::{cumulative_trapezoid, TimeGrid};
use crate::kernels::integrated_ratio_on_grid;
use crate::volterra::{convolve, solve_linear_vie, LinearVieProblem};

use super::curve::{ControlForm, StrategyCurve, ValueCoefficients};
use super::market::MarketParams;
use super::objective::check_gamma;
use super::check_strategy_grid;

/// Equilibrium dollar amount for the constant-risk-aversion mean-variance
/// objective:
///
/// ```text
/// u(t) / sqrt(nu_t) = (theta/gamma) D(t) - (rho sigma theta^2 / gamma) D(t) int_0^{T-t} R_lambda / lambda
/// ```
///
/// with `D(t) = exp(-int_t^T r)` and `lambda = kappa + rho sigma theta`.
/// The curve stores the coefficient of `sqrt(nu_t)`.
pub fn const_mv_strategy(market: &MarketParams, gamma: f64, horizon: f64, grid: &TimeGrid) -> Result<StrategyCurve> {
    market.validate()?;
    check_gamma(gamma)?;
    check_strategy_grid(grid, horizon)?;
    let MarketParams { kappa, phi, sigma, rho, theta, .. } = *market;
    let kernel = &market.kernel;
    let n = grid.n_steps();
    let lambda = kappa + rho * sigma * theta;

    // Everything below in time to maturity tau = T - t on the same spacing.
    let tau_grid = TimeGrid::new(0.0, horizon, n)?;
    let ratio = integrated_ratio_on_grid(kernel, lambda, &tau_grid)?;
    let a = theta * theta / gamma;
    let g2_tau: Vec<f64> = ratio.iter().map(|i| a * (1.0 - lambda * i)).collect();
    let j: Vec<f64> = ratio.iter().map(|i| a * i).collect();
    let forcing: Vec<f64> = j
        .iter()
        .map(|&j| {
            let m = theta - gamma * sigma * rho * j;
            m * m / (2.0 * gamma) - 0.5 * gamma * sigma * sigma * j * j
        })
        .collect();
    let w = solve_linear_vie(&LinearVieProblem::new(kernel.clone(), kappa, forcing, tau_grid))?;
    let kw = convolve(kernel, &w, &tau_grid)?;
    let h = tau_grid.spacing();
    let v0_tau: Vec<f64> = cumulative_trapezoid(h, &kw).into_iter().map(|v| kappa * phi * v).collect();
    let g0_tau: Vec<f64> = cumulative_trapezoid(h, &j).into_iter().map(|v| kappa * phi * v).collect();

    let rev = |v: &[f64]| -> Vec<f64> { v.iter().rev().copied().collect() };
    let disc: Vec<f64> = grid.times().into_iter().map(|t| market.discount(t, horizon)).collect();
    let myopic: Vec<f64> = disc.iter().map(|d| theta / gamma * d).collect();
    let hedge: Vec<f64> = (0..=n)
        .map(|i| -rho * sigma * theta * theta / gamma * disc[i] * ratio[n - i])
        .collect();
    let growth: Vec<f64> = disc.iter().map(|d| 1.0 / d).collect();
    let coeffs = ValueCoefficients {
        v1: Some(growth.clone()),
        v2: Some(rev(&w)),
        v0: Some(rev(&v0_tau)),
        g1: Some(growth),
        g2: Some(rev(&g2_tau)),
        g0: Some(rev(&g0_tau)),
    };
    Ok(StrategyCurve::from_parts(*grid, myopic, hedge, ControlForm::Dollar, coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::test_support::figure_one;
    use crate::strategy::RateCurve;

    #[test]
    fn boundary_values() {
        for hurst in [0.1, 0.5] {
            let m = figure_one(hurst);
            let grid = TimeGrid::new(0.0, 3.0, 300).unwrap();
            let c = const_mv_strategy(&m, 0.5, 3.0, &grid).unwrap();
            assert_eq!(c.hedge[300], 0.0);
            assert_eq!(c.total[300], 3.0);
        }
    }

    #[test]
    fn zero_correlation_removes_the_hedge() {
        let mut m = figure_one(0.1);
        m.rho = 0.0;
        m.rate_curve = RateCurve::constant(0.02);
        let grid = TimeGrid::new(0.0, 2.0, 200).unwrap();
        let c = const_mv_strategy(&m, 0.5, 2.0, &grid).unwrap();
        for (i, t) in grid.times().into_iter().enumerate() {
            assert_eq!(c.hedge[i], 0.0);
            let want = 3.0 * (-0.02 * (2.0 - t)).exp();
            assert!((c.total[i] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn heston_hedge_at_the_origin() {
        let m = figure_one(0.5);
        let grid = TimeGrid::new(0.0, 3.0, 750).unwrap();
        let c = const_mv_strategy(&m, 0.5, 3.0, &grid).unwrap();
        let lambda: f64 = 0.3 - 0.7 * 0.3 * 1.5;
        let want = 0.7 * 0.3 * 2.25 / 0.5 * (1.0 - (-lambda * 3.0).exp()) / lambda;
        assert!((c.hedge[0] - want).abs() < 1e-12, "{} vs {want}", c.hedge[0]);
        assert!((c.hedge[0] - 2.900).abs() < 1e-3);
    }

    #[test]
    fn homogeneous_in_gamma() {
        let m = figure_one(0.2);
        let grid = TimeGrid::new(0.0, 3.0, 150).unwrap();
        let a = const_mv_strategy(&m, 0.7, 3.0, &grid).unwrap();
        let b = const_mv_strategy(&m, 1.4, 3.0, &grid).unwrap();
        for (x, y) in a.total.iter().zip(&b.total) {
            assert!((x - 2.0 * y).abs() < 1e-12);
        }
        assert_eq!(a.value_coeffs.g1, a.value_coeffs.v1);
    }

    #[test]
    fn rejects_mismatched_horizon() {
        let grid = TimeGrid::new(0.0, 2.0, 10).unwrap();
        assert!(const_mv_strategy(&figure_one(0.1), 0.5, 3.0, &grid).is_err());
        assert!(const_mv_strategy(&figure_one(0.1), 0.0, 2.0, &grid).is_err());
    }
}
