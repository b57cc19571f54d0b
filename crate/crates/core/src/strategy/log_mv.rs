use crate::error::{Error, Result};
use crate::grid::{cumulative_trapezoid, TimeGrid};
use crate::volterra::{
    convolve, solve_linear_vie, solve_riccati_volterra, LinearVieProblem, PsiSolution, RiccatiCoefficients,
    SolverConfig,
};

use super::curve::{ControlForm, StrategyCurve, ValueCoefficients};
use super::market::MarketParams;
use super::objective::check_gamma;
use super::check_strategy_grid;

/// Riccati coefficients of the log mean-variance problem, after checking
/// `kappa + gamma^2 rho sigma theta / (1 + gamma)^2 > 0`, which guarantees a
/// global bounded solution.
pub fn log_mv_coefficients(market: &MarketParams, gamma: f64) -> Result<RiccatiCoefficients> {
    check_gamma(gamma)?;
    let MarketParams { kappa, sigma, rho, theta, .. } = *market;
    let c = RiccatiCoefficients::log_mean_variance(kappa, rho, sigma, theta, gamma);
    if !(c.h1 < 0.0) {
        return Err(Error::Precondition(format!(
            "log mean-variance needs kappa + gamma^2 rho sigma theta / (1 + gamma)^2 > 0 for a global \
             Riccati-Volterra solution, got {}",
            -c.h1
        )));
    }
    Ok(c)
}

/// `psi` in time to maturity on `[0, T]` with the spacing of `grid`.
pub fn log_mv_psi(
    market: &MarketParams,
    gamma: f64,
    horizon: f64,
    grid: &TimeGrid,
    config: &SolverConfig,
) -> Result<PsiSolution> {
    let coeffs = log_mv_coefficients(market, gamma)?;
    let tau_grid = TimeGrid::new(0.0, horizon, grid.n_steps())?;
    solve_riccati_volterra(&market.kernel, coeffs, &tau_grid, config)
}

/// Equilibrium proportion for the log mean-variance objective:
/// `pi(t) = theta / (1 + gamma) - gamma rho sigma / (1 + gamma) psi(T - t)`.
///
/// With `delta != 1` the control is `pi(t) nu_t^{(delta - 1) / (2 delta)}`;
/// the curve stores the state-free factor and records the power.
pub fn log_mv_strategy(
    market: &MarketParams,
    gamma: f64,
    delta: f64,
    horizon: f64,
    grid: &TimeGrid,
) -> Result<StrategyCurve> {
    log_mv_strategy_with(market, gamma, delta, horizon, grid, &SolverConfig::default())
}

pub fn log_mv_strategy_with(
    market: &MarketParams,
    gamma: f64,
    delta: f64,
    horizon: f64,
    grid: &TimeGrid,
    config: &SolverConfig,
) -> Result<StrategyCurve> {
    market.validate()?;
    check_gamma(gamma)?;
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Precondition(format!("delta must be > 0, got {delta}")));
    }
    check_strategy_grid(grid, horizon)?;
    let psi = log_mv_psi(market, gamma, horizon, grid, config)?;
    let MarketParams { kappa, phi, sigma, rho, theta, .. } = *market;
    let kernel = &market.kernel;
    let n = grid.n_steps();
    let tau_grid = psi.grid;
    let p = &psi.values;

    let forcing: Vec<f64> = p
        .iter()
        .map(|&s| {
            let m = theta - gamma * rho * sigma * s;
            m * m / (2.0 * (1.0 + gamma)) - 0.5 * gamma * sigma * sigma * s * s
        })
        .collect();
    let w = solve_linear_vie(&LinearVieProblem::new(kernel.clone(), kappa, forcing, tau_grid))?;
    let kw = convolve(kernel, &w, &tau_grid)?;
    let h = tau_grid.spacing();
    let int_kw = cumulative_trapezoid(h, &kw);
    let int_psi = cumulative_trapezoid(h, p);

    let times = grid.times();
    let rate_int: Vec<f64> = times.iter().map(|&t| market.rate_curve.integral(t, horizon)).collect();
    let myopic = vec![theta / (1.0 + gamma); n + 1];
    let hedge: Vec<f64> = (0..=n).map(|i| -gamma * rho * sigma / (1.0 + gamma) * p[n - i]).collect();
    let v0: Vec<f64> = (0..=n).map(|i| rate_int[i] + kappa * phi * int_kw[n - i]).collect();
    let g0: Vec<f64> = (0..=n).map(|i| rate_int[i] + kappa * phi * int_psi[n - i]).collect();
    let coeffs = ValueCoefficients {
        v2: Some(w.iter().rev().copied().collect()),
        v0: Some(v0),
        g0: Some(g0),
        ..ValueCoefficients::default()
    };
    let control = ControlForm::Proportion { variance_power: (delta - 1.0) / (2.0 * delta) };
    Ok(StrategyCurve::from_parts(*grid, myopic, hedge, control, coeffs))
}
