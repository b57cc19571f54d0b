//! Log utility of consumption and terminal wealth under a non-exponential
//! discount function `h`.
//!
//! The equilibrium consumption rate is `1 / V1(t)` with
//! `V1(t) = int_0^{T-t} h + h(T - t)` and the equilibrium proportion is
//! `theta sqrt(nu_t)` (equivalently `theta` in the convention
//! `dL = [r + theta nu pi - pi^2 nu / 2] dt + sqrt(nu) pi dW_1`). Neither
//! depends on the kernel; the kernel only enters the value function through
//! the integrated forward variance `E(t, r)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{interpolate, TimeGrid};
use crate::kernels::{integrated_resolvent, KernelSpec};
use crate::quadrature::GaussLegendre;
use crate::volterra::{solve_with_weights, ConvolutionWeights};

use super::curve::{ControlForm, StrategyCurve, ValueCoefficients};
use super::market::MarketParams;
use super::objective::DiscountFunction;
use super::check_strategy_grid;

/// Equilibrium consumption and investment coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonExpStrategy {
    pub grid: TimeGrid,
    /// `p(t) = 1 / V1(t)`.
    pub consumption: Vec<f64>,
    /// Coefficient of `sqrt(nu_t)` in the proportion, identically `theta`.
    pub investment: Vec<f64>,
    #[serde(rename = "V1")]
    pub v1: Vec<f64>,
}

impl NonExpStrategy {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,consumption,investment,V1\n");
        for i in 0..self.grid.len() {
            out.push_str(&format!(
                "{:?},{:?},{:?},{:?}\n",
                self.grid.time(i),
                self.consumption[i],
                self.investment[i],
                self.v1[i]
            ));
        }
        out
    }

    /// As a proportional strategy with consumption, for the simulator.
    pub fn to_strategy_curve(&self) -> StrategyCurve {
        let n = self.grid.len();
        let mut c = StrategyCurve::from_parts(
            self.grid,
            self.investment.clone(),
            vec![0.0; n],
            ControlForm::Proportion { variance_power: 0.0 },
            ValueCoefficients { v1: Some(self.v1.clone()), ..ValueCoefficients::default() },
        );
        c.consumption = Some(self.consumption.clone());
        c
    }
}

/// `V1(t) = int_0^{T-t} h + h(T - t)`.
pub fn nonexp_v1(discount: &DiscountFunction, horizon: f64, t: f64) -> f64 {
    let x = (horizon - t).max(0.0);
    discount.integral(x) + discount.eval(x)
}

/// Equilibrium consumption rate and investment coefficient. Only `theta`
/// is read from the market.
pub fn nonexp_log_strategy(
    market: &MarketParams,
    discount: &DiscountFunction,
    horizon: f64,
    grid: &TimeGrid,
) -> Result<NonExpStrategy> {
    nonexp_strategy_for(market.theta, discount, horizon, grid)
}

fn nonexp_strategy_for(theta: f64, discount: &DiscountFunction, horizon: f64, grid: &TimeGrid) -> Result<NonExpStrategy> {
    if !theta.is_finite() {
        return Err(Error::InvalidArgument(format!("theta must be finite, got {theta}")));
    }
    let h = discount.normalized()?;
    check_strategy_grid(grid, horizon)?;
    let v1: Vec<f64> = grid.times().into_iter().map(|t| nonexp_v1(&h, horizon, t)).collect();
    Ok(NonExpStrategy {
        grid: *grid,
        consumption: v1.iter().map(|v| 1.0 / v).collect(),
        investment: vec![theta; grid.len()],
        v1,
    })
}

/// Samples of `Theta^t_s` for `s` in `[t, T]`:
/// `Theta^t_s = nu0 + int_0^t K(s - r) kappa (phi - nu_r) dr + int_0^t K(s - r) sigma sqrt(nu_r) dB_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaCurve {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl ThetaCurve {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        grid.require_samples(values.len(), "forward variance")?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("forward variance samples must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    /// `Theta^t_s = value` on `[t, T]`.
    pub fn flat(anchor: f64, horizon: f64, n_steps: usize, value: f64) -> Result<Self> {
        Self::new(TimeGrid::new(anchor, horizon, n_steps)?, vec![value; n_steps + 1])
    }

    /// `Theta^0 = nu0` on `[0, T]`.
    pub fn initial(market: &MarketParams, horizon: f64, n_steps: usize) -> Result<Self> {
        Self::flat(0.0, horizon, n_steps, market.nu0)
    }

    /// `Theta^{t_k}` on `[t_k, T]` from one simulated path: `variance` and
    /// the increments `db` of `B` on `grid`, discretized like the Euler
    /// convolution scheme so that `Theta^{t_k}_{t_k} = nu_{t_k}`.
    pub fn from_path(market: &MarketParams, grid: &TimeGrid, variance: &[f64], db: &[f64], anchor: usize) -> Result<Self> {
        grid.require_origin()?;
        grid.require_samples(variance.len(), "variance path")?;
        let n = grid.n_steps();
        if db.len() != n {
            return Err(Error::InvalidArgument(format!("expected {n} increments, got {}", db.len())));
        }
        if anchor >= n {
            return Err(Error::InvalidArgument(format!("anchor index {anchor} must be below {n}")));
        }
        let dt = grid.spacing();
        let shocks: Vec<f64> = (0..anchor)
            .map(|j| {
                let v = variance[j].max(0.0);
                market.kappa * (market.phi - v) * dt + market.sigma * v.sqrt() * db[j]
            })
            .collect();
        let values = (anchor..=n)
            .map(|m| {
                let s = grid.time(m);
                market.nu0
                    + shocks.iter().enumerate().map(|(j, x)| market.kernel.value(s - grid.time(j)) * x).sum::<f64>()
            })
            .collect();
        Self::new(TimeGrid::new(grid.time(anchor), grid.t_end(), n - anchor)?, values)
    }

    pub fn anchor(&self) -> f64 {
        self.grid.t_start()
    }

    pub fn at(&self, s: f64) -> f64 {
        interpolate(&self.grid, &self.values, s)
    }

    fn check_density(&self) -> Result<()> {
        let per_year = self.grid.n_steps() as f64 / self.grid.duration();
        if per_year < 50.0 - 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "forward variance curve has {per_year:.1} steps per year; at least 50 are needed"
            )));
        }
        Ok(())
    }
}

/// `S(x) = int_0^x R_kappa`, the integrated resolvent of `kappa K`.
enum ResolventIntegral {
    Closed(KernelSpec, f64),
    Table(TimeGrid, Vec<f64>),
}

impl ResolventIntegral {
    fn new(kernel: &KernelSpec, kappa: f64, horizon: f64) -> Result<Self> {
        match kernel {
            KernelSpec::SumOfExponentials { .. } if kappa != 0.0 && horizon > 0.0 => {
                let grid = TimeGrid::new(0.0, horizon, 4096)?;
                let forcing: Vec<f64> = grid.times().into_iter().map(|t| kappa * kernel.integral(t)).collect();
                let w = ConvolutionWeights::new(kernel, &grid);
                Ok(Self::Table(grid, solve_with_weights(&w, kappa, &forcing)?))
            }
            _ => Ok(Self::Closed(kernel.clone(), kappa)),
        }
    }

    fn eval(&self, x: f64) -> Result<f64> {
        match self {
            Self::Closed(k, kappa) => integrated_resolvent(k, *kappa, x),
            Self::Table(g, v) => Ok(interpolate(g, v, x)),
        }
    }
}

/// `E(t, r) = int_t^r E[nu_l | F_t] dl`
/// `= int_t^r Theta_z (1 - S(r - z)) dz + phi int_0^{r-t} S(u) du`,
/// with `S` the integrated resolvent of `kappa K`. Both integrals use the
/// same Gauss nodes, so a flat `Theta = phi` returns `phi (r - t)`.
pub fn nonexp_forward_variance(market: &MarketParams, theta_curve: &ThetaCurve, r: f64) -> Result<f64> {
    market.validate()?;
    theta_curve.check_density()?;
    let t = theta_curve.anchor();
    let horizon = theta_curve.grid.t_end();
    let tol = 1e-12 * horizon.abs().max(1.0);
    if !(r >= t - tol && r <= horizon + tol) {
        return Err(Error::InvalidArgument(format!("r = {r} lies outside [{t}, {horizon}]")));
    }
    let r = r.clamp(t, horizon);
    let s = ResolventIntegral::new(&market.kernel, market.kappa, horizon - t)?;
    let rule = GaussLegendre::sixteen();
    let g = &theta_curve.grid;
    let mut body = 0.0;
    let mut mean = 0.0;
    for k in 0..g.n_steps() {
        let a = g.time(k);
        if a >= r {
            break;
        }
        let b = g.time(k + 1).min(r);
        let (va, vb) = (theta_curve.values[k], theta_curve.values[k + 1]);
        let width = g.time(k + 1) - a;
        for (z, w) in rule.mapped(a, b) {
            let sz = s.eval(r - z)?;
            let th = va + (vb - va) * (z - a) / width;
            body += w * th * (1.0 - sz);
            mean += w * sz;
        }
    }
    Ok(body + market.phi * mean)
}

/// Value-function coefficients at the anchor `t` of `theta_curve`, as
/// curves over `r` on the curve's grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonExpValueCoeffs {
    pub anchor: f64,
    /// Grid of `r` over `[t, T]`.
    pub grid: TimeGrid,
    #[serde(rename = "V1")]
    pub v1: Vec<f64>,
    /// `E(t, r)`.
    pub forward_variance: Vec<f64>,
    /// `c1^r(t, t) = h(r - t)`.
    pub c1: Vec<f64>,
    /// `c2^r(t, ., t)`.
    pub c2: Vec<f64>,
    /// `f1(t, t) = h(T - t)`.
    pub f1: f64,
    /// `f2(t, ., t)`.
    pub f2: f64,
    /// `V2(t) = int_t^T c2^r dr + f2`.
    #[serde(rename = "V2")]
    pub v2: f64,
}

/// Coefficients of the value function
/// `f2 = h(T-s) [int_t^T (r - 1/V1) + theta^2/2 E(t, T)]` and
/// `c2^r = h(r-s) [ln(1/V1(r)) + int_t^r (r - 1/V1) + theta^2/2 E(t, r)]`, at `s = t`.
pub fn nonexp_value_coeffs(
    market: &MarketParams,
    discount: &DiscountFunction,
    theta_curve: &ThetaCurve,
) -> Result<NonExpValueCoeffs> {
    market.validate()?;
    theta_curve.check_density()?;
    let h = discount.normalized()?;
    let g = theta_curve.grid;
    let t = g.t_start();
    let horizon = g.t_end();
    let n = g.n_steps();
    let dt = g.spacing();
    let rule = GaussLegendre::sixteen();
    let nodes: Vec<(f64, f64)> = rule.mapped(0.0, 1.0).collect();

    // S at r_j - z for z in cell k depends only on m = j - 1 - k.
    let s = ResolventIntegral::new(&market.kernel, market.kappa, horizon - t)?;
    let mut table = vec![vec![0.0; nodes.len()]; n];
    for (m, row) in table.iter_mut().enumerate() {
        for (q, (xi, _)) in nodes.iter().enumerate() {
            row[q] = s.eval(dt * (m as f64 + 1.0 - xi))?;
        }
    }
    let mut forward = vec![0.0; n + 1];
    for j in 1..=n {
        let mut acc = 0.0;
        for k in 0..j {
            let (va, vb) = (theta_curve.values[k], theta_curve.values[k + 1]);
            let row = &table[j - 1 - k];
            for (q, (xi, w)) in nodes.iter().enumerate() {
                let th = va + (vb - va) * xi;
                acc += w * dt * (th * (1.0 - row[q]) + market.phi * row[q]);
            }
        }
        forward[j] = acc;
    }

    let times = g.times();
    let v1: Vec<f64> = times.iter().map(|&r| nonexp_v1(&h, horizon, r)).collect();
    // A(r) = int_t^r (rate - 1 / V1)
    let mut a = vec![0.0; n + 1];
    for j in 1..=n {
        let inv = rule.integrate(times[j - 1], times[j], |u| 1.0 / nonexp_v1(&h, horizon, u));
        a[j] = a[j - 1] + market.rate_curve.integral(times[j - 1], times[j]) - inv;
    }
    let half_theta2 = 0.5 * market.theta * market.theta;
    let c1: Vec<f64> = times.iter().map(|&r| h.eval(r - t)).collect();
    let c2: Vec<f64> = (0..=n).map(|j| c1[j] * (-v1[j].ln() + a[j] + half_theta2 * forward[j])).collect();
    let f1 = h.eval(horizon - t);
    let f2 = f1 * (a[n] + half_theta2 * forward[n]);
    let integral_c2 = if n == 0 {
        0.0
    } else {
        dt * (c2.iter().sum::<f64>() - 0.5 * (c2[0] + c2[n]))
    };
    Ok(NonExpValueCoeffs { anchor: t, grid: g, v1, forward_variance: forward, c1, c2, f1, f2, v2: integral_c2 + f2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::test_support::figure_one;

    fn flat_discount() -> DiscountFunction {
        DiscountFunction::Exponential { rate: 0.0 }
    }

    #[test]
    fn consumption_examples() {
        let grid = TimeGrid::new(0.0, 3.0, 30).unwrap();
        let s = nonexp_log_strategy(&figure_one(0.1), &flat_discount(), 3.0, &grid).unwrap();
        assert_eq!(s.v1[0], 4.0);
        assert_eq!(s.consumption[0], 0.25);
        assert_eq!(s.consumption[30], 1.0);
        assert!(s.investment.iter().all(|x| *x == 1.5));

        let grid = TimeGrid::new(0.0, 1.0, 10).unwrap();
        let h = DiscountFunction::Exponential { rate: 0.1 };
        let s = nonexp_log_strategy(&figure_one(0.1), &h, 1.0, &grid).unwrap();
        let v1 = (1.0 - (-0.1f64).exp()) / 0.1 + (-0.1f64).exp();
        assert!((s.v1[0] - v1).abs() < 1e-14);
        assert!((s.v1[0] - 1.85647).abs() < 1e-5);
        assert!((s.consumption[0] - 0.53866).abs() < 1e-5);
    }

    #[test]
    fn strategy_ignores_the_kernel() {
        let grid = TimeGrid::new(0.0, 2.0, 40).unwrap();
        let h = DiscountFunction::Hyperbolic { a: 1.0, b: 0.5 };
        let a = nonexp_log_strategy(&figure_one(0.1), &h, 2.0, &grid).unwrap();
        let b = nonexp_log_strategy(&figure_one(0.5), &h, 2.0, &grid).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn flat_forward_curve_at_the_mean_level() {
        for hurst in [0.1, 0.5] {
            let m = figure_one(hurst);
            let theta = ThetaCurve::flat(0.5, 3.0, 250, m.phi).unwrap();
            for r in [0.5, 1.0, 2.75, 3.0] {
                let e = nonexp_forward_variance(&m, &theta, r).unwrap();
                assert!((e - m.phi * (r - 0.5)).abs() < 1e-14, "{e}");
            }
        }
    }

    #[test]
    fn vanishing_mean_reversion_integrates_the_curve() {
        let mut m = figure_one(0.2);
        m.kappa = 1e-10;
        let grid = TimeGrid::new(0.0, 2.0, 200).unwrap();
        let values = grid.times().into_iter().map(|s| 0.04 + 0.01 * s).collect();
        let theta = ThetaCurve::new(grid, values).unwrap();
        let e = nonexp_forward_variance(&m, &theta, 1.5).unwrap();
        let want = 0.04 * 1.5 + 0.005 * 1.5 * 1.5;
        assert!((e - want).abs() < 1e-9, "{e} vs {want}");
    }

    #[test]
    fn value_coefficient_boundaries_and_linearity() {
        let mut m = figure_one(0.1);
        let theta = ThetaCurve::flat(0.0, 3.0, 150, m.phi).unwrap();
        let h = DiscountFunction::Exponential { rate: 0.05 };
        let a = nonexp_value_coeffs(&m, &h, &theta).unwrap();
        assert_eq!(a.c1[0], 1.0);
        assert_eq!(a.forward_variance[0], 0.0);
        for (j, e) in a.forward_variance.iter().enumerate() {
            assert!((e - m.phi * theta.grid.time(j)).abs() < 1e-14);
        }
        let end = ThetaCurve::flat(0.0, 3.0, 150, m.phi).unwrap();
        let flat = nonexp_value_coeffs(&m, &flat_discount(), &end).unwrap();
        assert_eq!(flat.f1, 1.0);

        // f2 is affine in theta^2
        let f2 = |m: &MarketParams| nonexp_value_coeffs(m, &h, &theta).unwrap().f2;
        m.theta = 0.0;
        let base = f2(&m);
        m.theta = 1.0;
        let one = f2(&m);
        m.theta = 2f64.sqrt();
        let two = f2(&m);
        assert!(((two - base) / (one - base) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn theta_from_path_starts_at_the_anchor_variance() {
        let m = figure_one(0.3);
        let grid = TimeGrid::new(0.0, 1.0, 100).unwrap();
        let db: Vec<f64> = (0..100).map(|i| 0.01 * ((i as f64) * 0.7).sin()).collect();
        // Euler convolution path driven by db
        let dt = grid.spacing();
        let mut nu = vec![m.nu0];
        let mut shocks = Vec::new();
        for i in 0..100 {
            let v: f64 = nu[i];
            shocks.push(m.kappa * (m.phi - v) * dt + m.sigma * v.sqrt() * db[i]);
            let next: f64 = m.nu0
                + (0..=i).map(|j| m.kernel.value(grid.time(i + 1) - grid.time(j)) * shocks[j]).sum::<f64>();
            nu.push(next.max(0.0));
        }
        let theta = ThetaCurve::from_path(&m, &grid, &nu, &db, 40).unwrap();
        assert_eq!(theta.anchor(), grid.time(40));
        assert!((theta.values[0] - nu[40]).abs() < 1e-15);
        assert!(ThetaCurve::from_path(&m, &grid, &nu, &db, 100).is_err());
    }

    #[test]
    fn sparse_forward_curves_are_rejected() {
        let m = figure_one(0.3);
        let theta = ThetaCurve::flat(0.0, 3.0, 30, 0.04).unwrap();
        assert!(nonexp_forward_variance(&m, &theta, 1.0).is_err());
        let theta = ThetaCurve::flat(0.0, 3.0, 300, 0.04).unwrap();
        assert!(nonexp_forward_variance(&m, &theta, 3.5).is_err());
    }
}
