use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::kernels::KernelSpec;
use crate::strategy::{ControlForm, MarketParams, StrategyCurve};

use super::fit::{fit_sum_of_exponentials_with, SoeFit};

/// Discretization of the variance equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SimScheme {
    /// `nu_i = nu0 + sum_{j<i} K(t_i - t_j) [kappa (phi - nu_j^+) dt + sigma sqrt(nu_j^+) dB_j]`,
    /// `O(n^2)` per path.
    EulerConvolution,
    /// The same recursion with `K` replaced by a fitted sum of exponentials,
    /// carried by `n_factors` Markovian factors; `O(n n_factors)` per path.
    LiftedFactors { n_factors: usize, rate_spread: f64 },
}

/// Memory and chunking limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimOptions {
    /// Largest path bundle, in bytes, that is held in memory.
    pub memory_budget: usize,
    /// Paths per chunk for streamed terminal-wealth runs.
    pub chunk_paths: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { memory_budget: 1 << 30, chunk_paths: 1000 }
    }
}

/// Simulated paths, row-major by path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathBundle {
    pub grid: TimeGrid,
    pub n_paths: usize,
    pub seed: u64,
    pub scheme: SimScheme,
    /// `n_paths x (n_steps + 1)` truncated variance `nu^+`.
    pub variance: Vec<f64>,
    /// `n_paths x n_steps` increments of `W_1`.
    pub dw1: Vec<f64>,
    /// `n_paths x n_steps` increments of `B = rho W_1 + sqrt(1 - rho^2) W_2`.
    pub db: Vec<f64>,
    /// `n_paths x (n_steps + 1)` wealth, once simulated.
    pub wealth: Option<Vec<f64>>,
    /// Fitted kernel of the lifted scheme.
    pub fit: Option<SoeFit>,
}

impl PathBundle {
    pub fn nodes(&self) -> usize {
        self.grid.len()
    }

    pub fn variance_path(&self, path: usize) -> &[f64] {
        let n = self.nodes();
        &self.variance[path * n..(path + 1) * n]
    }

    pub fn wealth_path(&self, path: usize) -> Option<&[f64]> {
        let n = self.nodes();
        self.wealth.as_ref().map(|w| &w[path * n..(path + 1) * n])
    }

    pub fn dw1_path(&self, path: usize) -> &[f64] {
        let n = self.grid.n_steps();
        &self.dw1[path * n..(path + 1) * n]
    }

    pub fn db_path(&self, path: usize) -> &[f64] {
        let n = self.grid.n_steps();
        &self.db[path * n..(path + 1) * n]
    }

    /// `X_T` per path.
    pub fn terminal_wealth(&self) -> Result<Vec<f64>> {
        let w = self
            .wealth
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("bundle has no wealth paths".into()))?;
        let n = self.nodes();
        Ok((0..self.n_paths).map(|p| w[(p + 1) * n - 1]).collect())
    }
}

/// Per-run data shared by all paths.
struct Engine {
    market: MarketParams,
    grid: TimeGrid,
    seed: u64,
    kind: EngineKind,
    fit: Option<SoeFit>,
}

enum EngineKind {
    /// `K(m dt)` for `m = 1..=n`.
    Convolution(Vec<f64>),
    /// `(weight, e^{-rate dt})`.
    Factors(Vec<(f64, f64)>),
}

struct PathDraw {
    variance: Vec<f64>,
    dw1: Vec<f64>,
    db: Vec<f64>,
}

impl Engine {
    fn new(market: &MarketParams, scheme: SimScheme, grid: &TimeGrid, seed: u64) -> Result<Self> {
        market.validate()?;
        grid.require_origin()?;
        let dt = grid.spacing();
        let n = grid.n_steps();
        let (kind, fit) = match scheme {
            SimScheme::EulerConvolution => {
                (EngineKind::Convolution((1..=n).map(|m| market.kernel.value(m as f64 * dt)).collect()), None)
            }
            SimScheme::LiftedFactors { n_factors, rate_spread } => {
                let (terms, fit) = match &market.kernel {
                    KernelSpec::Fractional { .. } => {
                        let fit = fit_sum_of_exponentials_with(&market.kernel, n_factors, grid.t_end(), rate_spread)?;
                        let terms = fit.kernel.exponential_terms().unwrap();
                        (terms, Some(fit))
                    }
                    other => (other.exponential_terms().unwrap(), None),
                };
                let factors = terms.into_iter().map(|(w, r)| (w, (-r * dt).exp())).collect();
                (EngineKind::Factors(factors), fit)
            }
        };
        Ok(Self { market: market.clone(), grid: *grid, seed, kind, fit })
    }

    fn draw(&self, path: u64) -> PathDraw {
        let n = self.grid.n_steps();
        let dt = self.grid.spacing();
        let sqrt_dt = dt.sqrt();
        let MarketParams { nu0, kappa, phi, sigma, rho, .. } = self.market;
        let rho_perp = (1.0 - rho * rho).max(0.0).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(path);
        let mut dw1 = Vec::with_capacity(n);
        let mut db = Vec::with_capacity(n);
        for _ in 0..n {
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z2: f64 = StandardNormal.sample(&mut rng);
            dw1.push(sqrt_dt * z1);
            db.push(sqrt_dt * (rho * z1 + rho_perp * z2));
        }
        let mut variance = Vec::with_capacity(n + 1);
        variance.push(nu0.max(0.0));
        match &self.kind {
            EngineKind::Convolution(lags) => {
                let mut shocks = Vec::with_capacity(n);
                for i in 0..n {
                    let v = variance[i];
                    shocks.push(kappa * (phi - v) * dt + sigma * v.sqrt() * db[i]);
                    let next = nu0 + (0..=i).map(|j| lags[i - j] * shocks[j]).sum::<f64>();
                    variance.push(next.max(0.0));
                }
            }
            EngineKind::Factors(factors) => {
                let mut u = vec![0.0; factors.len()];
                for i in 0..n {
                    let v = variance[i];
                    let shock = kappa * (phi - v) * dt + sigma * v.sqrt() * db[i];
                    let mut next = nu0;
                    for (uk, (w, decay)) in u.iter_mut().zip(factors) {
                        *uk = decay * (*uk + shock);
                        next += w * *uk;
                    }
                    variance.push(next.max(0.0));
                }
            }
        }
        PathDraw { variance, dw1, db }
    }
}

/// Simulate variance paths. Path `i` uses ChaCha8 stream `i` of `seed`, so it
/// does not depend on `n_paths` or on thread scheduling.
pub fn simulate_variance(
    market: &MarketParams,
    scheme: SimScheme,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<PathBundle> {
    simulate_variance_with(market, scheme, grid, n_paths, seed, &SimOptions::default())
}

pub fn simulate_variance_with(
    market: &MarketParams,
    scheme: SimScheme,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
    options: &SimOptions,
) -> Result<PathBundle> {
    if n_paths == 0 {
        return Err(Error::InvalidArgument("at least one path is required".into()));
    }
    let n = grid.n_steps();
    // variance + wealth + two increment arrays
    let bytes = n_paths.saturating_mul(4 * n + 2).saturating_mul(8);
    if bytes > options.memory_budget {
        return Err(Error::Resource(format!(
            "{n_paths} paths x {n} steps need about {} MiB, above the {} MiB budget; \
             simulate terminal wealth in chunks instead",
            bytes >> 20,
            options.memory_budget >> 20
        )));
    }
    let engine = Engine::new(market, scheme, grid, seed)?;
    let draws: Vec<PathDraw> = (0..n_paths as u64).into_par_iter().map(|p| engine.draw(p)).collect();
    let mut bundle = PathBundle {
        grid: *grid,
        n_paths,
        seed,
        scheme,
        variance: Vec::with_capacity(n_paths * (n + 1)),
        dw1: Vec::with_capacity(n_paths * n),
        db: Vec::with_capacity(n_paths * n),
        wealth: None,
        fit: engine.fit.clone(),
    };
    for d in draws {
        bundle.variance.extend_from_slice(&d.variance);
        bundle.dw1.extend_from_slice(&d.dw1);
        bundle.db.extend_from_slice(&d.db);
    }
    Ok(bundle)
}

/// Wealth along one path. Dollar strategies use
/// `X_{k+1} = X_k e^{int r} + u_k (theta sqrt(nu_k) dt + dW_1)` with
/// `u_k = total_k sqrt(nu_k)`; proportional strategies step log-wealth
/// `L_{k+1} = L_k + int r + (theta nu pi - pi^2 nu / 2 - p) dt + sqrt(nu) pi dW_1`.
fn wealth_path(
    market: &MarketParams,
    grid: &TimeGrid,
    strategy: &StrategyCurve,
    x0: f64,
    variance: &[f64],
    dw1: &[f64],
    out: &mut Vec<f64>,
) -> Result<()> {
    let n = grid.n_steps();
    let dt = grid.spacing();
    let theta = market.theta;
    out.push(x0);
    match strategy.control {
        ControlForm::Dollar => {
            let mut x = x0;
            for k in 0..n {
                let growth = market.rate_curve.integral(grid.time(k), grid.time(k + 1)).exp();
                let sv = variance[k].sqrt();
                let u = strategy.total[k] * sv;
                x = x * growth + u * (theta * sv * dt + dw1[k]);
                out.push(x);
            }
        }
        ControlForm::Proportion { variance_power } => {
            let mut l = x0.ln();
            for k in 0..n {
                let nu = variance[k];
                let pi = strategy.total[k];
                let consumption = strategy.consumption.as_ref().map_or(0.0, |c| c[k]);
                let (drift, vol) = if variance_power == 0.0 {
                    (theta * nu * pi - 0.5 * pi * pi * nu, nu.sqrt() * pi)
                } else {
                    (
                        theta * pi * nu.powf(1.0 + variance_power)
                            - 0.5 * pi * pi * nu.powf(1.0 + 2.0 * variance_power),
                        pi * nu.powf(0.5 + variance_power),
                    )
                };
                l += market.rate_curve.integral(grid.time(k), grid.time(k + 1)) + (drift - consumption) * dt + vol * dw1[k];
                if !l.is_finite() {
                    return Err(Error::Numeric(format!(
                        "log-wealth is not finite at node {} (variance {nu})",
                        k + 1
                    )));
                }
                out.push(l.exp());
            }
        }
    }
    Ok(())
}

fn check_wealth_inputs(grid: &TimeGrid, strategy: &StrategyCurve, x0: f64) -> Result<()> {
    if !strategy.grid.matches(grid) {
        return Err(Error::InvalidArgument("strategy grid does not match the simulation grid".into()));
    }
    if !(x0 > 0.0) || !x0.is_finite() {
        return Err(Error::InvalidArgument(format!("initial wealth must be > 0, got {x0}")));
    }
    Ok(())
}

/// Add wealth paths to a variance bundle.
pub fn simulate_wealth(bundle: &PathBundle, market: &MarketParams, strategy: &StrategyCurve, x0: f64) -> Result<PathBundle> {
    check_wealth_inputs(&bundle.grid, strategy, x0)?;
    market.validate()?;
    let n = bundle.nodes();
    let paths: Vec<Result<Vec<f64>>> = (0..bundle.n_paths)
        .into_par_iter()
        .map(|p| {
            let mut out = Vec::with_capacity(n);
            wealth_path(market, &bundle.grid, strategy, x0, bundle.variance_path(p), bundle.dw1_path(p), &mut out)?;
            Ok(out)
        })
        .collect();
    let mut wealth = Vec::with_capacity(bundle.n_paths * n);
    for p in paths {
        wealth.extend_from_slice(&p?);
    }
    let mut out = bundle.clone();
    out.wealth = Some(wealth);
    Ok(out)
}

/// Terminal wealth of `n_paths` paths simulated in chunks, without keeping
/// the paths. Path `i` is identical to path `i` of [`simulate_variance`]
/// followed by [`simulate_wealth`].
#[allow(clippy::too_many_arguments)]
pub fn simulate_terminal_wealth(
    market: &MarketParams,
    scheme: SimScheme,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
    strategy: &StrategyCurve,
    x0: f64,
    options: &SimOptions,
) -> Result<(Vec<f64>, Option<SoeFit>)> {
    if n_paths == 0 {
        return Err(Error::InvalidArgument("at least one path is required".into()));
    }
    check_wealth_inputs(grid, strategy, x0)?;
    let engine = Engine::new(market, scheme, grid, seed)?;
    let chunk = options.chunk_paths.max(1);
    let mut terminal = Vec::with_capacity(n_paths);
    let mut start = 0;
    while start < n_paths {
        let end = (start + chunk).min(n_paths);
        let part: Vec<Result<f64>> = (start as u64..end as u64)
            .into_par_iter()
            .map(|p| {
                let d = engine.draw(p);
                let mut out = Vec::with_capacity(grid.len());
                wealth_path(&engine.market, grid, strategy, x0, &d.variance, &d.dw1, &mut out)?;
                Ok(*out.last().unwrap())
            })
            .collect();
        for v in part {
            terminal.push(v?);
        }
        start = end;
    }
    Ok((terminal, engine.fit))
}
