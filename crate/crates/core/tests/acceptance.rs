//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints one PASS/FAIL line; exits non-zero on any failure.

use std::time::{Duration, Instant};

use rough_equilibrium::kernels::{integrated_resolvent_ratio, mittag_leffler, resolvent_numeric};
use rough_equilibrium::montecarlo::{simulate_terminal_wealth, terminal_stats_of, SimOptions, SimScheme};
use rough_equilibrium::strategy::{
    const_mv_strategy, log_mv_coefficients, log_mv_psi, log_mv_strategy, nonexp_log_strategy, prefer_rough_crossover,
    ControlForm, DiscountFunction, MarketParams, Objective, ObjectiveSpec, RateCurve, StrategyCurve,
    ValueCoefficients,
};
use rough_equilibrium::volterra::{riccati_bound_curve, SolverConfig};
use rough_equilibrium::{KernelSpec, TimeGrid};

// Pinned tolerances.
const HESTON_ORACLE_TOL: f64 = 1e-6;
const PSI_BOUND_TOL: f64 = 1e-7;
const ADAMS_SHRINK: f64 = 2.0;
const RESOLVENT_TOL: f64 = 1e-6;
const MARTINGALE_SE: f64 = 3.0;
const MARTINGALE_FLOOR: f64 = 1e-12;
const ML_EXP_TOL: f64 = 1e-10;
const ML_COSH_TOL: f64 = 1e-10;
const ML_TAIL_TOL: f64 = 0.05;

type Outcome = Result<String, String>;

fn figure_one(hurst: f64) -> MarketParams {
    MarketParams {
        nu0: 0.04,
        kappa: 0.3,
        phi: 0.04,
        sigma: 0.3,
        rho: -0.7,
        theta: 1.5,
        rate_curve: RateCurve::default(),
        kernel: KernelSpec::rough_heston(hurst).unwrap(),
    }
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn heston_limit() -> Outcome {
    let (kappa, sigma, rho, theta, gamma, horizon) = (0.3, 0.3, -0.7, 1.5, 0.5, 3.0);
    let grid = TimeGrid::with_resolution(horizon, 250).map_err(err)?;
    let c = const_mv_strategy(&figure_one(0.5), gamma, horizon, &grid).map_err(err)?;
    // I' = 1 - lambda I in time to maturity, RK4 with 8 substeps per cell
    let lambda = kappa + rho * sigma * theta;
    let n = grid.n_steps();
    let h = horizon / (8 * n) as f64;
    let mut ratio = vec![0.0];
    let mut y = 0.0;
    for _ in 0..n {
        for _ in 0..8 {
            let f = |y: f64| 1.0 - lambda * y;
            let k1 = f(y);
            let k2 = f(y + 0.5 * h * k1);
            let k3 = f(y + 0.5 * h * k2);
            let k4 = f(y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        ratio.push(y);
    }
    let worst = (0..=n)
        .map(|i| {
            let oracle = theta / gamma - rho * sigma * theta * theta / gamma * ratio[n - i];
            (c.total[i] - oracle).abs()
        })
        .fold(0.0, f64::max);
    ensure(worst <= HESTON_ORACLE_TOL, format!("max |total - ODE| = {worst:.2e}"))
}

/// Sign changes of `a - b` on interior nodes, ignoring exact zeros, and the
/// sign after the last change.
fn sign_changes(a: &[f64], b: &[f64]) -> (usize, f64) {
    let n = a.len() - 1;
    let mut changes = 0;
    let mut last = 0.0;
    for i in 1..n {
        let d = a[i] - b[i];
        if d == 0.0 {
            continue;
        }
        let s = d.signum();
        if last != 0.0 && s != last {
            changes += 1;
        }
        last = s;
    }
    (changes, last)
}

fn horizon_effect() -> Outcome {
    let grid = TimeGrid::with_resolution(3.0, 250).map_err(err)?;
    let (rough, smooth) = (figure_one(0.1), figure_one(0.5));
    let c = sign_changes(
        &const_mv_strategy(&rough, 0.5, 3.0, &grid).map_err(err)?.total,
        &const_mv_strategy(&smooth, 0.5, 3.0, &grid).map_err(err)?.total,
    );
    let l = sign_changes(
        &log_mv_strategy(&rough, 0.5, 1.0, 3.0, &grid).map_err(err)?.total,
        &log_mv_strategy(&smooth, 0.5, 1.0, 3.0, &grid).map_err(err)?.total,
    );
    ensure(
        c == (1, 1.0) && l == (1, 1.0),
        format!("const-MV crossings {} (rough above after: {}), log-MV crossings {} ({})", c.0, c.1 > 0.0, l.0, l.1 > 0.0),
    )
}

fn roughness_monotonicity() -> Outcome {
    let lambda = 0.3 - 0.7 * 0.3 * 1.5;
    let at = |tau: f64| -> Result<Vec<f64>, String> {
        [0.55, 0.7, 0.85, 1.0]
            .iter()
            .map(|&a| integrated_resolvent_ratio(&KernelSpec::Fractional { c: 1.0, alpha: a }, lambda, tau).map_err(err))
            .collect()
    };
    let long = at(50.0)?;
    let short = at(0.01)?;
    let up = long.windows(2).all(|w| w[0] < w[1]);
    let down = short.windows(2).all(|w| w[0] > w[1]);
    ensure(up && down, format!("tau=50 {long:.4?}, tau=0.01 {short:.5?}"))
}

fn psi_bounds() -> Outcome {
    let grid = TimeGrid::with_resolution(3.0, 250).map_err(err)?;
    let mut worst_margin = f64::INFINITY;
    for gamma in [0.1, 0.5, 5.0] {
        for hurst in [0.1, 0.3, 0.5] {
            let m = figure_one(hurst);
            let psi = log_mv_psi(&m, gamma, 3.0, &grid, &SolverConfig::default()).map_err(err)?;
            let coeffs = log_mv_coefficients(&m, gamma).map_err(err)?;
            let (w_star, bound) = riccati_bound_curve(&coeffs, &m.kernel, &psi.grid).map_err(err)?;
            let nodes = psi.values.iter().zip(&bound).enumerate().take(grid.n_steps()).skip(1);
            for (i, (&p, &b)) in nodes {
                let ok = p > 0.0 && p <= b + PSI_BOUND_TOL && b < -w_star;
                if !ok {
                    return Err(format!(
                        "gamma {gamma}, H {hurst}, node {i}: psi {p}, -r1 {}, -w* {}",
                        b, -w_star
                    ));
                }
                worst_margin = worst_margin.min(b - p);
            }
        }
    }
    Ok(format!("9 cases, smallest -r1 - psi = {worst_margin:.1e} (tol {PSI_BOUND_TOL:.0e})"))
}

fn adams_convergence() -> Outcome {
    let m = figure_one(0.1);
    let solve = |per_year: usize| -> Result<Vec<f64>, String> {
        let grid = TimeGrid::with_resolution(3.0, per_year).map_err(err)?;
        Ok(log_mv_psi(&m, 0.5, 3.0, &grid, &SolverConfig::default()).map_err(err)?.values)
    };
    let sols = [solve(250)?, solve(500)?, solve(1000)?];
    let diff = |coarse: &[f64], fine: &[f64]| {
        coarse.iter().zip(fine.iter().step_by(2)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let d1 = diff(&sols[0], &sols[1]);
    let d2 = diff(&sols[1], &sols[2]);
    ensure(d1 / d2 >= ADAMS_SHRINK, format!("differences {d1:.2e}, {d2:.2e}, ratio {:.2}", d1 / d2))
}

fn resolvent_identity() -> Outcome {
    let kernels = [
        KernelSpec::Constant { c: 1.0 },
        KernelSpec::rough_heston(0.1).map_err(err)?,
        KernelSpec::Exponential { c: 1.0, beta: 0.5 },
        KernelSpec::SumOfExponentials { weights: vec![0.4, 0.6, 1.0], rates: vec![0.05, 1.0, 20.0] },
    ];
    let grid = TimeGrid::with_resolution(3.0, 250).map_err(err)?;
    let mut worst: f64 = 0.0;
    for k in &kernels {
        for lambda in [-0.015, 0.3, 1.0] {
            worst = worst.max(resolvent_numeric(k, lambda, &grid).map_err(err)?.residual());
        }
    }
    ensure(worst <= RESOLVENT_TOL, format!("worst relative residual {worst:.1e} over 12 cases"))
}

fn crossover_in_gamma() -> Outcome {
    let grid = TimeGrid::with_resolution(3.0, 250).map_err(err)?;
    let t_star = |objective| -> Result<f64, String> {
        let spec = ObjectiveSpec { objective, horizon: 3.0 };
        prefer_rough_crossover(&figure_one(0.1), &figure_one(0.5), &spec, &grid)
            .map_err(err)?
            .ok_or_else(|| "no crossing".to_string())
    };
    let gammas = [0.1, 1.0, 10.0];
    let mut c = Vec::new();
    let mut l = Vec::new();
    for &g in &gammas {
        c.push(t_star(Objective::ConstMv { gamma: g })?);
        l.push(t_star(Objective::LogMv { gamma: g, delta: 1.0 })?);
    }
    let spread = c.iter().fold(0.0f64, |m, t| m.max((t - c[0]).abs()));
    let invariant = spread <= grid.spacing();
    let decreasing = l.windows(2).all(|w| w[1] < w[0]);
    ensure(invariant && decreasing, format!("const-MV t* {c:.4?}, log-MV t* {l:.4?}"))
}

fn comparison_market(hurst: f64) -> MarketParams {
    MarketParams {
        nu0: 0.12,
        kappa: 0.3,
        phi: 0.02,
        sigma: 0.1,
        rho: -0.3,
        theta: 1.5,
        rate_curve: RateCurve::constant(0.01),
        kernel: KernelSpec::rough_heston(hurst).unwrap(),
    }
}

fn monte_carlo() -> Outcome {
    let (horizon, n_paths, seed, x0, gamma) = (10.0, 5000, 42, 1.0, 0.5);
    let scheme = SimScheme::LiftedFactors { n_factors: 20, rate_spread: 10.0 };
    let opts = SimOptions::default();
    let grid = TimeGrid::with_resolution(horizon, 250).map_err(err)?;
    let rough = comparison_market(0.1);
    let heston = comparison_market(0.5);
    let growth = (0.01f64 * horizon).exp();

    // (a) zero strategy, and the const-MV strategy with the risk premium removed
    let n = grid.len();
    let zero = StrategyCurve::from_parts(grid, vec![0.0; n], vec![0.0; n], ControlForm::Dollar, ValueCoefficients::default());
    let (xt, _) = simulate_terminal_wealth(&rough, scheme, &grid, n_paths, seed, &zero, x0, &opts).map_err(err)?;
    let disc: Vec<f64> = xt.iter().map(|x| x / growth).collect();
    let z = terminal_stats_of(&disc, 10).map_err(err)?;
    let zero_ok = (z.mean - x0).abs() <= MARTINGALE_SE * z.standard_error() + MARTINGALE_FLOOR;
    let strat_rough = const_mv_strategy(&rough, gamma, horizon, &grid).map_err(err)?;
    let flat = MarketParams { theta: 0.0, ..rough.clone() };
    let (xt, _) = simulate_terminal_wealth(&flat, scheme, &grid, n_paths, seed, &strat_rough, x0, &opts).map_err(err)?;
    let disc: Vec<f64> = xt.iter().map(|x| x / growth).collect();
    let f = terminal_stats_of(&disc, 10).map_err(err)?;
    let flat_ok = (f.mean - x0).abs() <= MARTINGALE_SE * f.standard_error();

    // (b) rough vs Heston const-MV
    let strat_heston = const_mv_strategy(&heston, gamma, horizon, &grid).map_err(err)?;
    let (xr, _) = simulate_terminal_wealth(&rough, scheme, &grid, n_paths, seed, &strat_rough, x0, &opts).map_err(err)?;
    let (xh, _) = simulate_terminal_wealth(&heston, scheme, &grid, n_paths, seed, &strat_heston, x0, &opts).map_err(err)?;
    let r = terminal_stats_of(&xr, 20).map_err(err)?;
    let h = terminal_stats_of(&xh, 20).map_err(err)?;
    let ordered = r.mean > h.mean && r.variance > h.variance;

    // (c) determinism
    let (again, _) = simulate_terminal_wealth(&rough, scheme, &grid, n_paths, seed, &strat_rough, x0, &opts).map_err(err)?;
    let same = again.iter().zip(&xr).all(|(a, b)| a.to_bits() == b.to_bits());

    ensure(
        zero_ok && flat_ok && ordered && same,
        format!(
            "(a) zero {:.6} (se {:.1e}), theta=0 {:.4} (se {:.4}); (b) rough mean {:.3} var {:.3} vs Heston mean {:.3} var {:.3}; (c) identical {same}",
            z.mean,
            z.standard_error(),
            f.mean,
            f.standard_error(),
            r.mean,
            r.variance,
            h.mean,
            h.variance
        ),
    )
}

fn nonexp_invariance() -> Outcome {
    let grid = TimeGrid::with_resolution(3.0, 250).map_err(err)?;
    let flat = DiscountFunction::Exponential { rate: 0.0 };
    let hyper = DiscountFunction::Hyperbolic { a: 1.0, b: 0.3 };
    let mut identical = true;
    for h in [&flat, &hyper] {
        let a = nonexp_log_strategy(&figure_one(0.1), h, 3.0, &grid).map_err(err)?;
        let b = nonexp_log_strategy(&figure_one(0.5), h, 3.0, &grid).map_err(err)?;
        identical &= a.to_csv() == b.to_csv();
    }
    let p0 = nonexp_log_strategy(&figure_one(0.1), &flat, 3.0, &grid).map_err(err)?.consumption[0];
    ensure(identical && p0 == 0.25, format!("alpha 0.6 vs 1.0 identical: {identical}; p(0) = {p0}"))
}

fn mittag_leffler_accuracy() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..=40 {
        let z = -20.0 + i as f64;
        let e = mittag_leffler(1.0, 1.0, z).map_err(err)?;
        worst = worst.max((e - z.exp()).abs() / z.abs().exp());
    }
    let cosh = (mittag_leffler(2.0, 1.0, 1.0).map_err(err)? - 1f64.cosh()).abs();
    let alpha = 0.6;
    let x = 1e4;
    let tail = (mittag_leffler(alpha, 1.0, -x).map_err(err)? * libm::tgamma(1.0 - alpha) * x - 1.0).abs();
    ensure(
        worst <= ML_EXP_TOL && cosh <= ML_COSH_TOL && tail <= ML_TAIL_TOL,
        format!("exp rel {worst:.1e}, cosh {cosh:.1e}, tail {tail:.1e}"),
    )
}

fn main() {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Duration, Check); 10] = [
        ("1 Heston-limit oracle", Duration::from_secs(1), heston_limit),
        ("2 investment horizon effect", Duration::from_secs(5), horizon_effect),
        ("3 monotone in roughness", Duration::from_secs(1), roughness_monotonicity),
        ("4 psi bounds", Duration::from_secs(10), psi_bounds),
        ("5 Adams self-convergence", Duration::from_secs(10), adams_convergence),
        ("6 resolvent identity", Duration::from_secs(1), resolvent_identity),
        ("7 crossover vs risk aversion", Duration::from_secs(10), crossover_in_gamma),
        ("8 Monte Carlo properties", Duration::from_secs(120), monte_carlo),
        ("9 non-exponential kernel invariance", Duration::from_secs(1), nonexp_invariance),
        ("10 Mittag-Leffler accuracy", Duration::from_secs(1), mittag_leffler_accuracy),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= budget => (true, d),
            Ok(d) => (false, format!("{d}; over the {budget:?} budget")),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "[{}] criterion {name}: {detail} ({:.3} s)",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
