use proptest::prelude::*;
use rough_equilibrium::strategy::{
    const_mv_strategy, log_mv_psi, log_mv_strategy, nonexp_forward_variance, prefer_rough_crossover, MarketParams,
    Objective, ObjectiveSpec, RateCurve, ThetaCurve,
};
use rough_equilibrium::volterra::SolverConfig;
use rough_equilibrium::{KernelSpec, TimeGrid};

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

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// RK4 for an autonomous system in time to maturity, sampled every `sub`
/// steps and returned per component.
fn rk4_system<F>(f: F, y0: Vec<f64>, t_end: f64, n_out: usize, sub: usize) -> Vec<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let h = t_end / (n_out * sub) as f64;
    let add = |y: &[f64], k: &[f64], s: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    let mut y = y0;
    let mut out: Vec<Vec<f64>> = y.iter().map(|v| vec![*v]).collect();
    for _ in 0..n_out {
        for _ in 0..sub {
            let k1 = f(&y);
            let k2 = f(&add(&y, &k1, 0.5 * h));
            let k3 = f(&add(&y, &k2, 0.5 * h));
            let k4 = f(&add(&y, &k3, h));
            for i in 0..y.len() {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        for (c, v) in out.iter_mut().zip(&y) {
            c.push(*v);
        }
    }
    out
}

fn reversed(v: &[f64]) -> Vec<f64> {
    v.iter().rev().copied().collect()
}

#[test]
fn const_mv_matches_the_heston_ode() {
    let m = figure_one(0.5);
    let (kappa, phi, sigma, rho, theta, gamma) = (0.3, 0.04, 0.3, -0.7, 1.5, 0.5);
    let lambda = kappa + rho * sigma * theta;
    let a = theta * theta / gamma;
    let n = 6000;
    // y = (I, W, M = int W, V0, g0) in tau
    let ode = rk4_system(
        |y| {
            let (i, w, mm) = (y[0], y[1], y[2]);
            let j = a * i;
            let dj = a * (1.0 - lambda * i);
            let df = -sigma * rho * (theta - gamma * sigma * rho * j) - gamma * sigma * sigma * j;
            vec![1.0 - lambda * i, df * dj - kappa * w, w, kappa * phi * mm, kappa * phi * j]
        },
        vec![0.0, theta * theta / (2.0 * gamma), 0.0, 0.0, 0.0],
        3.0,
        n,
        2,
    );
    let grid = TimeGrid::new(0.0, 3.0, n).unwrap();
    let c = const_mv_strategy(&m, gamma, 3.0, &grid).unwrap();
    let total: Vec<f64> = reversed(&ode[0]).iter().map(|i| theta / gamma - rho * sigma * a * i).collect();
    let g2: Vec<f64> = reversed(&ode[0]).iter().map(|i| a * (1.0 - lambda * i)).collect();
    let vc = &c.value_coeffs;
    assert!(max_diff(&c.total, &total) < 1e-6);
    assert!(max_diff(vc.g2.as_ref().unwrap(), &g2) < 1e-6);
    assert!(max_diff(vc.v2.as_ref().unwrap(), &reversed(&ode[1])) < 1e-6);
    assert!(max_diff(vc.v0.as_ref().unwrap(), &reversed(&ode[3])) < 1e-6);
    assert!(max_diff(vc.g0.as_ref().unwrap(), &reversed(&ode[4])) < 1e-6);
    assert!(vc.v1.as_ref().unwrap().iter().all(|v| *v == 1.0));
}

#[test]
fn log_mv_matches_the_heston_ode() {
    let m = figure_one(0.5);
    let (kappa, phi, sigma, rho, theta, gamma) = (0.3, 0.04, 0.3, -0.7, 1.5, 0.5);
    let s = (1.0 + gamma) * (1.0 + gamma);
    let (h2, h1, h0) = (
        gamma * gamma * rho * rho * sigma * sigma / (2.0 * s),
        -(kappa + gamma * gamma * rho * sigma * theta / s),
        -(1.0 + 2.0 * gamma) * theta * theta / (2.0 * s),
    );
    let n = 6000;
    // y = (psi, W, M, V0, g0) in tau
    let ode = rk4_system(
        |y| {
            let (p, w, mm) = (y[0], y[1], y[2]);
            let dp = -h2 * p * p + h1 * p - h0;
            let df = -gamma * rho * sigma * (theta - gamma * rho * sigma * p) / (1.0 + gamma) - gamma * sigma * sigma * p;
            vec![dp, df * dp - kappa * w, w, kappa * phi * mm, kappa * phi * p]
        },
        vec![0.0, theta * theta / (2.0 * (1.0 + gamma)), 0.0, 0.0, 0.0],
        3.0,
        n,
        2,
    );
    let grid = TimeGrid::new(0.0, 3.0, n).unwrap();
    let psi = log_mv_psi(&m, gamma, 3.0, &grid, &SolverConfig::default()).unwrap();
    assert!(max_diff(&psi.values, &ode[0]) < 1e-6);
    let c = log_mv_strategy(&m, gamma, 1.0, 3.0, &grid).unwrap();
    let total: Vec<f64> =
        reversed(&ode[0]).iter().map(|p| theta / (1.0 + gamma) - gamma * rho * sigma / (1.0 + gamma) * p).collect();
    let vc = &c.value_coeffs;
    assert!(max_diff(&c.total, &total) < 1e-6);
    assert!(max_diff(vc.v2.as_ref().unwrap(), &reversed(&ode[1])) < 1e-6);
    assert!(max_diff(vc.v0.as_ref().unwrap(), &reversed(&ode[3])) < 1e-6);
    assert!(max_diff(vc.g0.as_ref().unwrap(), &reversed(&ode[4])) < 1e-6);
}

#[test]
fn rough_demands_less_early_and_more_late() {
    let grid = TimeGrid::new(0.0, 10.0, 2500).unwrap();
    let late = 2500 - 12; // t = T - 0.048
    let (rough, smooth) = (figure_one(0.1), figure_one(0.5));
    let c_r = const_mv_strategy(&rough, 0.5, 10.0, &grid).unwrap();
    let c_s = const_mv_strategy(&smooth, 0.5, 10.0, &grid).unwrap();
    assert!(c_r.total[0] < c_s.total[0]);
    assert!(c_r.total[late] > c_s.total[late]);
    let l_r = log_mv_strategy(&rough, 0.5, 1.0, 10.0, &grid).unwrap();
    let l_s = log_mv_strategy(&smooth, 0.5, 1.0, 10.0, &grid).unwrap();
    assert!(l_r.total[0] < l_s.total[0]);
    assert!(l_r.total[late] > l_s.total[late]);
}

#[test]
fn short_horizons_favour_rough_throughout() {
    let grid = TimeGrid::new(0.0, 1.0, 250).unwrap();
    let r = const_mv_strategy(&figure_one(0.1), 0.5, 1.0, &grid).unwrap();
    let s = const_mv_strategy(&figure_one(0.5), 0.5, 1.0, &grid).unwrap();
    assert!(r.total[..250].iter().zip(&s.total).all(|(a, b)| a > b));
}

#[test]
fn crossover_examples() {
    let grid = TimeGrid::new(0.0, 3.0, 750).unwrap();
    let spec = |objective| ObjectiveSpec { objective, horizon: 3.0 };
    let same = prefer_rough_crossover(&figure_one(0.1), &figure_one(0.1), &spec(Objective::ConstMv { gamma: 1.0 }), &grid);
    assert_eq!(same.unwrap(), None);

    let const_t: Vec<f64> = [0.1, 1.0, 10.0]
        .iter()
        .map(|&g| {
            prefer_rough_crossover(&figure_one(0.1), &figure_one(0.5), &spec(Objective::ConstMv { gamma: g }), &grid)
                .unwrap()
                .unwrap()
        })
        .collect();
    assert!(const_t.iter().all(|t| (t - const_t[0]).abs() <= grid.spacing()));

    let log_t = |g: f64| {
        let obj = spec(Objective::LogMv { gamma: g, delta: 1.0 });
        prefer_rough_crossover(&figure_one(0.1), &figure_one(0.5), &obj, &grid).unwrap().unwrap()
    };
    assert!(log_t(5.0) < log_t(0.5));

    let mut other = figure_one(0.5);
    other.kappa = 1.0;
    assert!(prefer_rough_crossover(&figure_one(0.1), &other, &spec(Objective::ConstMv { gamma: 1.0 }), &grid).is_err());
}

#[test]
fn forward_variance_with_a_lifted_kernel() {
    let mut m = figure_one(0.1);
    m.kernel = KernelSpec::SumOfExponentials { weights: vec![0.5, 1.5], rates: vec![0.1, 4.0] };
    let theta = ThetaCurve::flat(0.0, 2.0, 200, m.phi).unwrap();
    let e = nonexp_forward_variance(&m, &theta, 2.0).unwrap();
    assert!((e - 2.0 * m.phi).abs() < 1e-12, "{e}");
    // above the mean level, mean reversion pulls the integral below nu0 (r - t)
    let theta = ThetaCurve::flat(0.0, 2.0, 200, 0.09).unwrap();
    let e = nonexp_forward_variance(&m, &theta, 2.0).unwrap();
    assert!(e < 0.18 && e > 0.08);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn const_mv_total_scales_inversely_with_gamma(
        gamma in 0.05f64..20.0, hurst in 0.05f64..0.5, rho in -1.0f64..1.0, sigma in 0.0f64..1.0
    ) {
        let mut m = figure_one(hurst);
        m.rho = rho;
        m.sigma = sigma;
        let grid = TimeGrid::new(0.0, 2.0, 100).unwrap();
        let a = const_mv_strategy(&m, gamma, 2.0, &grid).unwrap();
        let b = const_mv_strategy(&m, 2.0 * gamma, 2.0, &grid).unwrap();
        for (x, y) in a.total.iter().zip(&b.total) {
            prop_assert!((x - 2.0 * y).abs() <= 1e-12 * x.abs().max(1.0));
        }
        prop_assert_eq!(a.hedge[100], 0.0);
        prop_assert_eq!(a.total[100], m.theta / gamma);
    }

    #[test]
    fn log_mv_hedge_is_positive_for_negative_correlation(
        gamma in 0.05f64..10.0, hurst in 0.05f64..0.5, rho in -1.0f64..-0.01
    ) {
        let mut m = figure_one(hurst);
        m.rho = rho;
        prop_assume!(m.kappa + gamma * gamma * rho * m.sigma * m.theta / ((1.0 + gamma) * (1.0 + gamma)) > 0.0);
        let grid = TimeGrid::new(0.0, 2.0, 100).unwrap();
        let c = log_mv_strategy(&m, gamma, 1.0, 2.0, &grid).unwrap();
        prop_assert!(c.hedge[..100].iter().all(|h| *h > 0.0));
    }
}
