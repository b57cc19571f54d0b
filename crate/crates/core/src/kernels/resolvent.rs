//! Resolvents of `lambda K`: closed forms for the constant, fractional and
//! exponential kernels, and a discretized solve of
//! `R + lambda K * R = lambda K` for any kernel.

use libm::tgamma as gamma;

use super::{mittag_leffler, phi1, KernelSpec};
use crate::error::{Error, Result};
use crate::grid::{cumulative_trapezoid, TimeGrid};
use crate::volterra::{solve_with_weights, ConvolutionWeights};

/// Closed-form `R_lambda(t)` for a kernel with a tabulated resolvent.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventCurve {
    kernel: KernelSpec,
    lambda: f64,
}

impl ResolventCurve {
    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `R_lambda(t)`; zero for `lambda = 0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("resolvent evaluated at t = {t}")));
        }
        let lam = self.lambda;
        if lam == 0.0 {
            return Ok(0.0);
        }
        match self.kernel {
            KernelSpec::Constant { c } | KernelSpec::Fractional { c, alpha: 1.0 } => {
                Ok(lam * c * (-lam * c * t).exp())
            }
            KernelSpec::Fractional { c, alpha } => {
                if t == 0.0 {
                    return Err(Error::Domain("fractional resolvent is singular at t = 0".into()));
                }
                let ml = mittag_leffler(alpha, alpha, -lam * c * t.powf(alpha))?;
                Ok(lam * c * t.powf(alpha - 1.0) * ml)
            }
            KernelSpec::Exponential { c, beta } => Ok(lam * c * (-(beta + lam * c) * t).exp()),
            KernelSpec::SumOfExponentials { .. } => unreachable!("rejected at construction"),
        }
    }

    /// `int_0^t R_lambda(s) ds`.
    pub fn integral(&self, t: f64) -> Result<f64> {
        Ok(self.lambda * integrated_resolvent_ratio(&self.kernel, self.lambda, t)?)
    }
}

/// Resolvent of `lambda K` from the closed forms
/// `c e^{-ct}`, `c t^{a-1} E_{a,a}(-c t^a)` and `c e^{-(b+c)t}` with `c -> lambda c`.
pub fn resolvent_closed_form(spec: &KernelSpec, lambda: f64) -> Result<ResolventCurve> {
    spec.validate()?;
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda must be finite, got {lambda}")));
    }
    if let KernelSpec::SumOfExponentials { .. } = spec {
        return Err(Error::UnsupportedVariant(
            "sum-of-exponentials kernels have no closed-form resolvent here; use resolvent_numeric".into(),
        ));
    }
    Ok(ResolventCurve { kernel: spec.clone(), lambda })
}

/// `int_0^tau R_lambda(s) / lambda ds`, continuous in `lambda` and equal to
/// `int_0^tau K` at `lambda = 0`.
pub fn integrated_resolvent_ratio(spec: &KernelSpec, lambda: f64, tau: f64) -> Result<f64> {
    spec.validate()?;
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::Domain(format!("integration horizon must be >= 0, got {tau}")));
    }
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda must be finite, got {lambda}")));
    }
    if tau == 0.0 {
        return Ok(0.0);
    }
    if lambda == 0.0 {
        return Ok(spec.integral(tau));
    }
    match *spec {
        KernelSpec::Constant { c } | KernelSpec::Fractional { c, alpha: 1.0 } => {
            Ok(c * tau * phi1(lambda * c * tau))
        }
        KernelSpec::Fractional { c, alpha } => {
            // (1 - E_{a,1}(-x)) / lambda = c tau^a E_{a,a+1}(-x), x = lambda c tau^a
            let ta = tau.powf(alpha);
            Ok(c * ta * mittag_leffler(alpha, alpha + 1.0, -lambda * c * ta)?)
        }
        KernelSpec::Exponential { c, beta } => Ok(c * tau * phi1((beta + lambda * c) * tau)),
        KernelSpec::SumOfExponentials { .. } => ratio_numeric(spec, lambda, tau),
    }
}

/// `int_0^tau R_lambda(s) ds`.
pub fn integrated_resolvent(spec: &KernelSpec, lambda: f64, tau: f64) -> Result<f64> {
    Ok(lambda * integrated_resolvent_ratio(spec, lambda, tau)?)
}

/// `int_0^tau R_lambda / lambda` at every node of a grid from 0. Closed
/// forms where available, otherwise one product-integration solve.
pub(crate) fn integrated_ratio_on_grid(spec: &KernelSpec, lambda: f64, grid: &TimeGrid) -> Result<Vec<f64>> {
    grid.require_origin()?;
    if let KernelSpec::SumOfExponentials { .. } = spec {
        spec.validate()?;
        let forcing: Vec<f64> = grid.times().into_iter().map(|t| spec.integral(t)).collect();
        if lambda == 0.0 {
            return Ok(forcing);
        }
        let w = ConvolutionWeights::new(spec, grid);
        return solve_with_weights(&w, lambda, &forcing);
    }
    grid.times().into_iter().map(|t| integrated_resolvent_ratio(spec, lambda, t)).collect()
}

// S = int R / lambda solves S + lambda K * S = int_0^t K; two grids and a
// Richardson step.
fn ratio_numeric(spec: &KernelSpec, lambda: f64, tau: f64) -> Result<f64> {
    let solve = |n: usize| -> Result<f64> {
        let grid = TimeGrid::new(0.0, tau, n)?;
        let forcing: Vec<f64> = grid.times().into_iter().map(|t| spec.integral(t)).collect();
        let w = ConvolutionWeights::new(spec, &grid);
        Ok(*solve_with_weights(&w, lambda, &forcing)?.last().unwrap())
    };
    let coarse = solve(512)?;
    let fine = solve(1024)?;
    Ok(fine + (fine - coarse) / 3.0)
}

/// `R_lambda` sampled on a grid from 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventSamples {
    pub grid: TimeGrid,
    pub lambda: f64,
    /// `R_lambda(t_i)`; the first entry is infinite for singular kernels.
    pub values: Vec<f64>,
    /// `int_0^{t_i} R_lambda`.
    pub integrated: Vec<f64>,
    /// Accuracy warning for grids too coarse for the kernel singularity.
    pub warning: Option<String>,
    kernel: KernelSpec,
    /// Regular remainder after subtracting the leading iterated kernels.
    regular: Vec<f64>,
    /// Number of subtracted iterated kernels.
    terms: usize,
}

impl ResolventSamples {
    /// Max over `t_i > 0` of `|lambda K * R - lambda K + R|`, relative to
    /// `max |lambda K|` on the same nodes.
    pub fn residual(&self) -> f64 {
        let lam = self.lambda;
        if lam == 0.0 {
            return self.values.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        }
        let w = ConvolutionWeights::new(&self.kernel, &self.grid);
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 1..self.grid.len() {
            let t = self.grid.time(i);
            let k = self.kernel.value(t);
            // K * K^{*n} = K^{*(n+1)} for the singular part
            let singular: f64 = (1..=self.terms)
                .map(|n| sign(n) * lam.powi(n as i32) * self.iterated(n + 1, t))
                .sum();
            let conv = singular + w.at(&self.regular, i);
            worst = worst.max((lam * conv - lam * k + self.values[i]).abs());
            scale = scale.max((lam * k).abs());
        }
        if scale == 0.0 {
            worst
        } else {
            worst / scale
        }
    }

    /// `K^{*n}(t) = c^n t^{n a - 1} / Gamma(n a)` for a fractional kernel.
    fn iterated(&self, n: usize, t: f64) -> f64 {
        match self.kernel {
            KernelSpec::Fractional { c, alpha } => {
                let na = n as f64 * alpha;
                c.powi(n as i32) * t.powf(na - 1.0) / gamma(na)
            }
            _ => 0.0,
        }
    }

    fn iterated_integral(&self, n: usize, t: f64) -> f64 {
        match self.kernel {
            KernelSpec::Fractional { c, alpha } => {
                let na = n as f64 * alpha;
                c.powi(n as i32) * t.powf(na) / gamma(na + 1.0)
            }
            _ => 0.0,
        }
    }
}

fn sign(n: usize) -> f64 {
    if n % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Numerical resolvent of `lambda K` by product integration.
///
/// Singular fractional kernels are split as
/// `R = sum_{n<=m} (-1)^{n+1} lambda^n K^{*n} + Q` with `m a >= 2 - a`, which
/// leaves a remainder `Q` with a continuously differentiable forcing.
pub fn resolvent_numeric(spec: &KernelSpec, lambda: f64, grid: &TimeGrid) -> Result<ResolventSamples> {
    spec.validate()?;
    grid.require_origin()?;
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda must be finite, got {lambda}")));
    }
    let warning = match spec.alpha() {
        Some(a) if a < 0.55 && grid.n_steps() < 50 => Some(format!(
            "grid of {} steps is too coarse for a kernel singularity of order {:.3}; use at least 50",
            grid.n_steps(),
            1.0 - a
        )),
        _ => None,
    };
    let n = grid.len();
    let h = grid.spacing();
    let mut samples = ResolventSamples {
        grid: *grid,
        lambda,
        values: vec![0.0; n],
        integrated: vec![0.0; n],
        warning,
        kernel: spec.clone(),
        regular: vec![0.0; n],
        terms: 0,
    };
    if lambda == 0.0 {
        return Ok(samples);
    }
    let weights = ConvolutionWeights::new(spec, grid);
    let times = grid.times();
    match spec.alpha() {
        Some(a) if a < 1.0 => {
            let m = (2.0 / a).ceil() as usize - 1;
            samples.terms = m;
            let top = sign(m + 1) * lambda.powi(m as i32 + 1);
            let forcing: Vec<f64> = times.iter().map(|&t| top * samples.iterated(m + 1, t)).collect();
            samples.regular = solve_with_weights(&weights, lambda, &forcing)?;
            let q_int = cumulative_trapezoid(h, &samples.regular);
            for (i, &t) in times.iter().enumerate() {
                let mut r = samples.regular[i];
                let mut r_int = q_int[i];
                for k in 1..=m {
                    let coef = sign(k) * lambda.powi(k as i32);
                    r_int += coef * samples.iterated_integral(k, t);
                    r += if i == 0 {
                        if k == 1 {
                            coef.signum() * f64::INFINITY
                        } else {
                            0.0
                        }
                    } else {
                        coef * samples.iterated(k, t)
                    };
                }
                samples.values[i] = r;
                samples.integrated[i] = r_int;
            }
        }
        _ => {
            let forcing: Vec<f64> = times.iter().map(|&t| lambda * spec.value(t)).collect();
            samples.regular = solve_with_weights(&weights, lambda, &forcing)?;
            samples.values = samples.regular.clone();
            samples.integrated = cumulative_trapezoid(h, &samples.values);
        }
    }
    Ok(samples)
}
