//! Riccati-Volterra equation of the log mean-variance problem.
//!
//! With `H(w) = H2 w^2 + H1 w + H0` the unknown `psi` (in time to maturity)
//! solves
//!
//! ```text
//! psi(t) = int_0^t K(t - s) [ -H2 psi(s)^2 + H1 psi(s) - H0 ] ds,   psi(0) = 0,
//! ```
//!
//! i.e. `-psi = K * H(-psi)`. When `H1 < 0`, `H0 < 0` and `H2 >= 0` the
//! solution is global and `0 < psi(t) <= -r1(t) < -w*`, where `w*` is the
//! negative root of `H` and `r1(t) = Q1^{-1}(int_0^t K)`,
//! `Q1(w) = -int_w^0 du / H(u)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{interpolate, TimeGrid};
use crate::kernels::KernelSpec;
use crate::quadrature::adaptive;

use super::convolution::ConvolutionWeights;

/// Coefficients of `H(w) = h2 w^2 + h1 w + h0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiccatiCoefficients {
    pub h2: f64,
    pub h1: f64,
    pub h0: f64,
}

impl RiccatiCoefficients {
    pub fn new(h2: f64, h1: f64, h0: f64) -> Self {
        Self { h2, h1, h0 }
    }

    /// Coefficients of the log mean-variance problem with risk aversion `gamma`.
    pub fn log_mean_variance(kappa: f64, rho: f64, sigma: f64, theta: f64, gamma: f64) -> Self {
        let s = (1.0 + gamma) * (1.0 + gamma);
        Self {
            h2: gamma * gamma * rho * rho * sigma * sigma / (2.0 * s),
            h1: -(kappa + gamma * gamma * rho * sigma * theta / s),
            h0: -(1.0 + 2.0 * gamma) * theta * theta / (2.0 * s),
        }
    }

    pub fn h(&self, w: f64) -> f64 {
        (self.h2 * w + self.h1) * w + self.h0
    }

    /// Integrand of the Riccati-Volterra equation, `-H(-psi)`.
    pub fn rate(&self, psi: f64) -> f64 {
        -self.h(-psi)
    }

    /// The bound conditions `H1 < 0`, `H0 < 0`, `H2 >= 0`.
    pub fn is_bounded_regime(&self) -> bool {
        self.h1 < 0.0 && self.h0 < 0.0 && self.h2 >= 0.0
    }

    /// Negative root of `H`, when `H1 < 0` and `H2 >= 0`.
    pub fn w_star(&self) -> Option<f64> {
        if !(self.h1 < 0.0 && self.h2 >= 0.0) {
            return None;
        }
        let disc = self.h1 * self.h1 - 4.0 * self.h2 * self.h0;
        if disc < 0.0 {
            return None;
        }
        // 2 H0 / (-H1 + sqrt(D)) avoids cancellation and covers H2 = 0.
        Some(2.0 * self.h0 / (-self.h1 + disc.sqrt()))
    }

    fn validate(&self) -> Result<()> {
        if !(self.h2.is_finite() && self.h1.is_finite() && self.h0.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite Riccati coefficients {self:?}")));
        }
        Ok(())
    }
}

/// Adams predictor-corrector settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Corrector sweeps per step (1 = PECE).
    pub corrector_iterations: usize,
    /// Blow-up threshold as a multiple of `|w*|`.
    pub divergence_factor: f64,
    /// Absolute blow-up threshold used when `w*` is unavailable.
    pub divergence_cap: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { corrector_iterations: 1, divergence_factor: 10.0, divergence_cap: 1e12 }
    }
}

/// `psi` sampled on a time-to-maturity grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiSolution {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub coefficients: RiccatiCoefficients,
    pub kernel: KernelSpec,
}

impl PsiSolution {
    /// `psi(tau)` by linear interpolation.
    pub fn at(&self, tau: f64) -> f64 {
        interpolate(&self.grid, &self.values, tau)
    }
}

/// Fractional Adams (product trapezoidal PECE) solution of the
/// Riccati-Volterra equation. With `H2 = 0` the corrector equation is linear
/// and is solved exactly instead of iterated.
pub fn solve_riccati_volterra(
    kernel: &KernelSpec,
    coeffs: RiccatiCoefficients,
    grid: &TimeGrid,
    config: &SolverConfig,
) -> Result<PsiSolution> {
    kernel.validate()?;
    coeffs.validate()?;
    grid.require_origin()?;
    if config.corrector_iterations == 0 {
        return Err(Error::InvalidArgument("at least one corrector iteration is required".into()));
    }
    let threshold = match coeffs.w_star() {
        Some(w) if w != 0.0 => config.divergence_factor * w.abs(),
        _ => config.divergence_cap,
    };

    let weights = ConvolutionWeights::new(kernel, grid);
    let n = grid.n_steps();
    let mut psi = Vec::with_capacity(n + 1);
    let mut rate = Vec::with_capacity(n + 1);
    psi.push(0.0);
    rate.push(coeffs.rate(0.0));
    let diag = weights.diagonal();
    for k in 1..=n {
        let history = weights.history(&rate, k);
        let value = if coeffs.h2 == 0.0 {
            // linear corrector: solve it outright
            (history - diag * coeffs.h0) / (1.0 - diag * coeffs.h1)
        } else {
            let mut value = weights.rectangle(&rate, k);
            for _ in 0..config.corrector_iterations {
                value = history + diag * coeffs.rate(value);
            }
            value
        };
        if !value.is_finite() || value.abs() > threshold {
            return Err(Error::Divergence { node: k, time: grid.time(k), value: value.abs(), threshold });
        }
        psi.push(value);
        rate.push(coeffs.rate(value));
    }
    Ok(PsiSolution { grid: *grid, values: psi, coefficients: coeffs, kernel: kernel.clone() })
}

/// `(w*, r1(t))` of the existence bound; `w* < r1(t) <= 0`.
pub fn riccati_bounds(coeffs: &RiccatiCoefficients, kernel: &KernelSpec, t: f64) -> Result<(f64, f64)> {
    let w_star = bound_root(coeffs)?;
    kernel.validate()?;
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("bound evaluated at t = {t}")));
    }
    let r1 = invert_q1(coeffs, w_star, kernel.integral(t), 0.0)?;
    Ok((w_star, r1))
}

/// `-r1` at every node of `grid`, the upper bound for `psi`.
pub fn riccati_bound_curve(
    coeffs: &RiccatiCoefficients,
    kernel: &KernelSpec,
    grid: &TimeGrid,
) -> Result<(f64, Vec<f64>)> {
    let w_star = bound_root(coeffs)?;
    kernel.validate()?;
    let mut out = Vec::with_capacity(grid.len());
    let mut guess = 0.0;
    for t in grid.times() {
        let r1 = invert_q1(coeffs, w_star, kernel.integral(t), guess)?;
        guess = r1;
        out.push(-r1);
    }
    Ok((w_star, out))
}

fn bound_root(coeffs: &RiccatiCoefficients) -> Result<f64> {
    coeffs.validate()?;
    if !coeffs.is_bounded_regime() {
        return Err(Error::Precondition(format!(
            "bound needs H1 < 0, H0 < 0 and H2 >= 0, got H2 = {}, H1 = {}, H0 = {}",
            coeffs.h2, coeffs.h1, coeffs.h0
        )));
    }
    coeffs
        .w_star()
        .ok_or_else(|| Error::Numeric("H has no negative root".into()))
}

/// `-H(u) / (u - w*)`, positive on `[w*, 0]`.
fn reduced(coeffs: &RiccatiCoefficients, w_star: f64, u: f64) -> f64 {
    -(coeffs.h2 * (u + w_star) + coeffs.h1)
}

/// `Q1(w) = int_w^0 du / (-H(u))` with `u = w* + e^s`, which turns the
/// logarithmic growth near `w*` into a smooth integrand in `s`.
fn q1_log(coeffs: &RiccatiCoefficients, w_star: f64, s: f64) -> Result<f64> {
    let top = (-w_star).ln();
    if s >= top {
        return Ok(0.0);
    }
    adaptive(|x| 1.0 / reduced(coeffs, w_star, w_star + x.exp()), s, top, 1e-14)
}

/// Solve `Q1(w) = target` on `(w*, 0]`; safeguarded Newton in `s = ln(w - w*)`.
fn invert_q1(coeffs: &RiccatiCoefficients, w_star: f64, target: f64, guess: f64) -> Result<f64> {
    if target <= 0.0 {
        return Ok(0.0);
    }
    let top = (-w_star).ln();
    // 1 / reduced is at most 1 / min(reduced), so Q1(s) >= (top - s) min(reduced).
    let d_min = reduced(coeffs, w_star, w_star).min(reduced(coeffs, w_star, 0.0));
    let mut lo = top - target / d_min - 1.0;
    let mut hi = top;
    let mut s = if guess > w_star && guess < 0.0 { (guess - w_star).ln() } else { 0.5 * (lo + hi) };
    for _ in 0..200 {
        let g = q1_log(coeffs, w_star, s)? - target;
        if g > 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        // dQ1/ds = -1 / reduced
        let mut next = s + g * reduced(coeffs, w_star, w_star + s.exp());
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - s).abs() <= 1e-14 * (1.0 + s.abs()) || hi - lo <= 1e-14 * (1.0 + s.abs()) {
            return Ok((w_star + next.exp()).min(0.0));
        }
        s = next;
    }
    Err(Error::Numeric(format!(
        "r1 root search did not converge; bracket [{}, {}] for target {target}",
        w_star + lo.exp(),
        w_star + hi.exp()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn w_star_quadratic_and_linear() {
        let c = RiccatiCoefficients::new(0.5, -1.5, -0.5);
        let w = c.w_star().unwrap();
        assert!((w - (1.5 - 3.25f64.sqrt())).abs() < 1e-14);
        assert!(c.h(w).abs() < 1e-14);
        let c = RiccatiCoefficients::new(0.0, -0.3, -0.6);
        assert!((c.w_star().unwrap() + 2.0).abs() < 1e-15);
    }

    #[test]
    fn bounds_require_the_existence_condition() {
        let k = KernelSpec::Fractional { c: 1.0, alpha: 0.6 };
        let c = RiccatiCoefficients::new(0.1, 0.2, -0.5);
        assert!(matches!(riccati_bounds(&c, &k, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn r1_vanishes_at_the_origin_and_stays_above_w_star() {
        let k = KernelSpec::Fractional { c: 1.0, alpha: 0.6 };
        let c = RiccatiCoefficients::new(0.5, -1.5, -0.5);
        let (w, r) = riccati_bounds(&c, &k, 0.0).unwrap();
        assert_eq!(r, 0.0);
        let (_, r) = riccati_bounds(&c, &k, 1e-10).unwrap();
        assert!(r < 0.0 && r > -1e-5);
        let (_, r) = riccati_bounds(&c, &k, 50.0).unwrap();
        assert!(r > w && r < 0.0);
    }

    #[test]
    fn zero_forcing_gives_zero_solution() {
        let g = TimeGrid::new(0.0, 2.0, 100).unwrap();
        for h1 in [0.0, 0.7] {
            let c = RiccatiCoefficients::new(0.3, h1, 0.0);
            let k = KernelSpec::Fractional { c: 1.0, alpha: 0.7 };
            let s = solve_riccati_volterra(&k, c, &g, &SolverConfig::default()).unwrap();
            assert!(s.values.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn blow_up_is_reported_with_its_node() {
        // psi' = psi^2 + 1 explodes at pi/2
        let c = RiccatiCoefficients::new(-1.0, 0.0, -1.0);
        let g = TimeGrid::new(0.0, 3.0, 300).unwrap();
        let k = KernelSpec::Constant { c: 1.0 };
        let cfg = SolverConfig { divergence_cap: 1e3, ..SolverConfig::default() };
        match solve_riccati_volterra(&k, c, &g, &cfg) {
            Err(Error::Divergence { node, time, .. }) => {
                assert!(node > 100 && time < 1.7, "node {node} t {time}");
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
