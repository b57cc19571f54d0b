use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;

/// Piecewise-constant deterministic short rate. `rates[i]` applies on
/// `[breakpoints[i], breakpoints[i + 1])`, the last rate extends to infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateCurve {
    pub breakpoints: Vec<f64>,
    pub rates: Vec<f64>,
}

impl Default for RateCurve {
    fn default() -> Self {
        Self::constant(0.0)
    }
}

impl RateCurve {
    pub fn constant(rate: f64) -> Self {
        Self { breakpoints: vec![0.0], rates: vec![rate] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.breakpoints.is_empty() || self.breakpoints.len() != self.rates.len() {
            return Err(Error::InvalidArgument(
                "rate curve needs one rate per breakpoint and at least one of each".into(),
            ));
        }
        if self.breakpoints[0] != 0.0 {
            return Err(Error::InvalidArgument("rate curve must start at t = 0".into()));
        }
        if self.breakpoints.windows(2).any(|w| !(w[1] > w[0])) || !self.breakpoints.iter().all(|b| b.is_finite()) {
            return Err(Error::InvalidArgument("rate breakpoints must be finite and increasing".into()));
        }
        if self.rates.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::InvalidArgument("rates must be finite and >= 0".into()));
        }
        Ok(())
    }

    /// `r(t)`; right-continuous.
    pub fn rate(&self, t: f64) -> f64 {
        let i = self.breakpoints.partition_point(|b| *b <= t).max(1) - 1;
        self.rates[i]
    }

    /// `int_a^b r(s) ds` (exact).
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.integral(b, a);
        }
        let mut total = 0.0;
        for (i, &start) in self.breakpoints.iter().enumerate() {
            let end = self.breakpoints.get(i + 1).copied().unwrap_or(f64::INFINITY);
            let lo = start.max(a);
            let hi = end.min(b);
            if hi > lo {
                total += self.rates[i] * (hi - lo);
            }
        }
        total
    }
}

/// Volterra Heston market:
/// `nu_t = nu0 + int K(t-r) kappa (phi - nu_r) dr + int K(t-r) sigma sqrt(nu_r) dB_r`,
/// `dS/S = (r_t + theta nu_t) dt + sqrt(nu_t) dW_1`, `d<W_1, B> = rho dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketParams {
    pub nu0: f64,
    pub kappa: f64,
    pub phi: f64,
    pub sigma: f64,
    pub rho: f64,
    pub theta: f64,
    #[serde(default)]
    pub rate_curve: RateCurve,
    pub kernel: KernelSpec,
}

impl MarketParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        let finite = [self.nu0, self.kappa, self.phi, self.sigma, self.rho, self.theta];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad(format!("market parameters must be finite: {finite:?}"));
        }
        if self.nu0 < 0.0 {
            return bad(format!("nu0 must be >= 0, got {}", self.nu0));
        }
        if self.kappa < 0.0 || self.phi < 0.0 || self.sigma < 0.0 {
            return bad(format!(
                "kappa, phi and sigma must be >= 0, got {}, {}, {}",
                self.kappa, self.phi, self.sigma
            ));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return bad(format!("rho must lie in [-1, 1], got {}", self.rho));
        }
        self.rate_curve.validate()?;
        self.kernel.validate()
    }

    /// Copy with a different kernel.
    pub fn with_kernel(&self, kernel: KernelSpec) -> Self {
        Self { kernel, ..self.clone() }
    }

    /// True when the two markets agree in everything but the kernel.
    pub fn same_except_kernel(&self, other: &MarketParams) -> bool {
        self.with_kernel(other.kernel.clone()) == *other
    }

    /// `exp(-int_t^T r)`.
    pub fn discount(&self, t: f64, horizon: f64) -> f64 {
        (-self.rate_curve.integral(t, horizon)).exp()
    }
}
