//! Volterra convolution kernels, their resolvents, and Mittag-Leffler
//! functions.
//!
//! Four kernel families are supported: constant, fractional (power law),
//! exponential, and finite sums of exponentials. The first three have closed
//! form resolvents; the last is handled numerically.

mod mittag_leffler;
mod resolvent;

pub use mittag_leffler::{mittag_leffler, SERIES_RADIUS};
pub(crate) use resolvent::integrated_ratio_on_grid;
pub use resolvent::{
    integrated_resolvent, integrated_resolvent_ratio, resolvent_closed_form, resolvent_numeric,
    ResolventCurve, ResolventSamples,
};

use serde::{Deserialize, Serialize};
use libm::tgamma as gamma;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Convolution kernel `K` of a Volterra Heston model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    /// `K(t) = c`.
    Constant { c: f64 },
    /// `K(t) = c t^(alpha-1) / Gamma(alpha)`, `alpha` in `(0, 1]`.
    Fractional { c: f64, alpha: f64 },
    /// `K(t) = c exp(-beta t)`.
    Exponential { c: f64, beta: f64 },
    /// `K(t) = sum_i weights[i] exp(-rates[i] t)`.
    SumOfExponentials { weights: Vec<f64>, rates: Vec<f64> },
}

impl KernelSpec {
    /// Rough Heston kernel `t^(H-1/2) / Gamma(H+1/2)`.
    pub fn rough_heston(hurst: f64) -> Result<Self> {
        let k = KernelSpec::Fractional { c: 1.0, alpha: hurst + 0.5 };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        match self {
            KernelSpec::Constant { c } => {
                if !c.is_finite() || *c == 0.0 {
                    return bad(format!("constant kernel weight must be finite and non-zero, got {c}"));
                }
            }
            KernelSpec::Fractional { c, alpha } => {
                if !c.is_finite() || *c == 0.0 {
                    return bad(format!("fractional kernel weight must be finite and non-zero, got {c}"));
                }
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return bad(format!("fractional exponent must lie in (0, 1], got {alpha}"));
                }
            }
            KernelSpec::Exponential { c, beta } => {
                if !c.is_finite() || *c == 0.0 {
                    return bad(format!("exponential kernel weight must be finite and non-zero, got {c}"));
                }
                if !beta.is_finite() || *beta < 0.0 {
                    return bad(format!("exponential decay rate must be >= 0, got {beta}"));
                }
            }
            KernelSpec::SumOfExponentials { weights, rates } => {
                if weights.is_empty() || weights.len() != rates.len() {
                    return bad(format!(
                        "sum of exponentials needs matching non-empty weights and rates ({} vs {})",
                        weights.len(),
                        rates.len()
                    ));
                }
                if weights.iter().any(|w| !w.is_finite() || *w == 0.0) {
                    return bad("sum-of-exponentials weights must be finite and non-zero".into());
                }
                if rates.iter().any(|r| !r.is_finite() || *r < 0.0) {
                    return bad("sum-of-exponentials rates must be finite and >= 0".into());
                }
            }
        }
        Ok(())
    }

    /// Fractional exponent `alpha`, if this is a fractional kernel.
    pub fn alpha(&self) -> Option<f64> {
        match self {
            KernelSpec::Fractional { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }

    /// Hurst index `alpha - 1/2` of a fractional kernel.
    pub fn hurst(&self) -> Option<f64> {
        self.alpha().map(|a| a - 0.5)
    }

    /// True when `K(t)` is unbounded as `t -> 0`.
    pub fn is_singular(&self) -> bool {
        matches!(self, KernelSpec::Fractional { alpha, .. } if *alpha < 1.0)
    }

    /// Exponential terms `(weight, rate)` of the kernels that are sums of
    /// exponentials (constant and exponential included).
    pub(crate) fn exponential_terms(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            KernelSpec::Constant { c } => Some(vec![(*c, 0.0)]),
            KernelSpec::Fractional { c, alpha } if *alpha == 1.0 => Some(vec![(*c, 0.0)]),
            KernelSpec::Fractional { .. } => None,
            KernelSpec::Exponential { c, beta } => Some(vec![(*c, *beta)]),
            KernelSpec::SumOfExponentials { weights, rates } => {
                Some(weights.iter().copied().zip(rates.iter().copied()).collect())
            }
        }
    }

    /// `K(t)`. Singular kernels reject `t = 0`; bounded kernels return their
    /// limit there.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("kernel evaluated at t = {t}")));
        }
        if t == 0.0 && self.is_singular() {
            return Err(Error::Domain("fractional kernel with alpha < 1 is singular at t = 0".into()));
        }
        Ok(self.value(t))
    }

    /// Unchecked evaluation for `t > 0`.
    pub(crate) fn value(&self, t: f64) -> f64 {
        match self {
            KernelSpec::Constant { c } => *c,
            KernelSpec::Fractional { c, alpha } => {
                if *alpha == 1.0 {
                    *c
                } else {
                    c * t.powf(alpha - 1.0) / gamma(*alpha)
                }
            }
            KernelSpec::Exponential { c, beta } => c * (-beta * t).exp(),
            KernelSpec::SumOfExponentials { weights, rates } => {
                weights.iter().zip(rates).map(|(w, r)| w * (-r * t).exp()).sum()
            }
        }
    }

    /// `int_0^t K(s) ds`.
    pub fn integral(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            KernelSpec::Fractional { c, alpha } => c * t.powf(*alpha) / gamma(alpha + 1.0),
            _ => self
                .exponential_terms()
                .unwrap_or_default()
                .iter()
                .map(|&(w, r)| w * t * phi1(r * t))
                .sum(),
        }
    }

    /// Product-integration moments of cell `m` on a grid of spacing `h`:
    /// `(int_0^h K(mh + v) dv, int_0^h K(mh + v) v/h dv)`.
    pub(crate) fn cell_moments(&self, h: f64, m: usize) -> (f64, f64) {
        match self {
            KernelSpec::Fractional { c, alpha } if *alpha < 1.0 => {
                if m < 16 {
                    let a = *alpha;
                    let mf = m as f64;
                    let ha = c * h.powf(a);
                    let d0 = (mf + 1.0).powf(a) - mf.powf(a);
                    let d1 = (mf + 1.0).powf(a + 1.0) - mf.powf(a + 1.0);
                    let p = ha * d0 / gamma(a + 1.0);
                    let pv = ha * (a * d1 / gamma(a + 2.0) - mf * d0 / gamma(a + 1.0));
                    (p, pv)
                } else {
                    let rule = GaussLegendre::sixteen();
                    let mut p = 0.0;
                    let mut pv = 0.0;
                    for (w, wt) in rule.mapped(0.0, 1.0) {
                        let k = self.value(h * (m as f64 + w));
                        p += wt * k;
                        pv += wt * k * w;
                    }
                    (p * h, pv * h)
                }
            }
            _ => {
                let mut p = 0.0;
                let mut pv = 0.0;
                let terms = self.exponential_terms().unwrap_or_default();
                for (w, r) in terms {
                    let decay = w * (-r * h * m as f64).exp();
                    p += decay * h * phi1(r * h);
                    pv += decay * h * phi2(r * h);
                }
                (p, pv)
            }
        }
    }
}

/// `(1 - e^{-x}) / x`, continuous at 0.
pub(crate) fn phi1(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else {
        -(-x).exp_m1() / x
    }
}

/// `int_0^1 s e^{-xs} ds`, continuous at 0.
pub(crate) fn phi2(x: f64) -> f64 {
    if x.abs() < 0.1 {
        // sum_k (-x)^k / (k! (k + 2))
        let mut term = 1.0;
        let mut sum = 0.5;
        for k in 1..20 {
            term *= -x / k as f64;
            sum += term / (k as f64 + 2.0);
        }
        sum
    } else {
        (1.0 - (-x).exp() * (1.0 + x)) / (x * x)
    }
}
