//! Sum-of-exponentials approximation of a fractional kernel.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_lr;

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::quadrature::GaussLegendre;

/// Default ratio by which the rate ladder overshoots the fit window on
/// each side.
pub const DEFAULT_RATE_SPREAD: f64 = 10.0;

/// Fitted kernel and its errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoeFit {
    pub kernel: KernelSpec,
    /// `||K - K_fit|| / ||K||` in `L^2` over `[horizon 1e-4, horizon]`.
    pub relative_l2_error: f64,
    /// `int_0^horizon (K - K_fit)^2 dt`; infinite when `K` is not square
    /// integrable at the origin.
    pub l2_error_squared: f64,
}

/// Fit `sum_i w_i e^{-r_i t}` to a fractional kernel with a geometric rate
/// ladder and least-squares weights on a log grid over `[horizon/1e4, horizon]`.
pub fn fit_sum_of_exponentials(kernel: &KernelSpec, n_factors: usize, horizon: f64) -> Result<SoeFit> {
    fit_sum_of_exponentials_with(kernel, n_factors, horizon, DEFAULT_RATE_SPREAD)
}

pub fn fit_sum_of_exponentials_with(
    kernel: &KernelSpec,
    n_factors: usize,
    horizon: f64,
    rate_spread: f64,
) -> Result<SoeFit> {
    kernel.validate()?;
    let (c, alpha) = match *kernel {
        KernelSpec::Fractional { c, alpha } => (c, alpha),
        _ => return Err(Error::InvalidArgument("only fractional kernels can be fitted".into())),
    };
    if n_factors == 0 {
        return Err(Error::InvalidArgument("at least one factor is required".into()));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidArgument(format!("horizon must be > 0, got {horizon}")));
    }
    if !(rate_spread >= 1.0) || !rate_spread.is_finite() {
        return Err(Error::InvalidArgument(format!("rate spread must be >= 1, got {rate_spread}")));
    }
    if alpha == 1.0 {
        let kernel = KernelSpec::SumOfExponentials { weights: vec![c], rates: vec![0.0] };
        return Ok(SoeFit { kernel, relative_l2_error: 0.0, l2_error_squared: 0.0 });
    }

    let t_lo = horizon * 1e-4;
    let rates: Vec<f64> = if n_factors == 1 {
        vec![1.0 / (t_lo * horizon).sqrt()]
    } else {
        let r_lo = 1.0 / (horizon * rate_spread);
        let r_hi = rate_spread / t_lo;
        let q = (r_hi / r_lo).ln() / (n_factors - 1) as f64;
        (0..n_factors).map(|i| r_lo * (q * i as f64).exp()).collect()
    };

    // Weighted least squares for int (K - K_fit)^2 dt = int (K - K_fit)^2 t dln t.
    let m = (40 * n_factors).max(400);
    let (l_lo, l_hi) = (t_lo.ln(), horizon.ln());
    let dl = (l_hi - l_lo) / (m - 1) as f64;
    let mut a = DMatrix::<f64>::zeros(m, n_factors);
    let mut b = DVector::<f64>::zeros(m);
    for j in 0..m {
        let t = (l_lo + dl * j as f64).exp();
        let end = if j == 0 || j == m - 1 { 0.5 } else { 1.0 };
        let w = (t * dl * end).sqrt();
        b[j] = w * kernel.value(t);
        for (i, r) in rates.iter().enumerate() {
            a[(j, i)] = w * (-r * t).exp();
        }
    }
    // Column scaling keeps the singular values comparable.
    let scale: Vec<f64> = (0..n_factors).map(|i| a.column(i).norm().max(f64::MIN_POSITIVE)).collect();
    for (i, s) in scale.iter().enumerate() {
        a.column_mut(i).scale_mut(1.0 / s);
    }
    let svd = a.svd(true, true);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    if !(s_min > 0.0) || s_max / s_min > 1e14 {
        return Err(Error::Numeric(format!(
            "sum-of-exponentials fit with {n_factors} factors is degenerate (condition {:.3e}); use fewer factors",
            s_max / s_min
        )));
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::Numeric(format!("least-squares solve failed: {e}")))?;
    let weights: Vec<f64> = (0..n_factors).map(|i| x[i] / scale[i]).collect();
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::Numeric("sum-of-exponentials fit produced non-finite weights; use fewer factors".into()));
    }
    let weights: Vec<f64> = weights.into_iter().map(|w| if w == 0.0 { f64::MIN_POSITIVE } else { w }).collect();
    let fitted = KernelSpec::SumOfExponentials { weights: weights.clone(), rates: rates.clone() };

    let relative_l2_error = window_relative_error(kernel, &fitted, t_lo, horizon);
    let l2_error_squared = l2_error_on_origin_interval(c, alpha, &weights, &rates, horizon);
    Ok(SoeFit { kernel: fitted, relative_l2_error, l2_error_squared })
}

fn window_relative_error(kernel: &KernelSpec, fitted: &KernelSpec, lo: f64, hi: f64) -> f64 {
    // Gauss-Legendre in ln t on 64 panels.
    let rule = GaussLegendre::sixteen();
    let panels = 64;
    let (l_lo, l_hi) = (lo.ln(), hi.ln());
    let width = (l_hi - l_lo) / panels as f64;
    let mut err = 0.0;
    let mut norm = 0.0;
    for p in 0..panels {
        let a = l_lo + width * p as f64;
        for (l, w) in rule.mapped(a, a + width) {
            let t = l.exp();
            let k = kernel.value(t);
            let d = k - fitted.value(t);
            err += w * t * d * d;
            norm += w * t * k * k;
        }
    }
    (err / norm).sqrt()
}

/// `int_0^T (K - sum w_i e^{-r_i t})^2 dt` in closed form.
fn l2_error_on_origin_interval(c: f64, alpha: f64, weights: &[f64], rates: &[f64], horizon: f64) -> f64 {
    if alpha <= 0.5 {
        return f64::INFINITY;
    }
    let g = libm::tgamma(alpha);
    let kk = c * c * horizon.powf(2.0 * alpha - 1.0) / ((2.0 * alpha - 1.0) * g * g);
    let mut cross = 0.0;
    for (w, r) in weights.iter().zip(rates) {
        // int_0^T c t^{a-1} e^{-rt} / Gamma(a) dt
        let m = if *r == 0.0 {
            c * horizon.powf(alpha) / libm::tgamma(alpha + 1.0)
        } else {
            c * r.powf(-alpha) * gamma_lr(alpha, r * horizon)
        };
        cross += w * m;
    }
    let mut ff = 0.0;
    for (wi, ri) in weights.iter().zip(rates) {
        for (wj, rj) in weights.iter().zip(rates) {
            let s = ri + rj;
            ff += wi * wj * horizon * crate::kernels::phi1(s * horizon);
        }
    }
    (kk - 2.0 * cross + ff).max(0.0)
}
