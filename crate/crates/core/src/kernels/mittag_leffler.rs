//! Two-parameter Mittag-Leffler function on the real line.
//!
//! `E_{a,b}(z) = sum_n z^n / Gamma(a n + b)`.
//!
//! Inside `|z| <= SERIES_RADIUS` the power series is summed directly as long
//! as it is well conditioned. Everywhere else the function is obtained by
//! inverting its Laplace transform `s^(a-b) / (s^a - z)` along an optimal
//! parabolic contour, plus the residues of the poles lying to the right of
//! the contour (Garrappa's method).

use std::f64::consts::PI;

use num_complex::Complex64;
use libm::{lgamma as ln_gamma, tgamma as gamma};

use crate::error::{Error, Result};

/// Radius below which the power series is tried first.
pub const SERIES_RADIUS: f64 = 5.0;

/// Largest `sum |term| / |sum|` accepted from the series; above it the
/// cancellation costs more than four digits and the contour is used instead.
const MAX_SERIES_AMPLIFICATION: f64 = 1e4;

const LOG_TARGET: f64 = -34.538_776_394_910_684; // ln(1e-15)
const LOG_EPS: f64 = -36.043_653_389_117_15; // ln(f64::EPSILON)

/// `E_{alpha,beta}(z)` for real `z`.
pub fn mittag_leffler(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("Mittag-Leffler alpha must be > 0, got {alpha}")));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Domain(format!("Mittag-Leffler beta must be > 0, got {beta}")));
    }
    if !z.is_finite() {
        return Err(Error::Domain(format!("Mittag-Leffler argument must be finite, got {z}")));
    }

    let value = if alpha == 1.0 && beta == 1.0 {
        z.exp()
    } else if z == 0.0 {
        1.0 / gamma(beta)
    } else if let Some(v) = (z.abs() <= SERIES_RADIUS).then(|| series(alpha, beta, z)).flatten() {
        v
    } else {
        contour(alpha, beta, z)
    };

    if !value.is_finite() {
        return Err(Error::Overflow(format!(
            "E_{{{alpha},{beta}}}({z}) exceeds the double-precision range"
        )));
    }
    Ok(value)
}

/// Direct summation. Returns `None` when the partial sums cancel too badly.
fn series(alpha: f64, beta: f64, z: f64) -> Option<f64> {
    let ln_abs_z = z.abs().ln();
    let negative = z < 0.0;
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let mut small_run = 0;
    for n in 0..10_000usize {
        let arg = alpha * n as f64 + beta;
        let magnitude = if arg < 170.0 {
            z.abs().powi(n as i32) / gamma(arg)
        } else {
            (n as f64 * ln_abs_z - ln_gamma(arg)).exp()
        };
        let term = if negative && n % 2 == 1 { -magnitude } else { magnitude };
        sum += term;
        abs_sum += magnitude;
        // Terms decrease once alpha n + beta is past the peak of |z|^n / Gamma.
        if magnitude <= 1e-17 * sum.abs().max(1e-300) && n > 2 {
            small_run += 1;
            if small_run >= 3 {
                break;
            }
        } else {
            small_run = 0;
        }
    }
    if sum == 0.0 || abs_sum > MAX_SERIES_AMPLIFICATION * sum.abs() {
        None
    } else {
        Some(sum)
    }
}

/// Laplace-transform inversion on a parabolic contour `mu (1 + iu)^2`.
fn contour(alpha: f64, beta: f64, z: f64) -> f64 {
    let lambda = Complex64::new(z, 0.0);
    let theta = if z < 0.0 { PI } else { 0.0 };

    // Poles s* of s^alpha = z on the principal sheet.
    let kmin = (-alpha / 2.0 - theta / (2.0 * PI)).ceil() as i64;
    let kmax = (alpha / 2.0 - theta / (2.0 * PI)).floor() as i64;
    let radius = z.abs().powf(1.0 / alpha);
    let mut poles: Vec<(f64, Complex64)> = (kmin..=kmax)
        .map(|k| {
            let s = Complex64::from_polar(radius, (theta + 2.0 * PI * k as f64) / alpha);
            ((s.re + s.norm()) / 2.0, s)
        })
        .filter(|(phi, _)| *phi > 1e-15)
        .collect();
    poles.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Singularities: origin first, then poles ordered by phi.
    let mut sing: Vec<Complex64> = vec![Complex64::new(0.0, 0.0)];
    let mut phi: Vec<f64> = vec![0.0];
    for (p, s) in &poles {
        sing.push(*s);
        phi.push(*p);
    }
    let j1 = sing.len();
    let mut p_strength = vec![(-2.0 * (alpha - beta + 1.0)).max(0.0)];
    p_strength.extend(std::iter::repeat_n(1.0, j1 - 1));
    let mut q_strength = vec![1.0; j1 - 1];
    q_strength.push(f64::INFINITY);
    phi.push(f64::INFINITY);

    let mut log_eps = LOG_TARGET;
    let admissible: Vec<usize> = (0..j1)
        .filter(|&j| phi[j] < (log_eps - LOG_EPS) && phi[j] < phi[j + 1])
        .collect();

    let (mut mu, mut h, mut n_nodes, mut region) = (0.0, 0.0, usize::MAX, 0);
    loop {
        for &j in &admissible {
            let (muj, hj, nj) = if j + 1 < j1 {
                optimal_param_bounded(phi[j], phi[j + 1], p_strength[j], q_strength[j], log_eps)
            } else {
                optimal_param_unbounded(phi[j], p_strength[j], log_eps)
            };
            if nj < n_nodes {
                mu = muj;
                h = hj;
                n_nodes = nj;
                region = j;
            }
        }
        if n_nodes > 200 && log_eps < -1.0 {
            log_eps += 10f64.ln();
            n_nodes = usize::MAX;
        } else {
            break;
        }
    }

    let n = n_nodes as i64;
    let mut integral = Complex64::new(0.0, 0.0);
    for k in -n..=n {
        let u = h * k as f64;
        let s = mu * Complex64::new(1.0, u).powi(2);
        let ds = Complex64::new(-2.0 * mu * u, 2.0 * mu);
        let f = s.powf(alpha - beta) / (s.powf(alpha) - lambda) * ds;
        integral += s.exp() * f;
    }
    integral *= h / (2.0 * PI);
    // h / (2 pi i) * sum, and we only need the real part
    let mut value = integral.im;
    for s in &sing[region + 1..] {
        let residue = s.powf(1.0 - beta) * s.exp() / alpha;
        value += residue.re;
    }
    value
}

fn optimal_param_bounded(
    phi_j: f64,
    phi_j1: f64,
    pj: f64,
    qj: f64,
    log_eps: f64,
) -> (f64, f64, usize) {
    let fac = 1.01;
    let f_max = (log_eps - LOG_EPS).exp();
    let sq_phi_j = phi_j.sqrt();
    let threshold = 2.0 * (log_eps - LOG_EPS).sqrt();
    let sq_phi_j1 = phi_j1.sqrt().min(threshold - sq_phi_j);

    let mut f_bar = 1.0;
    let region: Option<(f64, f64)> = if pj < 1e-14 && qj < 1e-14 {
        Some((sq_phi_j, sq_phi_j1))
    } else if pj < 1e-14 {
        let f_min = if sq_phi_j > 0.0 {
            fac * (sq_phi_j / (sq_phi_j1 - sq_phi_j)).powf(qj)
        } else {
            fac
        };
        if f_min < f_max {
            f_bar = f_min + f_min / f_max * (f_max - f_min);
            let fq = f_bar.powf(-1.0 / qj);
            Some((sq_phi_j, (2.0 * sq_phi_j1 - fq * sq_phi_j) / (2.0 + fq)))
        } else {
            None
        }
    } else if qj < 1e-14 {
        let f_min = fac * (sq_phi_j1 / (sq_phi_j1 - sq_phi_j)).powf(pj);
        if f_min < f_max {
            f_bar = f_min + f_min / f_max * (f_max - f_min);
            let fp = f_bar.powf(-1.0 / pj);
            Some(((2.0 * sq_phi_j + fp * sq_phi_j1) / (2.0 - fp), sq_phi_j1))
        } else {
            None
        }
    } else {
        let f_min = fac * (sq_phi_j + sq_phi_j1) / (sq_phi_j1 - sq_phi_j).powf(pj.max(qj));
        if f_min < f_max {
            let f_min = f_min.max(1.5);
            f_bar = f_min + f_min / f_max * (f_max - f_min);
            let fp = f_bar.powf(-1.0 / pj);
            let fq = f_bar.powf(-1.0 / qj);
            let w = -phi_j1 / log_eps;
            let den = 2.0 + w - (1.0 + w) * fp + fq;
            let a = ((2.0 + w + fq) * sq_phi_j + fp * sq_phi_j1) / den;
            let b = (-(1.0 + w) * fq * sq_phi_j + (2.0 + w - (1.0 + w) * fp) * sq_phi_j1) / den;
            Some((a, b))
        } else {
            None
        }
    };

    match region {
        Some((sq_bar_j, sq_bar_j1)) => {
            let log_eps = log_eps - f_bar.ln();
            let w = -sq_bar_j1 * sq_bar_j1 / log_eps;
            let mu = (((1.0 + w) * sq_bar_j + sq_bar_j1) / (2.0 + w)).powi(2);
            let h = -2.0 * PI / log_eps * (sq_bar_j1 - sq_bar_j)
                / ((1.0 + w) * sq_bar_j + sq_bar_j1);
            let n = ((1.0 - log_eps / mu).sqrt() / h).ceil();
            if n.is_finite() && n > 0.0 && h > 0.0 {
                (mu, h, n as usize)
            } else {
                (0.0, 0.0, usize::MAX)
            }
        }
        None => (0.0, 0.0, usize::MAX),
    }
}

fn optimal_param_unbounded(phi_j: f64, pj: f64, log_eps: f64) -> (f64, f64, usize) {
    let sq_phi_j = phi_j.sqrt();
    let mut phibar_j = if phi_j > 0.0 { phi_j * 1.01 } else { 0.01 };
    let mut sq_phibar_j = phibar_j.sqrt();
    let (f_min, f_max, f_tar): (f64, f64, f64) = (1.0, 10.0, 5.0);

    let mut n;
    let mut a;
    let mut sq_mu;
    let mut guard = 0;
    loop {
        let phi_t = phibar_j;
        let log_eps_phi_t = log_eps / phi_t;
        n = (phi_t / PI * (1.0 - 3.0 * log_eps_phi_t / 2.0 + (1.0 - 2.0 * log_eps_phi_t).sqrt()))
            .ceil();
        a = PI * n / phi_t;
        sq_mu = sq_phibar_j * (4.0 - a).abs() / (7.0 - (1.0 + 12.0 * a).sqrt()).abs();
        let fbar = ((sq_phibar_j - sq_phi_j) / sq_mu).powf(-pj);
        guard += 1;
        if pj < 1e-14 || (f_min < fbar && fbar < f_max) || guard > 100 {
            break;
        }
        sq_phibar_j = f_tar.powf(-1.0 / pj) * sq_mu + sq_phi_j;
        phibar_j = sq_phibar_j * sq_phibar_j;
    }
    let mut mu = sq_mu * sq_mu;
    let mut h = (-3.0 * a - 2.0 + 2.0 * (1.0 + 12.0 * a).sqrt()) / (4.0 - a) / n;

    let threshold = log_eps - LOG_EPS;
    if mu > threshold {
        let q = if pj.abs() < 1e-14 { 0.0 } else { f_tar.powf(-1.0 / pj) * mu.sqrt() };
        let phibar = (q + phi_j.sqrt()).powi(2);
        if phibar < threshold {
            let w = (LOG_EPS / (LOG_EPS - log_eps)).sqrt();
            let u = (-phibar / LOG_EPS).sqrt();
            mu = threshold;
            n = (w * log_eps / 2.0 / PI / (u * w - 1.0)).ceil();
            h = (LOG_EPS / (LOG_EPS - log_eps)).sqrt() / n;
        } else {
            return (0.0, 0.0, usize::MAX);
        }
    }
    if n.is_finite() && n > 0.0 && h > 0.0 {
        (mu, h, n as usize)
    } else {
        (0.0, 0.0, usize::MAX)
    }
}
