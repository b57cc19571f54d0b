use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::paths::PathBundle;

/// Equal-width histogram over `[min, max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
}

/// Sample statistics of terminal wealth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminalStats {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub histogram: Histogram,
    pub n_paths: usize,
}

impl TerminalStats {
    /// Standard error of the mean.
    pub fn standard_error(&self) -> f64 {
        (self.variance / self.n_paths as f64).sqrt()
    }
}

pub fn terminal_stats(bundle: &PathBundle, n_bins: usize) -> Result<TerminalStats> {
    terminal_stats_of(&bundle.terminal_wealth()?, n_bins)
}

/// Statistics of a sample, summed in index order.
pub fn terminal_stats_of(values: &[f64], n_bins: usize) -> Result<TerminalStats> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("sample variance needs at least 2 paths, got {n}")));
    }
    if n_bins == 0 {
        return Err(Error::InvalidArgument("histogram needs at least one bin".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("terminal sample contains non-finite values".into()));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / n_bins as f64;
    let bin_edges: Vec<f64> = (0..=n_bins)
        .map(|i| if i == n_bins { hi } else { lo + width * i as f64 })
        .collect();
    let mut counts = vec![0u64; n_bins];
    for v in values {
        let i = if width > 0.0 { (((v - lo) / width) as usize).min(n_bins - 1) } else { 0 };
        counts[i] += 1;
    }
    Ok(TerminalStats { mean, variance, histogram: Histogram { bin_edges, counts }, n_paths: n })
}
