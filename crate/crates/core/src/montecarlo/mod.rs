//! Monte-Carlo simulation of the Volterra Heston variance and of wealth
//! under an equilibrium strategy.
//!
//! Negative variance is handled by full truncation: drift and diffusion read
//! `max(nu, 0)` and the stored variance is the truncated value. Every path
//! draws from its own ChaCha8 stream, so runs are reproducible bit for bit
//! regardless of thread count or the number of paths.

mod export;
mod fit;
mod paths;
mod stats;

pub use export::{paths_to_csv, read_paths_binary, write_paths_binary, BINARY_MAGIC};
pub use fit::{fit_sum_of_exponentials, fit_sum_of_exponentials_with, SoeFit, DEFAULT_RATE_SPREAD};
pub use paths::{
    simulate_terminal_wealth, simulate_variance, simulate_variance_with, simulate_wealth, PathBundle, SimOptions,
    SimScheme,
};
pub use stats::{terminal_stats, terminal_stats_of, Histogram, TerminalStats};
