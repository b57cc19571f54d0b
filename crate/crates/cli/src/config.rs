use std::path::{Path, PathBuf};

use rough_equilibrium::grid::DEFAULT_STEPS_PER_YEAR;
use rough_equilibrium::montecarlo::SimScheme;
use rough_equilibrium::strategy::{MarketParams, ObjectiveSpec};
use rough_equilibrium::{KernelSpec, TimeGrid};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub steps_per_year: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { steps_per_year: DEFAULT_STEPS_PER_YEAR }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub scheme: SimScheme,
    pub n_paths: usize,
    pub seed: u64,
    pub x0: f64,
    pub chunk_paths: usize,
    pub memory_budget_mib: usize,
    /// Also export every path (CSV and binary); needs the whole bundle in memory.
    pub save_paths: bool,
    pub histogram_bins: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            scheme: SimScheme::LiftedFactors { n_factors: 20, rate_spread: 10.0 },
            n_paths: 5000,
            seed: 42,
            x0: 1.0,
            chunk_paths: 1000,
            memory_budget_mib: 1024,
            save_paths: false,
            histogram_bins: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), formats: vec![Format::Csv] }
    }
}

/// One JSON document. `hurst`, when non-empty, replaces the market kernel by
/// the rough Heston kernel of each listed `H` in turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub market: MarketParams,
    pub objective: ObjectiveSpec,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub hurst: Vec<f64>,
    #[serde(default)]
    pub gammas: Vec<f64>,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub steps_per_year: Option<usize>,
    pub paths: Option<usize>,
}

/// A labelled market: the configured kernel, or one per listed `H`.
pub struct Scenario {
    pub label: String,
    pub market: MarketParams,
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            line: None,
            message: format!("cannot read config: {e}"),
        })?;
        let mut config: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            line: Some(e.line()),
            message: e.to_string(),
        })?;
        config.apply(overrides);
        config.validate().map_err(|(key, message)| CliError::Config {
            path: path.to_path_buf(),
            line: locate(&text, key),
            message: format!("{key}: {message}"),
        })?;
        Ok(config)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.sim.seed = seed;
        }
        if let Some(out) = &o.out {
            self.output.directory = out.clone();
        }
        if let Some(format) = o.format {
            self.output.formats = vec![format];
        }
        if let Some(n) = o.steps_per_year {
            self.grid.steps_per_year = n;
        }
        if let Some(n) = o.paths {
            self.sim.n_paths = n;
        }
    }

    /// On failure returns the offending top-level key and a message.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        self.market.validate().map_err(|e| ("market", e.to_string()))?;
        self.objective.validate().map_err(|e| ("objective", e.to_string()))?;
        if self.grid.steps_per_year == 0 {
            return Err(("grid", "steps_per_year must be at least 1".into()));
        }
        for &h in &self.hurst {
            KernelSpec::rough_heston(h).map_err(|e| ("hurst", e.to_string()))?;
        }
        if let Some(g) = self.gammas.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
            return Err(("gammas", format!("risk aversion must be > 0, got {g}")));
        }
        let sim = &self.sim;
        if sim.n_paths == 0 || sim.chunk_paths == 0 || sim.histogram_bins == 0 {
            return Err(("sim", "n_paths, chunk_paths and histogram_bins must be at least 1".into()));
        }
        if !(sim.x0 > 0.0 && sim.x0.is_finite()) {
            return Err(("sim", format!("x0 must be > 0, got {}", sim.x0)));
        }
        if let SimScheme::LiftedFactors { n_factors, rate_spread } = sim.scheme {
            if n_factors == 0 || !(rate_spread > 1.0) {
                return Err(("sim", "lifted scheme needs n_factors >= 1 and rate_spread > 1".into()));
            }
        }
        if self.output.formats.is_empty() {
            return Err(("output", "at least one output format is required".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TimeGrid, rough_equilibrium::Error> {
        TimeGrid::with_resolution(self.objective.horizon, self.grid.steps_per_year)
    }

    pub fn wants(&self, format: Format) -> bool {
        self.output.formats.contains(&format)
    }

    pub fn scenarios(&self) -> Vec<Scenario> {
        if self.hurst.is_empty() {
            let label = match self.market.kernel.hurst() {
                Some(h) => format!("H{h:.2}"),
                None => "market".to_string(),
            };
            return vec![Scenario { label, market: self.market.clone() }];
        }
        self.hurst
            .iter()
            .map(|&h| Scenario {
                label: format!("H{h:.2}"),
                market: self.market.with_kernel(KernelSpec::rough_heston(h).expect("validated")),
            })
            .collect()
    }
}

/// 1-based line of the first occurrence of `"key"`.
fn locate(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}
