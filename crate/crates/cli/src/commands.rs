use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rough_equilibrium::montecarlo::{
    paths_to_csv, simulate_terminal_wealth, simulate_variance_with, simulate_wealth, terminal_stats_of,
    write_paths_binary, SimOptions,
};
use rough_equilibrium::strategy::{
    const_mv_strategy, log_mv_strategy, nonexp_log_strategy, nonexp_value_coeffs, prefer_rough_crossover,
    MarketParams, Objective, ObjectiveSpec, StrategyCurve, ThetaCurve,
};
use rough_equilibrium::{Error, KernelSpec, TimeGrid};
use serde::Serialize;
use serde_json::json;

use crate::config::{Format, RunConfig};
use crate::error::CliError;

/// Files written by one command, plus the manifest.
pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|source| CliError::Io { path, source })?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        self.write(name, text)
    }

    /// `config.resolved.json` reruns the command as is; `manifest.json`
    /// records it with the versions and the list of outputs.
    pub fn finish(mut self, command: &str, config: &RunConfig) -> Result<Vec<String>, CliError> {
        self.write_json("config.resolved.json", config)?;
        let manifest = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "library_version": rough_equilibrium::VERSION,
            "seed": config.sim.seed,
            "config": config,
            "outputs": self.files,
        });
        self.write_json("manifest.json", &manifest)?;
        Ok(self.files)
    }
}

fn mean_variance_curve(objective: &ObjectiveSpec, market: &MarketParams, grid: &TimeGrid) -> Result<StrategyCurve, CliError> {
    let horizon = objective.horizon;
    Ok(match &objective.objective {
        Objective::ConstMv { gamma } => const_mv_strategy(market, *gamma, horizon, grid)?,
        Objective::LogMv { gamma, delta } => log_mv_strategy(market, *gamma, *delta, horizon, grid)?,
        Objective::NonExpLog { discount } => nonexp_log_strategy(market, discount, horizon, grid)?.to_strategy_curve(),
    })
}

fn require_mean_variance(config: &RunConfig, command: &str) -> Result<(), CliError> {
    if let Objective::NonExpLog { .. } = config.objective.objective {
        return Err(CliError::Argument(format!("{command} needs a const_mv or log_mv objective")));
    }
    Ok(())
}

pub fn hedge_curve(config: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    require_mean_variance(config, "hedge-curve")?;
    let grid = config.grid()?;
    for s in config.scenarios() {
        let curve = mean_variance_curve(&config.objective, &s.market, &grid)?;
        if config.wants(Format::Csv) {
            out.write(&format!("hedge_curve_{}.csv", s.label), curve.to_hedge_csv())?;
        }
        if config.wants(Format::Json) {
            out.write(&format!("hedge_curve_{}.json", s.label), curve.to_json()? + "\n")?;
        }
    }
    Ok(())
}

pub fn strategy(config: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let grid = config.grid()?;
    for s in config.scenarios() {
        if let Objective::NonExpLog { discount } = &config.objective.objective {
            let st = nonexp_log_strategy(&s.market, discount, config.objective.horizon, &grid)?;
            if config.wants(Format::Csv) {
                out.write(&format!("strategy_{}.csv", s.label), st.to_csv())?;
            }
            if config.wants(Format::Json) {
                out.write_json(&format!("strategy_{}.json", s.label), &st)?;
            }
            continue;
        }
        let curve = mean_variance_curve(&config.objective, &s.market, &grid)?;
        if config.wants(Format::Csv) {
            out.write(&format!("strategy_{}.csv", s.label), curve.to_csv())?;
        }
        if config.wants(Format::Json) {
            out.write(&format!("strategy_{}.json", s.label), curve.to_json()? + "\n")?;
        }
    }
    Ok(())
}

pub fn crossover(config: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    require_mean_variance(config, "crossover")?;
    if config.hurst.len() != 2 {
        return Err(CliError::Argument(format!(
            "crossover compares exactly two kernels; list two values in \"hurst\", got {}",
            config.hurst.len()
        )));
    }
    let mut scenarios = config.scenarios();
    scenarios.sort_by(|a, b| a.label.cmp(&b.label));
    let (rough, smooth) = (&scenarios[0].market, &scenarios[1].market);
    let grid = config.grid()?;
    let gammas = if config.gammas.is_empty() {
        match config.objective.objective {
            Objective::ConstMv { gamma } | Objective::LogMv { gamma, .. } => vec![gamma],
            Objective::NonExpLog { .. } => unreachable!(),
        }
    } else {
        config.gammas.clone()
    };
    let mut rows = Vec::with_capacity(gammas.len());
    for &gamma in &gammas {
        let objective = match &config.objective.objective {
            Objective::ConstMv { .. } => Objective::ConstMv { gamma },
            Objective::LogMv { delta, .. } => Objective::LogMv { gamma, delta: *delta },
            Objective::NonExpLog { .. } => unreachable!(),
        };
        let spec = ObjectiveSpec { objective, horizon: config.objective.horizon };
        rows.push((gamma, prefer_rough_crossover(rough, smooth, &spec, &grid)?));
    }
    if config.wants(Format::Csv) {
        let mut csv = String::from("gamma,t_star\n");
        for (g, t) in &rows {
            let _ = writeln!(csv, "{g:?},{}", t.map(|t| format!("{t:?}")).unwrap_or_default());
        }
        out.write("crossover.csv", csv)?;
    }
    if config.wants(Format::Json) {
        let rows: Vec<_> = rows.iter().map(|(g, t)| json!({ "gamma": g, "t_star": t })).collect();
        out.write_json("crossover.json", &rows)?;
    }
    Ok(())
}

pub fn simulate(config: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let grid = config.grid()?;
    let sim = &config.sim;
    let options = SimOptions { memory_budget: sim.memory_budget_mib << 20, chunk_paths: sim.chunk_paths };
    for s in config.scenarios() {
        let strategy = mean_variance_curve(&config.objective, &s.market, &grid)?;
        let (terminal, fit) = simulate_terminal_wealth(
            &s.market,
            sim.scheme,
            &grid,
            sim.n_paths,
            sim.seed,
            &strategy,
            sim.x0,
            &options,
        )?;
        let stats = terminal_stats_of(&terminal, sim.histogram_bins)?;
        let summary = json!({
            "label": s.label,
            "kernel": s.market.kernel,
            "scheme": sim.scheme,
            "seed": sim.seed,
            "n_paths": stats.n_paths,
            "mean": stats.mean,
            "variance": stats.variance,
            "standard_error": stats.standard_error(),
            "kernel_fit_relative_l2_error": fit.as_ref().map(|f| f.relative_l2_error),
            "histogram": stats.histogram,
        });
        out.write_json(&format!("terminal_stats_{}.json", s.label), &summary)?;
        if config.wants(Format::Csv) {
            let mut csv = String::from("bin_lo,bin_hi,count\n");
            let h = &stats.histogram;
            for (i, c) in h.counts.iter().enumerate() {
                let _ = writeln!(csv, "{:?},{:?},{c}", h.bin_edges[i], h.bin_edges[i + 1]);
            }
            out.write(&format!("histogram_{}.csv", s.label), csv)?;
        }
        if sim.save_paths {
            let bundle = simulate_variance_with(&s.market, sim.scheme, &grid, sim.n_paths, sim.seed, &options)?;
            let bundle = simulate_wealth(&bundle, &s.market, &strategy, sim.x0)?;
            if config.wants(Format::Csv) {
                out.write(&format!("paths_{}.csv", s.label), paths_to_csv(&bundle))?;
            }
            let mut bytes = Vec::new();
            write_paths_binary(&bundle, &mut bytes)?;
            out.write(&format!("paths_{}.bin", s.label), bytes)?;
        }
    }
    Ok(())
}

pub fn nonexp(config: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let Objective::NonExpLog { discount } = &config.objective.objective else {
        return Err(CliError::Argument("nonexp needs a non_exp_log objective".into()));
    };
    let horizon = config.objective.horizon;
    let grid = config.grid()?;
    let market = &config.scenarios()[0].market;
    let strategy = nonexp_log_strategy(market, discount, horizon, &grid)?;

    // Same problem under a second kernel; the outputs must not change.
    let other_kernel = match market.kernel.alpha() {
        Some(1.0) => KernelSpec::rough_heston(0.1)?,
        _ => KernelSpec::Fractional { c: 1.0, alpha: 1.0 },
    };
    let other = nonexp_log_strategy(&market.with_kernel(other_kernel), discount, horizon, &grid)?;
    if other.to_csv() != strategy.to_csv() {
        return Err(Error::Numeric("non-exponential strategy changed with the kernel".into()).into());
    }

    let theta = ThetaCurve::initial(market, horizon, grid.n_steps())?;
    let value = nonexp_value_coeffs(market, discount, &theta)?;
    if config.wants(Format::Csv) {
        out.write("nonexp.csv", strategy.to_csv())?;
        let mut csv = String::from("r,V1,E,c1,c2\n");
        for j in 0..value.grid.len() {
            let _ = writeln!(
                csv,
                "{:?},{:?},{:?},{:?},{:?}",
                value.grid.time(j),
                value.v1[j],
                value.forward_variance[j],
                value.c1[j],
                value.c2[j]
            );
        }
        out.write("nonexp_value.csv", csv)?;
    }
    if config.wants(Format::Json) {
        out.write_json("nonexp.json", &json!({ "strategy": strategy, "value_coefficients": value }))?;
    }
    Ok(())
}
