//! Seven-site demonstration: propagate a user-supplied Hamiltonian, fit the
//! forecaster on the opening stretch of selected site populations, and emit
//! truth/train/forecast columns for plotting.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use heomcast_core::forecast::{ArimaOrder, GridSpec};
use heomcast_core::heom::{excited_site, HeomSolver, PropagationConfig, Trajectory};
use heomcast_core::hierarchy::{ado_count, required_bytes, MemoryBudget};
use heomcast_core::{BathSpec, Error as CoreError, SystemSpec, UnitSystem};
use serde::Deserialize;

use crate::benchmark::{forecast_window, ModelSpec};
use crate::config::SystemConfig;
use crate::parallel::propagate_blocks;
use crate::trajectory::{write_atomic, write_trajectory, TrajectoryHeader};

pub const DEFAULT_DEPTH: usize = 6;
pub const DEFAULT_CHECK_DEPTH: usize = 4;
/// Pointwise population difference between the two depths below which the
/// truncation is reported as converged.
pub const CONVERGENCE_TOLERANCE: f64 = 5e-3;

/// A Hamiltonian file for the demo; sites are numbered from 1.
pub const TEMPLATE: &str = include_str!("../templates/fmo.toml");

#[derive(Debug, Clone, PartialEq)]
pub struct FmoConfig {
    pub system: SystemSpec,
    pub bath: BathSpec,
    /// 1-based.
    pub initial_site: usize,
    /// 1-based.
    pub report_sites: Vec<usize>,
}

#[derive(Deserialize)]
struct FmoFile {
    #[serde(flatten)]
    system: SystemConfig,
    #[serde(default = "default_initial")]
    initial_site: usize,
    #[serde(default = "default_report")]
    report_sites: Vec<usize>,
}

fn default_initial() -> usize {
    1
}

fn default_report() -> Vec<usize> {
    vec![1, 2, 3]
}

impl FmoConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let f: FmoFile = toml::from_str(text)?;
        let cfg = Self {
            system: f.system.system()?,
            bath: f.system.bath()?,
            initial_site: f.initial_site,
            report_sites: f.report_sites,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.system.n_sites();
        ensure!(self.bath.n_sites() == n, "bath has {} sites, system {n}", self.bath.n_sites());
        ensure!(
            (1..=n).contains(&self.initial_site),
            "initial_site {} outside 1..={n}",
            self.initial_site
        );
        ensure!(!self.report_sites.is_empty(), "report_sites is empty");
        for &s in &self.report_sites {
            ensure!((1..=n).contains(&s), "report site {s} outside 1..={n}");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FmoOptions {
    pub depth: usize,
    /// Shallower depth propagated for the convergence note; `None` skips it.
    pub check_depth: Option<usize>,
    pub t_total: f64,
    pub dt: f64,
    pub input_len: usize,
    /// Forecast length; `None` forecasts to the end of the trajectory.
    pub horizon: Option<usize>,
    pub grid: GridSpec,
    pub workers: usize,
    pub budget: MemoryBudget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceNote {
    pub depth: usize,
    pub check_depth: usize,
    pub max_difference: f64,
    pub converged: bool,
}

impl ConvergenceNote {
    pub fn message(&self) -> String {
        format!(
            "K={} vs K={}: max pointwise population difference {:.3e} ({})",
            self.check_depth,
            self.depth,
            self.max_difference,
            if self.converged {
                "converged"
            } else {
                "not converged, consider a deeper hierarchy"
            }
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiteForecast {
    /// 1-based.
    pub site: usize,
    pub values: Vec<f64>,
    pub order: Option<ArimaOrder>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FmoOutcome {
    pub trajectory: Trajectory,
    pub header: TrajectoryHeader,
    pub input_len: usize,
    pub forecasts: Vec<SiteForecast>,
    pub convergence: Option<ConvergenceNote>,
    /// max_t |Σ_j P_j(t) − 1| over all sites.
    pub max_sum_deviation: f64,
}

/// Largest depth whose hierarchy fits in `budget`.
pub fn deepest_fitting(n_sites: usize, budget: MemoryBudget) -> Option<usize> {
    (0..=64)
        .take_while(|&k| {
            required_bytes(n_sites, k).is_some_and(|b| b <= budget.bytes)
                && ado_count(n_sites, k).is_some_and(|c| c < u32::MAX as usize)
        })
        .last()
}

fn solver(cfg: &FmoConfig, depth: usize, budget: MemoryBudget) -> Result<HeomSolver> {
    match HeomSolver::new(&cfg.system, &cfg.bath, depth, budget, &UnitSystem::STANDARD) {
        Ok(s) => Ok(s),
        Err(e @ CoreError::Capacity { .. }) => match deepest_fitting(cfg.system.n_sites(), budget) {
            Some(k) => bail!("{e}; depth K={k} fits, try --depth {k}"),
            None => bail!("{e}; no depth fits this budget"),
        },
        Err(e) => Err(e.into()),
    }
}

pub fn fmo_demo(cfg: &FmoConfig, opts: &FmoOptions) -> Result<FmoOutcome> {
    cfg.validate()?;
    let n = cfg.system.n_sites();
    let rho0 = excited_site(n, cfg.initial_site - 1)?;
    let propagation = |depth| PropagationConfig {
        t_total: opts.t_total,
        dt: opts.dt,
        depth,
        store_full: false,
        budget: opts.budget,
    };
    let main = solver(cfg, opts.depth, opts.budget)?;
    let trajectory = propagate_blocks(&main, &rho0, &propagation(opts.depth), opts.workers)?;

    let convergence = match opts.check_depth {
        Some(k) if k != opts.depth => {
            let s = solver(cfg, k, opts.budget)?;
            let other = propagate_blocks(&s, &rho0, &propagation(k), opts.workers)?;
            let max_difference = (0..trajectory.len())
                .flat_map(|t| (0..n).map(move |j| (t, j)))
                .map(|(t, j)| (trajectory.population(t, j) - other.population(t, j)).abs())
                .fold(0.0, f64::max);
            Some(ConvergenceNote {
                depth: opts.depth,
                check_depth: k,
                max_difference,
                converged: max_difference < CONVERGENCE_TOLERANCE,
            })
        }
        _ => None,
    };

    let len = trajectory.len();
    ensure!(
        opts.input_len >= 1 && opts.input_len < len,
        "input length {} must be in 1..{len}",
        opts.input_len
    );
    let horizon = opts.horizon.unwrap_or(len - opts.input_len);
    ensure!(horizon >= 1, "horizon must be >= 1");
    let model = ModelSpec::Sarima(opts.grid);
    let forecasts = cfg
        .report_sites
        .iter()
        .map(|&site| {
            let series = trajectory.site_series(site - 1);
            let f = forecast_window(&model, &series[..opts.input_len], horizon)?;
            Ok(SiteForecast {
                site,
                values: f.values,
                order: f.order,
            })
        })
        .collect::<Result<_>>()?;

    Ok(FmoOutcome {
        max_sum_deviation: trajectory.audit().max_sum_deviation,
        header: TrajectoryHeader::new(&cfg.system, &cfg.bath, opts.dt, opts.depth),
        trajectory,
        input_len: opts.input_len,
        forecasts,
        convergence,
    })
}

pub struct FmoPaths {
    pub trajectory: PathBuf,
    pub forecast: PathBuf,
    pub plot: PathBuf,
}

/// Writes the trajectory file, a wide forecast table and the tidy
/// `t_ps,series,value` plot table.
pub fn write_fmo_outputs(dir: &Path, outcome: &FmoOutcome) -> Result<FmoPaths> {
    std::fs::create_dir_all(dir)?;
    let paths = FmoPaths {
        trajectory: dir.join("fmo_trajectory.csv"),
        forecast: dir.join("fmo_forecast.csv"),
        plot: dir.join("fmo_plot.csv"),
    };
    write_trajectory(&paths.trajectory, &outcome.header, &outcome.trajectory)?;
    let times = outcome.trajectory.times();
    let dt = outcome.header.dt_ps;
    let lin = outcome.input_len;
    let t_at = |k: usize| times.get(k).copied().unwrap_or(k as f64 * dt);
    let horizon = outcome.forecasts.first().map_or(0, |f| f.values.len());

    write_atomic(&paths.forecast, |w| {
        let mut csv = csv::Writer::from_writer(w);
        let mut head = vec!["t_ps".to_string()];
        head.extend(outcome.forecasts.iter().map(|f| format!("P{}", f.site)));
        csv.write_record(&head)?;
        for k in 0..horizon {
            let mut rec = vec![t_at(lin + k).to_string()];
            rec.extend(outcome.forecasts.iter().map(|f| f.values[k].to_string()));
            csv.write_record(&rec)?;
        }
        csv.flush()?;
        Ok(())
    })?;

    write_atomic(&paths.plot, |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["t_ps", "series", "value"])?;
        for f in &outcome.forecasts {
            let series = outcome.trajectory.site_series(f.site - 1);
            for (k, v) in series.iter().enumerate() {
                csv.write_record([t_at(k).to_string(), format!("P{}_truth", f.site), v.to_string()])?;
            }
            for (k, v) in series[..lin].iter().enumerate() {
                csv.write_record([t_at(k).to_string(), format!("P{}_train", f.site), v.to_string()])?;
            }
            for (k, v) in f.values.iter().enumerate() {
                csv.write_record([t_at(lin + k).to_string(), format!("P{}_forecast", f.site), v.to_string()])?;
            }
        }
        csv.flush()?;
        Ok(())
    })?;
    Ok(paths)
}

/// Writes the Hamiltonian template to `path` unless a file is already
/// there.
pub fn write_template(path: &Path) -> Result<()> {
    ensure!(!path.exists(), "{} already exists", path.display());
    let mut f = std::fs::File::create(path)?;
    f.write_all(TEMPLATE.as_bytes())?;
    Ok(())
}
