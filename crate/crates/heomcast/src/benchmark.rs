//! Test-split benchmarks: fit on each window's input, forecast, score MSE.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use heomcast_core::dataset::{window_count, Split, SplitManifest};
use heomcast_core::forecast::{grid_search_arima, naive_forecast, ArimaOrder, GridSpec};
use heomcast_core::heom::Trajectory;
use heomcast_core::metrics::{mse, EvalReport};
use rayon::prelude::*;

use crate::generate::MANIFEST_FILE;
use crate::manifest::{Manifest, PointStatus};
use crate::trajectory::{read_trajectory, write_atomic};
use crate::windows::{ids_of, read_split};

pub const SPLIT_FILE: &str = "split.csv";

/// Runs fail when more than this fraction of windows cannot be scored.
pub const MAX_FAILURE_RATE: f64 = 0.05;

/// A generated dataset directory: manifest, split and trajectory files.
#[derive(Debug, Clone)]
pub struct DatasetDir {
    pub root: PathBuf,
    pub manifest: Manifest,
    pub split: SplitManifest,
}

impl DatasetDir {
    pub fn open(root: &Path) -> Result<Self> {
        let manifest = Manifest::read(&root.join(MANIFEST_FILE))?;
        let split_path = root.join(SPLIT_FILE);
        ensure!(split_path.exists(), "{} not found; run `split` first", split_path.display());
        let split = read_split(&split_path)?;
        Ok(Self {
            root: root.to_path_buf(),
            manifest,
            split,
        })
    }

    pub fn ids(&self, split: Split) -> &[u64] {
        ids_of(&self.split, split)
    }

    /// Points per stored series, from the sweep settings.
    pub fn series_len(&self) -> usize {
        let info = &self.manifest.info;
        (info.t_total_ps / info.dt_ps).round() as usize + 1
    }

    /// Loads and audits one trajectory, checking its length against the
    /// sweep settings.
    pub fn trajectory(&self, id: u64) -> Result<Trajectory> {
        let row = self
            .manifest
            .row(id)
            .with_context(|| format!("trajectory {id} is not in the manifest"))?;
        ensure!(row.status == PointStatus::Ok, "trajectory {id} has status {}", row.status.as_str());
        let traj = read_trajectory(&self.root.join(&row.file))?.1;
        ensure!(
            traj.len() == self.series_len(),
            "trajectory {id} has {} rows, expected {}",
            traj.len(),
            self.series_len()
        );
        Ok(traj)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Naive,
    Sarima(GridSpec),
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Naive => "naive",
            ModelSpec::Sarima(_) => "sarima",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowForecast {
    pub values: Vec<f64>,
    /// Selected order; `None` for the naive model or a naive fallback.
    pub order: Option<ArimaOrder>,
    pub fallback: bool,
}

pub fn forecast_window(model: &ModelSpec, input: &[f64], horizon: usize) -> Result<WindowForecast> {
    match model {
        ModelSpec::Naive => Ok(WindowForecast {
            values: naive_forecast(input, horizon)?,
            order: None,
            fallback: false,
        }),
        ModelSpec::Sarima(grid) => {
            let result = grid_search_arima(input, grid)?;
            Ok(match result.best {
                Some(m) => WindowForecast {
                    values: m.forecast(horizon)?,
                    order: Some(m.order),
                    fallback: false,
                },
                None => WindowForecast {
                    values: naive_forecast(input, horizon)?,
                    order: None,
                    fallback: true,
                },
            })
        }
    }
}

pub fn order_label(order: Option<ArimaOrder>) -> String {
    match order {
        None => "-".into(),
        Some(o) if o.seasonal.period == 0 => format!("({},{},{})", o.p, o.d, o.q),
        Some(o) => format!(
            "({},{},{})({},{},{})_{}",
            o.p, o.d, o.q, o.seasonal.p, o.seasonal.d, o.seasonal.q, o.seasonal.period
        ),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    /// Input points per window.
    pub input_len: usize,
    /// Target points per window; the first `horizon` are scored.
    pub output_len: usize,
    pub horizon: usize,
    /// Keep every `stride`-th window offset.
    pub stride: usize,
    pub split: Split,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleScore {
    pub source_id: u64,
    pub site: usize,
    pub offset: usize,
    pub mse: Option<f64>,
    pub seconds: f64,
    pub order: Option<ArimaOrder>,
    pub fallback: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkOutcome {
    pub report: EvalReport,
    pub samples: Vec<SampleScore>,
    pub failures: usize,
    pub failure_rate: f64,
}

/// (trajectory id, site, offset) for every scored window, in a fixed order.
pub fn window_jobs(dataset: &DatasetDir, cfg: &BenchmarkConfig) -> Result<Vec<(u64, usize, usize)>> {
    ensure!(cfg.stride >= 1, "stride must be >= 1");
    ensure!(
        cfg.horizon >= 1 && cfg.horizon <= cfg.output_len,
        "horizon {} must be in 1..={}",
        cfg.horizon,
        cfg.output_len
    );
    let ids = dataset.ids(cfg.split);
    ensure!(!ids.is_empty(), "the selected split is empty");
    let len = dataset.series_len();
    let count = window_count(len, cfg.input_len, cfg.output_len);
    ensure!(
        count > 0,
        "series of {len} points cannot hold {} + {} point windows",
        cfg.input_len,
        cfg.output_len
    );
    let n = dataset.manifest.info.n_sites;
    Ok(ids
        .iter()
        .flat_map(|&id| (0..n).flat_map(move |site| (0..count).step_by(cfg.stride).map(move |o| (id, site, o))))
        .collect())
}

pub fn run_benchmark(dataset: &DatasetDir, model: &ModelSpec, cfg: &BenchmarkConfig) -> Result<BenchmarkOutcome> {
    let jobs = window_jobs(dataset, cfg)?;
    let ids = dataset.ids(cfg.split);
    let series: Vec<Vec<Vec<f64>>> = ids
        .iter()
        .map(|&id| {
            let t = dataset.trajectory(id)?;
            Ok((0..t.n_sites()).map(|s| t.site_series(s)).collect())
        })
        .collect::<Result<_>>()?;
    let slot = |id: u64| ids.iter().position(|&x| x == id).unwrap();

    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers.max(1)).build()?;
    let samples: Vec<SampleScore> = pool.install(|| {
        jobs.par_iter()
            .map(|&(id, site, offset)| {
                let s = &series[slot(id)][site];
                let input = &s[offset..offset + cfg.input_len];
                let truth = &s[offset + cfg.input_len..offset + cfg.input_len + cfg.horizon];
                let start = Instant::now();
                let result = forecast_window(model, input, cfg.horizon);
                let seconds = start.elapsed().as_secs_f64();
                let scored = result.and_then(|f| {
                    let e = mse(&f.values, truth)?;
                    ensure!(e.is_finite(), "non-finite MSE");
                    Ok((e, f))
                });
                match scored {
                    Ok((e, f)) => SampleScore {
                        source_id: id,
                        site,
                        offset,
                        mse: Some(e),
                        seconds,
                        order: f.order,
                        fallback: f.fallback,
                        error: None,
                    },
                    Err(err) => SampleScore {
                        source_id: id,
                        site,
                        offset,
                        mse: None,
                        seconds,
                        order: None,
                        fallback: false,
                        error: Some(err.to_string()),
                    },
                }
            })
            .collect()
    });

    let scores: Vec<f64> = samples.iter().filter_map(|s| s.mse).collect();
    let failures = samples.len() - scores.len();
    let failure_rate = failures as f64 / samples.len() as f64;
    if failure_rate > MAX_FAILURE_RATE {
        let first = samples.iter().find_map(|s| s.error.clone()).unwrap_or_default();
        bail!(
            "{failures} of {} windows failed ({:.1}% > {:.0}%); first error: {first}",
            samples.len(),
            100.0 * failure_rate,
            100.0 * MAX_FAILURE_RATE
        );
    }
    let timed: Vec<f64> = samples.iter().filter(|s| s.mse.is_some()).map(|s| s.seconds).collect();
    let seconds_per_sample = timed.iter().sum::<f64>() / timed.len().max(1) as f64;
    let report = EvalReport::from_scores(
        model.name(),
        dataset.manifest.info.n_sites,
        cfg.horizon,
        &scores,
        seconds_per_sample,
    )?;
    Ok(BenchmarkOutcome {
        report,
        samples,
        failures,
        failure_rate,
    })
}

pub const REPORT_NOTE: &str = "# mse_std is the sample standard deviation (n - 1) of per-window MSE over the scored \
                               test windows; sec_per_sample is the mean wall time of fit plus forecast per window";

pub fn write_report(path: &Path, reports: &[EvalReport]) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "{REPORT_NOTE}")?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["model", "levels", "horizon", "mse_mean", "mse_std", "sec_per_sample", "n"])?;
        for r in reports {
            csv.write_record([
                r.model.clone(),
                r.levels.to_string(),
                r.horizon.to_string(),
                r.mse_mean.to_string(),
                r.mse_std.to_string(),
                r.seconds_per_sample.to_string(),
                r.n_samples.to_string(),
            ])?;
        }
        csv.flush()?;
        Ok(())
    })
}

/// Per-window scores. Wall times are left out so the file depends only on
/// the data and settings.
pub fn write_samples(path: &Path, samples: &[SampleScore]) -> Result<()> {
    write_atomic(path, |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["source_id", "site", "offset", "mse", "order", "fallback", "error"])?;
        for s in samples {
            csv.write_record([
                s.source_id.to_string(),
                (s.site + 1).to_string(),
                s.offset.to_string(),
                s.mse.map(|e| e.to_string()).unwrap_or_default(),
                order_label(s.order),
                s.fallback.to_string(),
                s.error.clone().unwrap_or_default(),
            ])?;
        }
        csv.flush()?;
        Ok(())
    })
}

/// One human-readable row: `model  levels  horizon  mean ± std  time`.
pub fn format_table_row(r: &EvalReport) -> String {
    format!(
        "{:<8} {:>3} levels  h={:<5} MSE {:.4e} ± {:.2e}  {:.4} s/sample  (n={})",
        r.model, r.levels, r.horizon, r.mse_mean, r.mse_std, r.seconds_per_sample, r.n_samples
    )
}
