//! Trace and positivity audit of forecasts made for every site of a system
//! from the same window.

use std::path::Path;

use anyhow::{ensure, Result};
use heomcast_core::dataset::{window_count, Split};
use heomcast_core::metrics::{audit_properties, AuditThresholds, PropertyAudit};
use rayon::prelude::*;

use crate::benchmark::{forecast_window, DatasetDir, ModelSpec};
use crate::trajectory::write_atomic;

#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    pub input_len: usize,
    pub horizon: usize,
    /// Keep every `stride`-th window offset.
    pub stride: usize,
    /// Audit at most this many (trajectory, offset) systems.
    pub max_systems: usize,
    pub split: Split,
    pub workers: usize,
    pub thresholds: AuditThresholds,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditOutcome {
    pub audit: PropertyAudit,
    /// (trajectory id, window offset) of each audited system.
    pub systems: Vec<(u64, usize)>,
    pub horizon: usize,
}

pub fn run_audit(dataset: &DatasetDir, model: &ModelSpec, cfg: &AuditConfig) -> Result<AuditOutcome> {
    ensure!(cfg.stride >= 1 && cfg.max_systems >= 1, "stride and system count must be >= 1");
    let len = dataset.series_len();
    let count = window_count(len, cfg.input_len, cfg.horizon);
    ensure!(count > 0, "series of {len} points cannot hold the window");
    let systems: Vec<(u64, usize)> = dataset
        .ids(cfg.split)
        .iter()
        .flat_map(|&id| (0..count).step_by(cfg.stride).map(move |o| (id, o)))
        .take(cfg.max_systems)
        .collect();
    ensure!(!systems.is_empty(), "no windows to audit");

    let n = dataset.manifest.info.n_sites;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers.max(1)).build()?;
    let mut loaded: Vec<(u64, Vec<Vec<f64>>)> = Vec::new();
    for &(id, _) in &systems {
        if loaded.last().map(|(l, _)| *l) != Some(id) {
            let t = dataset.trajectory(id)?;
            loaded.push((id, (0..n).map(|s| t.site_series(s)).collect()));
        }
    }
    let series_of = |id: u64| &loaded.iter().find(|(l, _)| *l == id).unwrap().1;

    let forecasts: Vec<Vec<Vec<f64>>> = pool.install(|| {
        systems
            .par_iter()
            .map(|&(id, offset)| {
                series_of(id)
                    .iter()
                    .map(|s| Ok(forecast_window(model, &s[offset..offset + cfg.input_len], cfg.horizon)?.values))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()
    })?;
    let audit = audit_properties(&forecasts, n, &cfg.thresholds)?;
    Ok(AuditOutcome {
        audit,
        systems,
        horizon: cfg.horizon,
    })
}

/// Per-step rows `source_id,offset,step,sum_deviation,min_population`.
pub fn write_audit(path: &Path, outcome: &AuditOutcome) -> Result<()> {
    write_atomic(path, |w| {
        let a = &outcome.audit;
        writeln!(
            w,
            "# pass_fraction={} passed={} sum_deviation median={} q95={} max={} min_population min={} median={}",
            a.pass_fraction,
            a.passed,
            a.sum_quantiles.median,
            a.sum_quantiles.q95,
            a.sum_quantiles.max,
            a.min_quantiles.min,
            a.min_quantiles.median
        )?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["source_id", "offset", "step", "sum_deviation", "min_population"])?;
        for (k, &(id, offset)) in outcome.systems.iter().enumerate() {
            for step in 0..outcome.horizon {
                let i = k * outcome.horizon + step;
                csv.write_record([
                    id.to_string(),
                    offset.to_string(),
                    (step + 1).to_string(),
                    a.sum_deviations[i].to_string(),
                    a.min_populations[i].to_string(),
                ])?;
            }
        }
        csv.flush()?;
        Ok(())
    })
}
