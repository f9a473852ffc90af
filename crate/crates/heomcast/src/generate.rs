//! Parameter sweeps: one propagated trajectory file per point, a manifest,
//! and a failure list. Re-runs skip points that already have a result.

use std::fs::{self, File, OpenOptions, TryLockError};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use heomcast_core::dataset::{sample_parameters, ParameterPoint, SweepSpec};
use heomcast_core::heom::{excited_site, propagate, PropagationConfig};
use rayon::prelude::*;

use crate::manifest::{write_failures, Manifest, ManifestRow, PointStatus, SweepInfo};
use crate::trajectory::{write_trajectory, TrajectoryHeader};

pub const MANIFEST_FILE: &str = "manifest.csv";
pub const FAILURES_FILE: &str = "failures.csv";
pub const TRAJECTORY_DIR: &str = "trajectories";

#[derive(Debug, Clone)]
pub struct GenerateConfig {
    pub sweep: SweepSpec,
    pub propagation: PropagationConfig,
    pub out_dir: PathBuf,
    pub workers: usize,
    /// Site holding the excitation at t = 0.
    pub initial_site: usize,
}

#[derive(Debug, Clone)]
pub struct GenerateReport {
    pub manifest: Manifest,
    /// Points propagated by this run (successes and failures).
    pub computed: usize,
    /// Points whose result was already on disk.
    pub reused: usize,
    pub failed: Vec<(u64, String)>,
    /// Points locked by another process.
    pub pending: usize,
}

enum Outcome {
    Done { computed: bool },
    Failed { reason: String, computed: bool },
    Pending,
}

pub fn trajectory_file_name(id: u64) -> String {
    format!("traj_{id:06}.csv")
}

pub fn generate_dataset(cfg: &GenerateConfig) -> Result<GenerateReport> {
    let sample = sample_parameters(&cfg.sweep)?;
    let traj_dir = cfg.out_dir.join(TRAJECTORY_DIR);
    fs::create_dir_all(&traj_dir).with_context(|| format!("creating {}", traj_dir.display()))?;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers.max(1)).build()?;
    let outcomes: Vec<Outcome> = pool.install(|| {
        sample
            .points
            .par_iter()
            .map(|p| run_point(cfg, &traj_dir, p))
            .collect::<Result<_>>()
    })?;

    let mut report = GenerateReport {
        manifest: Manifest {
            info: SweepInfo {
                seed: cfg.sweep.seed,
                mode: cfg.sweep.mode,
                requested: sample.requested,
                n_sites: cfg.sweep.n_sites,
                dt_ps: cfg.propagation.dt,
                t_total_ps: cfg.propagation.t_total,
                depth: cfg.propagation.depth,
            },
            rows: Vec::with_capacity(outcomes.len()),
        },
        computed: 0,
        reused: 0,
        failed: Vec::new(),
        pending: 0,
    };
    for (p, outcome) in sample.points.iter().zip(outcomes) {
        let (status, file) = match outcome {
            Outcome::Done { computed } => {
                count(&mut report, computed);
                (PointStatus::Ok, format!("{TRAJECTORY_DIR}/{}", trajectory_file_name(p.id)))
            }
            Outcome::Failed { reason, computed } => {
                count(&mut report, computed);
                report.failed.push((p.id, reason));
                (PointStatus::Failed, String::new())
            }
            Outcome::Pending => {
                report.pending += 1;
                (PointStatus::Pending, String::new())
            }
        };
        report.manifest.rows.push(ManifestRow {
            id: p.id,
            epsilon: p.site_energies.clone(),
            couplings: p.couplings.clone(),
            lambda: p.lambda,
            gamma: cfg.sweep.gamma,
            temperature: cfg.sweep.temperature,
            status,
            file,
        });
    }
    report.manifest.write(&cfg.out_dir.join(MANIFEST_FILE))?;
    write_failures(&cfg.out_dir.join(FAILURES_FILE), &report.failed)?;
    Ok(report)
}

fn count(report: &mut GenerateReport, computed: bool) {
    if computed {
        report.computed += 1;
    } else {
        report.reused += 1;
    }
}

fn existing(csv: &Path, failed: &Path) -> Option<Outcome> {
    if csv.exists() {
        return Some(Outcome::Done { computed: false });
    }
    fs::read_to_string(failed).ok().map(|reason| Outcome::Failed {
        reason: reason.trim().to_string(),
        computed: false,
    })
}

fn run_point(cfg: &GenerateConfig, dir: &Path, p: &ParameterPoint) -> Result<Outcome> {
    let csv = dir.join(trajectory_file_name(p.id));
    let failed = csv.with_extension("failed");
    if let Some(done) = existing(&csv, &failed) {
        return Ok(done);
    }

    let lock_path = csv.with_extension("lock");
    let lock = OpenOptions::new()
        .create(true)
        .truncate(false)
        .write(true)
        .open(&lock_path)
        .with_context(|| format!("opening {}", lock_path.display()))?;
    match lock.try_lock() {
        Ok(()) => {}
        Err(TryLockError::WouldBlock) => return Ok(Outcome::Pending),
        Err(TryLockError::Error(e)) => return Err(e).context(format!("locking {}", lock_path.display())),
    }
    // Another process may have finished this point while we waited.
    let outcome = match existing(&csv, &failed) {
        Some(done) => done,
        None => compute(cfg, p, &csv, &failed)?,
    };
    release(lock, &lock_path);
    Ok(outcome)
}

fn release(lock: File, path: &Path) {
    // A peer that opened the file before removal locks a dead inode, then
    // finds the result on its recheck.
    let _ = fs::remove_file(path);
    drop(lock);
}

fn compute(cfg: &GenerateConfig, p: &ParameterPoint, csv: &Path, failed: &Path) -> Result<Outcome> {
    let system = p.system()?;
    let bath = p.bath(cfg.sweep.gamma, cfg.sweep.temperature)?;
    let rho0 = excited_site(system.n_sites(), cfg.initial_site)?;
    match propagate(&system, &bath, &rho0, &cfg.propagation) {
        Ok(traj) => {
            let header = TrajectoryHeader::new(&system, &bath, cfg.propagation.dt, cfg.propagation.depth);
            write_trajectory(csv, &header, &traj)?;
            Ok(Outcome::Done { computed: true })
        }
        Err(e) => {
            let reason = e.to_string();
            fs::write(failed, &reason).with_context(|| format!("writing {}", failed.display()))?;
            Ok(Outcome::Failed { reason, computed: true })
        }
    }
}
