//! Sweep manifest: one CSV row per parameter point, preceded by a `#` line
//! recording the sweep settings and seed.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, ensure, Context, Result};
use heomcast_core::dataset::SamplingMode;

use crate::trajectory::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointStatus {
    Ok,
    Failed,
    /// Held by another process when this manifest was written.
    Pending,
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PointStatus::Ok => "ok",
            PointStatus::Failed => "failed",
            PointStatus::Pending => "pending",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "ok" => PointStatus::Ok,
            "failed" => PointStatus::Failed,
            "pending" => PointStatus::Pending,
            other => bail!("unknown status {other:?}"),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub id: u64,
    pub epsilon: Vec<f64>,
    /// Nearest-neighbour chain couplings.
    pub couplings: Vec<f64>,
    pub lambda: f64,
    pub gamma: f64,
    pub temperature: f64,
    pub status: PointStatus,
    /// Relative to the manifest's directory; empty unless status is ok.
    pub file: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepInfo {
    pub seed: u64,
    pub mode: SamplingMode,
    pub requested: usize,
    pub n_sites: usize,
    pub dt_ps: f64,
    pub t_total_ps: f64,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub info: SweepInfo,
    pub rows: Vec<ManifestRow>,
}

pub fn mode_name(mode: SamplingMode) -> &'static str {
    match mode {
        SamplingMode::Grid => "grid",
        SamplingMode::Random => "random",
    }
}

pub fn parse_mode(s: &str) -> Result<SamplingMode> {
    match s {
        "grid" => Ok(SamplingMode::Grid),
        "random" => Ok(SamplingMode::Random),
        other => bail!("unknown sampling mode {other:?} (grid or random)"),
    }
}

impl Manifest {
    pub fn ok_ids(&self) -> Vec<u64> {
        self.rows
            .iter()
            .filter(|r| r.status == PointStatus::Ok)
            .map(|r| r.id)
            .collect()
    }

    pub fn failures(&self) -> impl Iterator<Item = &ManifestRow> {
        self.rows.iter().filter(|r| r.status == PointStatus::Failed)
    }

    pub fn row(&self, id: u64) -> Option<&ManifestRow> {
        self.rows.iter().find(|r| r.id == id)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let n = self.info.n_sites;
        write_atomic(path, |w| {
            let i = &self.info;
            writeln!(
                w,
                "# seed={} mode={} requested={} actual={} sites={} dt_ps={} t_total_ps={} K={}",
                i.seed,
                mode_name(i.mode),
                i.requested,
                self.rows.len(),
                n,
                i.dt_ps,
                i.t_total_ps,
                i.depth
            )?;
            let mut csv = csv::Writer::from_writer(w);
            let mut head = vec!["id".to_string()];
            head.extend((1..=n).map(|j| format!("epsilon_{j}")));
            head.extend((1..n).map(|j| format!("J_{j}")));
            head.extend(["lambda", "gamma", "T", "status", "file"].map(String::from));
            csv.write_record(&head)?;
            for r in &self.rows {
                ensure!(r.epsilon.len() == n && r.couplings.len() + 1 == n, "row {} has wrong arity", r.id);
                let mut rec = vec![r.id.to_string()];
                rec.extend(r.epsilon.iter().chain(&r.couplings).map(f64::to_string));
                rec.extend([
                    r.lambda.to_string(),
                    r.gamma.to_string(),
                    r.temperature.to_string(),
                    r.status.as_str().to_string(),
                    r.file.clone(),
                ]);
                csv.write_record(&rec)?;
            }
            csv.flush()?;
            Ok(())
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let (first, rest) = text.split_once('\n').unwrap_or((&text, ""));
        let kv: HashMap<&str, &str> = first
            .strip_prefix('#')
            .ok_or_else(|| anyhow!("{} lacks the sweep header line", path.display()))?
            .split_whitespace()
            .filter_map(|t| t.split_once('='))
            .collect();
        let get = |k: &str| kv.get(k).copied().ok_or_else(|| anyhow!("manifest header lacks {k}"));
        let info = SweepInfo {
            seed: get("seed")?.parse()?,
            mode: parse_mode(get("mode")?)?,
            requested: get("requested")?.parse()?,
            n_sites: get("sites")?.parse()?,
            dt_ps: get("dt_ps")?.parse()?,
            t_total_ps: get("t_total_ps")?.parse()?,
            depth: get("K")?.parse()?,
        };
        let n = info.n_sites;
        let mut reader = csv::Reader::from_reader(rest.as_bytes());
        let mut rows = Vec::new();
        for record in reader.records() {
            let rec = record?;
            ensure!(rec.len() == 2 * n + 5, "manifest row has {} fields, expected {}", rec.len(), 2 * n + 5);
            let num = |i: usize| -> Result<f64> { Ok(rec[i].parse::<f64>()?) };
            rows.push(ManifestRow {
                id: rec[0].parse()?,
                epsilon: (1..=n).map(num).collect::<Result<_>>()?,
                couplings: (n + 1..2 * n).map(num).collect::<Result<_>>()?,
                lambda: num(2 * n)?,
                gamma: num(2 * n + 1)?,
                temperature: num(2 * n + 2)?,
                status: PointStatus::parse(&rec[2 * n + 3])?,
                file: rec[2 * n + 4].to_string(),
            });
        }
        Ok(Self { info, rows })
    }
}

/// Failed points, listed apart from the manifest: `id,reason`.
pub fn write_failures(path: &Path, failures: &[(u64, String)]) -> Result<()> {
    write_atomic(path, |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["id", "reason"])?;
        for (id, reason) in failures {
            csv.write_record([id.to_string(), reason.clone()])?;
        }
        csv.flush()?;
        Ok(())
    })
}
