//! Trajectory files: one `#` header line with the parameters, then CSV rows
//! `t_ps,P1,...,PN`. Full density matrices, when kept, go to a sidecar of
//! little-endian f64 (re, im) pairs, row-major, one matrix per time step.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, ensure, Context, Result};
use heomcast_core::heom::Trajectory;
use heomcast_core::{BathSpec, CMatrix, SystemSpec, C64};

/// Tolerance of the ingestion audit on stored populations.
pub const STORED_POPULATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryHeader {
    pub n_sites: usize,
    pub dt_ps: f64,
    pub depth: usize,
    pub epsilon: Vec<f64>,
    /// Row-major `n × n` coupling matrix.
    pub couplings: Vec<f64>,
    pub lambda: Vec<f64>,
    pub gamma: Vec<f64>,
    pub temperature: f64,
}

impl TrajectoryHeader {
    pub fn new(system: &SystemSpec, bath: &BathSpec, dt_ps: f64, depth: usize) -> Self {
        Self {
            n_sites: system.n_sites(),
            dt_ps,
            depth,
            epsilon: system.site_energies().to_vec(),
            couplings: system.couplings().to_vec(),
            lambda: bath.lambdas().to_vec(),
            gamma: bath.gammas().to_vec(),
            temperature: bath.temperature(),
        }
    }

    pub fn system(&self) -> Result<SystemSpec> {
        Ok(SystemSpec::new(self.epsilon.clone(), self.couplings.clone())?)
    }

    pub fn bath(&self) -> Result<BathSpec> {
        Ok(BathSpec::new(self.lambda.clone(), self.gamma.clone(), self.temperature)?)
    }

    pub fn to_line(&self) -> String {
        format!(
            "# sites={} dt_ps={} K={} epsilon={} J={} lambda={} gamma={} T={}",
            self.n_sites,
            self.dt_ps,
            self.depth,
            join(&self.epsilon),
            join(&self.couplings),
            join(&self.lambda),
            join(&self.gamma),
            self.temperature
        )
    }

    pub fn parse(line: &str) -> Result<Self> {
        let body = line
            .strip_prefix('#')
            .ok_or_else(|| anyhow!("trajectory header must start with '#'"))?;
        let mut fields = std::collections::HashMap::new();
        for token in body.split_whitespace() {
            let (k, v) = token
                .split_once('=')
                .ok_or_else(|| anyhow!("malformed header field {token:?}"))?;
            fields.insert(k, v);
        }
        let get = |k: &str| fields.get(k).copied().ok_or_else(|| anyhow!("header lacks {k}"));
        let list = |k: &str| -> Result<Vec<f64>> {
            let v = get(k)?;
            if v.is_empty() {
                return Ok(Vec::new());
            }
            v.split(';')
                .map(|x| x.parse::<f64>().with_context(|| format!("bad {k} value {x:?}")))
                .collect()
        };
        let header = Self {
            n_sites: get("sites")?.parse()?,
            dt_ps: get("dt_ps")?.parse()?,
            depth: get("K")?.parse()?,
            epsilon: list("epsilon")?,
            couplings: list("J")?,
            lambda: list("lambda")?,
            gamma: list("gamma")?,
            temperature: get("T")?.parse()?,
        };
        let n = header.n_sites;
        ensure!(
            header.epsilon.len() == n
                && header.couplings.len() == n * n
                && header.lambda.len() == n
                && header.gamma.len() == n,
            "header lists do not match sites={n}"
        );
        Ok(header)
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("rho.bin")
}

/// Writes through a temporary file and renames, so a file that exists is
/// always complete.
pub fn write_trajectory(path: &Path, header: &TrajectoryHeader, traj: &Trajectory) -> Result<()> {
    ensure!(header.n_sites == traj.n_sites(), "header and trajectory disagree on site count");
    if let Some(rhos) = traj.density_matrices() {
        write_atomic(&sidecar_path(path), |w| {
            for m in rhos {
                for z in m.as_slice() {
                    w.write_all(&z.re.to_le_bytes())?;
                    w.write_all(&z.im.to_le_bytes())?;
                }
            }
            Ok(())
        })?;
    }
    write_atomic(path, |w| {
        writeln!(w, "{}", header.to_line())?;
        let mut csv = csv::Writer::from_writer(w);
        let mut record = vec!["t_ps".to_string()];
        record.extend((1..=traj.n_sites()).map(|j| format!("P{j}")));
        csv.write_record(&record)?;
        for (t, time) in traj.times().iter().enumerate() {
            record.clear();
            record.push(time.to_string());
            record.extend(traj.row(t).iter().map(f64::to_string));
            csv.write_record(&record)?;
        }
        csv.flush()?;
        Ok(())
    })
}

pub(crate) fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let file = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        let mut w = BufWriter::new(file);
        body(&mut w)?;
        w.flush()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Reads a trajectory and re-audits it: every row must sum to one and every
/// population lie in [0, 1], both within 1e-6.
pub fn read_trajectory(path: &Path) -> Result<(TrajectoryHeader, Trajectory)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (first, rest) = text.split_once('\n').unwrap_or((&text, ""));
    let header = TrajectoryHeader::parse(first).with_context(|| format!("in {}", path.display()))?;
    let n = header.n_sites;
    let mut reader = csv::Reader::from_reader(rest.as_bytes());
    let mut times = Vec::new();
    let mut populations = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        ensure!(record.len() == n + 1, "row {i} of {} has {} fields", path.display(), record.len());
        let mut values = record.iter().map(|x| x.parse::<f64>());
        times.push(values.next().unwrap()?);
        for v in values {
            populations.push(v?);
        }
    }
    let traj = Trajectory::from_rows(n, times, populations)?;
    let audit = traj.audit();
    if !audit.passed {
        bail!(
            "{} fails the population audit: max |sum - 1| = {:e}, populations in [{}, {}]",
            path.display(),
            audit.max_sum_deviation,
            audit.min_population,
            audit.max_population
        );
    }
    Ok((header, traj))
}

pub fn read_density_sidecar(path: &Path, n_sites: usize) -> Result<Vec<CMatrix>> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let per = n_sites * n_sites * 16;
    ensure!(per > 0 && bytes.len() % per == 0, "{} is not a whole number of matrices", path.display());
    bytes
        .chunks_exact(per)
        .map(|chunk| {
            let data = chunk
                .chunks_exact(16)
                .map(|c| {
                    let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                    let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                    C64::new(re, im)
                })
                .collect();
            Ok(CMatrix::from_row_major(n_sites, data)?)
        })
        .collect()
}
