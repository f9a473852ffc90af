//! Split files (`id,split`) and windowed-sample CSVs
//! (`source_id,site,offset,input_0..,target_0..`).

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, ensure, Context, Result};
use heomcast_core::dataset::{windows, Split, SplitFractions, SplitManifest, WindowedSample};
use heomcast_core::heom::Trajectory;

use crate::trajectory::write_atomic;

pub fn split_name(split: Split) -> &'static str {
    match split {
        Split::Train => "train",
        Split::Validation => "val",
        Split::Test => "test",
    }
}

pub fn parse_split(s: &str) -> Result<Split> {
    Ok(match s {
        "train" => Split::Train,
        "val" | "validation" => Split::Validation,
        "test" => Split::Test,
        other => bail!("unknown split {other:?} (train, val or test)"),
    })
}

pub fn ids_of(manifest: &SplitManifest, split: Split) -> &[u64] {
    match split {
        Split::Train => &manifest.train_ids,
        Split::Validation => &manifest.val_ids,
        Split::Test => &manifest.test_ids,
    }
}

pub fn write_split(path: &Path, m: &SplitManifest) -> Result<()> {
    write_atomic(path, |w| {
        let f = m.fractions;
        writeln!(w, "# seed={} fractions={},{},{}", m.seed, f.train, f.validation, f.test)?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["id", "split"])?;
        for split in [Split::Train, Split::Validation, Split::Test] {
            for id in ids_of(m, split) {
                csv.write_record([id.to_string().as_str(), split_name(split)])?;
            }
        }
        csv.flush()?;
        Ok(())
    })
}

pub fn read_split(path: &Path) -> Result<SplitManifest> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (first, rest) = text.split_once('\n').unwrap_or((&text, ""));
    let kv: HashMap<&str, &str> = first
        .strip_prefix('#')
        .ok_or_else(|| anyhow!("{} lacks the split header line", path.display()))?
        .split_whitespace()
        .filter_map(|t| t.split_once('='))
        .collect();
    let seed = kv.get("seed").ok_or_else(|| anyhow!("split header lacks seed"))?.parse()?;
    let fr: Vec<f64> = kv
        .get("fractions")
        .ok_or_else(|| anyhow!("split header lacks fractions"))?
        .split(',')
        .map(str::parse)
        .collect::<Result<_, _>>()?;
    ensure!(fr.len() == 3, "fractions must have three entries");
    let mut m = SplitManifest {
        train_ids: Vec::new(),
        val_ids: Vec::new(),
        test_ids: Vec::new(),
        fractions: SplitFractions {
            train: fr[0],
            validation: fr[1],
            test: fr[2],
        },
        seed,
    };
    let mut reader = csv::Reader::from_reader(rest.as_bytes());
    for record in reader.records() {
        let rec = record?;
        ensure!(rec.len() == 2, "split row has {} fields", rec.len());
        let id: u64 = rec[0].parse()?;
        match parse_split(&rec[1])? {
            Split::Train => m.train_ids.push(id),
            Split::Validation => m.val_ids.push(id),
            Split::Test => m.test_ids.push(id),
        }
    }
    Ok(m)
}

/// Windows of every site series of `traj`, keeping every `stride`-th offset.
pub fn trajectory_windows(
    traj: &Trajectory,
    source_id: u64,
    input_len: usize,
    output_len: usize,
    stride: usize,
) -> Result<Vec<WindowedSample>> {
    ensure!(stride >= 1, "stride must be >= 1");
    let mut out = Vec::new();
    for site in 0..traj.n_sites() {
        let series = traj.site_series(site);
        let ws = windows(&series, input_len, output_len)?;
        out.extend(ws.step_by(stride).map(|w| WindowedSample {
            source_id,
            site,
            offset: w.offset,
            input: w.input.to_vec(),
            target: w.target.to_vec(),
        }));
    }
    Ok(out)
}

pub struct WindowWriter<W: Write> {
    csv: csv::Writer<W>,
    input_len: usize,
    output_len: usize,
    record: Vec<String>,
}

impl<W: Write> WindowWriter<W> {
    pub fn new(w: W, input_len: usize, output_len: usize) -> Result<Self> {
        let mut csv = csv::Writer::from_writer(w);
        let mut head = vec!["source_id".to_string(), "site".into(), "offset".into()];
        head.extend((0..input_len).map(|i| format!("input_{i}")));
        head.extend((0..output_len).map(|i| format!("target_{i}")));
        csv.write_record(&head)?;
        Ok(Self {
            csv,
            input_len,
            output_len,
            record: Vec::with_capacity(head.len()),
        })
    }

    pub fn write(&mut self, s: &WindowedSample) -> Result<()> {
        ensure!(
            s.input.len() == self.input_len && s.target.len() == self.output_len,
            "window lengths {}+{} do not match the file's {}+{}",
            s.input.len(),
            s.target.len(),
            self.input_len,
            self.output_len
        );
        self.record.clear();
        self.record
            .extend([s.source_id.to_string(), (s.site + 1).to_string(), s.offset.to_string()]);
        self.record
            .extend(s.input.iter().chain(&s.target).map(f64::to_string));
        self.csv.write_record(&self.record)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.csv.flush()?;
        Ok(())
    }
}

/// Reads a windows CSV; the input length is recovered from the header.
/// Sites are stored 1-based.
pub fn read_windows(path: &Path) -> Result<Vec<WindowedSample>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let head = reader.headers()?.clone();
    let input_len = head.iter().filter(|h| h.starts_with("input_")).count();
    let output_len = head.iter().filter(|h| h.starts_with("target_")).count();
    ensure!(head.len() == 3 + input_len + output_len, "unexpected columns in {}", path.display());
    let mut out = Vec::new();
    for record in reader.records() {
        let rec = record?;
        let values: Vec<f64> = rec.iter().skip(3).map(str::parse).collect::<Result<_, _>>()?;
        let site: usize = rec[1].parse()?;
        ensure!(site >= 1, "sites are numbered from 1");
        out.push(WindowedSample {
            source_id: rec[0].parse()?,
            site: site - 1,
            offset: rec[2].parse()?,
            input: values[..input_len].to_vec(),
            target: values[input_len..].to_vec(),
        });
    }
    Ok(out)
}
