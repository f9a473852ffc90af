use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use heomcast::audit::{run_audit, write_audit, AuditConfig};
use heomcast::benchmark::{
    format_table_row, run_benchmark, write_report, write_samples, BenchmarkConfig, DatasetDir, ModelSpec, SPLIT_FILE,
};
use heomcast::fmo::{fmo_demo, write_fmo_outputs, write_template, FmoConfig, FmoOptions};
use heomcast::generate::{generate_dataset, GenerateConfig, MANIFEST_FILE};
use heomcast::manifest::{parse_mode, Manifest};
use heomcast::model_io::{load_model, save_model, SavedModel};
use heomcast::windows::{parse_split, split_name, trajectory_windows, write_split, WindowWriter};
use heomcast_core::dataset::{horizon_steps, input_points, split_dataset, Split, SplitFractions, SweepSpec};
use heomcast_core::forecast::{grid_search_arima, Criterion, GridSpec, SeasonalOrder};
use heomcast_core::heom::PropagationConfig;
use heomcast_core::hierarchy::MemoryBudget;
use heomcast_core::metrics::AuditThresholds;

#[derive(Parser)]
#[command(name = "heomcast", version, about = "Exciton population dynamics from the hierarchical equations of motion, and SARIMA forecasts of them")]
struct Cli {
    /// Seed for parameter sampling and dataset splits.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Directory for every file a command writes (and `benchmark`/`audit` read).
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample parameters and propagate one trajectory per point.
    Generate(GenerateArgs),
    /// Cut stored trajectories into input/target windows.
    Window(WindowArgs),
    /// Split trajectory ids 70/10/20 into train/val/test.
    Split,
    /// Grid-search an ARIMA model for one series and save it.
    Fit(FitArgs),
    /// Forecast with a saved model.
    Predict(PredictArgs),
    /// Score models on the test windows.
    Benchmark(BenchmarkArgs),
    /// Seven-site demonstration: propagate, fit on the opening stretch, forecast.
    Fmo(FmoArgs),
    /// Check trace and positivity of forecasts for whole systems.
    Audit(AuditArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 200)]
    n_samples: usize,
    /// `random` (uniform draws) or `grid` (equally spaced axes).
    #[arg(long, default_value = "random")]
    mode: String,
    #[arg(long, default_value_t = 2)]
    sites: usize,
    /// Hierarchy depth K.
    #[arg(long, default_value_t = 20)]
    depth: usize,
    #[arg(long, default_value_t = 0.0002)]
    dt_ps: f64,
    #[arg(long, default_value_t = 1.0)]
    t_total_ps: f64,
    /// Bath cut-off, cm⁻¹.
    #[arg(long, default_value_t = 53.0)]
    gamma: f64,
    /// Kelvin.
    #[arg(long, default_value_t = 300.0)]
    temperature: f64,
    /// Also keep full density matrices in binary sidecar files.
    #[arg(long)]
    store_full: bool,
    /// Initially excited site, from 1.
    #[arg(long, default_value_t = 1)]
    initial_site: usize,
}

#[derive(Args)]
struct WindowArgs {
    /// Input length in ps.
    #[arg(long, default_value_t = 0.2)]
    lin_ps: f64,
    /// Target length in ps.
    #[arg(long, default_value_t = 0.6)]
    lout_ps: f64,
    /// train, val, test, or all.
    #[arg(long, default_value = "all")]
    split: String,
    /// Keep every n-th window offset.
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// Defaults to `<out-dir>/windows_<split>.csv`.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct GridArgs {
    #[arg(long, default_value_t = 5)]
    p_max: usize,
    #[arg(long, default_value_t = 0)]
    d_min: usize,
    #[arg(long, default_value_t = 2)]
    d_max: usize,
    #[arg(long, default_value_t = 3)]
    q_max: usize,
    /// Seasonal period in points; 0 leaves out the seasonal part.
    #[arg(long, default_value_t = 0)]
    seasonal_period: usize,
    #[arg(long, default_value_t = 0)]
    seasonal_p: usize,
    #[arg(long, default_value_t = 0)]
    seasonal_d: usize,
    #[arg(long, default_value_t = 0)]
    seasonal_q: usize,
    /// Rank orders by forecast MSE on this many trailing points instead of AIC.
    #[arg(long)]
    holdout: Option<usize>,
}

impl GridArgs {
    fn spec(&self) -> Result<GridSpec> {
        let seasonal = if self.seasonal_period > 0 {
            Some(SeasonalOrder {
                p: self.seasonal_p,
                d: self.seasonal_d,
                q: self.seasonal_q,
                period: self.seasonal_period,
            })
        } else {
            ensure!(
                self.seasonal_p + self.seasonal_d + self.seasonal_q == 0,
                "seasonal orders need --seasonal-period"
            );
            None
        };
        Ok(GridSpec {
            p_max: self.p_max,
            d_min: self.d_min,
            d_max: self.d_max,
            q_max: self.q_max,
            seasonal,
            criterion: match self.holdout {
                Some(holdout) => Criterion::ValidationMse { holdout },
                None => Criterion::Aic,
            },
        })
    }
}

#[derive(Args)]
struct FitArgs {
    /// CSV with one series per column; `#` lines are skipped.
    #[arg(long)]
    input: PathBuf,
    /// Column name (or 1-based index); needed when there are several columns.
    #[arg(long)]
    column: Option<String>,
    /// Fit only the first N points.
    #[arg(long)]
    points: Option<usize>,
    #[command(flatten)]
    grid: GridArgs,
    /// Defaults to `<out-dir>/model.txt`.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    horizon: usize,
    /// Write `step,value` here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// naive or sarima; repeat for several.
    #[arg(long = "model", default_values_t = ["naive".to_string(), "sarima".to_string()])]
    models: Vec<String>,
    #[arg(long, default_value_t = 0.2)]
    lin_ps: f64,
    #[arg(long, default_value_t = 0.6)]
    lout_ps: f64,
    /// Forecast steps scored per window; repeat for several.
    #[arg(long = "horizon", default_values_t = [100usize, 3000])]
    horizons: Vec<usize>,
    /// Keep every n-th window offset.
    #[arg(long, default_value_t = 1)]
    stride: usize,
    #[arg(long, default_value = "test")]
    split: String,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct FmoArgs {
    /// Hamiltonian and bath file (see --template).
    #[arg(long)]
    config: PathBuf,
    /// Write a template to --config and exit.
    #[arg(long)]
    template: bool,
    #[arg(long, default_value_t = heomcast::fmo::DEFAULT_DEPTH)]
    depth: usize,
    /// Shallower depth for the convergence note; 0 skips the check.
    #[arg(long, default_value_t = heomcast::fmo::DEFAULT_CHECK_DEPTH)]
    check_depth: usize,
    #[arg(long, default_value_t = 0.2)]
    lin_ps: f64,
    /// Forecast steps; defaults to the rest of the trajectory.
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long, default_value_t = 0.0002)]
    dt_ps: f64,
    #[arg(long, default_value_t = 1.0)]
    t_total_ps: f64,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long, default_value = "sarima")]
    model: String,
    #[arg(long, default_value_t = 0.2)]
    lin_ps: f64,
    #[arg(long, default_value_t = 3000)]
    horizon: usize,
    #[arg(long, default_value_t = 250)]
    stride: usize,
    /// Number of (trajectory, offset) systems to audit.
    #[arg(long, default_value_t = 100)]
    systems: usize,
    #[arg(long, default_value = "test")]
    split: String,
    #[command(flatten)]
    grid: GridArgs,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    ensure!(workers >= 1, "--workers must be >= 1");
    match &cli.command {
        Command::Generate(a) => generate(&cli, a, workers),
        Command::Window(a) => window(&cli, a),
        Command::Split => split(&cli),
        Command::Fit(a) => fit(&cli, a),
        Command::Predict(a) => predict(a),
        Command::Benchmark(a) => benchmark(&cli, a, workers),
        Command::Fmo(a) => fmo(&cli, a, workers),
        Command::Audit(a) => audit(&cli, a, workers),
    }
}

fn generate(cli: &Cli, a: &GenerateArgs, workers: usize) -> Result<()> {
    ensure!(a.initial_site >= 1 && a.initial_site <= a.sites, "--initial-site must be in 1..={}", a.sites);
    let mut sweep = SweepSpec::standard(a.sites, a.n_samples, parse_mode(&a.mode)?, cli.seed);
    sweep.gamma = a.gamma;
    sweep.temperature = a.temperature;
    let cfg = GenerateConfig {
        sweep,
        propagation: PropagationConfig {
            t_total: a.t_total_ps,
            dt: a.dt_ps,
            depth: a.depth,
            store_full: a.store_full,
            budget: MemoryBudget::DEFAULT,
        },
        out_dir: cli.out_dir.clone(),
        workers,
        initial_site: a.initial_site - 1,
    };
    let r = generate_dataset(&cfg)?;
    let m = &r.manifest;
    if m.rows.len() != m.info.requested {
        println!("grid mode realised {} of {} requested points", m.rows.len(), m.info.requested);
    }
    println!(
        "{} points: {} computed, {} already on disk, {} failed, {} held by another process",
        m.rows.len(),
        r.computed,
        r.reused,
        r.failed.len(),
        r.pending
    );
    for (id, reason) in &r.failed {
        println!("  point {id}: {reason}");
    }
    println!("manifest: {}", cli.out_dir.join(MANIFEST_FILE).display());
    Ok(())
}

fn window(cli: &Cli, a: &WindowArgs) -> Result<()> {
    let manifest = Manifest::read(&cli.out_dir.join(MANIFEST_FILE))?;
    let dt = manifest.info.dt_ps;
    let (lin, lout) = (input_points(a.lin_ps, dt), horizon_steps(a.lout_ps, dt));
    let (ids, label) = if a.split == "all" {
        (manifest.ok_ids(), "all")
    } else {
        let split = parse_split(&a.split)?;
        let ds = DatasetDir::open(&cli.out_dir)?;
        (ds.ids(split).to_vec(), split_name(split))
    };
    let path = a
        .output
        .clone()
        .unwrap_or_else(|| cli.out_dir.join(format!("windows_{label}.csv")));
    let file = io::BufWriter::new(fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    let mut writer = WindowWriter::new(file, lin, lout)?;
    let mut count = 0;
    for id in ids {
        let row = manifest.row(id).context("id missing from manifest")?;
        let (_, traj) = heomcast::trajectory::read_trajectory(&cli.out_dir.join(&row.file))?;
        for w in trajectory_windows(&traj, id, lin, lout, a.stride)? {
            writer.write(&w)?;
            count += 1;
        }
    }
    writer.finish()?;
    println!("{count} windows ({lin} input + {lout} target points) -> {}", path.display());
    Ok(())
}

fn split(cli: &Cli) -> Result<()> {
    let manifest = Manifest::read(&cli.out_dir.join(MANIFEST_FILE))?;
    let ids = manifest.ok_ids();
    ensure!(!ids.is_empty(), "no completed trajectories to split");
    let m = split_dataset(&ids, SplitFractions::STANDARD, cli.seed)?;
    let path = cli.out_dir.join(SPLIT_FILE);
    write_split(&path, &m)?;
    println!(
        "train {} / val {} / test {} -> {}",
        m.train_ids.len(),
        m.val_ids.len(),
        m.test_ids.len(),
        path.display()
    );
    Ok(())
}

/// Reads one column of numbers, skipping `#` lines and an optional header.
fn read_series(path: &Path, column: Option<&str>) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut rows = reader.records();
    let Some(first) = rows.next().transpose()? else {
        bail!("{} is empty", path.display());
    };
    let is_header = first.iter().any(|f| f.parse::<f64>().is_err());
    let width = first.len();
    let col = match column {
        Some(c) => match c.parse::<usize>() {
            Ok(i) if i >= 1 && i <= width => i - 1,
            _ if is_header => first
                .iter()
                .position(|h| h == c)
                .with_context(|| format!("no column named {c:?}"))?,
            _ => bail!("column {c:?} not found"),
        },
        None if width == 1 => 0,
        None => bail!("{} has {width} columns; choose one with --column", path.display()),
    };
    let mut values = Vec::new();
    if !is_header {
        values.push(first[col].parse()?);
    }
    for rec in rows {
        let rec = rec?;
        let v = rec.get(col).context("short row")?;
        values.push(v.parse().with_context(|| format!("bad number {v:?}"))?);
    }
    Ok(values)
}

fn fit(cli: &Cli, a: &FitArgs) -> Result<()> {
    let mut series = read_series(&a.input, a.column.as_deref())?;
    if let Some(n) = a.points {
        ensure!(n <= series.len(), "--points {n} exceeds the {} available", series.len());
        series.truncate(n);
    }
    let result = grid_search_arima(&series, &a.grid.spec()?)?;
    let accepted = result.accepted().count();
    let model = match result.best {
        Some(m) => {
            println!(
                "selected {} AIC {:.3} from {} stationary candidates",
                heomcast::benchmark::order_label(Some(m.order)),
                m.aic(),
                accepted
            );
            SavedModel::Arima(m)
        }
        None => {
            println!("no stationary candidate; saving the last-value fallback");
            SavedModel::Naive {
                last: *series.last().context("empty series")?,
            }
        }
    };
    let path = a.output.clone().unwrap_or_else(|| cli.out_dir.join("model.txt"));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    save_model(&path, &model)?;
    println!("model -> {}", path.display());
    Ok(())
}

fn predict(a: &PredictArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let f = model.forecast(a.horizon)?;
    let out: Box<dyn Write> = match &a.output {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record(["step", "value"])?;
    for (k, v) in f.iter().enumerate() {
        csv.write_record([(k + 1).to_string(), v.to_string()])?;
    }
    csv.flush()?;
    Ok(())
}

fn model_spec(name: &str, grid: &GridArgs) -> Result<ModelSpec> {
    Ok(match name {
        "naive" => ModelSpec::Naive,
        "sarima" => ModelSpec::Sarima(grid.spec()?),
        other => bail!("unknown model {other:?} (naive or sarima)"),
    })
}

fn benchmark(cli: &Cli, a: &BenchmarkArgs, workers: usize) -> Result<()> {
    let ds = DatasetDir::open(&cli.out_dir)?;
    let dt = ds.manifest.info.dt_ps;
    let split: Split = parse_split(&a.split)?;
    let mut reports = Vec::new();
    for name in &a.models {
        let model = model_spec(name, &a.grid)?;
        for &horizon in &a.horizons {
            let cfg = BenchmarkConfig {
                input_len: input_points(a.lin_ps, dt),
                output_len: horizon_steps(a.lout_ps, dt).max(horizon),
                horizon,
                stride: a.stride,
                split,
                workers,
            };
            let out = run_benchmark(&ds, &model, &cfg)?;
            println!("{}", format_table_row(&out.report));
            if out.failures > 0 {
                println!("  {} windows failed ({:.2}%)", out.failures, 100.0 * out.failure_rate);
            }
            write_samples(&cli.out_dir.join(format!("benchmark_{name}_h{horizon}_samples.csv")), &out.samples)?;
            reports.push(out.report);
        }
    }
    let path = cli.out_dir.join("benchmark.csv");
    write_report(&path, &reports)?;
    println!("report -> {}", path.display());
    Ok(())
}

fn fmo(cli: &Cli, a: &FmoArgs, workers: usize) -> Result<()> {
    if a.template {
        write_template(&a.config)?;
        println!("template -> {}", a.config.display());
        return Ok(());
    }
    let cfg = FmoConfig::load(&a.config)?;
    let opts = FmoOptions {
        depth: a.depth,
        check_depth: (a.check_depth > 0).then_some(a.check_depth),
        t_total: a.t_total_ps,
        dt: a.dt_ps,
        input_len: input_points(a.lin_ps, a.dt_ps),
        horizon: a.horizon,
        grid: a.grid.spec()?,
        workers,
        budget: MemoryBudget::DEFAULT,
    };
    let out = fmo_demo(&cfg, &opts)?;
    if let Some(note) = &out.convergence {
        println!("{}", note.message());
    }
    println!("max |sum of populations - 1| = {:.3e}", out.max_sum_deviation);
    for f in &out.forecasts {
        println!("site {}: {}", f.site, heomcast::benchmark::order_label(f.order));
    }
    let paths = write_fmo_outputs(&cli.out_dir, &out)?;
    println!(
        "trajectory -> {}\nforecast -> {}\nplot data -> {}",
        paths.trajectory.display(),
        paths.forecast.display(),
        paths.plot.display()
    );
    Ok(())
}

fn audit(cli: &Cli, a: &AuditArgs, workers: usize) -> Result<()> {
    let ds = DatasetDir::open(&cli.out_dir)?;
    let cfg = AuditConfig {
        input_len: input_points(a.lin_ps, ds.manifest.info.dt_ps),
        horizon: a.horizon,
        stride: a.stride,
        max_systems: a.systems,
        split: parse_split(&a.split)?,
        workers,
        thresholds: AuditThresholds::default(),
    };
    let out = run_audit(&ds, &model_spec(&a.model, &a.grid)?, &cfg)?;
    let q = &out.audit;
    println!(
        "{} systems x {} steps: {:.2}% of steps pass (|sum - 1| <= {}, min >= {})",
        out.systems.len(),
        out.horizon,
        100.0 * q.pass_fraction,
        cfg.thresholds.max_sum_deviation,
        cfg.thresholds.min_population
    );
    println!(
        "|sum - 1|: median {:.3e}, 95% {:.3e}, max {:.3e}; min population: min {:.3e}, median {:.3e}",
        q.sum_quantiles.median, q.sum_quantiles.q95, q.sum_quantiles.max, q.min_quantiles.min, q.min_quantiles.median
    );
    let path = cli.out_dir.join("audit.csv");
    write_audit(&path, &out)?;
    println!("{} -> {}", if q.passed { "PASS" } else { "FAIL" }, path.display());
    Ok(())
}
