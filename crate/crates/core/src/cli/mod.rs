//! `cogsec-sim` command-line front end.

pub mod config;
pub mod verify;

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::analytic;
use crate::error::{Error, Result};
use crate::model::{Scheme, SystemConfig};
use crate::montecarlo::{self, db_to_linear, GridPoint, Metric, SweepRow};

pub use config::{load_config, ConfigFile, Preset, PresetSpec};
pub use verify::{VerifyCheck, VerifyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    SweepSecrecy,
    SweepIntercept,
    Diversity,
    Verify,
    Preset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "cogsec-sim", version, about = "Secrecy rate and intercept probability sweeps for cognitive multiuser scheduling")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Scenario file (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// MER grid in dB as start:stop:step.
    #[arg(long = "mer-db", allow_hyphen_values = true)]
    pub mer_db: Option<String>,
    /// Comma-separated subset of proposed,traditional,an.
    #[arg(long, value_delimiter = ',')]
    pub schemes: Option<Vec<String>>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Print the resolved grid and exit without simulating.
    #[arg(long)]
    pub dry_run: bool,
}

/// Inclusive MER grid in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MerGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl MerGrid {
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(Error::Usage(format!("--mer-db expects start:stop:step, got '{text}'")));
        };
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("--mer-db: '{s}' is not a number")))
        };
        let grid = Self {
            start: num(start)?,
            stop: num(stop)?,
            step: num(step)?,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Usage("--mer-db step must be > 0".into()));
        }
        if self.start.is_nan() || self.stop.is_nan() || self.start > self.stop {
            return Err(Error::Usage("--mer-db start must not exceed stop".into()));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|k| self.start + k as f64 * self.step).collect()
    }
}

/// A fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    pub config_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub trials: u64,
    pub seed: u64,
    pub mer_grid: MerGrid,
    pub schemes: Vec<Scheme>,
    pub preset: Option<Preset>,
    pub dry_run: bool,
    /// Base configuration, resized to each `(M, N)` in `variants`.
    pub base: SystemConfig,
    pub variants: Vec<(usize, usize)>,
}

fn default_grid(command: Command) -> MerGrid {
    match command {
        Command::Diversity => MerGrid { start: 30.0, stop: 50.0, step: 5.0 },
        Command::Verify => MerGrid { start: 0.0, stop: 20.0, step: 10.0 },
        _ => MerGrid { start: 0.0, stop: 30.0, step: 5.0 },
    }
}

fn default_trials(command: Command) -> u64 {
    match command {
        Command::SweepSecrecy => Metric::ErgodicSecrecyRate.default_trials(),
        _ => Metric::InterceptProbability.default_trials(),
    }
}

impl RunSpec {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let preset = cli.preset.map(Preset::spec);
        let (base, variants) = match (&cli.config, &preset) {
            (Some(_), Some(_)) => return Err(Error::Usage("--config and --preset are mutually exclusive".into())),
            (Some(path), None) => {
                let c = load_config(path)?;
                let dims = (c.m_users, c.n_eves);
                (c, vec![dims])
            }
            (None, Some(p)) => (p.base_config(), p.variants.clone()),
            (None, None) => return Err(Error::Usage("one of --config or --preset is required".into())),
        };

        let mer_grid = match &cli.mer_db {
            Some(text) => MerGrid::parse(text)?,
            None => preset
                .as_ref()
                .filter(|_| !matches!(cli.command, Command::Diversity | Command::Verify))
                .map_or_else(|| default_grid(cli.command), |p| p.mer_grid),
        };

        let schemes = match &cli.schemes {
            Some(names) => {
                let mut list = Vec::new();
                for name in names {
                    let s: Scheme = name.parse()?;
                    if !list.contains(&s) {
                        list.push(s);
                    }
                }
                list
            }
            None => preset.as_ref().map_or_else(|| Scheme::ALL.to_vec(), |p| p.schemes.clone()),
        };
        if schemes.is_empty() {
            return Err(Error::Usage("--schemes must name at least one scheme".into()));
        }

        let trials = cli.trials.unwrap_or_else(|| default_trials(cli.command));
        if trials == 0 {
            return Err(Error::Usage("--trials must be ≥ 1".into()));
        }

        Ok(Self {
            command: cli.command,
            config_path: cli.config.clone(),
            output_path: cli.out.clone(),
            format: cli.format,
            trials,
            seed: cli.seed,
            mer_grid,
            schemes,
            preset: cli.preset,
            dry_run: cli.dry_run,
            base,
            variants,
        })
    }

    /// Every `(M, N, MER)` point, curve by curve.
    pub fn grid_points(&self) -> Vec<GridPoint> {
        let mers = self.mer_grid.points();
        self.variants
            .iter()
            .flat_map(|&(m, n)| {
                mers.iter().map(move |&db| GridPoint {
                    m_users: Some(m),
                    n_eves: Some(n),
                    lambda_me_db: db,
                })
            })
            .collect()
    }

    fn variant_configs(&self) -> Result<Vec<SystemConfig>> {
        self.variants.iter().map(|&(m, n)| self.base.with_dimensions(m, n)).collect()
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|source| Error::Io {
                path: p.to_path_buf(),
                source,
            })?;
            Ok(Box::new(io::BufWriter::new(file)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn io_error(path: Option<&Path>, source: io::Error) -> Error {
    Error::Io {
        path: path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf),
        source,
    }
}

/// Writes records as CSV with a header row, or as a JSON array.
pub fn write_records<T: Serialize>(records: &[T], format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in records {
                w.serialize(r)?;
            }
            w.flush().map_err(|e| io_error(None, e))?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, records)?;
            out.write_all(b"\n").map_err(|e| io_error(None, e))?;
        }
    }
    Ok(())
}

/// Column names when no record is available to derive them from.
const SWEEP_HEADER: &str = "scheme,m_users,n_eves,lambda_me_db,metric,value,std_error,trials,master_seed,status";

fn emit<T: Serialize>(spec: &RunSpec, records: &[T], empty_header: &str) -> Result<()> {
    let path = spec.output_path.as_deref();
    let mut out = open_output(path)?;
    if records.is_empty() && spec.format == Format::Csv {
        writeln!(out, "{empty_header}").map_err(|e| io_error(path, e))?;
    } else {
        write_records(records, spec.format, &mut out)?;
    }
    out.flush().map_err(|e| io_error(path, e))
}

fn print_grid(spec: &RunSpec) {
    let mers: Vec<String> = spec.mer_grid.points().iter().map(|db| format!("{db}")).collect();
    for &(m, n) in &spec.variants {
        println!("M={m} N={n} schemes={} mer_db=[{}]", scheme_list(&spec.schemes), mers.join(", "));
    }
    println!("trials={} seed={}", spec.trials, spec.seed);
}

fn scheme_list(schemes: &[Scheme]) -> String {
    schemes.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(",")
}

/// Runs a secrecy-rate or intercept-probability sweep and writes its rows.
pub fn cmd_sweep(spec: &RunSpec) -> Result<Vec<SweepRow>> {
    let metric = match spec.command {
        Command::SweepSecrecy => Metric::ErgodicSecrecyRate,
        Command::SweepIntercept => Metric::InterceptProbability,
        other => return Err(Error::Usage(format!("{other:?} is not a sweep command"))),
    };
    if spec.dry_run {
        print_grid(spec);
        return Ok(Vec::new());
    }
    let rows = montecarlo::run_sweep(&spec.base, &spec.schemes, &spec.grid_points(), &[metric], spec.trials, spec.seed)?;
    emit(spec, &rows, SWEEP_HEADER)?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiversityRow {
    pub m_users: usize,
    pub n_eves: usize,
    pub mer_start_db: f64,
    pub mer_stop_db: f64,
    pub points: usize,
    pub slope: f64,
    pub intercept: f64,
    pub diversity_order: f64,
    pub residual: f64,
}

/// Fits the closed-form intercept curve of every variant over the MER grid.
pub fn cmd_diversity(spec: &RunSpec) -> Result<Vec<DiversityRow>> {
    if spec.dry_run {
        print_grid(spec);
        return Ok(Vec::new());
    }
    let mers = spec.mer_grid.points();
    let mut rows = Vec::new();
    for config in spec.variant_configs()? {
        let points = mers
            .iter()
            .map(|&db| {
                let lambda = db_to_linear(db);
                Ok((lambda, analytic::intercept_proposed_closed(&config.with_lambda_me(lambda))?))
            })
            .collect::<Result<Vec<_>>>()?;
        let fit = analytic::diversity_fit(&points)?;
        rows.push(DiversityRow {
            m_users: config.m_users,
            n_eves: config.n_eves,
            mer_start_db: mers[0],
            mer_stop_db: *mers.last().expect("grid is nonempty"),
            points: mers.len(),
            slope: fit.slope,
            intercept: fit.intercept,
            diversity_order: fit.diversity_order(),
            residual: fit.residual,
        });
    }
    emit(spec, &rows, "m_users,n_eves,mer_start_db,mer_stop_db,points,slope,intercept,diversity_order,residual")?;
    Ok(rows)
}

/// Runs every applicable closed-form check at each variant and MER point.
pub fn cmd_verify(spec: &RunSpec) -> Result<VerifyReport> {
    if spec.dry_run {
        print_grid(spec);
        return Ok(VerifyReport::default());
    }
    let mut report = VerifyReport::default();
    let mut index = 0u64;
    for config in spec.variant_configs()? {
        for db in spec.mer_grid.points() {
            let point = config.with_lambda_me(db_to_linear(db));
            report
                .checks
                .extend(verify::verify_config(&point, spec.trials, montecarlo::derive_seed(spec.seed, index))?);
            index += 1;
        }
    }
    emit(
        spec,
        &report.checks,
        "name,kind,m_users,n_eves,lambda_me_db,analytic,reference,std_error,z,threshold,pass",
    )?;
    for c in &report.checks {
        eprintln!(
            "{} {} M={} N={} mer={}dB analytic={:.6e} reference={:.6e} z={:.3}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.m_users,
            c.n_eves,
            c.lambda_me_db,
            c.analytic,
            c.reference,
            c.z
        );
    }
    Ok(report)
}

/// Writes the scenario file of a preset.
pub fn cmd_preset(spec: &RunSpec) -> Result<String> {
    let preset = spec
        .preset
        .ok_or_else(|| Error::Usage("preset command requires --preset".into()))?;
    let p = preset.spec();
    let (m, n) = p.variants[0];
    let text = toml::to_string(&ConfigFile::from_uniform(m, n, &p.params))
        .map_err(|e| Error::Usage(format!("cannot render preset: {e}")))?;
    let path = spec.output_path.as_deref();
    let mut out = open_output(path)?;
    out.write_all(text.as_bytes()).map_err(|e| io_error(path, e))?;
    out.flush().map_err(|e| io_error(path, e))?;
    Ok(text)
}

/// Dispatches a resolved spec and returns the process exit status.
pub fn run(spec: &RunSpec) -> Result<i32> {
    match spec.command {
        Command::SweepSecrecy | Command::SweepIntercept => cmd_sweep(spec).map(|_| EXIT_OK),
        Command::Diversity => cmd_diversity(spec).map(|_| EXIT_OK),
        Command::Preset => cmd_preset(spec).map(|_| EXIT_OK),
        Command::Verify => {
            let report = cmd_verify(spec)?;
            if report.passed() {
                Ok(EXIT_OK)
            } else {
                for c in report.failures() {
                    eprintln!("failed: {} (M={} N={} mer={}dB z={:.3})", c.name, c.m_users, c.n_eves, c.lambda_me_db, c.z);
                }
                Ok(EXIT_VERIFY_FAILED)
            }
        }
    }
}

/// Worker count from `COGSEC_THREADS`; `None` means rayon's default.
pub fn thread_count(value: Option<&str>) -> Result<Option<usize>> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => match v.parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(Error::Usage(format!("COGSEC_THREADS must be a non-negative integer, got '{v}'"))),
        },
    }
}

/// Full entry point: parse arguments, size the worker pool, run.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = thread_count(std::env::var("COGSEC_THREADS").ok().as_deref()).and_then(|threads| {
        let spec = RunSpec::from_cli(&cli)?;
        match threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Usage(format!("cannot start {n} workers: {e}")))?
                .install(|| run(&spec)),
            None => run(&spec),
        }
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
