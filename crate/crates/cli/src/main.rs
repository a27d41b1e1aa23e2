use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use fermat_bias::export::{
    ap_file_name, ap_records, bias_samples, read_series_csv, series_file_name, timestamp_header, write_ap_csv,
    write_level_series,
};
use fermat_bias::lfunc::{loglog_fit, predicted_slope};
use fermat_bias::verify::{verify_level, VerifyOptions};
use fermat_bias::{Error, JacobiCache, LevelData};

mod config;

use config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "bias",
    version,
    about = "Chebyshev-bias experiments for Fermat curves and their quotients"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    options: Options,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute bias sums, decompositions, Euler products and second moments.
    Compute,
    /// Run every invariant family over p <= x-max.
    Verify,
    /// Fit the computed bias sums against log log x.
    Fit,
    /// Write the a_p table.
    Export,
}

#[derive(Debug, Args)]
pub struct Options {
    /// TOML file with defaults for any of these options.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Odd prime level l.
    #[arg(long, global = true)]
    ell: Option<u64>,
    /// fermat, quotient, quotientK or all.
    #[arg(long, global = true)]
    curve: Option<String>,
    /// Quotient index, with --curve quotient.
    #[arg(long, global = true)]
    k: Option<u32>,
    /// Largest cutoff x; defaults to 100000.
    #[arg(long, global = true)]
    x_max: Option<u64>,
    /// geometric[:PER_DECADE] or a comma-separated list of cutoffs.
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Assumed central order over F: VALUE for every curve, or CURVE=VALUE.
    #[arg(long, global = true)]
    m: Vec<String>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSONL Jacobi-sum cache.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Largest p for brute-force point counts.
    #[arg(long, global = true)]
    oracle_cap: Option<u64>,
    /// Largest field size for an index table.
    #[arg(long, global = true)]
    table_cap: Option<u64>,
    /// Output directory for CSV files; defaults to out.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Start of the fit window.
    #[arg(long, global = true)]
    fit_from: Option<f64>,
    /// Omit the timestamp line at the top of CSV files.
    #[arg(long, global = true)]
    no_header_timestamp: bool,
}

enum Failure {
    Usage(String),
    Invariants,
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn report(&self) -> ExitCode {
        match self {
            Failure::Usage(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
            Failure::Invariants => ExitCode::from(2),
            Failure::Lib(e @ (Error::TableCap { .. } | Error::OracleCap { .. })) => {
                eprintln!("error: {e}");
                eprintln!("raise --table-cap / --oracle-cap or lower --x-max");
                ExitCode::from(3)
            }
            Failure::Lib(e @ Error::MissingSeries(_)) => {
                eprintln!("error: {e}; run `bias compute` with the same options first");
                ExitCode::from(1)
            }
            Failure::Lib(e @ (Error::Inconsistent(_) | Error::VanishingFactor { .. })) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
            Failure::Lib(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        }
    }
}

fn open_cache(cfg: &RunConfig) -> Result<JacobiCache, Failure> {
    Ok(match &cfg.cache {
        Some(p) => JacobiCache::open(p)?,
        None => JacobiCache::in_memory(),
    })
}

fn level_data(cfg: &RunConfig, cache: &mut JacobiCache) -> Result<LevelData, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(pool.install(|| LevelData::compute(cfg.ell, cfg.x_max, cfg.table_cap, Some(cache)))?)
}

fn header(cfg: &RunConfig) -> Option<String> {
    cfg.header_timestamp.then(timestamp_header)
}

fn compute(cfg: &RunConfig) -> Result<(), Failure> {
    let start = Instant::now();
    let mut cache = open_cache(cfg)?;
    let level = level_data(cfg, &mut cache)?;
    let curves: Vec<_> = cfg.curves.iter().map(|&c| (c, cfg.m_for(c))).collect();
    let paths = write_level_series(&cfg.out, &level, &curves, &cfg.grid_points(), header(cfg).as_deref())?;
    for p in paths {
        println!("wrote {}", p.display());
    }
    println!(
        "tables built: {}, cache hits: {}, elapsed: {:.2}s",
        level.stats.tables_built,
        level.stats.cache_hits,
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn verify(cfg: &RunConfig) -> Result<(), Failure> {
    let mut cache = open_cache(cfg)?;
    let level = level_data(cfg, &mut cache)?;
    let opts = VerifyOptions {
        oracle_cap: cfg.oracle_cap,
        table_cap: cfg.table_cap,
        ..Default::default()
    };
    let report = verify_level(&level, &opts)?;
    print!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Invariants)
    }
}

fn fit(cfg: &RunConfig) -> Result<(), Failure> {
    println!(
        "{:<12} {:>3} {:>10} {:>10} {:>10} {:>10}",
        "curve", "m", "predicted", "fit_A", "|A-pred|", "residual"
    );
    for &c in &cfg.curves {
        let rows = read_series_csv(cfg.out.join(series_file_name(cfg.ell, c)))?;
        let samples = bias_samples(&rows);
        let hi = samples.last().map_or(0.0, |s| s.x);
        let m = cfg.m_for(c);
        let predicted = predicted_slope(c, m);
        let fit = loglog_fit(&samples, cfg.fit_from, hi)?;
        println!(
            "{:<12} {:>3} {:>10.4} {:>10.4} {:>10.4} {:>10.2e}",
            c.name(),
            m,
            predicted,
            fit.slope,
            (fit.slope - predicted).abs(),
            fit.residual_rms
        );
    }
    Ok(())
}

fn export(cfg: &RunConfig) -> Result<(), Failure> {
    let mut cache = open_cache(cfg)?;
    let level = level_data(cfg, &mut cache)?;
    let mut records = Vec::new();
    for &c in &cfg.curves {
        records.extend(ap_records(&level, c)?);
    }
    std::fs::create_dir_all(&cfg.out).map_err(Error::from)?;
    let path = cfg.out.join(ap_file_name(cfg.ell));
    write_ap_csv(&path, &records, header(cfg).as_deref())?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = RunConfig::resolve(&cli.options).map_err(Failure::Usage)?;
    match cli.command {
        Command::Compute => compute(&cfg),
        Command::Verify => verify(&cfg),
        Command::Fit => fit(&cfg),
        Command::Export => export(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
