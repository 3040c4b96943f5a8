//! `ini-sim` command line: runs scenarios and presets, exports CSV.

pub mod config;
pub mod export;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ini_sim_core::presets::{list_presets, PresetMember};
use ini_sim_core::{leakage_matrix, run_monte_carlo, Error, MetricsReport, NumerologyId};
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "ini-sim", version, about = "Inter-numerology interference simulator")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the Monte Carlo simulation and write per_bin.csv, per_user.csv
    /// and scenario.json.
    Run(RunArgs),
    /// Write the closed-form leakage matrix into one numerology as leakage.csv.
    Oracle(OracleArgs),
    /// List the built-in presets.
    ListPresets,
    /// Check a scenario and report every violated invariant.
    Validate(Source),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// JSON scenario file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in preset name.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Debug, Args)]
struct Common {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; results do not depend on it.
    #[arg(long, env = "INI_SIM_THREADS")]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Override the scenario's trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the scenario's master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    source: Source,
    /// Victim numerology.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    victim: u8,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Sim(#[from] Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("--threads must be at least 1")]
    ZeroThreads,
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    /// 1 for bad input, 2 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Sim(_) | CliError::ZeroThreads => 1,
            CliError::Io { .. } | CliError::Csv { .. } | CliError::Pool(_) => 2,
        }
    }
}

fn load(source: &Source) -> Result<Vec<PresetMember>, Error> {
    match (&source.config, &source.preset) {
        (Some(path), _) => config::load_family(path),
        (None, Some(name)) => config::preset_family(name),
        (None, None) => unreachable!("clap requires a source"),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn write_csv(dir: &Path, name: String, write: impl FnOnce(BufWriter<File>) -> csv::Result<()>) -> Result<(), CliError> {
    let path = dir.join(name);
    let file = create(&path)?;
    write(file).map_err(|source| CliError::Csv { path, source })
}

fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    match threads {
        None => f(),
        Some(0) => Err(CliError::ZeroThreads),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(f),
    }
}

fn make_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_owned(), source })
}

fn summary(label: &str, report: &MetricsReport) {
    println!("{label}: {} trials, seed {}", report.trials, report.seed);
    for u in &report.users {
        let flag = if u.sir.infinite { " (interference-free)" } else { "" };
        println!("  {} user {:<2} SIR {:>8.2} dB{flag}", u.numerology, u.user_index, u.sir.db);
    }
    for id in NumerologyId::BOTH {
        if let Some(mean) = report.mean_user_sir_db(id) {
            println!("  {id} mean   SIR {mean:>8.2} dB");
        }
    }
}

fn label(source: &Source, suffix: &str) -> String {
    let base = match (&source.config, &source.preset) {
        (Some(p), _) => p.display().to_string(),
        (_, Some(n)) => n.clone(),
        _ => String::new(),
    };
    format!("{base}{suffix}")
}

fn run_cmd(args: &RunArgs) -> Result<(), CliError> {
    let mut family = load(&args.source)?;
    for m in &mut family {
        m.scenario.trials = args.trials.unwrap_or(m.scenario.trials);
        m.scenario.seed = args.seed.unwrap_or(m.scenario.seed);
    }
    let out = &args.common.out;
    make_dir(out)?;
    for m in &family {
        let report = with_threads(args.common.threads, || Ok(run_monte_carlo(&m.scenario)?))?;
        let s = &m.suffix;
        write_csv(out, format!("per_bin{s}.csv"), |w| export::write_per_bin(w, &report))?;
        write_csv(out, format!("per_user{s}.csv"), |w| export::write_per_user(w, &report))?;
        let path = out.join(format!("scenario{s}.json"));
        std::fs::write(&path, config::scenario_to_json(&m.scenario)).map_err(|source| CliError::Io { path, source })?;
        summary(&label(&args.source, s), &report);
    }
    Ok(())
}

fn oracle_cmd(args: &OracleArgs) -> Result<(), CliError> {
    let family = load(&args.source)?;
    let victim = NumerologyId::from_number(args.victim).expect("clap bounds the victim");
    let out = &args.common.out;
    make_dir(out)?;
    for m in &family {
        let matrix = with_threads(args.common.threads, || Ok(leakage_matrix(&m.scenario, victim)?))?;
        write_csv(out, format!("leakage{}.csv", m.suffix), |w| export::write_leakage(w, &matrix))?;
        let worst = matrix.expected_power().into_iter().fold(0.0, f64::max);
        println!(
            "{}: {} victim elements x {} interferer elements, peak expected interference {worst:.3e}",
            label(&args.source, &m.suffix),
            matrix.rows.len(),
            matrix.cols.len()
        );
    }
    Ok(())
}

fn validate_cmd(source: &Source) -> Result<(), CliError> {
    for m in load(source)? {
        println!("{}: valid", label(source, &m.suffix));
    }
    Ok(())
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(args) => run_cmd(args),
        Command::Oracle(args) => oracle_cmd(args),
        Command::ListPresets => {
            for p in list_presets() {
                println!("{:<10} {}", p.name, p.description);
            }
            Ok(())
        }
        Command::Validate(source) => validate_cmd(source),
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(CliError::Sim(Error::Validation(violations))) => {
            eprintln!("error: scenario is invalid");
            for v in &violations {
                eprintln!("  {v}");
            }
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
