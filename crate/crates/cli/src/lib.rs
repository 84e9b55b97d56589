//! Command-line front end: `run`, `tables`, `figures` and `selftest`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use semisplit::harness::{
    create_dir, emit_csv, emit_plotdata, figure_configs, run_config, selftest, table_configs, write_file, ConfigFile,
    ExperimentResult,
};
use semisplit::Error;

/// Environment variable naming the output directory when `--out` is absent.
pub const OUT_ENV: &str = "SEMISPLIT_OUT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "semisplit", version, about = "Splitting and successive-approximation experiments")]
struct Cli {
    /// Output directory (overrides SEMISPLIT_OUT and the config's out_dir).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Number of worker threads for sweep cells.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Tolerance of the exponential-action backend.
    #[arg(long, global = true, value_name = "TOL")]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute the experiments of a TOML configuration file.
    Run {
        #[arg(value_name = "CONFIG")]
        config: PathBuf,
    },
    /// Reproduce the Bernoulli error and rate tables.
    Tables,
    /// Write the data behind the solution and convergence figures.
    Figures,
    /// Run the desk-scale property suites.
    Selftest {
        #[arg(long, default_value_t = 20240917)]
        seed: u64,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_CONFIG },
            message: e.to_string(),
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Progress goes to `stdout`, diagnostics to `stderr`.
pub fn cli_main<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn usage_error(message: String) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message,
    }
}

fn out_dir(cli: &Cli, from_config: Option<&Path>) -> PathBuf {
    if let Some(p) = &cli.out {
        return p.clone();
    }
    if let Some(p) = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    from_config.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("out"))
}

fn workers(cli: &Cli, from_config: Option<usize>) -> Result<usize, Failure> {
    let n = cli
        .workers
        .or(from_config)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if n == 0 {
        return Err(usage_error("--workers must be at least 1".into()));
    }
    Ok(n)
}

fn apply_tolerance(cli: &Cli, doc: &mut ConfigFile) -> Result<(), Failure> {
    if let Some(tol) = cli.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(usage_error(format!("--tol must be positive, got {tol}")));
        }
        for e in &mut doc.experiments {
            e.tolerance = Some(tol);
        }
    }
    Ok(())
}

/// Runs `doc`, writes `<stem>.csv` and the plot files under `<stem>/`.
fn run_document(
    cli: &Cli,
    stem: &str,
    mut doc: ConfigFile,
    dir: &Path,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<ExperimentResult, Failure> {
    apply_tolerance(cli, &mut doc)?;
    let n = workers(cli, doc.workers)?;
    let result = run_config(&doc, n)?;
    create_dir(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    write_file(&csv_path, &emit_csv(&result.rows)?)?;
    let _ = writeln!(stdout, "wrote {} ({} rows)", csv_path.display(), result.rows.len());
    if !result.plots.is_empty() {
        let plot_dir = dir.join(stem);
        let files = emit_plotdata(&result.plots, &plot_dir)?;
        let _ = writeln!(stdout, "wrote {} plot-data files to {}", files.len(), plot_dir.display());
    }
    for f in &result.failures {
        let _ = writeln!(stderr, "failed cell [{}] {}: {}", f.experiment, f.cell, f.message);
    }
    Ok(result)
}

fn check_failures(results: &[ExperimentResult]) -> Result<(), Failure> {
    let failures: Vec<_> = results.iter().flat_map(|r| &r.failures).collect();
    if failures.is_empty() {
        return Ok(());
    }
    let numerical = failures.iter().all(|f| f.numerical);
    Err(Failure {
        code: if numerical { EXIT_NUMERICAL } else { EXIT_CONFIG },
        message: format!("{} sweep cell(s) failed", failures.len()),
    })
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    match &cli.command {
        Command::Run { config } => {
            let doc = ConfigFile::load(config)?;
            let dir = out_dir(cli, doc.out_dir.as_deref());
            let stem = config
                .file_stem()
                .and_then(|s| s.to_str())
                .filter(|s| !s.is_empty())
                .unwrap_or("results")
                .to_string();
            let result = run_document(cli, &stem, doc, &dir, stdout, stderr)?;
            check_failures(&[result])
        }
        Command::Tables => {
            let dir = out_dir(cli, None);
            let mut results = Vec::new();
            for (stem, doc) in table_configs() {
                results.push(run_document(cli, &stem, doc, &dir, stdout, stderr)?);
            }
            check_failures(&results)
        }
        Command::Figures => {
            let dir = out_dir(cli, None);
            let mut results = Vec::new();
            for (stem, doc) in figure_configs() {
                results.push(run_document(cli, &stem, doc, &dir, stdout, stderr)?);
            }
            check_failures(&results)
        }
        Command::Selftest { seed } => {
            let report = selftest(*seed);
            for c in &report.checks {
                let verdict = if c.passed { "PASS" } else { "FAIL" };
                let _ = writeln!(stdout, "{verdict} {:<22} {:>8.2}s  {}", c.name, c.seconds, c.detail);
            }
            if report.passed() {
                Ok(())
            } else {
                Err(Failure {
                    code: EXIT_NUMERICAL,
                    message: "self-test failed".into(),
                })
            }
        }
    }
}
