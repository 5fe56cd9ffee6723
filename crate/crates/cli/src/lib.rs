//! Command-line front end for the `nucleation` library.
//!
//! [`run`] parses an argument vector, executes one subcommand and returns the
//! process exit status: 0 on success, 1 on domain or I/O errors, 2 on usage
//! errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub mod commands;
pub mod config;
pub mod plot;
pub mod report;
pub mod sweep;
pub mod table;

use config::{BetaSpec, FieldSpec};
pub use report::Report;
pub use table::{Cell, Table};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("data error: {0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn domain(e: impl std::fmt::Display) -> Self {
        CliError::Domain(e.to_string())
    }
}

/// Version string in `git describe` form.
pub fn version() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "nucleation", version, about = "Boundary-vortex nucleation analyses")]
struct Cli {
    /// Random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; outputs do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

/// Physical parameters shared by the vortex-law subcommands.
#[derive(Debug, Clone, Args)]
pub struct PhysArgs {
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// `C`, `log:C` (C|ln ε|), `expsqrt:C` or `power:C:S`.
    #[arg(long = "h-ex", default_value = "log:1", value_parser = config::parse_field)]
    pub h_ex: FieldSpec,
}

#[derive(Debug, Clone, Args)]
pub struct ExitArgs {
    #[command(flatten)]
    pub phys: PhysArgs,
    /// Noise strength: a number or `kappa:K` for `K / ln h_ex`.
    #[arg(long, value_parser = config::parse_beta)]
    pub beta: BetaSpec,
    /// Start point; defaults to `ε^α`.
    #[arg(long)]
    pub z: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub exit: ExitArgs,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Base time step; defaults to `10⁻³ Â²/β`.
    #[arg(long = "dt-base")]
    pub dt_base: Option<f64>,
    /// Time horizon; defaults to `10⁴ Â²/β`.
    #[arg(long = "max-time")]
    pub max_time: Option<f64>,
    /// Pure-diffusion control with exit probability `z/Â`.
    #[arg(long)]
    pub driftless: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RegimeArgs {
    #[arg(long, default_value = "expsqrt:1", value_parser = config::parse_field)]
    pub field: FieldSpec,
    /// `β = κ / ln h_ex`.
    #[arg(long, conflicts_with = "beta", required_unless_present = "beta")]
    pub kappa: Option<f64>,
    /// Constant `β`.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DomainKind {
    Interval,
    Rectangle,
    Disk,
}

#[derive(Debug, Clone, Args)]
pub struct MeissnerArgs {
    #[arg(long, value_enum, default_value_t = DomainKind::Interval)]
    pub domain: DomainKind,
    /// Half-width, rectangle width, or radius.
    #[arg(long, default_value_t = 1.0)]
    pub size: f64,
    /// Rectangle height; defaults to `--size`.
    #[arg(long)]
    pub height: Option<f64>,
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    /// Reports `h_c1` at this `ε`.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Reports the Meissner energy at this field.
    #[arg(long = "h-ex")]
    pub h_ex: Option<f64>,
    /// Writes the nodal solution to this CSV.
    #[arg(long)]
    pub profile: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeKind {
    Dipole,
    Boundary,
}

#[derive(Debug, Clone, Args)]
pub struct GlArgs {
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Nodes per side of the unit square.
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    #[arg(long, value_enum, default_value_t = ModeKind::Dipole)]
    pub mode: ModeKind,
    /// Writes the JSON summary here as well.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long = "max-cells", default_value_t = config::DEFAULT_MAX_CELLS)]
    pub max_cells: usize,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    /// CSV files to plot.
    #[arg(long = "input", required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value = "pngcairo")]
    pub terminal: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form annihilation time of a boundary vortex.
    Annihilate(PhysArgs),
    /// Analytic exit probability and nucleation probability.
    ExitProb(ExitArgs),
    /// Monte Carlo exit probability.
    McExit(McArgs),
    /// Regime classification of a parameter family.
    Regime(RegimeArgs),
    /// Meissner potential solve.
    Meissner(MeissnerArgs),
    /// Ginzburg-Landau annihilation run.
    GlRun(GlArgs),
    /// Parameter sweep from a config file.
    Sweep(SweepArgs),
    /// Gnuplot scripts for CSV outputs.
    Plot(PlotArgs),
}

/// Options shared by all subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct Common {
    pub seed: u64,
    pub jobs: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
}

/// Runs the tool with process stdout and stderr.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// Runs the tool writing to the given streams; `argv[0]` is the program name.
pub fn run_with<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    2
                }
            };
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let jobs = cli.jobs.unwrap_or(1);
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let common = Common {
        seed: cli.seed.unwrap_or(0),
        jobs,
        out: cli.out,
        format: cli.format,
    };
    let started = Instant::now();
    let report = match cli.command {
        Command::Annihilate(a) => commands::annihilate(&a)?,
        Command::ExitProb(a) => commands::exit_prob(&a)?,
        Command::McExit(a) => commands::mc_exit(&a, &common)?,
        Command::Regime(a) => commands::regime(&a)?,
        Command::Meissner(a) => {
            let (report, profile) = commands::meissner(&a)?;
            if let (Some(path), Some(profile)) = (&a.profile, profile) {
                write_atomic(path, profile.to_csv().as_bytes())?;
            }
            report
        }
        Command::GlRun(a) => {
            let report = commands::gl_run(&a, &common)?;
            if let Some(path) = &a.summary {
                let json = report.to_json(&common, started.elapsed().as_secs_f64());
                write_atomic(path, json.as_bytes())?;
            }
            report
        }
        Command::Sweep(a) => {
            let text = std::fs::read_to_string(&a.config)
                .map_err(|e| CliError::Usage(format!("--config {}: {e}", a.config.display())))?;
            let mut cfg = config::SweepConfig::parse(&text)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            if let Some(jobs) = cli.jobs {
                cfg.jobs = jobs;
            }
            let outcome = sweep::run_sweep(&cfg, a.max_cells)?;
            writeln!(
                stdout,
                "sweep: {} cells ({} computed, {} resumed) in {}",
                outcome.cells,
                outcome.computed,
                outcome.resumed,
                cfg.outputs.display()
            )
            .map_err(io)?;
            return Ok(());
        }
        Command::Plot(a) => {
            let script = plot::script(&a.inputs, &a.terminal)?;
            return emit(&common.out, script.as_bytes(), stdout);
        }
    };
    let text = match common.format {
        Format::Csv => report.table.to_csv(),
        Format::Json => report.to_json(&common, started.elapsed().as_secs_f64()),
    };
    emit(&common.out, text.as_bytes(), stdout)
}

fn emit(out: &Option<PathBuf>, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, bytes),
        None => stdout.write_all(bytes).map_err(io),
    }
}

pub(crate) fn io(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// Writes `bytes` to a temporary sibling of `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Io(format!("{} is not a file path", path.display())))?;
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = dir.join(tmp_name);
    std::fs::write(&tmp, bytes).map_err(|e| CliError::Io(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
