//! Batch front end for `resolvent-kit`.
//!
//! ```text
//! resolvent-kit resonances --config fig1.cfg --N 80 --csv fig1.csv
//! ```
//!
//! Settings come from built-in defaults, then `RESOLVENT_KIT_THREADS`, then
//! the `--config` file, then command-line flags. Exit codes: 0 success,
//! 1 configuration or input error, 2 numerical failure.

pub mod commands;
pub mod config;
pub mod output;
pub mod selftest;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

pub use commands::{execute, ErrorKind, Report, RunError};
pub use config::{CommandKind, ConfigError, Layers, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "resolvent-kit", version, about = "Resolvent-based scattering scans, resonances, bound states and densities of states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// S(E), phase shift and |1-S| on an energy grid.
    #[command(allow_negative_numbers = true)]
    Smatrix(Overrides),
    /// S-matrix scan plus resonance peaks.
    #[command(alias = "resonant-scan", allow_negative_numbers = true)]
    Resonances(Overrides),
    /// Negative eigenvalues of (H, Omega) and a |G[N-1,N-1](E)| scan.
    #[command(allow_negative_numbers = true)]
    BoundStates(Overrides),
    /// Density of states in the oscillator basis.
    #[command(allow_negative_numbers = true)]
    Dos(Overrides),
    /// One element G[row,col](E + i eta) along the grid.
    #[command(allow_negative_numbers = true)]
    Resolvent(Overrides),
    /// Built-in invariant checks.
    #[command(allow_negative_numbers = true)]
    Selftest(Overrides),
}

impl Cmd {
    fn split(&self) -> (CommandKind, &Overrides) {
        match self {
            Cmd::Smatrix(o) => (CommandKind::Smatrix, o),
            Cmd::Resonances(o) => (CommandKind::Resonances, o),
            Cmd::BoundStates(o) => (CommandKind::BoundStates, o),
            Cmd::Dos(o) => (CommandKind::Dos, o),
            Cmd::Resolvent(o) => (CommandKind::Resolvent, o),
            Cmd::Selftest(o) => (CommandKind::Selftest, o),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// `key = value` configuration file.
    #[arg(long, short = 'c')]
    pub config: Option<PathBuf>,
    /// Any key, as `KEY=VALUE`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Basis family: laguerre or oscillator.
    #[arg(long)]
    pub family: Option<String>,
    /// Basis scale parameter.
    #[arg(long)]
    pub lambda: Option<String>,
    /// Angular momentum.
    #[arg(long)]
    pub ell: Option<String>,
    /// Coulomb charge.
    #[arg(long = "Z", visible_alias = "charge")]
    pub charge: Option<String>,
    /// Basis size.
    #[arg(long = "N", visible_alias = "size")]
    pub size: Option<String>,
    /// Short-range potential in `r`, e.g. "7.5*r^2*exp(-r)".
    #[arg(long, allow_hyphen_values = true)]
    pub potential: Option<String>,
    #[arg(long)]
    pub e_min: Option<String>,
    #[arg(long)]
    pub e_max: Option<String>,
    /// Number of grid points, both ends included.
    #[arg(long)]
    pub steps: Option<String>,
    /// Resonance criterion: im-s, phase-derivative or one-minus-s.
    #[arg(long)]
    pub criterion: Option<String>,
    /// Minimum peak prominence.
    #[arg(long)]
    pub prominence: Option<String>,
    /// Add fine windows around narrow S-matrix poles (true or false).
    #[arg(long)]
    pub refine: Option<String>,
    /// smoothing or continuation.
    #[arg(long)]
    pub dos_method: Option<String>,
    /// Fixed smoothing width.
    #[arg(long)]
    pub width: Option<String>,
    /// Height of the fitting contour above the real axis.
    #[arg(long)]
    pub contour: Option<String>,
    #[arg(long)]
    pub fit_order: Option<String>,
    #[arg(long)]
    pub max_fit_residual: Option<String>,
    #[arg(long)]
    pub row: Option<String>,
    #[arg(long)]
    pub col: Option<String>,
    /// Imaginary part added to the grid energies.
    #[arg(long)]
    pub eta: Option<String>,
    /// spectral, cofactor or eigen-product.
    #[arg(long)]
    pub formula: Option<String>,
    /// CSV output path; `-` for stdout, `none` to skip.
    #[arg(long)]
    pub csv: Option<String>,
    /// JSON summary path; `-` for stdout, `none` to skip.
    #[arg(long)]
    pub json: Option<String>,
    /// Also write a gnuplot script for the CSV.
    #[arg(long)]
    pub gnuplot_script: Option<String>,
    /// Worker threads for grid evaluation.
    #[arg(long)]
    pub threads: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
}

impl Overrides {
    fn layers(&self) -> Result<Layers, ConfigError> {
        let mut l = Layers::new();
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| ConfigError::new(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            l.set(k, v.trim())?;
        }
        let named = [
            ("family", &self.family),
            ("lambda", &self.lambda),
            ("ell", &self.ell),
            ("charge", &self.charge),
            ("size", &self.size),
            ("potential", &self.potential),
            ("e_min", &self.e_min),
            ("e_max", &self.e_max),
            ("steps", &self.steps),
            ("criterion", &self.criterion),
            ("prominence", &self.prominence),
            ("refine", &self.refine),
            ("dos_method", &self.dos_method),
            ("width", &self.width),
            ("contour", &self.contour),
            ("fit_order", &self.fit_order),
            ("max_fit_residual", &self.max_fit_residual),
            ("row", &self.row),
            ("col", &self.col),
            ("eta", &self.eta),
            ("formula", &self.formula),
            ("csv", &self.csv),
            ("json", &self.json),
            ("gnuplot_script", &self.gnuplot_script),
            ("threads", &self.threads),
            ("seed", &self.seed),
            ("trials", &self.trials),
        ];
        for (k, v) in named {
            if let Some(v) = v {
                l.set(k, v.clone())?;
            }
        }
        Ok(l)
    }
}

/// Resolve a parsed command line into a configuration.
pub fn resolve(cli: &Cli, env_threads: Option<&str>) -> Result<RunConfig, ConfigError> {
    let (kind, o) = cli.command.split();
    let file = match &o.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| ConfigError::new(format!("cannot read {}: {e}", path.display())))?;
            config::parse_config_text(&text)
                .map_err(|e| ConfigError::new(format!("{}: {}", path.display(), e.message)))?
        }
        None => Layers::new(),
    };
    RunConfig::resolve(kind, &file, &o.layers()?, env_threads)
}

fn write_artifact(path: &str, text: &str, stdout: &mut dyn Write) -> Result<(), RunError> {
    if path == "none" {
        return Ok(());
    }
    let res = if path == "-" {
        stdout.write_all(text.as_bytes())
    } else {
        fs::write(path, text)
    };
    res.map_err(|e| RunError {
        kind: ErrorKind::Config,
        context: "cli::write",
        message: format!("cannot write {path}: {e}"),
    })
}

/// Execute `cfg` on the configured thread pool and write its artifacts.
/// Returns the exit code.
pub fn run_config(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let outcome = match cfg.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(cfg)),
            Err(e) => Err(RunError {
                kind: ErrorKind::Config,
                context: "cli::threads",
                message: e.to_string(),
            }),
        },
        None => execute(cfg),
    };
    let report = match outcome {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return e.exit_code();
        }
    };
    if let Err(e) = write_report(cfg, &report, stdout) {
        let _ = writeln!(stderr, "error: {e}");
        return e.exit_code();
    }
    let to_stdout = cfg.csv.as_deref() == Some("-") || cfg.json.as_deref() == Some("-");
    let mut log: Box<dyn Write> = if to_stdout { Box::new(std::io::sink()) } else { Box::new(&mut *stdout) };
    for line in &report.summary {
        let _ = writeln!(log, "{line}");
    }
    if report.passed {
        0
    } else {
        2
    }
}

fn write_report(cfg: &RunConfig, report: &Report, stdout: &mut dyn Write) -> Result<(), RunError> {
    let selftest = cfg.command == CommandKind::Selftest;
    if let Some(csv) = &report.csv {
        let path = cfg.csv_path();
        write_artifact(&path, &csv.render(), stdout)?;
        if let (Some(script), false) = (&cfg.gnuplot_script, path == "none") {
            let text = output::gnuplot_script(&path, cfg.command.as_str(), csv.header(), &report.plot_columns);
            write_artifact(script, &text, stdout)?;
        }
    }
    if !selftest || cfg.json.is_some() {
        let doc = json!({
            "config": cfg,
            "results": report.results,
            "diagnostics": report.diagnostics,
            "version": env!("CARGO_PKG_VERSION"),
        });
        write_artifact(&cfg.json_path(), &output::render_json(&doc), stdout)?;
    }
    Ok(())
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind as K;
            return match e.kind() {
                K::DisplayHelp | K::DisplayVersion | K::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(stdout, "{e}");
                    if e.kind() == K::DisplayHelpOnMissingArgumentOrSubcommand {
                        1
                    } else {
                        0
                    }
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    1
                }
            };
        }
    };
    let env_threads = std::env::var(config::THREADS_ENV).ok();
    let cfg = match resolve(&cli, env_threads.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: cli::config: {e}");
            return 1;
        }
    };
    run_config(&cfg, stdout, stderr)
}
