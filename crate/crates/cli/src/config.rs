//! Run configuration: command-line flags layered over an optional TOML file.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Solve the Painlevé connection problem for ψ.
    SolvePsi,
    /// Tabulate the fiducial family at each t.
    Fiducial,
    /// Green-operator norms of the linearized operator.
    Spectrum,
    /// Indicial roots of the conic Laplacian.
    Indicial,
    /// Glue, Newton-correct and check the disk solution at each t.
    Glue,
    /// Twisted cohomology dimensions of punctured surfaces.
    Torus,
}

/// Flags shared by every subcommand. Anything left unset falls back to the
/// config file, then to the command's default.
#[derive(Debug, Default, Clone, Args)]
pub struct Flags {
    /// Parameter t; repeat for a sweep.
    #[arg(long = "t", global = true, value_name = "T")]
    pub t: Vec<f64>,
    /// Number of grid nodes.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Largest Fourier mode |ℓ|.
    #[arg(long, global = true)]
    pub lmax: Option<i64>,
    /// Solver tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Format of the data tables.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Genus; repeat for a sweep.
    #[arg(long, global = true)]
    pub gamma: Vec<usize>,
    /// TOML file with any of the keys above.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    t: Option<Vec<f64>>,
    grid: Option<usize>,
    lmax: Option<i64>,
    tol: Option<f64>,
    out: Option<PathBuf>,
    jobs: Option<usize>,
    format: Option<Format>,
    gamma: Option<Vec<usize>>,
}

impl FileConfig {
    fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::ConfigRead {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| CliError::ConfigParse {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// The resolved configuration, embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub t: Vec<f64>,
    pub grid: usize,
    pub lmax: i64,
    pub tol: f64,
    pub out: PathBuf,
    pub jobs: Option<usize>,
    pub format: Format,
    pub gamma: Vec<usize>,
}

struct Defaults {
    t: &'static [f64],
    grid: usize,
    lmax: i64,
    tol: f64,
}

fn defaults(command: Command) -> Defaults {
    const SWEEP: &[f64] = &[1.0, 2.0, 4.0, 8.0];
    const GLUE: &[f64] = &[2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
    match command {
        Command::SolvePsi => Defaults { t: &[], grid: 4001, lmax: 0, tol: 1e-8 },
        Command::Fiducial => Defaults { t: SWEEP, grid: 400, lmax: 0, tol: 1e-8 },
        Command::Spectrum => Defaults { t: SWEEP, grid: 2000, lmax: 32, tol: 1e-8 },
        Command::Indicial => Defaults { t: &[], grid: 16, lmax: 10, tol: 1e-8 },
        Command::Glue => Defaults { t: GLUE, grid: 2000, lmax: 0, tol: 1e-10 },
        Command::Torus => Defaults { t: &[], grid: 16, lmax: 0, tol: 1e-8 },
    }
}

impl RunConfig {
    pub fn resolve(command: Command, flags: &Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let d = defaults(command);
        let pick_vec = |flag: &Vec<f64>, file: Option<Vec<f64>>, default: &[f64]| {
            if !flag.is_empty() {
                flag.clone()
            } else {
                file.unwrap_or_else(|| default.to_vec())
            }
        };
        let cfg = RunConfig {
            command,
            t: pick_vec(&flags.t, file.t, d.t),
            grid: flags.grid.or(file.grid).unwrap_or(d.grid),
            lmax: flags.lmax.or(file.lmax).unwrap_or(d.lmax),
            tol: flags.tol.or(file.tol).unwrap_or(d.tol),
            out: flags.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("out")),
            jobs: flags.jobs.or(file.jobs),
            format: flags.format.or(file.format).unwrap_or(Format::Json),
            gamma: if flags.gamma.is_empty() {
                file.gamma.unwrap_or_else(|| (2..=10).collect())
            } else {
                flags.gamma.clone()
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::Usage(format!("--tol must be positive, got {}", self.tol)));
        }
        if let Some(t) = self.t.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(CliError::Usage(format!("--t must be positive, got {t}")));
        }
        if self.grid < 16 {
            return Err(CliError::Usage(format!("--grid must be at least 16, got {}", self.grid)));
        }
        let uses_modes = matches!(self.command, Command::Spectrum | Command::Indicial);
        if uses_modes && self.lmax < 1 {
            return Err(CliError::Usage(format!("--lmax must be at least 1, got {}", self.lmax)));
        }
        if self.jobs == Some(0) {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        let uses_t = matches!(self.command, Command::Fiducial | Command::Spectrum | Command::Glue);
        if uses_t && self.t.is_empty() {
            return Err(CliError::Usage("no values of t given".into()));
        }
        Ok(())
    }
}
