//! Flag definitions and their merge with a config file.
//!
//! Precedence, highest first: flags, `IADOF_*` environment variables, the
//! config file, built-in defaults.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use iadof::channel::Variation;

use crate::config::{
    default_grid, BoundsConfig, CommandConfig, DumpConfig, FileConfig, Format, MimoConfig,
    RunConfig, SchemeArg, SimoConfig, SweepConfig, VerifyAllConfig,
};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "iadof",
    version,
    about = "DoF bounds and interference alignment checks"
)]
pub struct Cli {
    /// TOML or JSON run configuration; flags override its values.
    #[arg(long, global = true, env = "IADOF_CONFIG")]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, env = "IADOF_SEED")]
    pub seed: Option<u64>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true, env = "IADOF_OUT")]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, env = "IADOF_FORMAT")]
    pub format: Option<Format>,

    /// Largest symbol extension built numerically.
    #[arg(long, global = true, env = "IADOF_MU_CAP")]
    pub mu_cap: Option<u64>,

    /// Relative singular-value threshold for numerical rank.
    #[arg(long, global = true, env = "IADOF_TOLERANCE")]
    pub tolerance: Option<f64>,

    /// Omit the timestamp so identical runs produce identical bytes.
    #[arg(long = "compare", global = true, env = "IADOF_COMPARE")]
    pub comparison: bool,

    /// Worker threads for batch commands.
    #[arg(long, global = true, env = "IADOF_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inner and outer DoF bounds.
    Bounds(BoundsArgs),
    /// Symbolic (and optionally numeric) SIMO alignment check.
    SimoAlign(SimoArgs),
    /// Constant-channel MIMO construction and rank checks.
    MimoAlign(MimoArgs),
    /// Sum rate over an SNR grid and the fitted DoF slope.
    DofSweep(SweepArgs),
    /// The acceptance matrix in one run.
    VerifyAll(VerifyAllArgs),
    /// Write a sampled channel set as JSON.
    DumpChannels(DumpArgs),
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long = "K", env = "IADOF_K")]
    pub k: Option<usize>,
    #[arg(long = "M", env = "IADOF_M")]
    pub m: Option<usize>,
    #[arg(long = "N", env = "IADOF_N")]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimoArgs {
    #[arg(long = "K", env = "IADOF_K")]
    pub k: Option<usize>,
    #[arg(long = "R", env = "IADOF_R")]
    pub r: Option<usize>,
    /// Extension order.
    #[arg(long = "n", env = "IADOF_ORDER")]
    pub n: Option<usize>,
    /// Also build the precoders and run the rank checks when the extension fits the cap.
    #[arg(long)]
    pub numeric: bool,
    /// Channel dump to use instead of sampling.
    #[arg(long, env = "IADOF_CHANNELS")]
    pub channels: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MimoArgs {
    #[arg(long, value_enum, env = "IADOF_SCHEME")]
    pub scheme: Option<SchemeArg>,
    #[arg(long = "R", env = "IADOF_R")]
    pub r: Option<usize>,
    #[arg(long = "M", env = "IADOF_M")]
    pub m: Option<usize>,
    /// Include the precoder matrices as nested `[re, im]` arrays.
    #[arg(long)]
    pub include_precoders: bool,
    #[arg(long, env = "IADOF_CHANNELS")]
    pub channels: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, env = "IADOF_SCHEME")]
    pub scheme: Option<SchemeArg>,
    #[arg(long = "K", env = "IADOF_K")]
    pub k: Option<usize>,
    #[arg(long = "R", env = "IADOF_R")]
    pub r: Option<usize>,
    #[arg(long = "M", env = "IADOF_M")]
    pub m: Option<usize>,
    #[arg(long = "n", env = "IADOF_ORDER")]
    pub n: Option<usize>,
    /// Comma-separated SNR points in dB.
    #[arg(long, value_delimiter = ',', env = "IADOF_GRID")]
    pub grid: Option<Vec<f64>>,
    /// Number of channel draws, seeds `seed..seed+seeds`.
    #[arg(long, env = "IADOF_SEEDS")]
    pub seeds: Option<usize>,
    #[arg(long, env = "IADOF_SLOPE_TOLERANCE")]
    pub slope_tolerance: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyAllArgs {
    #[arg(long)]
    pub quick: bool,
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    #[arg(long = "K", env = "IADOF_K")]
    pub k: Option<usize>,
    #[arg(long = "M", env = "IADOF_M")]
    pub m: Option<usize>,
    #[arg(long = "N", env = "IADOF_N")]
    pub n: Option<usize>,
    #[arg(long, env = "IADOF_SLOTS")]
    pub slots: Option<usize>,
    #[arg(long, env = "IADOF_VARIATION")]
    pub time_varying: bool,
}

fn need<T>(value: Option<T>, name: &str, command: &str) -> Result<T, CliError> {
    value.ok_or_else(|| {
        CliError::Usage(format!(
            "{command} needs --{name} (flag, IADOF_* variable or config file)"
        ))
    })
}

impl Cli {
    /// Merges flags over the config file (if any) into a complete configuration.
    pub fn resolve(self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let command = match self.command {
            Some(c) => merge_command(c, file.command.as_ref())?,
            None => file.command.clone().ok_or_else(|| {
                CliError::Usage("no subcommand given and the config file names none".into())
            })?,
        };
        let defaults = RunConfig {
            seed: 0,
            out: None,
            format: Format::Json,
            mu_cap: iadof::simo::DEFAULT_MU_CAP,
            tolerance: iadof::linalg::DEFAULT_RANK_TOL,
            comparison: false,
            threads: 1,
            command,
        };
        let cfg = RunConfig {
            seed: self.seed.or(file.seed).unwrap_or(defaults.seed),
            out: self.out.or(file.out),
            format: self.format.or(file.format).unwrap_or(defaults.format),
            mu_cap: self.mu_cap.or(file.mu_cap).unwrap_or(defaults.mu_cap),
            tolerance: self
                .tolerance
                .or(file.tolerance)
                .unwrap_or(defaults.tolerance),
            comparison: self.comparison || file.comparison.unwrap_or(defaults.comparison),
            threads: self.threads.or(file.threads).unwrap_or(defaults.threads),
            command: defaults.command,
        };
        if !(cfg.tolerance > 0.0 && cfg.tolerance < 1.0) {
            return Err(CliError::Usage(format!(
                "tolerance {} must lie in (0, 1)",
                cfg.tolerance
            )));
        }
        if cfg.threads == 0 {
            return Err(CliError::Usage("threads must be at least 1".into()));
        }
        Ok(cfg)
    }
}

fn merge_command(c: Command, file: Option<&CommandConfig>) -> Result<CommandConfig, CliError> {
    Ok(match c {
        Command::Bounds(a) => {
            let f = match file {
                Some(CommandConfig::Bounds(f)) => Some(f),
                _ => None,
            };
            CommandConfig::Bounds(BoundsConfig {
                k: need(a.k.or(f.map(|f| f.k)), "K", "bounds")?,
                m: need(a.m.or(f.map(|f| f.m)), "M", "bounds")?,
                n: need(a.n.or(f.map(|f| f.n)), "N", "bounds")?,
            })
        }
        Command::SimoAlign(a) => {
            let f = match file {
                Some(CommandConfig::SimoAlign(f)) => Some(f),
                _ => None,
            };
            CommandConfig::SimoAlign(SimoConfig {
                k: need(a.k.or(f.map(|f| f.k)), "K", "simo-align")?,
                r: need(a.r.or(f.map(|f| f.r)), "R", "simo-align")?,
                n: a.n.or(f.map(|f| f.n)).unwrap_or(1),
                numeric: a.numeric || f.is_some_and(|f| f.numeric),
                channels: a.channels.or(f.and_then(|f| f.channels.clone())),
            })
        }
        Command::MimoAlign(a) => {
            let f = match file {
                Some(CommandConfig::MimoAlign(f)) => Some(f),
                _ => None,
            };
            CommandConfig::MimoAlign(MimoConfig {
                scheme: need(a.scheme.or(f.map(|f| f.scheme)), "scheme", "mimo-align")?,
                r: a.r.or(f.map(|f| f.r)).unwrap_or(2),
                m: need(a.m.or(f.map(|f| f.m)), "M", "mimo-align")?,
                include_precoders: a.include_precoders || f.is_some_and(|f| f.include_precoders),
                channels: a.channels.or(f.and_then(|f| f.channels.clone())),
            })
        }
        Command::DofSweep(a) => {
            let f = match file {
                Some(CommandConfig::DofSweep(f)) => Some(f),
                _ => None,
            };
            CommandConfig::DofSweep(SweepConfig {
                scheme: need(a.scheme.or(f.map(|f| f.scheme)), "scheme", "dof-sweep")?,
                k: a.k.or(f.and_then(|f| f.k)),
                r: a.r.or(f.map(|f| f.r)).unwrap_or(2),
                m: a.m.or(f.map(|f| f.m)).unwrap_or(1),
                n: a.n.or(f.map(|f| f.n)).unwrap_or(1),
                grid: a
                    .grid
                    .or(f.map(|f| f.grid.clone()))
                    .unwrap_or_else(default_grid),
                seeds: a.seeds.or(f.map(|f| f.seeds)).unwrap_or(1),
                slope_tolerance: a
                    .slope_tolerance
                    .or(f.map(|f| f.slope_tolerance))
                    .unwrap_or(0.3),
            })
        }
        Command::VerifyAll(a) => {
            let f = match file {
                Some(CommandConfig::VerifyAll(f)) => Some(f),
                _ => None,
            };
            CommandConfig::VerifyAll(VerifyAllConfig {
                quick: a.quick || f.is_some_and(|f| f.quick),
            })
        }
        Command::DumpChannels(a) => {
            let f = match file {
                Some(CommandConfig::DumpChannels(f)) => Some(f),
                _ => None,
            };
            CommandConfig::DumpChannels(DumpConfig {
                k: need(a.k.or(f.map(|f| f.k)), "K", "dump-channels")?,
                m: need(a.m.or(f.map(|f| f.m)), "M", "dump-channels")?,
                n: need(a.n.or(f.map(|f| f.n)), "N", "dump-channels")?,
                slots: a.slots.or(f.map(|f| f.slots)).unwrap_or(1),
                variation: if a.time_varying {
                    Variation::TimeVarying
                } else {
                    f.map_or(Variation::Constant, |f| f.variation)
                },
            })
        }
    })
}
