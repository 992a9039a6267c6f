//! Run configuration: file, environment and flags merged into one value.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use iadof::channel::Variation;
use iadof::linalg::DEFAULT_RANK_TOL;
use iadof::simo::DEFAULT_MU_CAP;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default = "default_mu_cap")]
    pub mu_cap: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Leaves the timestamp out so repeated runs compare byte for byte.
    #[serde(default)]
    pub comparison: bool,
    #[serde(default = "default_threads")]
    pub threads: usize,
    pub command: CommandConfig,
}

fn default_mu_cap() -> u64 {
    DEFAULT_MU_CAP
}

fn default_tolerance() -> f64 {
    DEFAULT_RANK_TOL
}

fn default_threads() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum CommandConfig {
    Bounds(BoundsConfig),
    SimoAlign(SimoConfig),
    MimoAlign(MimoConfig),
    DofSweep(SweepConfig),
    VerifyAll(VerifyAllConfig),
    DumpChannels(DumpConfig),
}

impl CommandConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CommandConfig::Bounds(_) => "bounds",
            CommandConfig::SimoAlign(_) => "simo-align",
            CommandConfig::MimoAlign(_) => "mimo-align",
            CommandConfig::DofSweep(_) => "dof-sweep",
            CommandConfig::VerifyAll(_) => "verify-all",
            CommandConfig::DumpChannels(_) => "dump-channels",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimoConfig {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "R")]
    pub r: usize,
    pub n: usize,
    #[serde(default)]
    pub numeric: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channels: Option<PathBuf>,
}

/// Scheme names accepted on the command line. `simo` is only meaningful for sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SchemeArg {
    Zf,
    Theorem4,
    Theorem5,
    Example1,
    Example2,
    Simo,
}

impl SchemeArg {
    pub fn mimo(self) -> Option<iadof::mimo::Scheme> {
        use iadof::mimo::Scheme;
        match self {
            SchemeArg::Zf => Some(Scheme::ZeroForcing),
            SchemeArg::Theorem4 => Some(Scheme::Theorem4),
            SchemeArg::Theorem5 => Some(Scheme::Theorem5),
            SchemeArg::Example1 => Some(Scheme::Example1),
            SchemeArg::Example2 => Some(Scheme::Example2),
            SchemeArg::Simo => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MimoConfig {
    pub scheme: SchemeArg,
    #[serde(rename = "R")]
    pub r: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(default)]
    pub include_precoders: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channels: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub scheme: SchemeArg,
    /// Users for `zf` and `simo`; ignored otherwise.
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(rename = "R")]
    pub r: usize,
    #[serde(rename = "M")]
    pub m: usize,
    /// Extension order for `simo`.
    #[serde(default = "default_order")]
    pub n: usize,
    #[serde(default = "default_grid")]
    pub grid: Vec<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default = "default_slope_tolerance")]
    pub slope_tolerance: f64,
}

fn default_order() -> usize {
    1
}

pub fn default_grid() -> Vec<f64> {
    vec![30.0, 40.0, 50.0, 60.0, 70.0]
}

fn default_seeds() -> usize {
    1
}

fn default_slope_tolerance() -> f64 {
    0.3
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyAllConfig {
    /// Skips numeric SIMO instances longer than 256 and the SIMO sweep.
    #[serde(default)]
    pub quick: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DumpConfig {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default = "default_slots")]
    pub slots: usize,
    #[serde(default = "default_variation")]
    pub variation: Variation,
}

fn default_slots() -> usize {
    1
}

fn default_variation() -> Variation {
    Variation::Constant
}

/// Fields the file may set; every field optional so flags can fill the rest.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub mu_cap: Option<u64>,
    pub tolerance: Option<f64>,
    pub comparison: Option<bool>,
    pub threads: Option<usize>,
    pub command: Option<CommandConfig>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let is_json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
        } else {
            toml::from_str(&text)
                .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
        }
    }
}

#[cfg(test)]
impl RunConfig {
    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Usage(format!("config serialization: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(command: CommandConfig) -> RunConfig {
        RunConfig {
            seed: 7,
            out: Some("out.json".into()),
            format: Format::Csv,
            mu_cap: 512,
            tolerance: 1e-9,
            comparison: true,
            threads: 2,
            command,
        }
    }

    fn all_commands() -> Vec<CommandConfig> {
        vec![
            CommandConfig::Bounds(BoundsConfig { k: 4, m: 1, n: 2 }),
            CommandConfig::SimoAlign(SimoConfig {
                k: 4,
                r: 2,
                n: 1,
                numeric: true,
                channels: Some("ch.json".into()),
            }),
            CommandConfig::MimoAlign(MimoConfig {
                scheme: SchemeArg::Example2,
                r: 2,
                m: 2,
                include_precoders: false,
                channels: None,
            }),
            CommandConfig::DofSweep(SweepConfig {
                scheme: SchemeArg::Zf,
                k: Some(2),
                r: 2,
                m: 1,
                n: 1,
                grid: default_grid(),
                seeds: 3,
                slope_tolerance: 0.1,
            }),
            CommandConfig::VerifyAll(VerifyAllConfig { quick: true }),
            CommandConfig::DumpChannels(DumpConfig {
                k: 3,
                m: 2,
                n: 4,
                slots: 2,
                variation: Variation::TimeVarying,
            }),
        ]
    }

    #[test]
    fn every_command_round_trips_through_toml_and_json() {
        for c in all_commands() {
            let cfg = sample(c);
            let toml_text = cfg.to_toml().unwrap();
            let back: RunConfig = toml::from_str(&toml_text).unwrap();
            assert_eq!(back, cfg, "{toml_text}");
            let json = serde_json::to_string(&cfg).unwrap();
            let back: RunConfig = serde_json::from_str(&json).unwrap();
            assert_eq!(back, cfg);
        }
    }

    #[test]
    fn file_config_accepts_partial_tables() {
        let f: FileConfig =
            toml::from_str("seed = 3\n[command]\nname = \"bounds\"\nK = 4\nM = 1\nN = 2\n")
                .unwrap();
        assert_eq!(f.seed, Some(3));
        assert_eq!(
            f.command,
            Some(CommandConfig::Bounds(BoundsConfig { k: 4, m: 1, n: 2 }))
        );
        assert!(toml::from_str::<FileConfig>("sed = 3").is_err());
    }

    proptest! {
        #[test]
        fn sweep_configs_round_trip(
            seed in 0..=i64::MAX as u64,
            grid in prop::collection::vec(-50.0f64..120.0, 0..8),
            seeds in 1usize..50,
            tol in 1e-14f64..1e-2,
            k in prop::option::of(1usize..9),
        ) {
            let cfg = RunConfig {
                seed,
                out: None,
                format: Format::Json,
                mu_cap: 4096,
                tolerance: tol,
                comparison: false,
                threads: 1,
                command: CommandConfig::DofSweep(SweepConfig {
                    scheme: SchemeArg::Theorem5, k, r: 2, m: 2, n: 1, grid, seeds, slope_tolerance: 0.2,
                }),
            };
            let back: RunConfig = toml::from_str(&cfg.to_toml().unwrap()).unwrap();
            prop_assert_eq!(&back, &cfg);
            let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
