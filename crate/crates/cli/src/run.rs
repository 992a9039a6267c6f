//! Dispatch and report output.

use std::io::Write;

use serde::Serialize;

use crate::commands;
use crate::config::{CommandConfig, Format, RunConfig};
use crate::error::CliError;
use crate::verify_all::verify_all;

/// Every JSON report has this shape.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'static str,
    config: &'a RunConfig,
    passed: bool,
    result: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<String>,
}

fn envelope<T: Serialize>(cfg: &RunConfig, passed: bool, result: T) -> Result<String, CliError> {
    let env = Envelope {
        command: cfg.command.name(),
        config: cfg,
        passed,
        result,
        timestamp: (!cfg.comparison).then(|| chrono::Utc::now().to_rfc3339()),
    };
    let mut text =
        serde_json::to_string_pretty(&env).map_err(|e| CliError::Input(format!("report: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Builds the report text and whether every check passed.
pub fn render(cfg: &RunConfig) -> Result<(String, bool), CliError> {
    let csv_wanted = cfg.format == Format::Csv;
    if csv_wanted && !matches!(cfg.command, CommandConfig::DofSweep(_)) {
        return Err(CliError::Usage(format!(
            "csv output is only available for dof-sweep, not {}",
            cfg.command.name()
        )));
    }
    let (tol, cap) = (cfg.tolerance, cfg.mu_cap);
    match &cfg.command {
        CommandConfig::Bounds(c) => {
            let b = commands::bounds(c.k, c.m, c.n)?;
            Ok((envelope(cfg, true, b)?, true))
        }
        CommandConfig::SimoAlign(c) => {
            let r = commands::simo_align(c, cfg.seed, cap, tol)?;
            Ok((envelope(cfg, r.passed, &r)?, r.passed))
        }
        CommandConfig::MimoAlign(c) => {
            let r = commands::mimo_align(c, cfg.seed, tol)?;
            Ok((envelope(cfg, r.passed, &r)?, r.passed))
        }
        CommandConfig::DofSweep(c) => {
            let r = commands::dof_sweep(c, cfg.seed, cap, tol)?;
            let text = if csv_wanted {
                commands::sweep_csv(&r)?
            } else {
                envelope(cfg, r.passed, &r)?
            };
            Ok((text, r.passed))
        }
        CommandConfig::VerifyAll(c) => {
            let s = verify_all(c.quick, cfg.seed, cap, tol);
            Ok((envelope(cfg, s.passed, &s)?, s.passed))
        }
        // Written bare so the file can be passed straight back through --channels.
        CommandConfig::DumpChannels(c) => {
            let dump = commands::dump_channels(c, cfg.seed)?;
            let mut text = serde_json::to_string_pretty(&dump)
                .map_err(|e| CliError::Input(format!("dump: {e}")))?;
            text.push('\n');
            Ok((text, true))
        }
    }
}

/// Renders on a pool of `cfg.threads` workers and writes to `--out` or stdout.
pub fn run(cfg: &RunConfig) -> Result<bool, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let (text, passed) = pool.install(|| render(cfg))?;
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io {
            context: format!("writing {}", path.display()),
            source: e,
        })?,
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io {
                context: "writing stdout".into(),
                source: e,
            })?,
    }
    Ok(passed)
}
