//! One function per subcommand, each returning a serializable result.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use iadof::bounds::{characterize, DofBounds};
use iadof::channel::{
    matrix_to_pairs, sample_channels, ChannelDump, ChannelSet, SystemConfig, Variation,
};
use iadof::mimo::{
    build_scheme, scheme_dimensions, verify_constant, verify_equations, ChainReport,
    ConstantNetwork, PrecoderSummary, Scheme, CHAIN_TOLERANCE, SPAN_TOLERANCE,
};
use iadof::network::{AlignmentReport, Network};
use iadof::simo::{
    achieved_dof, build_instance, build_instance_from, epsilon_n, gamma_mu,
    verify_alignment_numeric, verify_alignment_symbolic, SymbolicCertificate,
};
use iadof::zf::{dof_slope, zf_filters, RateModel, SweepResult, LEAKAGE_LIMIT};
use iadof::Rational;

use crate::config::{DumpConfig, MimoConfig, SchemeArg, SimoConfig, SweepConfig};
use crate::error::CliError;

/// Status text for instances whose extension exceeds the numeric cap.
pub const SYMBOLIC_ONLY_PASS: &str = "symbolic-only: pass";

pub fn bounds(k: usize, m: usize, n: usize) -> Result<DofBounds, CliError> {
    Ok(characterize(k, m, n)?)
}

/// Reads a channel dump. Any problem with the file is an input error, never a usage error.
pub fn load_channels(path: &Path) -> Result<ChannelSet, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        context: format!("reading channel dump {}", path.display()),
        source: e,
    })?;
    let dump: ChannelDump = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("channel dump {}: {e}", path.display())))?;
    ChannelSet::from_dump(&dump)
        .map_err(|e| CliError::Input(format!("channel dump {}: {e}", path.display())))
}

fn check_dump_shape(ch: &ChannelSet, k: usize, m: usize, n: usize) -> Result<(), CliError> {
    let c = ch.config();
    if (c.k, c.m, c.n) != (k, m, n) {
        return Err(CliError::Input(format!(
            "channel dump has K={}, M={}, N={} but the run needs K={k}, M={m}, N={n}",
            c.k, c.m, c.n
        )));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct SimoReport {
    pub symbolic: SymbolicCertificate,
    pub achieved_dof: Rational,
    pub epsilon_n: Rational,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numeric: Option<AlignmentReport>,
    pub passed: bool,
}

pub fn simo_align(
    c: &SimoConfig,
    seed: u64,
    mu_cap: u64,
    tol: f64,
) -> Result<SimoReport, CliError> {
    let symbolic = verify_alignment_symbolic(c.k, c.r, c.n)?;
    let mut status = if symbolic.passed { "pass" } else { "fail" }.to_string();
    let mut numeric = None;
    if c.numeric || c.channels.is_some() {
        match gamma_mu(c.k, c.r, c.n, mu_cap) {
            Ok(_) => {
                let inst = match &c.channels {
                    Some(path) => {
                        let ch = load_channels(path)?;
                        check_dump_shape(&ch, c.k, 1, c.r)?;
                        build_instance_from(ch, c.n).map_err(|e| match e {
                            iadof::Error::SlotsExhausted { .. } => CliError::Input(e.to_string()),
                            e => e.into(),
                        })?
                    }
                    None => build_instance(c.k, c.r, c.n, seed, mu_cap)?,
                };
                let report = verify_alignment_numeric(&inst.precoders, &inst.extension, tol)?;
                if !report.passed {
                    status = "fail".into();
                }
                numeric = Some(report);
            }
            Err(iadof::Error::MuCapExceeded { .. }) if symbolic.passed => {
                status = SYMBOLIC_ONLY_PASS.into()
            }
            Err(iadof::Error::MuCapExceeded { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let passed = symbolic.passed && numeric.as_ref().is_none_or(|r| r.passed);
    Ok(SimoReport {
        achieved_dof: achieved_dof(c.k, c.r, c.n)?,
        epsilon_n: epsilon_n(c.k, c.r, c.n)?,
        symbolic,
        status,
        numeric,
        passed,
    })
}

#[derive(Debug, Serialize)]
pub struct MimoReport {
    pub summary: PrecoderSummary,
    pub alignment: AlignmentReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainReport>,
    pub max_leakage: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precoders: Option<Vec<Vec<Vec<[f64; 2]>>>>,
    pub passed: bool,
}

fn mimo_scheme(arg: SchemeArg) -> Result<Scheme, CliError> {
    arg.mimo().ok_or_else(|| {
        CliError::Usage("simo is not a constant-channel scheme; use simo-align".into())
    })
}

fn constant_channels(
    scheme: Scheme,
    r: usize,
    m: usize,
    seed: u64,
) -> Result<ChannelSet, CliError> {
    let (k, m, n) = scheme_dimensions(scheme, r, m);
    let cfg = SystemConfig::new(k, m, n, Variation::Constant, seed)?;
    Ok(sample_channels(&cfg, 1)?)
}

fn max_leakage<N: Network + ?Sized>(net: &N, tol: f64) -> Result<(f64, RateModel), CliError> {
    let filters = zf_filters(net, tol)?;
    let leak = filters.iter().map(|f| f.leakage).fold(0.0, f64::max);
    Ok((leak, RateModel::new(net, &filters)))
}

pub fn mimo_align(c: &MimoConfig, seed: u64, tol: f64) -> Result<MimoReport, CliError> {
    let scheme = mimo_scheme(c.scheme)?;
    let ch = match &c.channels {
        Some(path) => {
            let ch = load_channels(path)?;
            let (k, m, n) = scheme_dimensions(scheme, c.r, c.m);
            check_dump_shape(&ch, k, m, n)?;
            ch
        }
        None => constant_channels(scheme, c.r, c.m, seed)?,
    };
    let set = build_scheme(&ch, scheme, c.r, c.m)?;
    let alignment = verify_constant(&ch, &set, tol)?;
    let chain = (!set.equations.is_empty())
        .then(|| verify_equations(&ch, &set))
        .transpose()?;
    let chain_ok = chain
        .as_ref()
        .is_none_or(|r| r.max_equal_residual < CHAIN_TOLERANCE && r.max_span_sine < SPAN_TOLERANCE);
    let (leak, passed) = if alignment.separable() {
        let (leak, _) = max_leakage(&ConstantNetwork::new(&ch, &set)?, tol)?;
        (leak, alignment.passed && chain_ok && leak < LEAKAGE_LIMIT)
    } else {
        (f64::INFINITY, false)
    };
    let precoders = c.include_precoders.then(|| {
        set.precoders
            .iter()
            .map(|p| matrix_to_pairs(p.as_ref()))
            .collect()
    });
    Ok(MimoReport {
        summary: set.summary(),
        alignment,
        chain,
        max_leakage: leak,
        precoders,
        passed,
    })
}

#[derive(Debug, Serialize)]
pub struct SweepReport {
    pub scheme: String,
    pub predicted_dof: Rational,
    pub slope_tolerance: f64,
    pub runs: Vec<SweepRun>,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct SweepRun {
    #[serde(flatten)]
    pub sweep: SweepResult,
    pub max_leakage: f64,
    pub passed: bool,
}

fn sweep_one(c: &SweepConfig, seed: u64, mu_cap: u64, tol: f64) -> Result<SweepRun, CliError> {
    let (model, leak, predicted, name) = match c.scheme.mimo() {
        Some(scheme) => {
            let ch = match (scheme, c.k) {
                (Scheme::ZeroForcing, Some(k)) => {
                    let cfg = SystemConfig::new(k, c.m, c.r * c.m, Variation::Constant, seed)?;
                    sample_channels(&cfg, 1)?
                }
                _ => constant_channels(scheme, c.r, c.m, seed)?,
            };
            let set = build_scheme(&ch, scheme, c.r, c.m)?;
            let (leak, model) = max_leakage(&ConstantNetwork::new(&ch, &set)?, tol)?;
            (model, leak, set.dof_per_use(), scheme.name().to_string())
        }
        None => {
            let k =
                c.k.ok_or_else(|| CliError::Usage("the simo sweep needs --K".into()))?;
            let inst = build_instance(k, c.r, c.n, seed, mu_cap)?;
            let (leak, model) = max_leakage(&inst.network(), tol)?;
            (model, leak, achieved_dof(k, c.r, c.n)?, "simo".to_string())
        }
    };
    let sweep = dof_slope(&model, &c.grid, predicted, &name, seed)?;
    let passed = leak < LEAKAGE_LIMIT
        && (sweep.slope_estimate - sweep.predicted_dof.to_f64()).abs() <= c.slope_tolerance;
    Ok(SweepRun {
        sweep,
        max_leakage: leak,
        passed,
    })
}

/// One sweep per seed in `seed..seed+c.seeds`, run on the current rayon pool.
pub fn dof_sweep(
    c: &SweepConfig,
    seed: u64,
    mu_cap: u64,
    tol: f64,
) -> Result<SweepReport, CliError> {
    iadof::zf::validate_grid(&c.grid)?;
    if c.seeds == 0 {
        return Err(CliError::Usage("seeds must be at least 1".into()));
    }
    let runs = (0..c.seeds as u64)
        .into_par_iter()
        .map(|i| sweep_one(c, seed.wrapping_add(i), mu_cap, tol))
        .collect::<Result<Vec<_>, _>>()?;
    let first = &runs[0].sweep;
    Ok(SweepReport {
        scheme: first.scheme.clone(),
        predicted_dof: first.predicted_dof.clone(),
        slope_tolerance: c.slope_tolerance,
        passed: runs.iter().all(|r| r.passed),
        runs,
    })
}

pub const CSV_HEADER: [&str; 4] = ["snr_db", "sum_rate_bits", "scheme", "seed"];

pub fn sweep_csv(report: &SweepReport) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Input(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for run in &report.runs {
        let s = &run.sweep;
        for (snr, rate) in s.snr_grid_db.iter().zip(&s.sum_rate_bits) {
            w.write_record([
                snr.to_string(),
                rate.to_string(),
                s.scheme.clone(),
                s.seed.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Input(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Input(format!("csv: {e}")))
}

pub fn dump_channels(c: &DumpConfig, seed: u64) -> Result<ChannelDump, CliError> {
    let cfg = SystemConfig::new(c.k, c.m, c.n, c.variation, seed)?;
    Ok(sample_channels(&cfg, c.slots)?.to_dump())
}
