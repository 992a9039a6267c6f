//! The acceptance matrix as one batch run.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use iadof::bounds::{characterize, innerbound, outerbound, ratio_r, two_user_mimo_dof};
use iadof::Rational;

use crate::commands::{dof_sweep, mimo_align, simo_align};
use crate::config::{default_grid, MimoConfig, SchemeArg, SimoConfig, SweepConfig};
use crate::error::CliError;

/// Numeric SIMO instances longer than this are skipped in quick mode.
pub const QUICK_MU_CAP: u64 = 256;

#[derive(Clone, Debug)]
enum Job {
    Bounds,
    Simo {
        k: usize,
        r: usize,
        n: usize,
    },
    Mimo {
        scheme: SchemeArg,
        r: usize,
        m: usize,
    },
    Sweep(SweepConfig),
}

impl Job {
    fn name(&self) -> String {
        match self {
            Job::Bounds => "bounds".into(),
            Job::Simo { k, r, n } => format!("simo-align K={k} R={r} n={n}"),
            Job::Mimo { scheme, r, m } => {
                format!("mimo-align {} R={r} M={m}", scheme_name(*scheme))
            }
            Job::Sweep(c) => format!("dof-sweep {}", scheme_name(c.scheme)),
        }
    }
}

fn scheme_name(s: SchemeArg) -> &'static str {
    s.mimo().map_or("simo", |s| s.name())
}

#[derive(Debug, Serialize)]
pub struct Entry {
    pub name: String,
    pub status: String,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub entries: Vec<Entry>,
    pub total: usize,
    pub failed: usize,
    pub passed: bool,
}

fn jobs(quick: bool) -> Vec<Job> {
    let mut jobs = vec![Job::Bounds];
    for r in 1..=3 {
        for k in r + 2..=r + 4 {
            for n in 1..=3 {
                jobs.push(Job::Simo { k, r, n });
            }
        }
    }
    for (scheme, r, m) in [
        (SchemeArg::Zf, 2, 1),
        (SchemeArg::Example1, 2, 4),
        (SchemeArg::Example2, 2, 2),
        (SchemeArg::Theorem4, 3, 5),
        (SchemeArg::Theorem5, 2, 3),
        (SchemeArg::Theorem5, 3, 4),
    ] {
        jobs.push(Job::Mimo { scheme, r, m });
    }
    let sweep = |scheme, k, r, m, slope_tolerance| SweepConfig {
        scheme,
        k,
        r,
        m,
        n: 1,
        grid: default_grid(),
        seeds: 1,
        slope_tolerance,
    };
    jobs.push(Job::Sweep(sweep(SchemeArg::Zf, Some(2), 2, 1, 0.1)));
    jobs.push(Job::Sweep(sweep(SchemeArg::Example1, None, 2, 4, 0.3)));
    jobs.push(Job::Sweep(sweep(SchemeArg::Example2, None, 2, 2, 0.2)));
    if !quick {
        jobs.push(Job::Sweep(sweep(SchemeArg::Simo, Some(4), 2, 1, 0.3)));
    }
    jobs
}

fn bounds_checks() -> Result<(bool, Value), CliError> {
    let mut failures = Vec::new();
    let mut expect = |label: String, got: Rational, want: Rational| {
        if got != want {
            failures.push(json!({ "check": label, "got": got, "expected": want }));
        }
    };
    expect(
        "outerbound(4,1,2)".into(),
        outerbound(4, 1, 2)?,
        Rational::new(8, 3),
    );
    expect(
        "outerbound(3,2,2)".into(),
        outerbound(3, 2, 2)?,
        Rational::integer(3),
    );
    expect(
        "innerbound(3,2,1)".into(),
        innerbound(3, 2, 1)?,
        Rational::integer(2),
    );
    // Cooperating R users against one only reduces to max(M,N) when R is the antenna ratio.
    let mut two_user = 0;
    for r in 2..=4 {
        for m in 1..=4 {
            for n in (1..=4).filter(|&n| ratio_r(m, n) == r) {
                two_user += 1;
                expect(
                    format!("two_user_mimo_dof({},{},{m},{n})", r * m, r * n),
                    two_user_mimo_dof(r * m, r * n, m, n)?,
                    Rational::integer(m.max(n) as i64),
                );
            }
        }
    }
    let mut grid = 0;
    for k in 1..=12 {
        for m in 1..=8 {
            for n in 1..=8 {
                grid += 1;
                let b = characterize(k, m, n)?;
                let s = characterize(k, n, m)?;
                if b.inner > b.outer
                    || b.tight != (b.inner == b.outer)
                    || b.inner != s.inner
                    || b.outer != s.outer
                {
                    failures.push(json!({ "check": format!("grid ({k},{m},{n})"), "bounds": b, "swapped": s }));
                }
            }
        }
    }
    Ok((
        failures.is_empty(),
        json!({ "two_user_cases": two_user, "grid_cases": grid, "failures": failures }),
    ))
}

fn run_job(
    job: &Job,
    seed: u64,
    mu_cap: u64,
    tol: f64,
    quick: bool,
) -> Result<(String, bool, Value), CliError> {
    Ok(match job {
        Job::Bounds => {
            let (ok, detail) = bounds_checks()?;
            (status(ok), ok, detail)
        }
        Job::Simo { k, r, n } => {
            let cap = if quick {
                mu_cap.min(QUICK_MU_CAP)
            } else {
                mu_cap
            };
            let c = SimoConfig {
                k: *k,
                r: *r,
                n: *n,
                numeric: true,
                channels: None,
            };
            let rep = simo_align(&c, seed, cap, tol)?;
            let detail =
                serde_json::to_value(&rep).map_err(|e| CliError::Input(format!("report: {e}")))?;
            (rep.status.clone(), rep.passed, detail)
        }
        Job::Mimo { scheme, r, m } => {
            let c = MimoConfig {
                scheme: *scheme,
                r: *r,
                m: *m,
                include_precoders: false,
                channels: None,
            };
            let rep = mimo_align(&c, seed, tol)?;
            let detail = json!({
                "summary": rep.summary,
                "receivers_passed": rep.alignment.receivers.iter().filter(|r| r.passed).count(),
                "max_equal_residual": rep.chain.as_ref().map(|c| c.max_equal_residual),
                "max_span_sine": rep.chain.as_ref().map(|c| c.max_span_sine),
                "max_leakage": rep.max_leakage,
            });
            (status(rep.passed), rep.passed, detail)
        }
        Job::Sweep(c) => {
            let rep = dof_sweep(c, seed, mu_cap, tol)?;
            let run = &rep.runs[0];
            let detail = json!({
                "predicted_dof": rep.predicted_dof,
                "slope_estimate": run.sweep.slope_estimate,
                "slope_tolerance": rep.slope_tolerance,
                "max_leakage": run.max_leakage,
            });
            (status(rep.passed), rep.passed, detail)
        }
    })
}

fn status(ok: bool) -> String {
    if ok { "pass" } else { "fail" }.into()
}

/// Runs every job on the current rayon pool; entries come back in job order.
pub fn verify_all(quick: bool, seed: u64, mu_cap: u64, tol: f64) -> Summary {
    let entries: Vec<Entry> = jobs(quick)
        .par_iter()
        .map(|job| match run_job(job, seed, mu_cap, tol, quick) {
            Ok((status, passed, detail)) => Entry {
                name: job.name(),
                status,
                passed,
                detail,
            },
            Err(e) => Entry {
                name: job.name(),
                status: "error".into(),
                passed: false,
                detail: json!({ "error": e.report() }),
            },
        })
        .collect();
    let failed = entries.iter().filter(|e| !e.passed).count();
    Summary {
        total: entries.len(),
        failed,
        passed: failed == 0,
        entries,
    }
}
