//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use iadof::bounds::{characterize, innerbound, outerbound, ratio_r, two_user_mimo_dof};
use iadof::channel::{sample_channels, ChannelSet, SystemConfig, Variation};
use iadof::linalg::{CMat, DEFAULT_RANK_TOL};
use iadof::mimo::{
    build_example1, build_example2, build_theorem4, build_zero_forcing, verify_constant,
    verify_equations, ConstantNetwork, PrecoderSet,
};
use iadof::network::{verify_network, Network};
use iadof::simo::{self, ExponentLayout};
use iadof::zf::{dof_slope, zf_filters, RateModel, LEAKAGE_LIMIT};
use iadof::Rational;

const SEED: u64 = 0;
const GRID: [f64; 5] = [30.0, 40.0, 50.0, 60.0, 70.0];

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s(e: iadof::Error) -> String {
    e.to_string()
}

/// Largest filter leakage seen by any accepted construction.
#[derive(Default)]
struct Leakage {
    worst: f64,
    constructions: usize,
}

impl Leakage {
    fn filters<N: Network + ?Sized>(&mut self, net: &N) -> Result<RateModel, String> {
        let filters = zf_filters(net, DEFAULT_RANK_TOL).map_err(e2s)?;
        self.worst = filters.iter().map(|f| f.leakage).fold(self.worst, f64::max);
        self.constructions += 1;
        Ok(RateModel::new(net, &filters))
    }
}

fn run(id: usize, title: &str, budget: Duration, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let outcome = f();
    let elapsed = start.elapsed();
    let outcome = outcome.and_then(|detail| {
        if elapsed <= budget {
            Ok(detail)
        } else {
            Err(format!("{detail}; took {elapsed:.1?}, budget {budget:?}"))
        }
    });
    let (tag, detail) = match &outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    println!("{tag} {id}: {title} [{elapsed:.2?}] {detail}");
    outcome.is_ok()
}

fn constant(k: usize, m: usize, n: usize, seed: u64) -> Result<ChannelSet, String> {
    let cfg = SystemConfig::new(k, m, n, Variation::Constant, seed).map_err(e2s)?;
    sample_channels(&cfg, 1).map_err(e2s)
}

fn criterion1() -> Check {
    let q = Rational::new;
    ensure(outerbound(4, 1, 2).map_err(e2s)? == q(8, 3), || {
        "outerbound(4,1,2) != 8/3".into()
    })?;
    ensure(outerbound(3, 2, 2).map_err(e2s)? == q(3, 1), || {
        "outerbound(3,2,2) != 3".into()
    })?;
    ensure(innerbound(3, 2, 1).map_err(e2s)? == q(2, 1), || {
        "innerbound(3,2,1) != 2".into()
    })?;
    let mut cases = 0;
    for r in 2..=4usize {
        for m in 1..=4usize {
            for n in (1..=4usize).filter(|&n| ratio_r(m, n) == r) {
                cases += 1;
                let got = two_user_mimo_dof(r * m, r * n, m, n).map_err(e2s)?;
                ensure(got == q(m.max(n) as i64, 1), || {
                    format!("two_user_mimo_dof({},{},{m},{n}) = {got}", r * m, r * n)
                })?;
            }
        }
    }
    Ok(format!(
        "exact values match; two-user identity holds on {cases} (R,M,N) cases"
    ))
}

/// Independent oracle: every tuple of the small set, every slot increment, looked
/// up in an explicit set of large tuples built from the per-block ranges.
fn brute_force_alignment(gamma: usize, r: usize, n: usize) -> bool {
    let n = n as u32;
    let boxes = |hi_extra: u32| -> Vec<Vec<u32>> {
        let mut all = Vec::new();
        for m in 0..r as u32 {
            let (lo, hi) = (m * n + m + 1, (m + 1) * n + m + hi_extra);
            let mut t = vec![lo; gamma];
            loop {
                all.push(t.clone());
                let Some(s) = (0..gamma).find(|&s| t[s] < hi) else {
                    break;
                };
                t[s] += 1;
                for x in &mut t[..s] {
                    *x = lo;
                }
            }
        }
        all
    };
    let large: HashSet<Vec<u32>> = boxes(1).into_iter().collect();
    boxes(0).into_iter().all(|t| {
        (0..gamma).all(|s| {
            let mut u = t.clone();
            u[s] += 1;
            large.contains(&u)
        })
    })
}

fn criterion2() -> Check {
    let mut passed = 0;
    let mut mutants = 0;
    for r in 1..=3usize {
        for k in r + 2..=r + 4 {
            for n in 1..=3usize {
                let cert = simo::verify_alignment_symbolic(k, r, n).map_err(e2s)?;
                ensure(cert.passed, || {
                    format!("(K={k}, R={r}, n={n}) failed: {:?}", cert.violation)
                })?;
                passed += 1;
                let gamma = cert.gamma;
                for (block, slot) in [(0, 0), (r - 1, gamma - 1)] {
                    let mutant =
                        simo::verify_alignment_symbolic_with(k, r, n, |l: &mut ExponentLayout| {
                            l.shrink_large(block, slot)
                        })
                        .map_err(e2s)?;
                    let v = mutant.violation.as_ref();
                    ensure(
                        !mutant.passed && v.is_some_and(|v| v.label.is_some()),
                        || {
                            format!("shrunken layout ({k},{r},{n}) block {block} slot {slot} was accepted")
                        },
                    )?;
                    mutants += 1;
                }
            }
        }
    }
    let mut oracles = 0;
    for (k, r, n) in [(3, 1, 1), (3, 1, 2), (3, 1, 3), (4, 1, 1), (4, 2, 1)] {
        let cert = simo::verify_alignment_symbolic(k, r, n).map_err(e2s)?;
        ensure(
            brute_force_alignment(cert.gamma, r, n) == cert.passed,
            || format!("brute force disagrees at ({k},{r},{n})"),
        )?;
        oracles += 1;
    }
    Ok(format!(
        "{passed} configurations pass, {mutants} mutants rejected with certificates, {oracles} brute-force agreements"
    ))
}

fn criterion3(inst: &simo::SimoInstance) -> Check {
    let p = &inst.precoders;
    ensure(p.mu == 768, || format!("mu = {}", p.mu))?;
    ensure(p.v1.ncols() == 512 && p.v2.ncols() == 2, || {
        format!("|V1| = {}, |V2| = {}", p.v1.ncols(), p.v2.ncols())
    })?;
    let report =
        simo::verify_alignment_numeric(p, &inst.extension, DEFAULT_RANK_TOL).map_err(e2s)?;
    for rx in &report.receivers[..3] {
        ensure(
            rx.interference_rank <= 1024 && rx.joint_rank == 1536,
            || format!("{rx:?}"),
        )?;
    }
    let last = &report.receivers[3];
    ensure(last.interference_rank <= 1534 && last.passed, || {
        format!("{last:?}")
    })?;
    ensure(report.passed, || "rank checks failed".into())?;
    let dof = simo::achieved_dof(4, 2, 1).map_err(e2s)?;
    ensure(dof == Rational::new(1538, 768), || {
        format!("achieved_dof = {dof}")
    })?;
    let ranks: Vec<String> = report
        .receivers
        .iter()
        .map(|r| format!("{}/{}", r.interference_rank, r.joint_rank))
        .collect();
    Ok(format!(
        "interference/joint ranks {}; DoF {dof}",
        ranks.join(" ")
    ))
}

fn criterion4(leak: &mut Leakage) -> Check {
    let mut worst_angle: f64 = 0.0;
    for seed in 0..20 {
        let ch = constant(4, 4, 8, seed)?;
        let set = build_theorem4(&ch, 2, 4).map_err(e2s)?;
        ensure(set.fallback.is_none(), || {
            "fell back to zero forcing".into()
        })?;
        ensure(
            set.allocation == [2, 2, 2, 3] && set.total_streams() == 9,
            || format!("seed {seed}: allocation {:?}", set.allocation),
        )?;
        let report = verify_constant(&ch, &set, DEFAULT_RANK_TOL).map_err(e2s)?;
        ensure(
            report.passed && report.receivers.iter().all(|r| r.joint_rank == 8),
            || format!("seed {seed}: {:?}", report.first_failure()),
        )?;
        let chain = verify_equations(&ch, &set).map_err(e2s)?;
        worst_angle = worst_angle.max(chain.max_span_sine);
        ensure(chain.max_span_sine < 1e-7, || {
            format!(
                "seed {seed}: principal angle sine {:e}",
                chain.max_span_sine
            )
        })?;
        leak.filters(&ConstantNetwork::new(&ch, &set).map_err(e2s)?)?;
    }
    Ok(format!(
        "20 seeds; allocation (2,2,2,3); joint rank 8 everywhere; max angle sine {worst_angle:.1e}"
    ))
}

fn criterion5(leak: &mut Leakage) -> Check {
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let ch = constant(4, 2, 4, seed)?;
        let set = build_example2(&ch).map_err(e2s)?;
        ensure(set.total_streams() == 9 && set.extension == 2, || {
            format!(
                "seed {seed}: {} streams over {} uses",
                set.total_streams(),
                set.extension
            )
        })?;
        ensure(set.dof_per_use() == Rational::new(9, 2), || {
            format!("seed {seed}: {}", set.dof_per_use())
        })?;
        let report = verify_constant(&ch, &set, DEFAULT_RANK_TOL).map_err(e2s)?;
        ensure(report.passed, || {
            format!("seed {seed}: {:?}", report.first_failure())
        })?;
        let chain = verify_equations(&ch, &set).map_err(e2s)?;
        worst = worst.max(chain.max_equal_residual).max(chain.max_span_sine);
        ensure(chain.max_equal_residual < 1e-9, || {
            format!("seed {seed}: chain residual {:e}", chain.max_equal_residual)
        })?;
        leak.filters(&ConstantNetwork::new(&ch, &set).map_err(e2s)?)?;
    }
    Ok(format!(
        "20 seeds; 9 streams over 2 uses = 9/2; max chain residual {worst:.1e}"
    ))
}

fn slope_check(
    name: &str,
    model: &RateModel,
    predicted: Rational,
    tol: f64,
) -> Result<String, String> {
    let s = dof_slope(model, &GRID, predicted, name, SEED).map_err(e2s)?;
    let target = s.predicted_dof.to_f64();
    ensure((s.slope_estimate - target).abs() <= tol, || {
        format!(
            "{name} slope {:.4} vs {target:.4} +- {tol}",
            s.slope_estimate
        )
    })?;
    Ok(format!(
        "{name} {:.3} ({} +- {tol})",
        s.slope_estimate, s.predicted_dof
    ))
}

fn mimo_model(leak: &mut Leakage, ch: &ChannelSet, set: &PrecoderSet) -> Result<RateModel, String> {
    leak.filters(&ConstantNetwork::new(ch, set).map_err(e2s)?)
}

fn criterion6(leak: &mut Leakage, inst: &simo::SimoInstance) -> Check {
    let minute = Duration::from_secs(60);
    let mut parts = Vec::new();
    let mut timed = |f: &mut dyn FnMut() -> Result<String, String>| -> Result<(), String> {
        let start = Instant::now();
        let msg = f()?;
        let took = start.elapsed();
        ensure(took < minute, || format!("{msg} took {took:.1?}"))?;
        parts.push(msg);
        Ok(())
    };
    timed(&mut || {
        let ch = constant(2, 1, 2, SEED)?;
        let set = build_zero_forcing(&ch, 2).map_err(e2s)?;
        let model = mimo_model(leak, &ch, &set)?;
        slope_check("zf", &model, Rational::integer(2), 0.1)
    })?;
    timed(&mut || {
        let ch = constant(4, 4, 8, SEED)?;
        let set = build_example1(&ch).map_err(e2s)?;
        let model = mimo_model(leak, &ch, &set)?;
        slope_check("example1", &model, set.dof_per_use(), 0.3)
    })?;
    timed(&mut || {
        let ch = constant(4, 2, 4, SEED)?;
        let set = build_example2(&ch).map_err(e2s)?;
        let model = mimo_model(leak, &ch, &set)?;
        slope_check("example2", &model, set.dof_per_use(), 0.2)
    })?;
    timed(&mut || {
        let model = leak.filters(&inst.network())?;
        slope_check(
            "simo",
            &model,
            simo::achieved_dof(4, 2, 1).map_err(e2s)?,
            0.3,
        )
    })?;
    Ok(parts.join("; "))
}

fn naive_product(a: &CMat, b: &CMat) -> Vec<Complex64> {
    let n = a.nrows();
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += a[(i, k)] * b[(k, j)];
            }
            out[i * n + j] = acc;
        }
    }
    out
}

fn t_matrix_probes() -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let configs = [(3usize, 1usize, 1usize), (3, 1, 2), (3, 1, 3)];
    let instances = configs
        .iter()
        .enumerate()
        .map(|(i, &(k, r, n))| simo::build_instance(k, r, n, 100 + i as u64, 4096).map_err(e2s))
        .collect::<Result<Vec<_>, _>>()?;
    for probe in 0..200 {
        let inst = &instances[probe % instances.len()];
        let t = &inst.t;
        let a = rng.random_range(0..t.slots());
        let b = rng.random_range(0..t.slots());
        let (da, db) = (t.dense(a), t.dense(b));
        for (slot, d) in [(a, &da), (b, &db)] {
            let diag = t.diagonal(slot);
            for i in 0..t.mu {
                for j in 0..t.mu {
                    let want = if i == j {
                        diag[i]
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    ensure(d[(i, j)] == want, || {
                        format!("probe {probe}: T_{slot} not diagonal at ({i},{j})")
                    })?;
                }
            }
        }
        ensure(naive_product(&da, &db) == naive_product(&db, &da), || {
            format!("probe {probe}: T_{a} T_{b} != T_{b} T_{a}")
        })?;
        ensure(diag_nonzero(t.diagonal(a)), || {
            format!("probe {probe}: zero entry in T_{a}")
        })?;
    }
    Ok(200)
}

fn diag_nonzero(d: &[Complex64]) -> bool {
    d.iter().all(|z| z.norm() > simo::MIN_T_ENTRY)
}

fn direct_channel_trials() -> Result<usize, String> {
    for trial in 0..20u64 {
        let (ch, set) = if trial % 2 == 0 {
            let ch = constant(4, 4, 8, 500 + trial)?;
            let set = build_example1(&ch).map_err(e2s)?;
            (ch, set)
        } else {
            let ch = constant(4, 2, 4, 500 + trial)?;
            let set = build_example2(&ch).map_err(e2s)?;
            (ch, set)
        };
        let fresh = ch.resample_direct(trial);
        let net = ConstantNetwork::new(&fresh, &set).map_err(e2s)?;
        let report = verify_network(&net, DEFAULT_RANK_TOL).map_err(e2s)?;
        ensure(report.passed && report.separable(), || {
            format!("trial {trial}: {:?}", report.first_failure())
        })?;
    }
    Ok(20)
}

fn swap_symmetry() -> Result<usize, String> {
    let mut cases = 0;
    for k in 1..=12 {
        for m in 1..=8 {
            for n in 1..=8 {
                let (a, b) = (
                    characterize(k, m, n).map_err(e2s)?,
                    characterize(k, n, m).map_err(e2s)?,
                );
                ensure(
                    a.inner == b.inner && a.outer == b.outer && a.tight == b.tight,
                    || format!("({k},{m},{n}) differs from ({k},{n},{m})"),
                )?;
                ensure(a.inner <= a.outer, || {
                    format!("({k},{m},{n}) inner above outer")
                })?;
                cases += 1;
            }
        }
    }
    Ok(cases)
}

fn criterion7(leak: &Leakage) -> Check {
    let probes = t_matrix_probes()?;
    let trials = direct_channel_trials()?;
    let swaps = swap_symmetry()?;
    ensure(leak.constructions > 0 && leak.worst < LEAKAGE_LIMIT, || {
        format!(
            "max leakage {:e} over {} constructions",
            leak.worst, leak.constructions
        )
    })?;
    Ok(format!(
        "{probes} T probes exact; {trials} direct-channel resamples separable; {swaps} swap cases; \
         max leakage {:.1e} over {} constructions",
        leak.worst, leak.constructions
    ))
}

fn main() {
    iadof::use_sequential_linear_algebra();
    let secs = Duration::from_secs;
    let mut leak = Leakage::default();
    let mut ok = Vec::new();

    ok.push(run(1, "bound formulas", secs(1), criterion1));
    ok.push(run(2, "symbolic alignment sweep", secs(10), criterion2));

    let start = Instant::now();
    let inst = simo::build_instance(4, 2, 1, SEED, simo::DEFAULT_MU_CAP);
    let build_time = start.elapsed();
    match &inst {
        Ok(inst) => ok.push(run(
            3,
            "four-user SIMO instance, mu = 768",
            secs(120).saturating_sub(build_time),
            || criterion3(inst),
        )),
        Err(e) => {
            println!("FAIL 3: four-user SIMO instance, mu = 768: {e}");
            ok.push(false);
        }
    }
    ok.push(run(4, "eigenvector scheme R=2 M=4", secs(10), || {
        criterion4(&mut leak)
    }));
    ok.push(run(5, "extended scheme R=2 M=2 E=2", secs(10), || {
        criterion5(&mut leak)
    }));
    match &inst {
        // Four sweeps, each checked against its own one-minute budget inside.
        Ok(inst) => ok.push(run(6, "DoF slopes over 30..70 dB", secs(240), || {
            criterion6(&mut leak, inst)
        })),
        Err(e) => {
            println!("FAIL 6: DoF slopes over 30..70 dB: {e}");
            ok.push(false);
        }
    }
    ok.push(run(7, "property suites", secs(120), || criterion7(&leak)));

    let failed = ok.iter().filter(|p| !**p).count();
    println!("{} of {} criteria passed", ok.len() - failed, ok.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
