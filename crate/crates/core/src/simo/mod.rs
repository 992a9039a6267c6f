//! Symbol-extension alignment for single-antenna transmitters and `R`-antenna
//! receivers, with `K > R + 1` users.

mod exponents;
mod index;
mod precoders;
mod tfamily;

use num_bigint::BigInt;

pub use exponents::{
    verify_alignment_symbolic, verify_alignment_symbolic_with, verify_layout, ExponentBox,
    ExponentLayout, ExponentTuple, LayoutCheck, SymbolicCertificate, Violation,
};
pub use index::{build_index_set, AlignmentIndexSet, IndexPair, SlotLabel};
pub use precoders::{
    build_precoders, column_matching_residual, verify_alignment_numeric, SeedVector, SimoNetwork,
    SimoPrecoders,
};
pub use tfamily::{build_t_family, TMatrixFamily, MIN_T_ENTRY};

use crate::channel::{
    extend_channel, sample_channels, ChannelSet, ExtendedChannel, SystemConfig, Variation,
};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Largest extension length built numerically unless overridden.
pub const DEFAULT_MU_CAP: u64 = 4096;

/// `Γ = KR(K-R-1)` and `μ = (R+1)(n+1)^Γ`, or `None` for `μ` when it overflows.
fn gamma_mu_unbounded(k: usize, r: usize, n: usize) -> Result<(usize, Option<usize>)> {
    index::check_simo_params(k, r)?;
    if n == 0 {
        return Err(Error::InvalidConfig(
            "extension order n must be at least 1".into(),
        ));
    }
    let gamma = k * r * (k - r - 1);
    let mu = u32::try_from(gamma)
        .ok()
        .and_then(|g| (n + 1).checked_pow(g))
        .and_then(|p| p.checked_mul(r + 1));
    Ok((gamma, mu))
}

/// `(Γ, μ)`, refusing extensions longer than `cap`.
pub fn gamma_mu(k: usize, r: usize, n: usize, cap: u64) -> Result<(usize, usize)> {
    let (gamma, mu) = gamma_mu_unbounded(k, r, n)?;
    match mu {
        Some(mu) if mu as u64 <= cap => Ok((gamma, mu)),
        _ => Err(Error::MuCapExceeded {
            mu: exact_mu(r, n, gamma).to_string(),
            cap,
        }),
    }
}

fn exact_mu(r: usize, n: usize, gamma: usize) -> BigInt {
    BigInt::from(r + 1) * BigInt::from(n + 1).pow(gamma as u32)
}

/// Total DoF per channel use of the scheme with extension order `n`.
pub fn achieved_dof(k: usize, r: usize, n: usize) -> Result<Rational> {
    let (gamma, _) = gamma_mu_unbounded(k, r, n)?;
    let big = BigInt::from(n + 1).pow(gamma as u32);
    let small = BigInt::from(n).pow(gamma as u32);
    let num = BigInt::from((r + 1) * r) * &big + BigInt::from((k - r - 1) * r) * small;
    Ok(Rational::from_big(num, exact_mu(r, n, gamma)))
}

/// Per-channel-use gap between the DoF of a large-set user and a small-set user.
pub fn epsilon_n(k: usize, r: usize, n: usize) -> Result<Rational> {
    let (gamma, _) = gamma_mu_unbounded(k, r, n)?;
    let big = BigInt::from(n + 1).pow(gamma as u32);
    let small = BigInt::from(n).pow(gamma as u32);
    Ok(Rational::from_big(
        BigInt::from(r) * (big - small),
        exact_mu(r, n, gamma),
    ))
}

/// `KR/(R+1)`, the limit of [`achieved_dof`] as `n` grows.
pub fn dof_limit(k: usize, r: usize) -> Rational {
    Rational::new((k * r) as i64, (r + 1) as i64)
}

/// Everything built for one numeric instance.
pub struct SimoInstance {
    pub channels: ChannelSet,
    pub extension: ExtendedChannel,
    pub t: TMatrixFamily,
    pub precoders: SimoPrecoders,
}

impl SimoInstance {
    pub fn network(&self) -> SimoNetwork<'_> {
        SimoNetwork {
            precoders: &self.precoders,
            channel: &self.extension,
        }
    }
}

/// Samples time-varying `1 x R` channels and builds the full construction.
pub fn build_instance(k: usize, r: usize, n: usize, seed: u64, cap: u64) -> Result<SimoInstance> {
    let (_, mu) = gamma_mu(k, r, n, cap)?;
    let cfg = SystemConfig::new(k, 1, r, Variation::TimeVarying, seed)?;
    let channels = sample_channels(&cfg, mu)?;
    build_instance_from(channels, n)
}

/// Builds the construction on given channels, which must hold at least `μ` slots.
pub fn build_instance_from(channels: ChannelSet, n: usize) -> Result<SimoInstance> {
    let cfg = channels.config();
    if cfg.m != 1 {
        return Err(Error::NotApplicable(format!(
            "SIMO scheme needs M = 1 (got M={})",
            cfg.m
        )));
    }
    let (k, r) = (cfg.k, cfg.n);
    let (_, mu) = gamma_mu_unbounded(k, r, n)?;
    let mu = mu.ok_or_else(|| Error::MuCapExceeded {
        mu: "beyond usize".into(),
        cap: u64::MAX,
    })?;
    let extension = extend_channel(&channels, mu, 0)?;
    let idx = build_index_set(k, r)?;
    let t = build_t_family(&extension, &idx)?;
    let precoders = build_precoders(&t, n, SeedVector::default())?;
    Ok(SimoInstance {
        channels,
        extension,
        t,
        precoders,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DEFAULT_RANK_TOL;

    #[test]
    fn gamma_mu_examples() {
        assert_eq!(gamma_mu(4, 2, 1, DEFAULT_MU_CAP).unwrap(), (8, 768));
        assert_eq!(gamma_mu(3, 1, 1, DEFAULT_MU_CAP).unwrap(), (3, 16));
        match gamma_mu(5, 2, 1, DEFAULT_MU_CAP) {
            Err(Error::MuCapExceeded { mu, cap }) => {
                assert_eq!(mu, (3u64 << 20).to_string());
                assert_eq!(cap, 4096);
            }
            other => panic!("expected cap error, got {other:?}"),
        }
        assert!(gamma_mu(3, 2, 1, DEFAULT_MU_CAP).is_err());
        assert!(gamma_mu(4, 2, 0, DEFAULT_MU_CAP).is_err());
    }

    #[test]
    fn achieved_dof_examples() {
        assert_eq!(achieved_dof(4, 2, 1).unwrap(), Rational::new(1538, 768));
        assert!(achieved_dof(4, 2, 1).unwrap() < dof_limit(4, 2));
        assert_eq!(epsilon_n(4, 2, 1).unwrap(), Rational::new(2 * 256 - 2, 768));
        let mut prev = achieved_dof(4, 2, 1).unwrap();
        for n in 2..40 {
            let cur = achieved_dof(4, 2, n).unwrap();
            assert!(cur >= prev);
            assert!(cur < dof_limit(4, 2));
            prev = cur;
        }
        assert!((dof_limit(4, 2).to_f64() - prev.to_f64()) < 0.3);
        assert!((achieved_dof(4, 2, 100_000).unwrap().to_f64() - 8.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn three_user_instance_passes_and_matches_rank_oracle() {
        let inst = build_instance(3, 1, 1, 17, DEFAULT_MU_CAP).unwrap();
        let p = &inst.precoders;
        assert_eq!((p.v1.ncols(), p.v2.ncols()), (8, 1));
        assert!(p.min_entry > 0.0);
        let report = verify_alignment_numeric(p, &inst.extension, DEFAULT_RANK_TOL).unwrap();
        assert!(report.passed, "{report:?}");
        for rr in &report.receivers {
            assert!(rr.interference_rank <= 16 - rr.streams);
            assert_eq!(rr.joint_rank, rr.streams + rr.interference_rank);
        }
        assert!(column_matching_residual(p, &inst.t).unwrap() < 1e-8);
        assert_eq!(p.aligned_columns.len(), 1);
    }

    #[test]
    fn cardinality_ratio_is_r_over_r_plus_one() {
        for (k, r, n) in [(3, 1, 1), (3, 1, 2), (4, 1, 1)] {
            let (gamma, mu) = gamma_mu(k, r, n, DEFAULT_MU_CAP).unwrap();
            let l = ExponentLayout::standard(gamma, r, n);
            assert_eq!(
                Rational::from_big(l.large_len().into(), BigInt::from(mu)),
                Rational::new(r as i64, r as i64 + 1)
            );
        }
    }
}
