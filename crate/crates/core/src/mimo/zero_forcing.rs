use super::{min_normalized_entry, pad_with_random, PrecoderSet, Scheme};
use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg;
use crate::rational::Rational;

/// `M` random streams for each of the first `k` users; `k` must not exceed
/// `R = floor(N/M)`. Users beyond `k` stay silent.
pub fn build_zero_forcing(channels: &ChannelSet, k: usize) -> Result<PrecoderSet> {
    let cfg = channels.config();
    if k == 0 || k > cfg.k {
        return Err(Error::InvalidConfig(format!(
            "cannot serve {k} of {} users",
            cfg.k
        )));
    }
    if cfg.m > cfg.n {
        return Err(Error::NotApplicable(format!(
            "zero forcing precoders need M <= N (got M={}, N={}); swap antenna roles first",
            cfg.m, cfg.n
        )));
    }
    let r = cfg.n / cfg.m;
    if k > r {
        return Err(Error::NotApplicable(format!(
            "zero forcing needs K <= R (K={k}, R={r})"
        )));
    }
    zero_forcing_over(channels, k)
}

pub(crate) fn zero_forcing_over(channels: &ChannelSet, k: usize) -> Result<PrecoderSet> {
    let cfg = channels.config();
    let m = cfg.m;
    let allocation: Vec<usize> = (0..cfg.k).map(|u| if u < k { m } else { 0 }).collect();
    let precoders = allocation
        .iter()
        .enumerate()
        .map(|(u, &d)| pad_with_random(channels, Scheme::ZeroForcing, u, linalg::zeros(m, 0), d))
        .collect::<Result<Vec<_>>>()?;
    let set = PrecoderSet {
        scheme: Scheme::ZeroForcing,
        min_entry: min_normalized_entry(&precoders),
        precoders,
        allocation,
        extension: 1,
        block_width: m,
        claimed_dof: Rational::integer((k * m) as i64),
        equations: Vec::new(),
        build_checks: Vec::new(),
        fallback: None,
    };
    set.validate(m)?;
    Ok(set)
}
