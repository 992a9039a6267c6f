//! Constant-coefficient alignment for the `R+2`-user MIMO channel with `M`
//! transmit and `RM` receive antennas, plus zero forcing for `K <= R`.

mod allocation;
mod chain;
mod index_map;
mod theorem4;
mod theorem5;
mod zero_forcing;

use serde::{Deserialize, Serialize};

pub use allocation::{
    allocate_dof_theorem4, allocate_dof_theorem5, distribute_surplus, theorem4_block_width,
    theorem5_extension,
};
pub use chain::{
    stacked_operator, verify_chain, BlockRef, ChainReport, Equation, EquationCheck, Relation,
    Target,
};
pub use index_map::IndexMap;
pub use theorem4::{build_example1, build_theorem4, select_eigenvectors};
pub use theorem5::{build_example2, build_theorem5};
pub use zero_forcing::build_zero_forcing;

use crate::channel::{extend_constant, ChannelSet, ExtendedChannel, Variation};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::network::{verify_network, AlignmentReport, Network};
use crate::rational::Rational;
use crate::rng::{self, Domain};

/// Redraws allowed for random precoder columns before giving up.
pub const MAX_REDRAWS: u64 = 8;

/// Largest chain residual accepted after construction.
pub const CHAIN_TOLERANCE: f64 = 1e-9;

/// Largest principal-angle sine accepted for span relations.
pub const SPAN_TOLERANCE: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    ZeroForcing,
    Theorem4,
    Theorem5,
    Example1,
    Example2,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::ZeroForcing => "zero_forcing",
            Scheme::Theorem4 => "theorem4",
            Scheme::Theorem5 => "theorem5",
            Scheme::Example1 => "example1",
            Scheme::Example2 => "example2",
        }
    }

    fn code(self) -> u64 {
        match self {
            Scheme::ZeroForcing => 0,
            Scheme::Theorem4 => 4,
            Scheme::Theorem5 => 5,
            Scheme::Example1 => 41,
            Scheme::Example2 => 52,
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zf" | "zero_forcing" | "zero-forcing" => Ok(Scheme::ZeroForcing),
            "theorem4" => Ok(Scheme::Theorem4),
            "theorem5" => Ok(Scheme::Theorem5),
            "example1" => Ok(Scheme::Example1),
            "example2" => Ok(Scheme::Example2),
            other => Err(Error::InvalidConfig(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Precoders of one constant-channel construction.
///
/// `precoders[i]` is `(M E) x d_i`. The first `blocks * block_width` columns
/// are the chain-determined blocks; the rest are random.
#[derive(Clone, Debug)]
pub struct PrecoderSet {
    pub scheme: Scheme,
    pub precoders: Vec<CMat>,
    pub allocation: Vec<usize>,
    pub extension: usize,
    pub block_width: usize,
    /// Total streams per channel use claimed by the construction.
    pub claimed_dof: Rational,
    pub equations: Vec<Equation>,
    /// Checks recorded while solving the chain.
    pub build_checks: Vec<EquationCheck>,
    /// Set when the requested scheme did not apply and a fallback was built.
    pub fallback: Option<String>,
    pub min_entry: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecoderSummary {
    pub scheme: Scheme,
    pub allocation: Vec<usize>,
    pub extension: usize,
    pub total_streams: usize,
    pub dof_per_use: Rational,
    pub claimed_dof: Rational,
    pub block_width: usize,
    pub equations: usize,
    pub fallback: Option<String>,
    pub min_entry: f64,
}

impl PrecoderSet {
    pub fn users(&self) -> usize {
        self.precoders.len()
    }

    pub fn total_streams(&self) -> usize {
        self.allocation.iter().sum()
    }

    pub fn dof_per_use(&self) -> Rational {
        Rational::new(self.total_streams() as i64, self.extension as i64)
    }

    pub fn summary(&self) -> PrecoderSummary {
        PrecoderSummary {
            scheme: self.scheme,
            allocation: self.allocation.clone(),
            extension: self.extension,
            total_streams: self.total_streams(),
            dof_per_use: self.dof_per_use(),
            claimed_dof: self.claimed_dof.clone(),
            block_width: self.block_width,
            equations: self.equations.len(),
            fallback: self.fallback.clone(),
            min_entry: self.min_entry,
        }
    }

    /// Checks shape, rank, total and (for extended schemes) nonzero entries.
    pub fn validate(&self, rows: usize) -> Result<()> {
        if self.precoders.len() != self.allocation.len() {
            return Err(Error::Shape("one precoder per user expected".into()));
        }
        for (i, (v, &d)) in self.precoders.iter().zip(&self.allocation).enumerate() {
            if v.ncols() != d || (d > 0 && v.nrows() != rows) {
                return Err(Error::Shape(format!(
                    "user {} precoder is {}x{}, expected {rows}x{d}",
                    i + 1,
                    v.nrows(),
                    v.ncols()
                )));
            }
            if linalg::numeric_rank(v.as_ref(), linalg::DEFAULT_RANK_TOL)? != d {
                return Err(Error::RankDeficient(format!("user {} precoder", i + 1)));
            }
        }
        if self.dof_per_use() != self.claimed_dof {
            return Err(Error::Numerical(format!(
                "allocation gives {} per use, scheme claims {}",
                self.dof_per_use(),
                self.claimed_dof
            )));
        }
        if self.extension > 1 && !(self.min_entry > 0.0) {
            return Err(Error::Numerical(
                "zero precoder entry in an extended scheme".into(),
            ));
        }
        Ok(())
    }

    /// Copies with unit-norm columns.
    pub fn normalized(&self) -> Vec<CMat> {
        self.precoders
            .iter()
            .map(|v| {
                let mut v = v.clone();
                linalg::normalize_columns(&mut v);
                v
            })
            .collect()
    }
}

/// Smallest entry magnitude over unit-normalized columns.
pub(crate) fn min_normalized_entry(precoders: &[CMat]) -> f64 {
    precoders
        .iter()
        .flat_map(|v| {
            (0..v.ncols()).flat_map(move |j| {
                let n = linalg::column_norm(v.as_ref(), j);
                (0..v.nrows()).map(move |i| v[(i, j)].norm() / n)
            })
        })
        .fold(f64::INFINITY, f64::min)
}

/// Extra random columns appended to `base`, redrawn until the result has full
/// column rank.
pub(crate) fn pad_with_random(
    channels: &ChannelSet,
    scheme: Scheme,
    user: usize,
    base: CMat,
    total: usize,
) -> Result<CMat> {
    let extra = total.checked_sub(base.ncols()).ok_or_else(|| {
        Error::Shape(format!(
            "user {} already has more than {total} columns",
            user + 1
        ))
    })?;
    if extra == 0 {
        return check_full_rank(base, user);
    }
    let (lo, hi) = channels.config().magnitude_bounds;
    for attempt in 0..MAX_REDRAWS {
        let mut g = rng::stream(
            channels.config().seed,
            Domain::Precoder,
            &[scheme.code(), user as u64, attempt],
        );
        let fresh = linalg::random_matrix(&mut g, base.nrows(), extra, lo, hi);
        let v = if base.ncols() == 0 {
            fresh
        } else {
            linalg::hstack(&[base.as_ref(), fresh.as_ref()])?
        };
        if linalg::numeric_rank(v.as_ref(), linalg::DEFAULT_RANK_TOL)? == total {
            return Ok(v);
        }
    }
    Err(Error::RankDeficient(format!(
        "user {} precoder stayed rank deficient after {MAX_REDRAWS} redraws",
        user + 1
    )))
}

fn check_full_rank(v: CMat, user: usize) -> Result<CMat> {
    if linalg::numeric_rank(v.as_ref(), linalg::DEFAULT_RANK_TOL)? == v.ncols() {
        Ok(v)
    } else {
        Err(Error::RankDeficient(format!(
            "user {} chain blocks",
            user + 1
        )))
    }
}

/// Random `rows x cols` matrix from the channel distribution, on the precoder stream.
pub(crate) fn random_block(
    channels: &ChannelSet,
    scheme: Scheme,
    tag: u64,
    rows: usize,
    cols: usize,
) -> CMat {
    let (lo, hi) = channels.config().magnitude_bounds;
    let mut g = rng::stream(
        channels.config().seed,
        Domain::Precoder,
        &[scheme.code(), tag],
    );
    linalg::random_matrix(&mut g, rows, cols, lo, hi)
}

pub(crate) fn require_constant(channels: &ChannelSet) -> Result<()> {
    match channels.config().variation {
        Variation::Constant => Ok(()),
        Variation::TimeVarying => Err(Error::NotApplicable(
            "constant-coefficient schemes need constant channels".into(),
        )),
    }
}

/// Checks `K = R+2`, `M` and `N = RM` against the channel configuration.
pub(crate) fn require_shape(channels: &ChannelSet, r: usize, m: usize) -> Result<()> {
    let cfg = channels.config();
    if cfg.k != r + 2 || cfg.m != m || cfg.n != r * m {
        return Err(Error::InvalidConfig(format!(
            "scheme expects K={}, M={m}, N={} but channels have K={}, M={}, N={}",
            r + 2,
            r * m,
            cfg.k,
            cfg.m,
            cfg.n
        )));
    }
    Ok(())
}

/// Dispatches on the scheme name. `r` and `m` are ignored by the examples.
pub fn build_scheme(
    channels: &ChannelSet,
    scheme: Scheme,
    r: usize,
    m: usize,
) -> Result<PrecoderSet> {
    match scheme {
        Scheme::ZeroForcing => build_zero_forcing(channels, channels.config().k),
        Scheme::Theorem4 => build_theorem4(channels, r, m),
        Scheme::Theorem5 => build_theorem5(channels, r, m),
        Scheme::Example1 => build_example1(channels),
        Scheme::Example2 => build_example2(channels),
    }
}

/// `(K, M, N)` of the channels a scheme runs on.
pub fn scheme_dimensions(scheme: Scheme, r: usize, m: usize) -> (usize, usize, usize) {
    match scheme {
        Scheme::ZeroForcing => (r, m, r * m),
        Scheme::Theorem4 | Scheme::Theorem5 => (r + 2, m, r * m),
        Scheme::Example1 => (4, 4, 8),
        Scheme::Example2 => (4, 2, 4),
    }
}

/// A precoded constant channel seen through `extension` channel uses.
pub struct ConstantNetwork {
    channel: ExtendedChannel,
    precoders: Vec<CMat>,
}

impl ConstantNetwork {
    pub fn new(channels: &ChannelSet, set: &PrecoderSet) -> Result<Self> {
        if channels.users() != set.users() {
            return Err(Error::Shape(format!(
                "{} precoders for {} users",
                set.users(),
                channels.users()
            )));
        }
        let channel = extend_constant(channels, set.extension)?;
        set.validate(channel.cols())?;
        Ok(ConstantNetwork {
            channel,
            precoders: set.normalized(),
        })
    }

    pub fn channel(&self) -> &ExtendedChannel {
        &self.channel
    }

    pub fn precoder(&self, user: usize) -> &CMat {
        &self.precoders[user]
    }
}

impl Network for ConstantNetwork {
    fn users(&self) -> usize {
        self.precoders.len()
    }

    fn receive_dim(&self) -> usize {
        self.channel.rows()
    }

    fn extension(&self) -> usize {
        self.channel.mu()
    }

    fn streams(&self, user: usize) -> usize {
        self.precoders[user].ncols()
    }

    fn effective(&self, rx: usize, tx: usize) -> Result<CMat> {
        let v = &self.precoders[tx];
        if v.ncols() == 0 {
            return Ok(linalg::zeros(self.channel.rows(), 0));
        }
        self.channel.apply(rx, tx, v.as_ref())
    }
}

/// Rank checks of a constant-channel construction at every receiver.
pub fn verify_constant(
    channels: &ChannelSet,
    set: &PrecoderSet,
    tol: f64,
) -> Result<AlignmentReport> {
    verify_network(&ConstantNetwork::new(channels, set)?, tol)
}

/// Re-evaluates the construction's chain equations on `channels`.
pub fn verify_equations(channels: &ChannelSet, set: &PrecoderSet) -> Result<ChainReport> {
    let ext = extend_constant(channels, set.extension)?;
    verify_chain(&ext, &set.equations, &set.precoders, set.block_width)
}
