//! Channel sampling and symbol extension.
//!
//! Users are zero-indexed throughout: `matrix(k, j, t)` is the channel from
//! transmitter `j` to receiver `k` at slot `t`, of shape `N x M`.

use faer::MatRef;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::rng::{self, Domain};

pub const DEFAULT_MAGNITUDE_BOUNDS: (f64, f64) = (0.5, 2.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variation {
    TimeVarying,
    Constant,
}

/// Antenna configuration and sampling parameters of a K-user interference channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub variation: Variation,
    pub seed: u64,
    pub magnitude_bounds: (f64, f64),
}

impl SystemConfig {
    pub fn new(k: usize, m: usize, n: usize, variation: Variation, seed: u64) -> Result<Self> {
        let cfg = SystemConfig {
            k,
            m,
            n,
            variation,
            seed,
            magnitude_bounds: DEFAULT_MAGNITUDE_BOUNDS,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_bounds(mut self, lo: f64, hi: f64) -> Result<Self> {
        self.magnitude_bounds = (lo, hi);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.m == 0 || self.n == 0 {
            return Err(Error::InvalidConfig(format!(
                "K, M, N must be positive (got K={}, M={}, N={})",
                self.k, self.m, self.n
            )));
        }
        let (lo, hi) = self.magnitude_bounds;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "magnitude bounds must satisfy 0 < lo < hi < inf (got {lo}, {hi})"
            )));
        }
        Ok(())
    }

    /// `floor(max(M, N) / min(M, N))`.
    pub fn r(&self) -> usize {
        self.m.max(self.n) / self.m.min(self.n)
    }
}

/// Channel matrices for every (receiver, transmitter, slot) triple.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet {
    config: SystemConfig,
    slots: usize,
    // indexed by (t * K + k) * K + j
    entries: Vec<CMat>,
}

pub fn sample_channels(config: &SystemConfig, slots: usize) -> Result<ChannelSet> {
    config.validate()?;
    if slots == 0 {
        return Err(Error::InvalidConfig("at least one slot is required".into()));
    }
    let k = config.k;
    let distinct_slots = match config.variation {
        Variation::TimeVarying => slots,
        Variation::Constant => 1,
    };
    let mut entries = Vec::with_capacity(slots * k * k);
    for t in 0..distinct_slots {
        for rx in 0..k {
            for tx in 0..k {
                entries.push(draw_matrix(config, Domain::Channel, rx, tx, t));
            }
        }
    }
    for _ in distinct_slots..slots {
        entries.extend_from_within(0..k * k);
    }
    Ok(ChannelSet {
        config: config.clone(),
        slots,
        entries,
    })
}

fn draw_matrix(config: &SystemConfig, domain: Domain, rx: usize, tx: usize, t: usize) -> CMat {
    let (lo, hi) = config.magnitude_bounds;
    let mut rng = rng::stream(config.seed, domain, &[rx as u64, tx as u64, t as u64]);
    linalg::random_matrix(&mut rng, config.n, config.m, lo, hi)
}

impl ChannelSet {
    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn users(&self) -> usize {
        self.config.k
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn matrix(&self, rx: usize, tx: usize, t: usize) -> MatRef<'_, Complex64> {
        let k = self.config.k;
        self.entries[(t * k + rx) * k + tx].as_ref()
    }

    /// Copy with every direct channel `H^{[ii]}` redrawn from an independent stream.
    ///
    /// Cross channels are untouched; `salt` selects the fresh realization.
    pub fn resample_direct(&self, salt: u64) -> ChannelSet {
        let mut out = self.clone();
        let k = self.config.k;
        let (lo, hi) = self.config.magnitude_bounds;
        let distinct = match self.config.variation {
            Variation::TimeVarying => self.slots,
            Variation::Constant => 1,
        };
        for t in 0..self.slots {
            for i in 0..k {
                let t_draw = t.min(distinct - 1);
                let mut rng = rng::stream(
                    self.config.seed,
                    Domain::DirectResample,
                    &[salt, i as u64, t_draw as u64],
                );
                out.entries[(t * k + i) * k + i] =
                    linalg::random_matrix(&mut rng, self.config.n, self.config.m, lo, hi);
            }
        }
        out
    }

    pub fn to_dump(&self) -> ChannelDump {
        let k = self.config.k;
        let mut entries = Vec::with_capacity(self.entries.len());
        for t in 0..self.slots {
            for rx in 0..k {
                for tx in 0..k {
                    entries.push(ChannelEntry {
                        rx,
                        tx,
                        t,
                        matrix: matrix_to_pairs(self.matrix(rx, tx, t)),
                    });
                }
            }
        }
        ChannelDump {
            config: self.config.clone(),
            slots: self.slots,
            entries,
        }
    }

    /// Rebuilds a channel set from a dump, validating shapes, coverage and magnitudes.
    pub fn from_dump(dump: &ChannelDump) -> Result<ChannelSet> {
        let cfg = &dump.config;
        cfg.validate()?;
        let k = cfg.k;
        if dump.slots == 0 {
            return Err(Error::InvalidConfig("channel dump has zero slots".into()));
        }
        let expected = dump.slots * k * k;
        if dump.entries.len() != expected {
            return Err(Error::Shape(format!(
                "channel dump has {} entries, expected {expected}",
                dump.entries.len()
            )));
        }
        let mut slots: Vec<Option<CMat>> = vec![None; expected];
        let (lo, hi) = cfg.magnitude_bounds;
        for e in &dump.entries {
            if e.rx >= k || e.tx >= k || e.t >= dump.slots {
                return Err(Error::Shape(format!(
                    "entry ({}, {}, {}) outside K={k}, slots={}",
                    e.rx, e.tx, e.t, dump.slots
                )));
            }
            let m = pairs_to_matrix(&e.matrix, cfg.n, cfg.m).map_err(|msg| {
                Error::Shape(format!("entry ({}, {}, {}): {msg}", e.rx, e.tx, e.t))
            })?;
            let tol = 1e-12 * hi;
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    let a = m[(i, j)].norm();
                    if a < lo - tol || a > hi + tol {
                        return Err(Error::InvalidConfig(format!(
                            "entry ({}, {}, {}) has magnitude {a} outside [{lo}, {hi}]",
                            e.rx, e.tx, e.t
                        )));
                    }
                }
            }
            let slot = &mut slots[(e.t * k + e.rx) * k + e.tx];
            if slot.is_some() {
                return Err(Error::Shape(format!(
                    "duplicate entry ({}, {}, {})",
                    e.rx, e.tx, e.t
                )));
            }
            *slot = Some(m);
        }
        let entries = slots
            .into_iter()
            .map(|m| m.expect("all entries present"))
            .collect();
        Ok(ChannelSet {
            config: cfg.clone(),
            slots: dump.slots,
            entries,
        })
    }
}

/// Serialized channel set: complex entries as `[re, im]` pairs, matrices row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelDump {
    pub config: SystemConfig,
    pub slots: usize,
    pub entries: Vec<ChannelEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelEntry {
    pub rx: usize,
    pub tx: usize,
    pub t: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

pub fn matrix_to_pairs(m: MatRef<'_, Complex64>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

fn pairs_to_matrix(
    rows: &[Vec<[f64; 2]>],
    nrows: usize,
    ncols: usize,
) -> std::result::Result<CMat, String> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        let got_cols = rows.first().map_or(0, |r| r.len());
        return Err(format!(
            "expected {nrows}x{ncols} matrix, got {}x{got_cols}",
            rows.len()
        ));
    }
    let mut m = linalg::zeros(nrows, ncols);
    for (i, row) in rows.iter().enumerate() {
        for (j, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(format!("non-finite value at ({i}, {j})"));
            }
            m[(i, j)] = Complex64::new(re, im);
        }
    }
    Ok(m)
}

/// Block-diagonal symbol extension of a channel set over `mu` consecutive slots.
#[derive(Clone, Debug)]
pub struct ExtendedChannel {
    users: usize,
    rx_antennas: usize,
    tx_antennas: usize,
    mu: usize,
    first_slot: usize,
    // indexed by (b * K + k) * K + j
    blocks: Vec<CMat>,
}

/// Extension over slots `mu*t .. mu*(t+1)`.
pub fn extend_channel(channels: &ChannelSet, mu: usize, t: usize) -> Result<ExtendedChannel> {
    if mu == 0 {
        return Err(Error::InvalidConfig(
            "extension length must be positive".into(),
        ));
    }
    let needed = mu * (t + 1);
    if channels.slots() < needed {
        return Err(Error::SlotsExhausted {
            needed,
            available: channels.slots(),
        });
    }
    let k = channels.users();
    let first = mu * t;
    let mut blocks = Vec::with_capacity(mu * k * k);
    for b in 0..mu {
        for rx in 0..k {
            for tx in 0..k {
                blocks.push(channels.matrix(rx, tx, first + b).to_owned());
            }
        }
    }
    Ok(ExtendedChannel {
        users: k,
        rx_antennas: channels.config().n,
        tx_antennas: channels.config().m,
        mu,
        first_slot: first,
        blocks,
    })
}

/// Extension of length `mu` for constant channels, repeating slot 0.
///
/// Time-varying channels go through [`extend_channel`] so each block uses its own slot.
pub fn extend_constant(channels: &ChannelSet, mu: usize) -> Result<ExtendedChannel> {
    match channels.config().variation {
        Variation::TimeVarying => extend_channel(channels, mu, 0),
        Variation::Constant => {
            let mut ext = extend_channel(channels, 1, 0)?;
            let once = std::mem::take(&mut ext.blocks);
            ext.blocks = (0..mu).flat_map(|_| once.iter().cloned()).collect();
            ext.mu = mu;
            Ok(ext)
        }
    }
}

impl ExtendedChannel {
    pub fn users(&self) -> usize {
        self.users
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn first_slot(&self) -> usize {
        self.first_slot
    }

    pub fn rx_antennas(&self) -> usize {
        self.rx_antennas
    }

    pub fn tx_antennas(&self) -> usize {
        self.tx_antennas
    }

    /// Extended receive dimension `N * mu`.
    pub fn rows(&self) -> usize {
        self.rx_antennas * self.mu
    }

    /// Extended transmit dimension `M * mu`.
    pub fn cols(&self) -> usize {
        self.tx_antennas * self.mu
    }

    pub fn block(&self, rx: usize, tx: usize, b: usize) -> MatRef<'_, Complex64> {
        self.blocks[(b * self.users + rx) * self.users + tx].as_ref()
    }

    /// Dense `(N mu) x (M mu)` extended matrix.
    pub fn matrix(&self, rx: usize, tx: usize) -> CMat {
        let blocks: Vec<_> = (0..self.mu).map(|b| self.block(rx, tx, b)).collect();
        linalg::block_diag(&blocks)
    }

    /// `H̄^{[rx tx]} v`, using the block structure instead of the dense matrix.
    pub fn apply(&self, rx: usize, tx: usize, v: MatRef<'_, Complex64>) -> Result<CMat> {
        if v.nrows() != self.cols() {
            return Err(Error::Shape(format!(
                "extended channel expects {} rows, got {}",
                self.cols(),
                v.nrows()
            )));
        }
        let (n, m) = (self.rx_antennas, self.tx_antennas);
        let mut out = linalg::zeros(self.rows(), v.ncols());
        for b in 0..self.mu {
            let prod = self.block(rx, tx, b) * v.subrows(b * m, m);
            out.as_mut().subrows_mut(b * n, n).copy_from(&prod);
        }
        Ok(out)
    }
}
