//! Power-product precoder sets and their numeric verification.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::exponents::{ExponentLayout, ExponentTuple};
use super::tfamily::TMatrixFamily;
use super::{epsilon_n, gamma_mu_unbounded};
use crate::channel::ExtendedChannel;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::network::{verify_network, AlignmentReport, Network};
use crate::rational::Rational;

/// Common starting vector `w` that every power product is applied to.
///
/// Any `w` without zero entries keeps every alignment relation, since all T
/// matrices are diagonal. `Equilibrated` picks the positive `w` that balances
/// the magnitudes of the large precoder set (Sinkhorn scaling in the log
/// domain); with `AllOnes` the monomials spread over hundreds of orders of
/// magnitude and the precoders lose numerical rank at realistic sizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SeedVector {
    AllOnes,
    Equilibrated { iterations: usize },
}

impl Default for SeedVector {
    fn default() -> Self {
        SeedVector::Equilibrated { iterations: 100 }
    }
}

#[derive(Clone, Debug)]
pub struct SimoPrecoders {
    pub k: usize,
    pub r: usize,
    pub n: usize,
    pub gamma: usize,
    pub mu: usize,
    /// Unit-norm columns, one per large-set tuple.
    pub v1: CMat,
    pub v2: CMat,
    pub v1_tags: Vec<ExponentTuple>,
    pub v2_tags: Vec<ExponentTuple>,
    pub epsilon_n: Rational,
    /// Magnitudes of `w` (all positive).
    pub seed_vector: Vec<f64>,
    /// Columns of `v1` equal to the anchor T matrix applied to `v2`, in `v2` order.
    pub aligned_columns: Vec<usize>,
    pub min_entry: f64,
}

impl SimoPrecoders {
    /// Precoder of user `u`: the large set for `u <= R`, the small set otherwise.
    pub fn for_user(&self, u: usize) -> &CMat {
        if u <= self.r {
            &self.v1
        } else {
            &self.v2
        }
    }

    pub fn streams(&self, u: usize) -> usize {
        self.for_user(u).ncols()
    }
}

struct LogTable {
    mu: usize,
    // per slot, ln of each diagonal entry
    logs: Vec<Vec<Complex64>>,
}

impl LogTable {
    fn new(t: &TMatrixFamily) -> Self {
        LogTable {
            mu: t.mu,
            logs: (0..t.slots())
                .map(|s| t.diagonal(s).iter().map(|z| z.ln()).collect())
                .collect(),
        }
    }

    fn column_log(&self, tag: &ExponentTuple, out: &mut [Complex64]) {
        out.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for (s, &a) in tag.0.iter().enumerate() {
            let a = a as f64;
            for (z, l) in out.iter_mut().zip(&self.logs[s]) {
                *z += l * a;
            }
        }
    }
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + values.map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Row scaling (in logs) that balances the magnitude matrix `exp(a)`.
///
/// `a` is column-major with `rows` rows.
fn sinkhorn_rows(a: &[f64], rows: usize, iterations: usize) -> Vec<f64> {
    let cols = a.len() / rows;
    let mut r = vec![0.0; rows];
    let mut c = vec![0.0; cols];
    let mut row_max = vec![f64::NEG_INFINITY; rows];
    let mut row_sum = vec![0.0; rows];
    for _ in 0..iterations {
        for (j, cj) in c.iter_mut().enumerate() {
            let col = &a[j * rows..(j + 1) * rows];
            *cj = -log_sum_exp(col.iter().zip(&r).map(|(x, y)| x + y));
        }
        row_max.iter_mut().for_each(|m| *m = f64::NEG_INFINITY);
        for (j, cj) in c.iter().enumerate() {
            for (i, x) in a[j * rows..(j + 1) * rows].iter().enumerate() {
                row_max[i] = row_max[i].max(x + cj);
            }
        }
        row_sum.iter_mut().for_each(|s| *s = 0.0);
        for (j, cj) in c.iter().enumerate() {
            for (i, x) in a[j * rows..(j + 1) * rows].iter().enumerate() {
                row_sum[i] += (x + cj - row_max[i]).exp();
            }
        }
        for i in 0..rows {
            r[i] = -(row_max[i] + row_sum[i].ln());
        }
    }
    let top = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    r.iter().map(|x| x - top).collect()
}

fn tags_of(layout: &ExponentLayout, large: bool) -> Vec<ExponentTuple> {
    if large {
        layout.large_tuples().collect()
    } else {
        layout.small_tuples().collect()
    }
}

fn build_columns(table: &LogTable, tags: &[ExponentTuple], log_w: &[f64]) -> CMat {
    let mu = table.mu;
    let mut out = linalg::zeros(mu, tags.len());
    let mut buf = vec![Complex64::new(0.0, 0.0); mu];
    for (c, tag) in tags.iter().enumerate() {
        table.column_log(tag, &mut buf);
        for (z, &lw) in buf.iter_mut().zip(log_w) {
            z.re += lw;
        }
        let top = buf.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        for (i, z) in buf.iter().enumerate() {
            out[(i, c)] = Complex64::new(z.re - top, z.im).exp();
        }
    }
    linalg::normalize_columns(&mut out);
    out
}

/// Builds both precoder sets from the T family for extension order `n`.
pub fn build_precoders(t: &TMatrixFamily, n: usize, seed: SeedVector) -> Result<SimoPrecoders> {
    let idx = &t.index;
    let (gamma, mu) = gamma_mu_unbounded(idx.k, idx.r, n)?;
    if mu != Some(t.mu) {
        return Err(Error::Shape(format!(
            "T family has length {}, extension order {n} needs {}",
            t.mu,
            mu.map_or_else(|| "more than usize::MAX".to_string(), |m| m.to_string())
        )));
    }
    let layout = ExponentLayout::standard(gamma, idx.r, n);
    let v1_tags = tags_of(&layout, true);
    let v2_tags = tags_of(&layout, false);
    let table = LogTable::new(t);

    let log_w = match seed {
        SeedVector::AllOnes => vec![0.0; t.mu],
        SeedVector::Equilibrated { iterations } => {
            let mut a = Vec::with_capacity(t.mu * v1_tags.len());
            let mut buf = vec![Complex64::new(0.0, 0.0); t.mu];
            for tag in &v1_tags {
                table.column_log(tag, &mut buf);
                a.extend(buf.iter().map(|z| z.re));
            }
            sinkhorn_rows(&a, t.mu, iterations)
        }
    };

    let v1 = build_columns(&table, &v1_tags, &log_w);
    let v2 = build_columns(&table, &v2_tags, &log_w);

    let min_entry = v1
        .col_iter()
        .chain(v2.col_iter())
        .flat_map(|c| c.iter().map(|z| z.norm()).collect::<Vec<_>>())
        .fold(f64::INFINITY, f64::min);
    if !(min_entry > 0.0) || !min_entry.is_finite() {
        return Err(Error::Numerical(format!(
            "precoder entry vanished (min magnitude {min_entry:e})"
        )));
    }

    let lookup: HashMap<&ExponentTuple, usize> =
        v1_tags.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let anchor = idx.anchor_slot();
    let aligned_columns = v2_tags
        .iter()
        .map(|tag| {
            lookup
                .get(&tag.incremented(anchor))
                .copied()
                .ok_or_else(|| {
                    Error::Numerical(
                        "anchor image of a small-set tuple is missing from the large set".into(),
                    )
                })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SimoPrecoders {
        k: idx.k,
        r: idx.r,
        n,
        gamma,
        mu: t.mu,
        v1,
        v2,
        v1_tags,
        v2_tags,
        epsilon_n: epsilon_n(idx.k, idx.r, n)?,
        seed_vector: log_w.iter().map(|x| x.exp()).collect(),
        aligned_columns,
        min_entry,
    })
}

/// The SIMO network seen through one symbol extension.
pub struct SimoNetwork<'a> {
    pub precoders: &'a SimoPrecoders,
    pub channel: &'a ExtendedChannel,
}

impl Network for SimoNetwork<'_> {
    fn users(&self) -> usize {
        self.precoders.k
    }

    fn receive_dim(&self) -> usize {
        self.channel.rows()
    }

    fn extension(&self) -> usize {
        self.channel.mu()
    }

    fn streams(&self, user: usize) -> usize {
        self.precoders.streams(user)
    }

    fn effective(&self, rx: usize, tx: usize) -> Result<CMat> {
        self.channel
            .apply(rx, tx, self.precoders.for_user(tx).as_ref())
    }
}

/// Rank checks at every receiver of the extended channel.
pub fn verify_alignment_numeric(
    p: &SimoPrecoders,
    ext: &ExtendedChannel,
    tol: f64,
) -> Result<AlignmentReport> {
    if ext.mu() != p.mu || ext.users() != p.k || ext.rx_antennas() != p.r || ext.tx_antennas() != 1
    {
        return Err(Error::Shape(format!(
            "precoders for K={}, R={}, mu={} do not fit a {}-user {}x{} extension of length {}",
            p.k,
            p.r,
            p.mu,
            ext.users(),
            ext.rx_antennas(),
            ext.tx_antennas(),
            ext.mu()
        )));
    }
    verify_network(
        &SimoNetwork {
            precoders: p,
            channel: ext,
        },
        tol,
    )
}

/// Largest distance between a unit-normalized column of `T_s v2` and the span
/// of its tagged partner in `v1`, over all small-set columns and all slots.
pub fn column_matching_residual(p: &SimoPrecoders, t: &TMatrixFamily) -> Result<f64> {
    let lookup: HashMap<&ExponentTuple, usize> =
        p.v1_tags.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut worst: f64 = 0.0;
    for (c, tag) in p.v2_tags.iter().enumerate() {
        for s in 0..t.slots() {
            let partner = *lookup.get(&tag.incremented(s)).ok_or_else(|| {
                Error::Numerical(format!("slot {s} image of small column {c} is not tagged"))
            })?;
            let d = t.diagonal(s);
            let x: Vec<Complex64> = (0..p.mu).map(|i| d[i] * p.v2[(i, c)]).collect();
            let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let y = p.v1.col(partner);
            let inner: Complex64 = (0..p.mu).map(|i| y[i].conj() * x[i] / norm).sum();
            let resid = (0..p.mu)
                .map(|i| (x[i] / norm - inner * y[i]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(resid);
        }
    }
    Ok(worst)
}
