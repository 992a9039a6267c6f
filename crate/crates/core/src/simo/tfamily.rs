//! Diagonal T matrices of the symbol-extension scheme.

use num_complex::Complex64;

use super::index::AlignmentIndexSet;
use crate::channel::ExtendedChannel;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Smallest accepted magnitude of a T diagonal entry.
pub const MIN_T_ENTRY: f64 = 1e-12;

/// Diagonals of `T^{[kj]}_i` for every slot of the index set.
#[derive(Clone, Debug)]
pub struct TMatrixFamily {
    pub index: AlignmentIndexSet,
    pub mu: usize,
    diagonals: Vec<Vec<Complex64>>,
}

impl TMatrixFamily {
    pub fn slots(&self) -> usize {
        self.diagonals.len()
    }

    pub fn diagonal(&self, slot: usize) -> &[Complex64] {
        &self.diagonals[slot]
    }

    pub fn get(&self, rx: usize, tx: usize, block: usize) -> Option<&[Complex64]> {
        let p = self.index.position(rx, tx)?;
        Some(self.diagonal(self.index.slot(p, block)))
    }

    /// Dense `mu x mu` diagonal matrix of one slot.
    pub fn dense(&self, slot: usize) -> CMat {
        let d = self.diagonal(slot);
        let mut m = linalg::zeros(self.mu, self.mu);
        for (i, &z) in d.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }
}

/// Builds every T diagonal slot by slot from `R x R` inversions.
///
/// Pairs `(k, R)` with `k > R` (zero-indexed) carry the extra factor `T^{[0 (R+1)]}_0`.
pub fn build_t_family(ext: &ExtendedChannel, idx: &AlignmentIndexSet) -> Result<TMatrixFamily> {
    let r = idx.r;
    if ext.tx_antennas() != 1 || ext.rx_antennas() != r || ext.users() != idx.k {
        return Err(Error::Shape(format!(
            "T family for K={}, R={r} needs a K-user 1 x R extension (got K={}, {} x {})",
            idx.k,
            ext.users(),
            ext.tx_antennas(),
            ext.rx_antennas()
        )));
    }
    let mu = ext.mu();
    let mut diagonals = vec![vec![Complex64::new(0.0, 0.0); mu]; idx.gamma];
    let by_rx: Vec<Vec<usize>> = (0..idx.k)
        .map(|rx| {
            (0..idx.pairs.len())
                .filter(|&p| idx.pairs[p].rx == rx)
                .collect()
        })
        .collect();

    for kappa in 0..mu {
        for (rx, pairs) in by_rx.iter().enumerate() {
            if pairs.is_empty() {
                continue;
            }
            let stack: Vec<_> = idx
                .stack_users(rx)
                .into_iter()
                .map(|u| ext.block(rx, u, kappa))
                .collect();
            let s = linalg::hstack(&stack)?;
            let rhs: Vec<_> = pairs
                .iter()
                .map(|&p| ext.block(rx, idx.pairs[p].tx, kappa))
                .collect();
            let b = linalg::hstack(&rhs)?;
            let context = format!("receiver {rx}, slot {}", ext.first_slot() + kappa);
            let x = linalg::solve(s.as_ref(), b.as_ref(), &context)?;
            for (col, &p) in pairs.iter().enumerate() {
                for i in 0..r {
                    diagonals[idx.slot(p, i)][kappa] = x[(i, col)];
                }
            }
        }
    }

    let anchor = idx.anchor_slot();
    let anchor_diag = diagonals[anchor].clone();
    for (p, pair) in idx.pairs.iter().enumerate() {
        if idx.is_special(*pair) {
            for i in 0..r {
                for (z, &a) in diagonals[idx.slot(p, i)].iter_mut().zip(&anchor_diag) {
                    *z *= a;
                }
            }
        }
    }

    for (slot, d) in diagonals.iter().enumerate() {
        if let Some(kappa) = d
            .iter()
            .position(|z| !(z.norm() > MIN_T_ENTRY) || !z.is_finite())
        {
            let l = idx.slot_label(slot);
            return Err(Error::Numerical(format!(
                "T diagonal ({}, {}, {}) vanishes at slot {kappa}",
                l.rx, l.tx, l.block
            )));
        }
    }

    Ok(TMatrixFamily {
        index: idx.clone(),
        mu,
        diagonals,
    })
}
