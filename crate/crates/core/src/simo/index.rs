use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A (receiver, transmitter) pair of the alignment index set, zero-indexed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexPair {
    pub rx: usize,
    pub tx: usize,
}

/// One exponent slot: a pair of the index set together with a block row `i < R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SlotLabel {
    pub rx: usize,
    pub tx: usize,
    pub block: usize,
}

/// The pairs whose alignment conditions generate the precoder sets.
///
/// Users `0..=R` carry the large precoder set, users `R+1..K` the small one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentIndexSet {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "R")]
    pub r: usize,
    pub pairs: Vec<IndexPair>,
    pub gamma: usize,
}

pub(crate) fn check_simo_params(k: usize, r: usize) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidConfig("R must be at least 1".into()));
    }
    if k <= r + 1 {
        return Err(Error::NotApplicable(format!(
            "symbol-extension alignment needs K > R + 1 (got K={k}, R={r})"
        )));
    }
    Ok(())
}

pub fn build_index_set(k: usize, r: usize) -> Result<AlignmentIndexSet> {
    check_simo_params(k, r)?;
    let mut pairs = Vec::with_capacity(k * (k - r - 1));
    for rx in 0..=r {
        pairs.extend((r + 1..k).map(|tx| IndexPair { rx, tx }));
    }
    for rx in r + 1..k {
        pairs.extend((r..k).filter(|&tx| tx != rx).map(|tx| IndexPair { rx, tx }));
    }
    let gamma = pairs.len() * r;
    Ok(AlignmentIndexSet { k, r, pairs, gamma })
}

impl AlignmentIndexSet {
    /// Slot index of `(pair, block)`; blocks vary fastest.
    pub fn slot(&self, pair: usize, block: usize) -> usize {
        pair * self.r + block
    }

    pub fn slot_label(&self, slot: usize) -> SlotLabel {
        let p = self.pairs[slot / self.r];
        SlotLabel {
            rx: p.rx,
            tx: p.tx,
            block: slot % self.r,
        }
    }

    pub fn position(&self, rx: usize, tx: usize) -> Option<usize> {
        self.pairs.iter().position(|p| p.rx == rx && p.tx == tx)
    }

    /// Users whose channels are stacked and inverted at receiver `rx`.
    pub fn stack_users(&self, rx: usize) -> Vec<usize> {
        if rx <= self.r {
            (0..=self.r).filter(|&u| u != rx).collect()
        } else {
            (0..self.r).collect()
        }
    }

    /// Pairs whose T matrix carries the extra right factor `T^{[0 (R+1)]}_0`.
    pub fn is_special(&self, pair: IndexPair) -> bool {
        pair.rx > self.r && pair.tx == self.r
    }

    /// Slot of the block that identifies the aligned part of the large set.
    pub fn anchor_slot(&self) -> usize {
        let p = self
            .position(0, self.r + 1)
            .expect("(0, R+1) is always in the index set");
        self.slot(p, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(idx: &AlignmentIndexSet) -> Vec<(usize, usize)> {
        idx.pairs.iter().map(|p| (p.rx + 1, p.tx + 1)).collect()
    }

    #[test]
    fn four_user_example() {
        let idx = build_index_set(4, 2).unwrap();
        assert_eq!(pairs(&idx), vec![(1, 4), (2, 4), (3, 4), (4, 3)]);
        assert_eq!(idx.gamma, 8);
    }

    #[test]
    fn sizes() {
        assert_eq!(build_index_set(5, 2).unwrap().pairs.len(), 10);
        for r in 1..6 {
            let idx = build_index_set(r + 2, r).unwrap();
            assert_eq!(idx.pairs.len(), r + 2);
            assert_eq!(idx.gamma, idx.pairs.len() * r);
        }
        for k in 3..9 {
            for r in 1..k - 1 {
                let idx = build_index_set(k, r).unwrap();
                assert_eq!(idx.pairs.len(), k * (k - r - 1));
                assert_eq!(idx.gamma, k * r * (k - r - 1));
            }
        }
    }

    #[test]
    fn rejects_small_k() {
        assert!(build_index_set(3, 2).is_err());
        assert!(build_index_set(3, 0).is_err());
    }

    #[test]
    fn stacks_and_special_pairs() {
        let idx = build_index_set(5, 2).unwrap();
        assert_eq!(idx.stack_users(0), vec![1, 2]);
        assert_eq!(idx.stack_users(2), vec![0, 1]);
        assert_eq!(idx.stack_users(4), vec![0, 1]);
        let special: Vec<_> = idx.pairs.iter().filter(|p| idx.is_special(**p)).collect();
        assert_eq!(special.len(), 2);
        assert_eq!(
            idx.slot_label(idx.anchor_slot()),
            SlotLabel {
                rx: 0,
                tx: 3,
                block: 0
            }
        );
    }
}
