//! Exponent tuples and the symbolic containment check.
//!
//! Each precoder column is a product of powers of the diagonal T matrices, so
//! it is identified by its exponent tuple. Applying `T_s` to a column adds one
//! to slot `s`. The large and small precoder sets are unions of boxes (products
//! of integer ranges, one box per block `m`), so every condition can be checked
//! box by box without enumerating tuples.

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::index::{build_index_set, SlotLabel};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExponentTuple(pub Vec<u32>);

impl ExponentTuple {
    pub fn slots(&self) -> usize {
        self.0.len()
    }

    pub fn incremented(&self, slot: usize) -> ExponentTuple {
        let mut t = self.clone();
        t.0[slot] += 1;
        t
    }
}

/// Inclusive exponent range per slot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentBox {
    pub block: usize,
    pub ranges: Vec<(u32, u32)>,
}

impl ExponentBox {
    pub fn uniform(block: usize, slots: usize, lo: u32, hi: u32) -> Self {
        ExponentBox {
            block,
            ranges: vec![(lo, hi); slots],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.iter().any(|&(lo, hi)| lo > hi)
    }

    pub fn len(&self) -> BigUint {
        if self.is_empty() {
            return BigUint::default();
        }
        self.ranges.iter().fold(BigUint::one(), |acc, &(lo, hi)| {
            acc * BigUint::from(hi - lo + 1)
        })
    }

    pub fn contains(&self, t: &ExponentTuple) -> bool {
        t.0.len() == self.ranges.len()
            && t.0
                .iter()
                .zip(&self.ranges)
                .all(|(&a, &(lo, hi))| lo <= a && a <= hi)
    }

    pub fn contains_box(&self, other: &ExponentBox) -> bool {
        other.ranges.len() == self.ranges.len()
            && other
                .ranges
                .iter()
                .zip(&self.ranges)
                .all(|(&(olo, ohi), &(lo, hi))| lo <= olo && ohi <= hi)
    }

    pub fn shifted(&self, slot: usize) -> ExponentBox {
        let mut b = self.clone();
        b.ranges[slot].0 += 1;
        b.ranges[slot].1 += 1;
        b
    }

    pub fn lower_corner(&self) -> ExponentTuple {
        ExponentTuple(self.ranges.iter().map(|r| r.0).collect())
    }

    /// All tuples in lexicographic order, last slot fastest.
    pub fn tuples(&self) -> BoxTuples<'_> {
        BoxTuples {
            bx: self,
            next: (!self.is_empty()).then(|| self.lower_corner()),
        }
    }
}

pub struct BoxTuples<'a> {
    bx: &'a ExponentBox,
    next: Option<ExponentTuple>,
}

impl Iterator for BoxTuples<'_> {
    type Item = ExponentTuple;

    fn next(&mut self) -> Option<ExponentTuple> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for s in (0..succ.0.len()).rev() {
            let (lo, hi) = self.bx.ranges[s];
            if succ.0[s] < hi {
                succ.0[s] += 1;
                self.next = Some(succ);
                break;
            }
            succ.0[s] = lo;
        }
        Some(current)
    }
}

/// The large and small tuple sets as unions of boxes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentLayout {
    pub slots: usize,
    pub large: Vec<ExponentBox>,
    pub small: Vec<ExponentBox>,
}

impl ExponentLayout {
    /// Block `m < R` uses exponents `m(n+1)+1 ..= (m+1)(n+1)` in the large set
    /// and `m(n+1)+1 ..= m(n+1)+n` in the small set.
    pub fn standard(slots: usize, r: usize, n: usize) -> Self {
        let n = n as u32;
        let large = (0..r)
            .map(|m| {
                let base = m as u32 * (n + 1);
                ExponentBox::uniform(m, slots, base + 1, base + n + 1)
            })
            .collect();
        let small = (0..r)
            .map(|m| {
                let base = m as u32 * (n + 1);
                ExponentBox::uniform(m, slots, base + 1, base + n)
            })
            .collect();
        ExponentLayout {
            slots,
            large,
            small,
        }
    }

    pub fn large_len(&self) -> BigUint {
        self.large.iter().map(ExponentBox::len).sum()
    }

    pub fn small_len(&self) -> BigUint {
        self.small.iter().map(ExponentBox::len).sum()
    }

    pub fn large_tuples(&self) -> impl Iterator<Item = ExponentTuple> + '_ {
        self.large.iter().flat_map(ExponentBox::tuples)
    }

    pub fn small_tuples(&self) -> impl Iterator<Item = ExponentTuple> + '_ {
        self.small.iter().flat_map(ExponentBox::tuples)
    }

    pub fn contains_large(&self, t: &ExponentTuple) -> bool {
        self.large.iter().any(|b| b.contains(t))
    }

    /// Decreases the upper end of one large-set range by one.
    pub fn shrink_large(&mut self, block: usize, slot: usize) {
        self.large[block].ranges[slot].1 -= 1;
    }

    /// Boxes must share the slot count and the non-empty large boxes must use
    /// disjoint ranges in every slot. With at least two slots this makes a box
    /// lie in the union of large boxes exactly when it lies in one of them.
    fn validate(&self) -> Result<()> {
        if self.slots < 2 {
            return Err(Error::InvalidConfig(
                "exponent layouts need at least two slots".into(),
            ));
        }
        let all = self.large.iter().chain(&self.small);
        if all.clone().any(|b| b.ranges.len() != self.slots) {
            return Err(Error::Shape("exponent box with wrong slot count".into()));
        }
        let live: Vec<_> = self.large.iter().filter(|b| !b.is_empty()).collect();
        for (a, b) in live
            .iter()
            .enumerate()
            .flat_map(|(i, a)| live[i + 1..].iter().map(move |b| (a, b)))
        {
            let overlap = a
                .ranges
                .iter()
                .zip(&b.ranges)
                .any(|(&(alo, ahi), &(blo, bhi))| alo.max(blo) <= ahi.min(bhi));
            if overlap {
                return Err(Error::InvalidConfig(format!(
                    "large blocks {} and {} overlap in some slot",
                    a.block, b.block
                )));
            }
        }
        Ok(())
    }

    /// The large box containing `t`, if any (at most one by separation).
    fn large_box_of(&self, t: &ExponentTuple) -> Option<&ExponentBox> {
        self.large.iter().find(|b| b.contains(t))
    }

    /// A tuple of `shifted` outside every large box. Only called when no single
    /// large box contains `shifted`.
    fn uncovered_point(&self, shifted: &ExponentBox) -> ExponentTuple {
        let mut p = shifted.lower_corner();
        if let Some(c) = self.large_box_of(&p) {
            let t = (0..self.slots)
                .find(|&s| {
                    let (lo, hi) = shifted.ranges[s];
                    lo < c.ranges[s].0 || hi > c.ranges[s].1
                })
                .expect("shifted box is not inside the containing block");
            let (lo, hi) = shifted.ranges[t];
            p.0[t] = if lo < c.ranges[t].0 { lo } else { hi };
        }
        debug_assert!(!self.contains_large(&p));
        p
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub small_block: usize,
    pub slot: usize,
    pub label: Option<SlotLabel>,
    /// A small-set tuple whose increment at `slot` leaves the large set.
    pub small_tuple: ExponentTuple,
    pub shifted: ExponentTuple,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutCheck {
    pub passed: bool,
    pub box_checks: usize,
    pub violation: Option<Violation>,
}

/// Checks that incrementing any slot of any small tuple lands in the large set.
pub fn verify_layout(layout: &ExponentLayout) -> Result<LayoutCheck> {
    layout.validate()?;
    let mut box_checks = 0;
    for b in layout.small.iter().filter(|b| !b.is_empty()) {
        for s in 0..layout.slots {
            box_checks += 1;
            let shifted = b.shifted(s);
            if layout.large.iter().any(|c| c.contains_box(&shifted)) {
                continue;
            }
            let witness = layout.uncovered_point(&shifted);
            let mut small_tuple = witness.clone();
            small_tuple.0[s] -= 1;
            return Ok(LayoutCheck {
                passed: false,
                box_checks,
                violation: Some(Violation {
                    small_block: b.block,
                    slot: s,
                    label: None,
                    small_tuple,
                    shifted: witness,
                }),
            });
        }
    }
    Ok(LayoutCheck {
        passed: true,
        box_checks,
        violation: None,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicCertificate {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "R")]
    pub r: usize,
    pub n: usize,
    pub gamma: usize,
    /// Decimal strings: these overflow machine integers for large instances.
    pub mu: String,
    pub large_columns: String,
    pub small_columns: String,
    pub shifted_tuples_checked: String,
    pub box_checks: usize,
    /// Slot whose increment maps the small set onto the aligned part of the large set.
    pub anchor: SlotLabel,
    pub passed: bool,
    pub violation: Option<Violation>,
}

/// Symbolic check of every alignment condition for the standard layout.
pub fn verify_alignment_symbolic(k: usize, r: usize, n: usize) -> Result<SymbolicCertificate> {
    verify_alignment_symbolic_with(k, r, n, |_| {})
}

/// As [`verify_alignment_symbolic`], with a hook that may mutate the layout first.
pub fn verify_alignment_symbolic_with(
    k: usize,
    r: usize,
    n: usize,
    mutate: impl FnOnce(&mut ExponentLayout),
) -> Result<SymbolicCertificate> {
    if n == 0 {
        return Err(Error::InvalidConfig(
            "extension order n must be at least 1".into(),
        ));
    }
    let idx = build_index_set(k, r)?;
    let mut layout = ExponentLayout::standard(idx.gamma, r, n);
    mutate(&mut layout);
    let mut check = verify_layout(&layout)?;
    if let Some(v) = check.violation.as_mut() {
        v.label = Some(idx.slot_label(v.slot));
    }
    let small = layout.small_len();
    let mu = BigUint::from(r + 1) * BigUint::from(n + 1).pow(idx.gamma as u32);
    Ok(SymbolicCertificate {
        k,
        r,
        n,
        gamma: idx.gamma,
        mu: mu.to_string(),
        large_columns: layout.large_len().to_string(),
        small_columns: small.to_string(),
        shifted_tuples_checked: (small * BigUint::from(idx.gamma)).to_string(),
        box_checks: check.box_checks,
        anchor: idx.slot_label(idx.anchor_slot()),
        passed: check.passed,
        violation: check.violation,
    })
}
