//! Block index maps `n(i, j)` of the constant-channel schemes.
//!
//! Both maps take and return one-based user and block numbers so they can be
//! compared against the piecewise definitions directly.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "scheme")]
pub enum IndexMap {
    /// Receivers `j = 3..=R+1`, users `i` other than `j-1` and `j`.
    Theorem4 { r: usize },
    /// Receivers `j = 2..=R+1`, users `i` other than `j` and `j+1`.
    Theorem5 { r: usize },
}

impl IndexMap {
    /// Block of user `i` fed by the equation at receiver `j`, or `None`
    /// outside the map's domain.
    pub fn n(&self, i: usize, j: usize) -> Option<usize> {
        match *self {
            IndexMap::Theorem4 { r } => theorem4(r, i, j),
            IndexMap::Theorem5 { r } => theorem5(r, i, j),
        }
    }

    pub fn receivers(&self) -> std::ops::RangeInclusive<usize> {
        match *self {
            IndexMap::Theorem4 { r } => 3..=r + 1,
            IndexMap::Theorem5 { r } => 2..=r + 1,
        }
    }

    /// Users appearing in the equation at receiver `j`, in increasing order.
    pub fn users_at(&self, j: usize) -> Vec<usize> {
        let (r, skip) = match *self {
            IndexMap::Theorem4 { r } => (r, [j - 1, j]),
            IndexMap::Theorem5 { r } => (r, [j, j + 1]),
        };
        (1..=r + 2).filter(|i| !skip.contains(i)).collect()
    }
}

fn theorem4(r: usize, i: usize, j: usize) -> Option<usize> {
    if !(3..=r + 1).contains(&j) || !(1..=r + 2).contains(&i) || i == j - 1 || i == j {
        return None;
    }
    if i == 1 || i == r + 1 || i == r + 2 {
        Some(j - 1)
    } else if j > i + 1 {
        Some(j - 2)
    } else if i > 3 && j < i {
        Some(j)
    } else {
        None
    }
}

fn theorem5(r: usize, i: usize, j: usize) -> Option<usize> {
    if !(2..=r + 1).contains(&j) || !(1..=r + 2).contains(&i) || i == j || i == j + 1 {
        return None;
    }
    if i <= 2 {
        (j > i).then(|| j - 1)
    } else if j + 1 < i {
        Some(j)
    } else if j > i {
        Some(j - 2)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn theorem4_small_case() {
        let m = IndexMap::Theorem4 { r: 2 };
        assert_eq!(m.users_at(3), vec![1, 4]);
        assert_eq!(m.n(1, 3), Some(2));
        assert_eq!(m.n(4, 3), Some(2));
        assert_eq!(m.n(2, 3), None);
    }

    #[test]
    fn theorem5_small_case() {
        let m = IndexMap::Theorem5 { r: 2 };
        assert_eq!(m.n(1, 2), Some(1));
        assert_eq!(m.n(4, 2), Some(2));
        assert_eq!(m.n(1, 3), Some(2));
        assert_eq!(m.n(2, 3), Some(2));
    }

    #[test]
    fn maps_are_total_on_their_domains() {
        for r in 2..9 {
            for map in [IndexMap::Theorem4 { r }, IndexMap::Theorem5 { r }] {
                for j in map.receivers() {
                    for i in map.users_at(j) {
                        let b = map
                            .n(i, j)
                            .unwrap_or_else(|| panic!("{map:?} undefined at ({i}, {j})"));
                        assert!((1..=r).contains(&b));
                    }
                }
            }
        }
    }

    /// Every block 2..R of every user is produced by exactly one equation once
    /// the fixed receivers are accounted for.
    #[test]
    fn theorem4_blocks_are_assigned_once() {
        for r in 2..9 {
            let map = IndexMap::Theorem4 { r };
            let mut seen = HashSet::new();
            // receiver 1: users 2..=R+1 block 1; seed: user R+2 block 1
            for u in 2..=r + 2 {
                assert!(seen.insert((u, 1)));
            }
            // receiver 2: user 1 block 1, users 3..=R block 2
            assert!(seen.insert((1, 1)));
            for u in 3..=r {
                assert!(seen.insert((u, 2)));
            }
            for j in map.receivers() {
                for i in map.users_at(j) {
                    assert!(seen.insert((i, map.n(i, j).unwrap())), "r={r} ({i},{j})");
                }
            }
            // receiver R+2: users 2..=R+1 block R
            for u in 2..=r + 1 {
                assert!(seen.insert((u, r)), "r={r} user {u}");
            }
            assert_eq!(seen.len(), r * (r + 2));
        }
    }

    #[test]
    fn theorem5_vectors_are_assigned_once() {
        for r in 2..9 {
            let map = IndexMap::Theorem5 { r };
            let mut seen = HashSet::new();
            assert!(seen.insert((2, 1)));
            for u in 3..=r + 2 {
                assert!(seen.insert((u, 1)));
            }
            for j in map.receivers() {
                for i in map.users_at(j) {
                    assert!(seen.insert((i, map.n(i, j).unwrap())), "r={r} ({i},{j})");
                }
            }
            assert!(seen.insert((2, r + 1)));
            for u in 3..=r + 1 {
                assert!(seen.insert((u, r)));
            }
            assert_eq!(seen.len(), r * (r + 2) + 1);
        }
    }
}
