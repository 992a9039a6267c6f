//! Closed-form degrees-of-freedom bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    KLeR,
    KGtR,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DofBounds {
    pub inner: Rational,
    pub outer: Rational,
    pub tight: bool,
    #[serde(rename = "R")]
    pub r: usize,
    pub regime: Regime,
}

impl DofBounds {
    /// The exact DoF when the bounds meet.
    pub fn exact(&self) -> Option<&Rational> {
        self.tight.then_some(&self.inner)
    }
}

fn check_positive(values: &[(&str, usize)]) -> Result<()> {
    match values.iter().find(|(_, v)| *v == 0) {
        Some((name, _)) => Err(Error::InvalidConfig(format!("{name} must be at least 1"))),
        None => Ok(()),
    }
}

pub fn ratio_r(m: usize, n: usize) -> usize {
    m.max(n) / m.min(n)
}

/// DoF of a two-user MIMO channel with full cooperation on each side.
pub fn two_user_mimo_dof(m1: usize, n1: usize, m2: usize, n2: usize) -> Result<Rational> {
    check_positive(&[("M1", m1), ("N1", n1), ("M2", m2), ("N2", n2)])?;
    let v = (m1 + m2).min(n1 + n2).min(m1.max(n2)).min(m2.max(n1));
    Ok(Rational::integer(v as i64))
}

pub fn outerbound(k: usize, m: usize, n: usize) -> Result<Rational> {
    check_positive(&[("K", k), ("M", m), ("N", n)])?;
    let r = ratio_r(m, n);
    Ok(if k <= r {
        Rational::integer((k * m.min(n)) as i64)
    } else {
        Rational::new((k * m.max(n)) as i64, (r + 1) as i64)
    })
}

pub fn innerbound(k: usize, m: usize, n: usize) -> Result<Rational> {
    check_positive(&[("K", k), ("M", m), ("N", n)])?;
    let r = ratio_r(m, n);
    Ok(if k <= r {
        Rational::integer((k * m.min(n)) as i64)
    } else {
        Rational::new((k * m.min(n) * r) as i64, (r + 1) as i64)
    })
}

pub fn characterize(k: usize, m: usize, n: usize) -> Result<DofBounds> {
    let inner = innerbound(k, m, n)?;
    let outer = outerbound(k, m, n)?;
    let r = ratio_r(m, n);
    let tight = k <= r || m.max(n).is_multiple_of(m.min(n));
    debug_assert_eq!(tight, inner == outer);
    Ok(DofBounds {
        inner,
        outer,
        tight,
        r,
        regime: if k <= r { Regime::KLeR } else { Regime::KGtR },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn two_user_examples() {
        assert_eq!(two_user_mimo_dof(1, 1, 1, 1).unwrap(), q(1, 1));
        assert_eq!(two_user_mimo_dof(2, 4, 1, 2).unwrap(), q(2, 1));
        assert_eq!(two_user_mimo_dof(3, 3, 3, 3).unwrap(), q(3, 1));
        assert!(two_user_mimo_dof(0, 1, 1, 1).is_err());
    }

    #[test]
    fn outer_examples() {
        assert_eq!(outerbound(4, 1, 2).unwrap(), q(8, 3));
        assert_eq!(outerbound(2, 2, 1).unwrap(), q(2, 1));
        assert_eq!(outerbound(3, 2, 2).unwrap(), q(3, 1));
    }

    #[test]
    fn inner_examples() {
        assert_eq!(innerbound(3, 2, 1).unwrap(), q(2, 1));
        assert_eq!(innerbound(2, 5, 5).unwrap(), q(5, 1));
        assert_eq!(innerbound(4, 1, 2).unwrap(), q(8, 3));
    }

    #[test]
    fn characterize_examples() {
        let b = characterize(4, 2, 4).unwrap();
        assert_eq!(
            (b.inner.clone(), b.outer.clone(), b.tight),
            (q(16, 3), q(16, 3), true)
        );
        assert_eq!(b.exact(), Some(&q(16, 3)));

        let b = characterize(4, 2, 3).unwrap();
        assert_eq!(b.r, 1);
        assert_eq!(b.inner, q(4, 1));
        assert_eq!(b.outer, q(6, 1));
        assert!(!b.tight);
        assert_eq!(b.exact(), None);

        let b = characterize(1, 3, 7).unwrap();
        assert_eq!(
            (b.inner.clone(), b.tight, b.regime),
            (q(3, 1), true, Regime::KLeR)
        );
    }

    #[test]
    fn bounds_json_shape() {
        let b = characterize(4, 1, 2).unwrap();
        let v = serde_json::to_value(&b).unwrap();
        assert_eq!(v["inner"], "8/3");
        assert_eq!(v["outer"], "8/3");
        assert_eq!(v["tight"], true);
        assert_eq!(v["R"], 2);
    }

    #[test]
    fn outer_dominates_inner_exhaustively() {
        for k in 1..=12 {
            for m in 1..=8 {
                for n in 1..=8 {
                    let b = characterize(k, m, n).unwrap();
                    assert!(b.inner <= b.outer, "K={k} M={m} N={n}");
                    assert_eq!(b.tight, b.inner == b.outer, "K={k} M={m} N={n}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn antenna_swap_symmetry(k in 1usize..40, m in 1usize..30, n in 1usize..30) {
            prop_assert_eq!(outerbound(k, m, n).unwrap(), outerbound(k, n, m).unwrap());
            prop_assert_eq!(innerbound(k, m, n).unwrap(), innerbound(k, n, m).unwrap());
        }

        #[test]
        fn monotone_in_k(k in 1usize..40, m in 1usize..30, n in 1usize..30) {
            prop_assert!(outerbound(k, m, n).unwrap() <= outerbound(k + 1, m, n).unwrap());
            prop_assert!(innerbound(k, m, n).unwrap() <= innerbound(k + 1, m, n).unwrap());
        }

        #[test]
        fn integer_ratio_is_tight(k in 1usize..40, m in 1usize..10, r in 1usize..6) {
            let n = m * r;
            prop_assume!(k > r);
            let expect = Rational::new((k * m * r) as i64, (r + 1) as i64);
            prop_assert_eq!(innerbound(k, m, n).unwrap(), expect.clone());
            prop_assert_eq!(outerbound(k, m, n).unwrap(), expect);
        }
    }
}
