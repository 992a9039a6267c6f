//! Eigenvector-seeded alignment without symbol extension, `M >= R+2`.

use num_complex::Complex64;

use super::allocation::{allocate_dof_theorem4, theorem4_block_width};
use super::chain::{
    operator_block, stacked_operator, BlockRef, BlockStore, Equation, Relation, Target,
};
use super::index_map::IndexMap;
use super::zero_forcing::zero_forcing_over;
use super::{
    min_normalized_entry, pad_with_random, require_constant, require_shape, PrecoderSet, Scheme,
    SPAN_TOLERANCE,
};
use crate::channel::{extend_constant, ChannelSet};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::rational::Rational;

/// Eigenvector scheme on `R+2` users. For `M < R+2` the scheme does not
/// apply; zero forcing over users `1..=R` is returned with `fallback` set.
pub fn build_theorem4(channels: &ChannelSet, r: usize, m: usize) -> Result<PrecoderSet> {
    build(channels, r, m, Scheme::Theorem4)
}

/// The `R = 2, M = 4` instance of the eigenvector scheme.
pub fn build_example1(channels: &ChannelSet) -> Result<PrecoderSet> {
    build(channels, 2, 4, Scheme::Example1)
}

fn build(channels: &ChannelSet, r: usize, m: usize, scheme: Scheme) -> Result<PrecoderSet> {
    require_constant(channels)?;
    require_shape(channels, r, m)?;
    if r < 2 {
        return Err(Error::NotApplicable(format!(
            "eigenvector scheme needs R >= 2 (got {r})"
        )));
    }
    if m < r + 2 {
        let mut set = zero_forcing_over(channels, r)?;
        set.fallback = Some(format!(
            "M={m} < R+2={}: eigenvector scheme does not apply, zero forcing over users 1..{r}",
            r + 2
        ));
        return Ok(set);
    }

    let k = r + 2;
    let f = theorem4_block_width(r, m);
    let allocation = allocate_dof_theorem4(r, m)?;
    let ext = extend_constant(channels, 1)?;
    let equations = equations(r);

    // Seed V^{[R+2]}_1 from the two receivers that share the source R+2.
    let t1 = stacked_operator(&ext, equations[0].receiver, &equations[0].stack, k - 1)?;
    let t2 = stacked_operator(&ext, equations[1].receiver, &equations[1].stack, k - 1)?;
    let t1r = operator_block(&t1, r - 1, m).to_owned();
    let t2r = operator_block(&t2, r - 1, m).to_owned();
    let pencil = linalg::solve(t2r.as_ref(), t1r.as_ref(), "seed eigenproblem")?;
    let seed = select_eigenvectors(&pencil, f)?;

    let mut store = BlockStore::new(&vec![r; k]);
    store.set(
        BlockRef {
            user: k - 1,
            block: 0,
        },
        seed,
    )?;
    let mut build_checks = Vec::new();
    for eq in &equations {
        build_checks.extend(store.apply(&ext, eq)?);
    }
    if let Some(bad) = build_checks.iter().find(|c| c.residual > SPAN_TOLERANCE) {
        return Err(Error::Eigen(format!(
            "seed subspaces disagree at receiver {} (sine {:e})",
            bad.receiver + 1,
            bad.residual
        )));
    }

    let precoders = (0..k)
        .map(|u| pad_with_random(channels, scheme, u, store.assemble(u)?, allocation[u]))
        .collect::<Result<Vec<_>>>()?;
    let set = PrecoderSet {
        scheme,
        min_entry: min_normalized_entry(&precoders),
        precoders,
        allocation,
        extension: 1,
        block_width: f,
        claimed_dof: Rational::integer((r * m + f) as i64),
        equations,
        build_checks,
        fallback: None,
    };
    set.validate(m)?;
    Ok(set)
}

/// The `f` eigenvectors of `a` with largest eigenvalue magnitude; ties go to
/// the smaller phase, then the smaller index.
pub fn select_eigenvectors(a: &CMat, f: usize) -> Result<CMat> {
    if f > a.nrows() {
        return Err(Error::Eigen(format!(
            "{f} eigenvectors requested from a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    let evd = a.eigen().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let values: Vec<Complex64> = evd.S().column_vector().iter().copied().collect();
    if values.iter().any(|z| !z.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| {
        values[j]
            .norm()
            .total_cmp(&values[i].norm())
            .then(values[i].arg().total_cmp(&values[j].arg()))
            .then(i.cmp(&j))
    });
    let u = evd.U();
    let picked: Vec<_> = order[..f].iter().map(|&c| u.subcols(c, 1)).collect();
    let v = linalg::hstack(&picked)?;
    if linalg::numeric_rank(v.as_ref(), linalg::DEFAULT_RANK_TOL)? < f {
        return Err(Error::Eigen(
            "selected eigenvectors are dependent (defective pencil)".into(),
        ));
    }
    Ok(v)
}

/// Equations in solve order, zero-based users and blocks.
fn equations(r: usize) -> Vec<Equation> {
    let k = r + 2;
    let at = |user, block| BlockRef { user, block };
    let equal = |position, block| Target {
        position,
        block,
        relation: Relation::Equal,
    };
    let mut eqs = Vec::new();

    // receiver 1: users 2..=R+1 get block 1
    let stack: Vec<usize> = (1..=r).collect();
    eqs.push(Equation {
        receiver: 0,
        targets: stack
            .iter()
            .enumerate()
            .map(|(p, &u)| equal(p, at(u, 0)))
            .collect(),
        stack,
        source: at(k - 1, 0),
    });

    // receiver 2: user 1 block 1, users 3..=R block 2, span match with V^{[R+1]}_1
    let stack: Vec<usize> = std::iter::once(0).chain(2..=r).collect();
    let targets = stack
        .iter()
        .enumerate()
        .map(|(p, &u)| match p {
            0 => equal(p, at(0, 0)),
            _ if p == r - 1 => Target {
                position: p,
                block: at(u, 0),
                relation: Relation::SameSpan,
            },
            _ => equal(p, at(u, 1)),
        })
        .collect();
    eqs.push(Equation {
        receiver: 1,
        stack,
        source: at(k - 1, 0),
        targets,
    });

    // receivers 3..=R+1 through the index map
    let map = IndexMap::Theorem4 { r };
    for j in map.receivers() {
        let stack: Vec<usize> = map.users_at(j).into_iter().map(|i| i - 1).collect();
        let targets = stack
            .iter()
            .enumerate()
            .map(|(p, &u)| {
                equal(
                    p,
                    at(u, map.n(u + 1, j).expect("index map covers its domain") - 1),
                )
            })
            .collect();
        eqs.push(Equation {
            receiver: j - 1,
            stack,
            source: at(j - 2, 0),
            targets,
        });
    }

    // receiver R+2: users 2..=R+1 get block R
    let stack: Vec<usize> = (1..=r).collect();
    eqs.push(Equation {
        receiver: k - 1,
        targets: stack
            .iter()
            .enumerate()
            .map(|(p, &u)| equal(p, at(u, r - 1)))
            .collect(),
        stack,
        source: at(0, 0),
    });
    eqs
}
