//! Chain alignment over a `ceil((R+2)/M)`-symbol extension, `1 < M < R+2`.

use super::allocation::{allocate_dof_theorem5, theorem5_extension};
use super::chain::{BlockRef, BlockStore, Equation, Relation, Target};
use super::index_map::IndexMap;
use super::{
    min_normalized_entry, pad_with_random, random_block, require_constant, require_shape,
    PrecoderSet, Scheme,
};
use crate::channel::{extend_constant, ChannelSet};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Extension scheme; user 2 carries the extra stream.
pub fn build_theorem5(channels: &ChannelSet, r: usize, m: usize) -> Result<PrecoderSet> {
    let identity: Vec<usize> = (0..r + 2).collect();
    build(channels, r, m, Scheme::Theorem5, &identity)
}

/// `K = 4, M = 2, N = 4` with the extra stream on user 4.
///
/// This is the extension chain with users 2 and 4 exchanged, which gives the
/// allocation `(2, 2, 2, 3)`.
pub fn build_example2(channels: &ChannelSet) -> Result<PrecoderSet> {
    build(channels, 2, 2, Scheme::Example2, &[0, 3, 2, 1])
}

/// `perm[logical] = physical` user.
fn build(
    channels: &ChannelSet,
    r: usize,
    m: usize,
    scheme: Scheme,
    perm: &[usize],
) -> Result<PrecoderSet> {
    require_constant(channels)?;
    require_shape(channels, r, m)?;
    let k = r + 2;
    let logical_alloc = allocate_dof_theorem5(r, m)?;
    let e = theorem5_extension(r, m);
    let dim = m * e;
    let ext = extend_constant(channels, e)?;

    let mut chain_len = vec![r; k];
    chain_len[perm[1]] = r + 1;
    let mut allocation = vec![0; k];
    for (logical, &d) in logical_alloc.iter().enumerate() {
        allocation[perm[logical]] = d;
    }

    let equations: Vec<Equation> = equations(r)
        .into_iter()
        .map(|eq| relabel(eq, perm))
        .collect();
    let mut store = BlockStore::new(&chain_len);
    store.set(
        BlockRef {
            user: perm[1],
            block: 0,
        },
        random_block(channels, scheme, 1000, dim, 1),
    )?;
    let mut build_checks = Vec::new();
    for eq in &equations {
        build_checks.extend(store.apply(&ext, eq)?);
    }

    let precoders = (0..k)
        .map(|u| pad_with_random(channels, scheme, u, store.assemble(u)?, allocation[u]))
        .collect::<Result<Vec<_>>>()?;
    let min_entry = min_normalized_entry(&precoders);
    if !(min_entry > 1e-12) {
        return Err(Error::Numerical(format!(
            "precoder entry {min_entry:e} is numerically zero; resample"
        )));
    }
    let set = PrecoderSet {
        scheme,
        min_entry,
        precoders,
        allocation,
        extension: e,
        block_width: 1,
        claimed_dof: Rational::new((r * m * e + 1) as i64, e as i64),
        equations,
        build_checks,
        fallback: None,
    };
    set.validate(dim)?;
    Ok(set)
}

fn relabel(eq: Equation, perm: &[usize]) -> Equation {
    let map = |b: BlockRef| BlockRef {
        user: perm[b.user],
        block: b.block,
    };
    Equation {
        receiver: perm[eq.receiver],
        stack: eq.stack.iter().map(|&u| perm[u]).collect(),
        source: map(eq.source),
        targets: eq
            .targets
            .into_iter()
            .map(|t| Target {
                block: map(t.block),
                ..t
            })
            .collect(),
    }
}

/// Equations in solve order, zero-based logical users and vector indices.
fn equations(r: usize) -> Vec<Equation> {
    let k = r + 2;
    let at = |user, block| BlockRef { user, block };
    let equal = |position, block| Target {
        position,
        block,
        relation: Relation::Equal,
    };
    let mut eqs = Vec::new();

    // receiver 1: T v^{[2]}_1 gives v^{[3]}_1 .. v^{[R+2]}_1
    let stack: Vec<usize> = (2..k).collect();
    eqs.push(Equation {
        receiver: 0,
        targets: stack
            .iter()
            .enumerate()
            .map(|(p, &u)| equal(p, at(u, 0)))
            .collect(),
        stack,
        source: at(1, 0),
    });

    let map = IndexMap::Theorem5 { r };
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
            source: at(j, 0),
            targets,
        });
    }

    // receiver R+2: v^{[2]}_{R+1}, then v^{[i]}_R for i = 3..=R+1
    let stack: Vec<usize> = (1..=r).collect();
    let targets = stack
        .iter()
        .enumerate()
        .map(|(p, &u)| equal(p, at(u, if u == 1 { r } else { r - 1 })))
        .collect();
    eqs.push(Equation {
        receiver: k - 1,
        stack,
        source: at(0, 0),
        targets,
    });
    eqs
}
