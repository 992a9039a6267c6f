//! Alignment equations of the form `T v_src = [targets]`, where
//! `T = [H^{[rx u]} : u in stack]^{-1} H^{[rx src]}`.

use serde::{Deserialize, Serialize};

use crate::channel::ExtendedChannel;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Columns `block*width .. (block+1)*width` of a user's precoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockRef {
    pub user: usize,
    pub block: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `T_p v_src` equals the target block.
    Equal,
    /// `T_p v_src` spans the same subspace as the target block.
    SameSpan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Target {
    /// Position of the target's user in the stack.
    pub position: usize,
    pub block: BlockRef,
    pub relation: Relation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Equation {
    pub receiver: usize,
    pub stack: Vec<usize>,
    pub source: BlockRef,
    pub targets: Vec<Target>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquationCheck {
    pub receiver: usize,
    pub target: BlockRef,
    pub relation: Relation,
    /// Relative residual for `Equal`, largest principal-angle sine for `SameSpan`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub checks: Vec<EquationCheck>,
    pub max_equal_residual: f64,
    pub max_span_sine: f64,
}

impl ChainReport {
    fn from_checks(checks: Vec<EquationCheck>) -> Self {
        let max_of = |rel: Relation| {
            checks
                .iter()
                .filter(|c| c.relation == rel)
                .map(|c| c.residual)
                .fold(0.0, f64::max)
        };
        ChainReport {
            max_equal_residual: max_of(Relation::Equal),
            max_span_sine: max_of(Relation::SameSpan),
            checks,
        }
    }
}

/// `[H^{[rx u]} : u in stack]^{-1} H^{[rx src]}` via an LU solve.
pub fn stacked_operator(
    ext: &ExtendedChannel,
    rx: usize,
    stack: &[usize],
    src: usize,
) -> Result<CMat> {
    let (a, b) = stacked_system(ext, rx, stack, src)?;
    linalg::solve(
        a.as_ref(),
        b.as_ref(),
        &format!("stacked inverse at receiver {}", rx + 1),
    )
}

fn stacked_system(
    ext: &ExtendedChannel,
    rx: usize,
    stack: &[usize],
    src: usize,
) -> Result<(CMat, CMat)> {
    let mats: Vec<CMat> = stack.iter().map(|&u| ext.matrix(rx, u)).collect();
    let refs: Vec<_> = mats.iter().map(|m| m.as_ref()).collect();
    Ok((linalg::hstack(&refs)?, ext.matrix(rx, src)))
}

/// Rows of `T` belonging to stack position `p`.
pub fn operator_block(
    t: &CMat,
    p: usize,
    width: usize,
) -> faer::MatRef<'_, num_complex::Complex64> {
    t.as_ref().subrows(p * width, width)
}

pub fn block_of(v: &CMat, block: usize, width: usize) -> faer::MatRef<'_, num_complex::Complex64> {
    v.as_ref().subcols(block * width, width)
}

/// `||x - y|| / (||t|| ||v||)` with `x = t v`.
pub fn relative_residual(
    t: faer::MatRef<'_, num_complex::Complex64>,
    v: faer::MatRef<'_, num_complex::Complex64>,
    y: faer::MatRef<'_, num_complex::Complex64>,
) -> f64 {
    let x = t * v;
    let scale = linalg::frobenius(t) * linalg::frobenius(v);
    let diff = &x - y;
    linalg::frobenius(diff.as_ref()) / scale.max(f64::MIN_POSITIVE)
}

/// Re-evaluates every equation against the precoders, computing the stacked
/// inverse through a pseudo-inverse rather than the LU used during construction.
pub fn verify_chain(
    ext: &ExtendedChannel,
    equations: &[Equation],
    precoders: &[CMat],
    width: usize,
) -> Result<ChainReport> {
    let mut checks = Vec::new();
    for eq in equations {
        let (a, b) = stacked_system(ext, eq.receiver, &eq.stack, eq.source.user)?;
        let t = linalg::pinv(a.as_ref(), linalg::DEFAULT_RANK_TOL)? * b;
        let rows = ext.cols();
        let v = block_of(&precoders[eq.source.user], eq.source.block, width);
        for target in &eq.targets {
            let tp = operator_block(&t, target.position, rows);
            let y = block_of(&precoders[target.block.user], target.block.block, width);
            let residual = match target.relation {
                Relation::Equal => relative_residual(tp, v, y),
                Relation::SameSpan => {
                    let x = tp * v;
                    linalg::principal_angle_sines(x.as_ref(), y, linalg::DEFAULT_RANK_TOL)?
                        .into_iter()
                        .fold(0.0, f64::max)
                }
            };
            if !residual.is_finite() {
                return Err(Error::Numerical(format!(
                    "non-finite residual at receiver {}",
                    eq.receiver + 1
                )));
            }
            checks.push(EquationCheck {
                receiver: eq.receiver,
                target: target.block,
                relation: target.relation,
                residual,
            });
        }
    }
    Ok(ChainReport::from_checks(checks))
}

/// Precoder blocks filled in as the equations are solved.
pub(crate) struct BlockStore {
    blocks: Vec<Vec<Option<CMat>>>,
}

impl BlockStore {
    pub(crate) fn new(blocks_per_user: &[usize]) -> Self {
        BlockStore {
            blocks: blocks_per_user.iter().map(|&n| vec![None; n]).collect(),
        }
    }

    pub(crate) fn set(&mut self, at: BlockRef, value: CMat) -> Result<()> {
        let slot = self
            .blocks
            .get_mut(at.user)
            .and_then(|u| u.get_mut(at.block))
            .ok_or_else(|| Error::Shape(format!("block {at:?} outside the precoder layout")))?;
        if slot.is_some() {
            return Err(Error::Numerical(format!("block {at:?} assigned twice")));
        }
        *slot = Some(value);
        Ok(())
    }

    pub(crate) fn get(&self, at: BlockRef) -> Result<&CMat> {
        self.blocks
            .get(at.user)
            .and_then(|u| u.get(at.block))
            .and_then(|b| b.as_ref())
            .ok_or_else(|| Error::Numerical(format!("block {at:?} used before it was assigned")))
    }

    /// Solves one equation, storing `Equal` targets and measuring `SameSpan` ones.
    pub(crate) fn apply(
        &mut self,
        ext: &ExtendedChannel,
        eq: &Equation,
    ) -> Result<Vec<EquationCheck>> {
        let t = stacked_operator(ext, eq.receiver, &eq.stack, eq.source.user)?;
        let x = self.get(eq.source)?.clone();
        let mut checks = Vec::new();
        for target in &eq.targets {
            let y = operator_block(&t, target.position, ext.cols()) * &x;
            let residual = match target.relation {
                Relation::Equal => {
                    self.set(target.block, y)?;
                    0.0
                }
                Relation::SameSpan => linalg::principal_angle_sines(
                    y.as_ref(),
                    self.get(target.block)?.as_ref(),
                    linalg::DEFAULT_RANK_TOL,
                )?
                .into_iter()
                .fold(0.0, f64::max),
            };
            checks.push(EquationCheck {
                receiver: eq.receiver,
                target: target.block,
                relation: target.relation,
                residual,
            });
        }
        Ok(checks)
    }

    /// Concatenates the blocks of `user`; all must be assigned.
    pub(crate) fn assemble(&self, user: usize) -> Result<CMat> {
        let blocks = (0..self.blocks[user].len())
            .map(|b| self.get(BlockRef { user, block: b }).map(|m| m.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        if blocks.is_empty() {
            return Ok(linalg::zeros(0, 0));
        }
        linalg::hstack(&blocks)
    }
}
