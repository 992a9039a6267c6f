//! Per-receiver views of a precoded network and the numeric alignment report.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{self, CMat};

/// A precoded K-user network seen through its (possibly extended) channels.
pub trait Network {
    fn users(&self) -> usize;

    /// Receive-space dimension at every receiver (`N` times the extension length).
    fn receive_dim(&self) -> usize;

    /// Number of channel uses one super-symbol spans.
    fn extension(&self) -> usize;

    fn streams(&self, user: usize) -> usize;

    /// `H̄^{[rx tx]} V^{[tx]}` with unit-norm precoder columns.
    fn effective(&self, rx: usize, tx: usize) -> Result<CMat>;

    fn receiver_view(&self, rx: usize) -> Result<ReceiverView> {
        let desired = self.effective(rx, rx)?;
        let others = (0..self.users())
            .filter(|&tx| tx != rx)
            .map(|tx| self.effective(rx, tx))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<_> = others.iter().map(|m| m.as_ref()).collect();
        let interference = if refs.is_empty() {
            linalg::zeros(self.receive_dim(), 0)
        } else {
            linalg::hstack(&refs)?
        };
        Ok(ReceiverView {
            receiver: rx,
            desired,
            interference,
        })
    }
}

#[derive(Clone, Debug)]
pub struct ReceiverView {
    pub receiver: usize,
    pub desired: CMat,
    pub interference: CMat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReceiverReport {
    pub receiver: usize,
    pub streams: usize,
    pub interference_vectors: usize,
    pub interference_rank: usize,
    pub interference_bound: usize,
    pub desired_rank: usize,
    pub joint_rank: usize,
    /// Interference vectors minus interference rank.
    pub aligned: usize,
    pub separable: bool,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub receive_dim: usize,
    pub extension: usize,
    pub rank_tolerance: f64,
    pub receivers: Vec<ReceiverReport>,
    pub passed: bool,
}

impl AlignmentReport {
    pub fn separable(&self) -> bool {
        self.receivers.iter().all(|r| r.separable)
    }

    pub fn first_failure(&self) -> Option<&ReceiverReport> {
        self.receivers.iter().find(|r| !r.passed)
    }
}

pub fn check_receiver(view: &ReceiverView, streams: usize, tol: f64) -> Result<ReceiverReport> {
    let dim = view.desired.nrows();
    let interference_rank = linalg::numeric_rank(view.interference.as_ref(), tol)?;
    let desired_rank = linalg::numeric_rank(view.desired.as_ref(), tol)?;
    let joint = linalg::hstack(&[view.desired.as_ref(), view.interference.as_ref()])?;
    let joint_rank = linalg::numeric_rank(joint.as_ref(), tol)?;
    let interference_bound = dim.saturating_sub(streams);
    let separable = desired_rank == streams && joint_rank == streams + interference_rank;
    Ok(ReceiverReport {
        receiver: view.receiver,
        streams,
        interference_vectors: view.interference.ncols(),
        interference_rank,
        interference_bound,
        desired_rank,
        joint_rank,
        aligned: view.interference.ncols() - interference_rank,
        separable,
        passed: separable && interference_rank <= interference_bound,
    })
}

/// Numeric rank checks at every receiver.
pub fn verify_network<N: Network + ?Sized>(net: &N, tol: f64) -> Result<AlignmentReport> {
    let receivers = (0..net.users())
        .map(|rx| check_receiver(&net.receiver_view(rx)?, net.streams(rx), tol))
        .collect::<Result<Vec<_>>>()?;
    let passed = receivers.iter().all(|r| r.passed);
    Ok(AlignmentReport {
        receive_dim: net.receive_dim(),
        extension: net.extension(),
        rank_tolerance: tol,
        receivers,
        passed,
    })
}
