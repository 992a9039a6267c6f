//! Degrees-of-freedom bounds and interference alignment constructions for the
//! K-user MIMO interference channel.
//!
//! * [`bounds`]: exact inner and outer bounds.
//! * [`channel`]: seeded channel sampling and block-diagonal symbol extension.
//! * [`simo`]: the symbol-extension scheme for single-antenna transmitters.
//! * [`mimo`]: constant-coefficient schemes and zero forcing.
//! * [`zf`]: zero-forcing receivers, sum rates and DoF slope estimates.

// `!(x > t)` is used on purpose so NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod channel;
pub mod error;
pub mod linalg;
pub mod mimo;
pub mod network;
pub mod rational;
pub mod rng;
pub mod simo;
pub mod zf;

pub use error::{Error, Result};
pub use rational::Rational;

/// Runs all dense linear algebra single-threaded so results never depend on
/// the number of worker threads.
pub fn use_sequential_linear_algebra() {
    faer::set_global_parallelism(faer::Par::Seq);
}
