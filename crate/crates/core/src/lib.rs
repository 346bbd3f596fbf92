//! Rare-event simulation for random walks with regularly varying increments.
//!
//! Two probabilities are estimated by state-independent importance sampling:
//!
//! * the large-deviation probability `Pr{S_n > b}` ([`ld`]), split into a
//!   single-big-jump part and a residual part that is sampled under a
//!   truncated exponential twist;
//! * the level-crossing probability `Pr{tau_b < inf}` of a negative-drift walk
//!   ([`crossing`]), written as a randomized sum over geometric time blocks,
//!   each block estimated by three sub-estimators.
//!
//! Increment laws live in [`tail_models`], ground-truth generators in
//! [`oracle`], and the replication engine in [`harness`].

// `!(x > y)` is used on purpose so that NaN is rejected with the bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod crossing;
pub mod error;
pub mod harness;
pub mod ld;
pub mod oracle;
pub mod quadrature;
pub mod rng;
pub mod sample;
pub mod special;
pub mod tail_models;

pub use crossing::{BlockPmf, BlockRegime, BlockScheme, CrossingEstimator, CrossingProblem};
pub use error::{Error, RegimeError, RegimeWarning, Result};
pub use harness::{required_samples, run, Replicate, RunOptions, RunStats};
pub use ld::{LdEstimator, LdProblem};
pub use rng::{RandomSource, StreamKey, SubStream};
pub use sample::EstimatorSample;
pub use tail_models::{IncrementModel, TwistedTruncated};
