//! Robust recovery of planted partitions in the stochastic block model.
//!
//! The crate samples graphs from the balanced k-cluster block model, corrupts
//! them with monotone and outlier adversaries, solves a vector relaxation of
//! minimum balanced k-partition, rounds the solution greedily, and optionally
//! boosts a weak partition to near-exact recovery by a majority vote on held
//! out edges. Lower-bound experiments and the closed-form quantities of the
//! analysis live in [`lower_bounds`] and [`metrics`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boosting;
pub mod error;
pub mod lower_bounds;
pub mod metrics;
pub mod pipeline;
pub mod recovery;
pub mod rng;
pub mod sbm;
pub mod scalar;
pub mod sdp;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Embedding64 = sdp::Embedding<f64>;
pub type Embedding32 = sdp::Embedding<f32>;
pub type SdpSolution64 = sdp::SdpSolution<f64>;
pub type SdpSolution32 = sdp::SdpSolution<f32>;
pub type SdpDiagnostics64 = sdp::SdpDiagnostics<f64>;
