//! Seeded simulator of opinion dynamics on social networks where users
//! decide what to post (transmission), a platform algorithm decides who sees
//! it (distribution), receivers are attracted or repulsed, and repulsed
//! receivers may unfollow the poster and follow a random stranger.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: mutable undirected simple graph plus the network generators.
//! - [`dynamics`]: the probability functions and the step/run engine.
//! - [`metrics`]: bimodality coefficient, balance, `b` vs `b_NN` density
//!   maps and the outcome classifier.
//! - [`harness`]: parameter sweeps, steady-state detection, presets and
//!   CSV results.
//! - [`io`]: edge-list and opinion file formats, empirical-network analysis.
//!
//! Every stochastic routine takes an explicit seed or RNG; a run is a pure
//! function of its inputs.

// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod graph;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod rng;

pub use error::{Error, Result};
pub use graph::Graph;
