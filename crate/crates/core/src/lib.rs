//! Delay analysis of a hybrid access network with one shared WiFi link and
//! `n` parallel VLC links.
//!
//! Two ways of using the links are modeled. In the non-aggregated system each
//! request is sent whole over one technology; in the aggregated system every
//! request is split across WiFi and one VLC access point and finishes when
//! both pieces have arrived. The crate provides the closed-form optimum for
//! the first, the delay-equalizing split ratio for the second, a replicated
//! simulator for both, and sweep harnesses that compare them.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod error;
pub mod model;
pub mod sim;
pub mod sweep;

pub use error::{Error, Link, Result};
pub use model::{AllocationRatio, FeasibleInterval, RawParams, SystemParams};
