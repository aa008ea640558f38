//! Notional-dependent discounting with default compensation.
//!
//! Funding a future requirement through defaultable providers costs more
//! than its face value. With diversified providers the extra cost is a
//! multiplicative factor (see [`diversify`]). With providers whose ability
//! to pay degrades as their capacity is consumed, the cost depends on the
//! size of the requirement and on past draws (see [`capacity`]), which makes
//! valuation non-linear in the notional. [`valuation`] prices forwards,
//! streams and swaps under that kernel on paths from [`stochastic`], and
//! [`experiments`] turns the whole thing into reproducible CSV runs.

// validation uses `!(x > 0.0)` on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod capacity;
pub mod curves;
pub mod diversify;
pub mod error;
pub mod experiments;
pub mod stats;
pub mod stochastic;
pub mod valuation;

pub use error::{Error, Result};
