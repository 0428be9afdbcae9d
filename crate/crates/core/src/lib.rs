// Negated float comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod channel;
pub mod error;
pub mod metrics;
pub mod montecarlo;
pub mod sensing;
pub mod specfun;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/intro.md")]
mod book_intro {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/special-functions.md")]
mod book_special_functions {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/channel-estimation.md")]
mod book_channel_estimation {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/capacity.md")]
mod book_capacity {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/sensing.md")]
mod book_sensing {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/optimization.md")]
mod book_optimization {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/monte-carlo.md")]
mod book_monte_carlo {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}
