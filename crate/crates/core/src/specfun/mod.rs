//! Special functions and quadrature behind the closed forms.
//!
//! All functions are real-valued and restricted to the half-lines the closed
//! forms actually use. Out-of-range arguments return [`Error::Domain`]
//! rather than NaN.
//!
//! [`Error::Domain`]: crate::Error::Domain

mod bessel;
mod expint;
mod hyper;
mod quad;

pub use bessel::{bessel_i0, bessel_i0_scaled};
pub use expint::{e1, e1_scaled, ei, ei_scaled};
pub use hyper::hyp1f1_half;
pub use quad::{integrate, integrate_semi_infinite, QuadSpec};
