//! Kummer's confluent hypergeometric function at the parameters `(1/2; 1)`.

use crate::error::{Error, Result};

const MAX_TERMS: usize = 100_000;

/// `₁F₁(1/2; 1; x)` for `x ≥ 0`, summed directly from the Kummer series
/// `Σ (1/2)_k / ((1)_k k!) x^k`.
///
/// Every term is positive, so the sum carries no cancellation. Summation
/// stops once a term falls below `1e-16` of the running total.
///
/// ```
/// use isac_core::specfun::hyp1f1_half;
/// assert_eq!(hyp1f1_half(0.0).unwrap(), 1.0);
/// assert!((hyp1f1_half(1.0).unwrap() - 1.753_387_654_377_090_3).abs() < 1e-14);
/// ```
pub fn hyp1f1_half(x: f64) -> Result<f64> {
    if !(x >= 0.0) || x.is_infinite() {
        return Err(Error::Domain {
            function: "hyp1f1_half",
            value: x,
            domain: "[0, inf)",
        });
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term *= (0.5 + kf) * x / ((1.0 + kf) * (1.0 + kf));
        sum += term;
        if !sum.is_finite() {
            return Err(Error::Overflow {
                function: "hyp1f1_half",
                value: x,
            });
        }
        if term < 1e-16 * sum {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        operation: "hyp1f1_half",
        detail: format!("Kummer series did not settle within {MAX_TERMS} terms at x = {x}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::bessel_i0;

    /// Oracle: ₁F₁(1/2; 1; x) = e^{x/2} I0(x/2).
    fn via_bessel(x: f64) -> f64 {
        (0.5 * x).exp() * bessel_i0(0.5 * x).unwrap()
    }

    #[test]
    fn bessel_identity_on_grid() {
        for i in 0..100 {
            let x = 50.0 * i as f64 / 99.0;
            let a = hyp1f1_half(x).unwrap();
            let b = via_bessel(x);
            assert!(((a - b) / b).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn reference_values() {
        assert_eq!(hyp1f1_half(0.0).unwrap(), 1.0);
        assert!((hyp1f1_half(1.0).unwrap() - 1.753_387_654_377_090_3).abs() < 1e-14);
        assert!((hyp1f1_half(1.5).unwrap() - 2.425_334_248_151_408).abs() < 1e-14);
        let three = hyp1f1_half(3.0).unwrap();
        assert!(((three - via_bessel(3.0)) / three).abs() < 1e-13);
    }

    #[test]
    fn errors() {
        assert!(matches!(hyp1f1_half(-0.1), Err(Error::Domain { .. })));
        assert!(matches!(hyp1f1_half(f64::NAN), Err(Error::Domain { .. })));
        assert!(matches!(hyp1f1_half(2000.0), Err(Error::Overflow { .. })));
    }
}
