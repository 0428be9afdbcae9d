//! Ergodic capacity of the data phase under imperfect channel estimation.
//!
//! With `|ĥ_d|² ~ Exp(σ₁²)` and interpolation noise `|w|² ~ Exp(e_d)`, the
//! ergodic capacity of the `L - L_p` data symbols is
//!
//! ```text
//! C = r γ_d σ₁² ∫_0^∞ e^{-s} / ((1 + γ_d σ₁² s)(1 + γ_d e_d s)) ds
//!   = r / (1 - e_d/σ₁²) · [ e^{a} Ei(-a) - e^{b} Ei(-b) ]
//! ```
//!
//! with `r = B (L - L_p) / ln 2`, `a = 1/(γ_d e_d)` and `b = 1/(γ_d σ₁²)`.
//! Both forms are exposed; the closed form is the production path and the
//! quadrature form is its cross-check. Noise power is normalised to one, so
//! `ρ_d = γ_d`.
//!
//! Capacity is in the natural units of `B · symbols · bits`; divide by
//! `B · L` for spectral efficiency per slot.

use std::f64::consts::LN_2;

use crate::channel::{data_error, data_error_continuous, CommLink, SlotConfig};
use crate::error::{invalid, Error, Result};
use crate::specfun::{e1_scaled, integrate_semi_infinite, QuadSpec};

/// Which evaluation route produced a [`CapacityResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityForm {
    Closed,
    Integral,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityResult {
    /// Ergodic capacity in `B · symbols · bits`.
    pub capacity: f64,
    /// The data-channel estimation error the value was computed with.
    pub e_d_used: f64,
    pub form: CapacityForm,
}

impl CapacityResult {
    /// Capacity normalised by `B · L`: bits per symbol, averaged over the
    /// whole slot including the pilot symbols.
    pub fn per_slot_efficiency(&self, slot: &SlotConfig) -> f64 {
        self.capacity / (slot.bandwidth() * slot.symbols() as f64)
    }
}

/// Distance from `e_d = σ₁²` below which the bracket is evaluated by its
/// Taylor expansion instead of the difference of two exponential integrals.
const SINGULAR_BAND: f64 = 1e-6;

/// Distance from `e_d = σ₁²` at which the closed form is declared singular.
const DEGENERATE_BAND: f64 = 1e-12;

fn check_finite_snr(link: &CommLink) -> Result<()> {
    if link.gamma_d().is_finite() {
        Ok(())
    } else {
        Err(Error::Degenerate {
            operation: "ergodic_capacity",
            detail: "infinite data SNR gives unbounded capacity".into(),
        })
    }
}

fn prefactor(data_symbols: f64, bandwidth: f64) -> f64 {
    bandwidth * data_symbols / LN_2
}

/// `(h(b) - h(a)) / (1 - ρ)` where `h(x) = e^x E1(x)`, `b = 1/(γ_d σ₁²)`,
/// `a = b/ρ` and `ρ = e_d/σ₁² ∈ [0, 1]`.
fn bracket_over_gap(gamma_d: f64, sigma1_sq: f64, rho: f64) -> Result<f64> {
    let b = 1.0 / (gamma_d * sigma1_sq);
    let hb = e1_scaled(b)?;
    if rho == 0.0 {
        return Ok(hb);
    }
    let gap = 1.0 - rho;
    if gap.abs() < SINGULAR_BAND {
        // h(a) - h(b) = Σ h^{(n)}(b) (a - b)^n / n!, a - b = b·gap/ρ, with
        // h' = h - 1/x, h'' = h' + 1/x², h''' = h'' - 2/x³.
        let d1 = hb - 1.0 / b;
        let d2 = d1 + 1.0 / (b * b);
        let d3 = d2 - 2.0 / (b * b * b);
        let step = b / rho;
        let delta = step * gap;
        return Ok(-(d1 * step + d2 * step * delta / 2.0 + d3 * step * delta * delta / 6.0));
    }
    let ha = e1_scaled(b / rho)?;
    Ok((hb - ha) / gap)
}

/// Closed-form capacity for an arbitrary estimation error
/// `e_d ∈ [0, σ₁²]`, bypassing the Wiener-interpolation model.
///
/// `e_d = 0` is perfect channel knowledge (`C = r e^b E1(b)`); near
/// `e_d = σ₁²` the removable singularity is resolved by a Taylor expansion.
pub fn capacity_given_error(slot: &SlotConfig, link: &CommLink, e_d: f64) -> Result<CapacityResult> {
    check_finite_snr(link)?;
    let s1 = link.sigma1_sq();
    if !(0.0..=s1).contains(&e_d) {
        return Err(invalid("e_d", format!("must lie in [0, σ₁² = {s1}], got {e_d}")));
    }
    let r = prefactor(slot.data_symbols() as f64, slot.bandwidth());
    let capacity = r * bracket_over_gap(link.gamma_d(), s1, e_d / s1)?;
    Ok(CapacityResult {
        capacity,
        e_d_used: e_d,
        form: CapacityForm::Closed,
    })
}

/// Closed-form ergodic capacity with the pilot count taken from `slot`.
///
/// ```
/// use isac_core::capacity::ergodic_capacity;
/// use isac_core::channel::{CommLink, SlotConfig};
///
/// let slot = SlotConfig::new(14, 4, 1.0).unwrap();
/// let link = CommLink::new(2.0, 10.0, 10.0).unwrap();
/// let c = ergodic_capacity(&slot, &link).unwrap();
/// assert!((c.capacity - 34.914_982_491_573_1).abs() < 1e-9);
/// ```
pub fn ergodic_capacity(slot: &SlotConfig, link: &CommLink) -> Result<CapacityResult> {
    check_finite_snr(link)?;
    let e_d = data_error(link, slot.pilots());
    let rho = e_d / link.sigma1_sq();
    if (1.0 - rho).abs() <= DEGENERATE_BAND {
        return Err(Error::Degenerate {
            operation: "ergodic_capacity",
            detail: format!("e_d = {e_d} is within 1e-12 of σ₁² = {}", link.sigma1_sq()),
        });
    }
    let r = prefactor(slot.data_symbols() as f64, slot.bandwidth());
    let capacity = r * bracket_over_gap(link.gamma_d(), link.sigma1_sq(), rho)?;
    Ok(CapacityResult {
        capacity,
        e_d_used: e_d,
        form: CapacityForm::Closed,
    })
}

/// Capacity at a real-valued pilot count `pilots ∈ (0, symbols)`, for the
/// continuous relaxation used by the optimizer.
pub fn capacity_continuous(symbols: usize, bandwidth: f64, link: &CommLink, pilots: f64) -> Result<f64> {
    check_finite_snr(link)?;
    let e_d = data_error_continuous(link, pilots);
    let r = prefactor(symbols as f64 - pilots, bandwidth);
    Ok(r * bracket_over_gap(link.gamma_d(), link.sigma1_sq(), e_d / link.sigma1_sq())?)
}

/// The capacity expression exactly as typeset in the original theorem
/// statement, whose first exponential-integral argument is
/// `(1 + γ_p L_p)/γ_d` instead of `(1 + σ₁² γ_p L_p)/(γ_d σ₁²)`.
///
/// The two agree only when `σ₁² = 1`. Kept for comparison; nothing else in
/// the crate uses it.
pub fn ergodic_capacity_as_printed(slot: &SlotConfig, link: &CommLink) -> Result<CapacityResult> {
    check_finite_snr(link)?;
    let e_d = data_error(link, slot.pilots());
    let gap = 1.0 - e_d / link.sigma1_sq();
    if gap.abs() <= DEGENERATE_BAND {
        return Err(Error::Degenerate {
            operation: "ergodic_capacity_as_printed",
            detail: format!("prefactor denominator {gap} vanishes"),
        });
    }
    let gd = link.gamma_d();
    let first = (1.0 + link.gamma_p() * slot.pilots() as f64) / gd;
    let second = 1.0 / (gd * link.sigma1_sq());
    let r = prefactor(slot.data_symbols() as f64, slot.bandwidth());
    let capacity = r / gap * (e1_scaled(second)? - e1_scaled(first)?);
    Ok(CapacityResult {
        capacity,
        e_d_used: e_d,
        form: CapacityForm::Closed,
    })
}

fn integral_with_error(slot: &SlotConfig, link: &CommLink, e_d: f64, spec: &QuadSpec) -> Result<CapacityResult> {
    check_finite_snr(link)?;
    let g = link.gamma_d();
    let gs = g * link.sigma1_sq();
    let ge = g * e_d;
    let integral = integrate_semi_infinite(|s| (-s).exp() / ((1.0 + gs * s) * (1.0 + ge * s)), spec)?;
    let r = prefactor(slot.data_symbols() as f64, slot.bandwidth());
    Ok(CapacityResult {
        capacity: r * gs * integral,
        e_d_used: e_d,
        form: CapacityForm::Integral,
    })
}

/// Ergodic capacity by quadrature of the single-integral representation.
pub fn ergodic_capacity_integral(slot: &SlotConfig, link: &CommLink, spec: &QuadSpec) -> Result<CapacityResult> {
    integral_with_error(slot, link, data_error(link, slot.pilots()), spec)
}

/// Quadrature form for an arbitrary `e_d`, including the point `e_d = σ₁²`
/// where the closed form is 0/0.
pub fn capacity_integral_given_error(
    slot: &SlotConfig,
    link: &CommLink,
    e_d: f64,
    spec: &QuadSpec,
) -> Result<CapacityResult> {
    if !(e_d >= 0.0) {
        return Err(invalid("e_d", format!("must be nonnegative, got {e_d}")));
    }
    integral_with_error(slot, link, e_d, spec)
}

/// Discrete second differences `C(L_p-1) - 2C(L_p) + C(L_p+1)` for
/// `L_p = 2..=L-2`, in that order.
pub fn capacity_second_difference(slot: &SlotConfig, link: &CommLink) -> Result<Vec<f64>> {
    if slot.symbols() < 4 {
        return Err(invalid(
            "symbols",
            format!("second differences need at least 4 symbols, got {}", slot.symbols()),
        ));
    }
    let curve = capacity_curve(slot, link)?;
    Ok(curve.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).collect())
}

/// Closed-form capacity for every pilot count `1..=L-1`.
pub fn capacity_curve(slot: &SlotConfig, link: &CommLink) -> Result<Vec<f64>> {
    slot.pilot_range()
        .map(|lp| ergodic_capacity(&slot.with_pilots(lp)?, link).map(|c| c.capacity))
        .collect()
}
