//! Range Cramér–Rao bound of the pilot echo, instantaneous and averaged over
//! Rician fading.
//!
//! For one slot the bound is `CRB = α / (L_p X)` with
//! `α = c² / (8π² γ_{p,s} s_rcs B_rms²)` and `X` the Rician sensing gain.
//! Averaging over `X` gives
//!
//! ```text
//! E[CRB] = α √π e^{-K} ₁F₁(1/2; 1; K) / (L_p √(2σ₂²)),   K = A_s / (2σ₂²)
//! ```
//!
//! [`ergodic_crb_series`] reaches the same value by integrating the
//! Bessel-series expansion of the density term by term.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::specfun::hyp1f1_half;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Whether the echo SNR is derated by the two-way spreading factor
/// `1/(4π d²)` before it enters `α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathLoss {
    /// `γ_{p,s,eff} = γ_{p,s} / (4π d²)`: the range knob changes the bound.
    #[default]
    Spherical,
    /// `γ_{p,s}` is used as given; the range has no effect on `α`.
    None,
}

/// Parameters of the BS → target → BS echo link.
///
/// Fields are public; [`SenseLink::validate`] checks the invariants and is
/// called by every fallible function in this module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SenseLink {
    /// Line-of-sight power `A_s`.
    pub a_s: f64,
    /// Diffuse multipath power per real component, `σ₂²`.
    pub sigma2_sq: f64,
    /// Radar cross section, m².
    pub s_rcs: f64,
    /// Target range `d`, m.
    pub range: f64,
    /// Propagation speed, m/s.
    pub c: f64,
    /// Root-mean-square bandwidth, Hz.
    pub b_rms: f64,
    /// Echo SNR `γ_{p,s} = ρ_p / σ_s²` before any path loss (linear).
    pub gamma_ps: f64,
    /// Radial speed towards the BS, m/s. Only shapes the simulated echo.
    pub speed: f64,
    /// Carrier wavelength, m. Only shapes the simulated echo.
    pub wavelength: f64,
    /// Transmit pilot power `ρ_p`. Only sets the absolute scale of simulated
    /// samples; the echo noise variance is `ρ_p / γ_{p,s}`.
    pub rho_p: f64,
    pub path_loss: PathLoss,
}

impl Default for SenseLink {
    /// 200 MHz bandwidth with `B_rms = B/√12`, Rician factor `A_s/σ₂² = 3`,
    /// a 100 m² target at 100 m and a 10 dB echo SNR.
    fn default() -> Self {
        Self {
            a_s: 3.0,
            sigma2_sq: 1.0,
            s_rcs: 100.0,
            range: 100.0,
            c: SPEED_OF_LIGHT,
            b_rms: rms_bandwidth_flat(200e6),
            gamma_ps: 10.0,
            speed: 0.0,
            wavelength: SPEED_OF_LIGHT / 3.5e9,
            rho_p: 1.0,
            path_loss: PathLoss::Spherical,
        }
    }
}

/// RMS bandwidth of a flat spectrum of width `bandwidth`: `B/√12`.
pub fn rms_bandwidth_flat(bandwidth: f64) -> f64 {
    bandwidth / 12f64.sqrt()
}

impl SenseLink {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("sigma2_sq", self.sigma2_sq),
            ("s_rcs", self.s_rcs),
            ("range", self.range),
            ("c", self.c),
            ("b_rms", self.b_rms),
            ("gamma_ps", self.gamma_ps),
            ("wavelength", self.wavelength),
        ];
        for (field, v) in positive {
            if !(v > 0.0) {
                return Err(invalid(field, format!("must be positive, got {v}")));
            }
        }
        if !(self.a_s >= 0.0 && self.a_s.is_finite()) {
            return Err(invalid("a_s", format!("must be nonnegative, got {}", self.a_s)));
        }
        if !(self.rho_p >= 0.0 && self.rho_p.is_finite()) {
            return Err(invalid("rho_p", format!("must be nonnegative, got {}", self.rho_p)));
        }
        if !self.speed.is_finite() {
            return Err(invalid("speed", "must be finite"));
        }
        Ok(())
    }

    /// Rician factor `K = A_s / σ₂²`.
    pub fn rician_factor(&self) -> f64 {
        self.a_s / self.sigma2_sq
    }

    /// Echo SNR after the configured path loss.
    pub fn effective_echo_snr(&self) -> f64 {
        match self.path_loss {
            PathLoss::Spherical => self.gamma_ps / (4.0 * PI * self.range * self.range),
            PathLoss::None => self.gamma_ps,
        }
    }

    /// Echo noise variance `σ_s² = ρ_p / γ_{p,s}`.
    pub fn echo_noise_variance(&self) -> f64 {
        self.rho_p / self.gamma_ps
    }

    /// Received echo power scale `ρ_{p,r} = ρ_p / (4π d²)`.
    pub fn received_echo_power(&self) -> f64 {
        self.rho_p / (4.0 * PI * self.range * self.range)
    }
}

/// `α = c² / (8π² γ_{p,s} s_rcs B_rms²)` in m², using the effective echo
/// SNR.
pub fn alpha_coeff(link: &SenseLink) -> f64 {
    link.c * link.c / (8.0 * PI * PI * link.effective_echo_snr() * link.s_rcs * link.b_rms * link.b_rms)
}

/// Per-slot range bound `α / (L_p · gain)`.
pub fn instantaneous_crb(alpha: f64, pilots: usize, gain: f64) -> Result<f64> {
    if !(gain > 0.0) {
        return Err(Error::Degenerate {
            operation: "instantaneous_crb",
            detail: format!("sensing gain must be positive, got {gain}"),
        });
    }
    if !(alpha > 0.0) {
        return Err(invalid("alpha", format!("must be positive, got {alpha}")));
    }
    if pilots == 0 {
        return Err(invalid("pilots", "must be at least 1"));
    }
    Ok(alpha / (pilots as f64 * gain))
}

/// `E[1/X]` for the Rician gain, by the confluent-hypergeometric closed form.
pub fn mean_inverse_gain(a_s: f64, sigma2_sq: f64) -> Result<f64> {
    let k = a_s / (2.0 * sigma2_sq);
    Ok(PI.sqrt() * (-k).exp() * hyp1f1_half(k)? / (2.0 * sigma2_sq).sqrt())
}

/// Ergodic range CRB with one pilot; the bound for `L_p` pilots is this
/// divided by `L_p`.
pub fn ergodic_crb_unit(link: &SenseLink) -> Result<f64> {
    link.validate()?;
    Ok(alpha_coeff(link) * mean_inverse_gain(link.a_s, link.sigma2_sq)?)
}

/// Ergodic range CRB `E[α / (L_p X)]` in m².
///
/// ```
/// use isac_core::sensing::{alpha_coeff, ergodic_crb, SenseLink};
/// let link = SenseLink { a_s: 0.0, ..SenseLink::default() };
/// let rayleigh = alpha_coeff(&link) * std::f64::consts::PI.sqrt() / 2f64.sqrt();
/// assert!((ergodic_crb(&link, 1).unwrap() / rayleigh - 1.0).abs() < 1e-15);
/// ```
pub fn ergodic_crb(link: &SenseLink, pilots: usize) -> Result<f64> {
    if pilots == 0 {
        return Err(invalid("pilots", "must be at least 1"));
    }
    Ok(ergodic_crb_unit(link)? / pilots as f64)
}

/// Ergodic CRB from the first `terms` terms of the term-by-term integrated
/// Bessel series,
///
/// ```text
/// (α e^{-K} / (L_p σ₂²)) Σ_k (1/2) (2σ₂²)^{k+1/2} (A_s/(4σ₂⁴))^k Γ(k+1/2) / (k! Γ(k+1))
/// ```
///
/// Fails with [`Error::NonConvergence`] if the first omitted term would
/// still exceed `1e-16` of the partial sum. Consecutive terms have the ratio
/// `K (k + 1/2) / (k + 1)²`.
pub fn ergodic_crb_series(link: &SenseLink, pilots: usize, terms: usize) -> Result<f64> {
    link.validate()?;
    if pilots == 0 {
        return Err(invalid("pilots", "must be at least 1"));
    }
    if terms == 0 {
        return Err(invalid("terms", "must be at least 1"));
    }
    let s2 = link.sigma2_sq;
    let two_s2 = 2.0 * s2;
    let q = link.a_s / (4.0 * s2 * s2);

    // Each factor tracked separately: (2σ₂²)^{k+1/2}, q^k, Γ(k+1/2), k!, Γ(k+1) = k!.
    let mut pow_s = two_s2.sqrt();
    let mut pow_q = 1.0;
    let mut gamma_half = PI.sqrt();
    let mut fact = 1.0;
    let mut sum = 0.0;
    let mut last = 0.0;
    for k in 0..terms {
        if k > 0 {
            let kf = k as f64;
            pow_s *= two_s2;
            pow_q *= q;
            gamma_half *= kf - 0.5;
            fact *= kf;
        }
        last = 0.5 * pow_s * pow_q * gamma_half / (fact * fact);
        if !last.is_finite() {
            return Err(Error::Overflow {
                function: "ergodic_crb_series",
                value: link.a_s,
            });
        }
        sum += last;
    }
    let k = link.a_s / two_s2;
    let n = (terms - 1) as f64;
    let omitted = last * k * (n + 0.5) / ((n + 1.0) * (n + 1.0));
    if omitted > 1e-16 * sum {
        return Err(Error::NonConvergence {
            operation: "ergodic_crb_series",
            detail: format!("term {terms} would still be {:e} of the partial sum", omitted / sum),
        });
    }
    Ok(alpha_coeff(link) * (-k).exp() / (pilots as f64 * s2) * sum)
}
