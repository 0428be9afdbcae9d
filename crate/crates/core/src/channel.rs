//! Channel-estimation error model and the fading samplers shared with the
//! Monte Carlo oracles.
//!
//! The communication link is Rayleigh with variance `σ₁²`. Pilots are
//! least-squares estimated (error `1/γ_p`), data-symbol channels are
//! interpolated from them with a Wiener filter whose mean-square error
//! depends on the pilot count:
//!
//! ```text
//! e_d = σ₁² - σ₁² / (1 + 1/(σ₁² γ_p L_p))  =  σ₁² / (1 + σ₁² γ_p L_p)
//! ```
//!
//! The sensing link is Rician: a line-of-sight component of power `A_s`
//! plus diffuse scattering with per-component variance `σ₂²`.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{invalid, Result};

/// Statistics and SNRs of the BS → communication-user link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommLink {
    sigma1_sq: f64,
    gamma_p: f64,
    gamma_d: f64,
}

impl CommLink {
    /// `sigma1_sq` is the Rayleigh channel variance, `gamma_p` and `gamma_d`
    /// the linear pilot and data SNRs. `f64::INFINITY` is accepted for either
    /// SNR and stands for a noiseless phase.
    pub fn new(sigma1_sq: f64, gamma_p: f64, gamma_d: f64) -> Result<Self> {
        if !(sigma1_sq > 0.0 && sigma1_sq.is_finite()) {
            return Err(invalid("sigma1_sq", format!("must be positive, got {sigma1_sq}")));
        }
        if !(gamma_p > 0.0) {
            return Err(invalid("gamma_p", format!("must be positive, got {gamma_p}")));
        }
        if !(gamma_d > 0.0) {
            return Err(invalid("gamma_d", format!("must be positive, got {gamma_d}")));
        }
        Ok(Self {
            sigma1_sq,
            gamma_p,
            gamma_d,
        })
    }

    pub fn sigma1_sq(&self) -> f64 {
        self.sigma1_sq
    }

    pub fn gamma_p(&self) -> f64 {
        self.gamma_p
    }

    pub fn gamma_d(&self) -> f64 {
        self.gamma_d
    }

    pub fn with_gamma_d(self, gamma_d: f64) -> Result<Self> {
        Self::new(self.sigma1_sq, self.gamma_p, gamma_d)
    }
}

/// Resource split of one slot: `symbols` in total, the first `pilots` of
/// which carry pilots, over `bandwidth` Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotConfig {
    symbols: usize,
    pilots: usize,
    bandwidth: f64,
}

impl SlotConfig {
    pub fn new(symbols: usize, pilots: usize, bandwidth: f64) -> Result<Self> {
        if symbols < 2 {
            return Err(invalid(
                "symbols",
                format!("a slot needs at least 2 symbols, got {symbols}"),
            ));
        }
        if pilots < 1 || pilots > symbols - 1 {
            return Err(invalid(
                "pilots",
                format!("must lie in 1..={}, got {pilots}", symbols - 1),
            ));
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(invalid("bandwidth", format!("must be positive, got {bandwidth}")));
        }
        Ok(Self {
            symbols,
            pilots,
            bandwidth,
        })
    }

    /// Total symbols per slot, `L`.
    pub fn symbols(&self) -> usize {
        self.symbols
    }

    /// Pilot symbols, `L_p`.
    pub fn pilots(&self) -> usize {
        self.pilots
    }

    pub fn data_symbols(&self) -> usize {
        self.symbols - self.pilots
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Same slot with a different pilot count.
    pub fn with_pilots(&self, pilots: usize) -> Result<Self> {
        Self::new(self.symbols, pilots, self.bandwidth)
    }

    /// Every admissible pilot count, `1..=L-1`.
    pub fn pilot_range(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.symbols - 1
    }
}

/// Least-squares pilot-channel error `e_p = σ_p²/ρ_p = 1/γ_p`.
pub fn pilot_error(link: &CommLink) -> f64 {
    1.0 / link.gamma_p
}

/// Wiener-interpolation error on the data symbols after `pilots` pilots.
///
/// ```
/// use isac_core::channel::{data_error, CommLink};
/// let link = CommLink::new(2.0, 10.0, 10.0).unwrap();
/// assert!((data_error(&link, 4) - 2.0 / 81.0).abs() < 1e-17);
/// ```
pub fn data_error(link: &CommLink, pilots: usize) -> f64 {
    data_error_continuous(link, pilots as f64)
}

/// [`data_error`] for a real-valued pilot count, used by the continuous
/// relaxation of the pilot-length problem.
pub fn data_error_continuous(link: &CommLink, pilots: f64) -> f64 {
    link.sigma1_sq / (1.0 + link.sigma1_sq * link.gamma_p * pilots)
}

/// How the variance of the estimated data channel `ĥ_d` is modelled when
/// sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EstimateVariance {
    /// `|ĥ_d|² ~ Exp(mean σ₁²)`, the assumption behind the capacity closed
    /// form.
    #[default]
    Full,
    /// `|ĥ_d|² ~ Exp(mean σ₁² - e_d)`, what MMSE orthogonality between the
    /// estimate and its error would give. For sensitivity studies only.
    Orthogonal,
}

/// One draw of `|ĥ_d|²`: exponential with mean `σ₁²`.
pub fn sample_estimated_channel_power<R: Rng + ?Sized>(link: &CommLink, rng: &mut R) -> f64 {
    let e: f64 = Exp1.sample(rng);
    e * link.sigma1_sq
}

/// One draw of the interpolation-noise power `|w_{d,wf}|²`: exponential with
/// mean `e_d`. `e_d = 0` gives the degenerate draw 0.
pub fn sample_estimation_noise_power<R: Rng + ?Sized>(e_d: f64, rng: &mut R) -> f64 {
    let e: f64 = Exp1.sample(rng);
    e * e_d
}

/// One draw of the Rician sensing gain `X = |√A_s + σ₂(n₁ + j n₂)|` with
/// `n₁, n₂` independent standard normals.
///
/// `X` has density `(x/σ₂²) exp(-(x² + A_s)/(2σ₂²)) I0(√A_s x/σ₂²)`
/// (see [`rician_pdf`]), and `E[X²] = A_s + 2σ₂²`.
pub fn sample_rician_gain<R: Rng + ?Sized>(a_s: f64, sigma2_sq: f64, rng: &mut R) -> f64 {
    let sigma = sigma2_sq.sqrt();
    let n1: f64 = StandardNormal.sample(rng);
    let n2: f64 = StandardNormal.sample(rng);
    (a_s.sqrt() + sigma * n1).hypot(sigma * n2)
}

/// Density of the Rician gain sampled by [`sample_rician_gain`].
pub fn rician_pdf(x: f64, a_s: f64, sigma2_sq: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let arg = a_s.sqrt() * x / sigma2_sq;
    // exp(-(x² + A_s)/(2σ₂²)) I0(arg) = exp(arg - (x² + A_s)/(2σ₂²)) e^{-arg} I0(arg)
    let scaled = crate::specfun::bessel_i0_scaled(arg).unwrap_or(0.0);
    x / sigma2_sq * (arg - (x * x + a_s) / (2.0 * sigma2_sq)).exp() * scaled
}
