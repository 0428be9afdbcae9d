//! Brute-force oracles for the closed forms, and a slot-level signal
//! generator.
//!
//! Samples are split into fixed-size chunks. Chunk `i` draws from its own
//! ChaCha8 stream keyed by `(master_seed, stream_id)` with stream number `i`,
//! and per-chunk statistics are merged in chunk order. The result therefore
//! depends only on `(master_seed, stream_id, n_samples)`, never on how many
//! worker threads ran the chunks.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::channel::{
    data_error, sample_estimated_channel_power, sample_estimation_noise_power, sample_rician_gain, CommLink,
    EstimateVariance, SlotConfig,
};
use crate::error::{invalid, Error, Result};
use crate::sensing::{alpha_coeff, SenseLink};

const CHUNK: u64 = 1 << 15;

/// Sample budget and seeding of one Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McSpec {
    pub n_samples: u64,
    pub master_seed: u64,
    pub stream_id: u64,
    /// Worker threads; `0` uses the global rayon pool. Has no effect on the
    /// numbers produced.
    pub workers: usize,
}

impl McSpec {
    pub fn new(n_samples: u64, master_seed: u64, stream_id: u64) -> Result<Self> {
        let spec = Self {
            n_samples,
            master_seed,
            stream_id,
            workers: 0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_workers(self, workers: usize) -> Self {
        Self { workers, ..self }
    }

    pub fn with_stream(self, stream_id: u64) -> Self {
        Self { stream_id, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(invalid("n_samples", "must be at least 1"));
        }
        Ok(())
    }

    /// The random stream for chunk `chunk` of this run.
    pub fn chunk_rng(&self, chunk: u64) -> ChaCha8Rng {
        let mut state = self.master_seed ^ splitmix64(&mut self.stream_id.wrapping_add(0x5851_F42D_4C95_7F2D));
        let mut key = [0u8; 32];
        for word in key.chunks_exact_mut(8) {
            word.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(chunk);
        rng
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// `None` when fewer than two samples were drawn.
    pub std_error: Option<f64>,
    pub n_samples: u64,
}

impl Estimate {
    /// `|value - mean|` in units of the standard error.
    pub fn z_score(&self, value: f64) -> Option<f64> {
        self.std_error.map(|se| (value - self.mean).abs() / se)
    }

    fn scaled(self, factor: f64) -> Self {
        Self {
            mean: self.mean * factor,
            std_error: self.std_error.map(|se| se * factor.abs()),
            n_samples: self.n_samples,
        }
    }
}

/// Running count, mean and sum of squared deviations (Welford).
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    fn merge(self, other: Self) -> Self {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        Self {
            n,
            mean: self.mean + delta * w,
            m2: self.m2 + other.m2 + delta * delta * self.n as f64 * w,
        }
    }

    fn estimate(self) -> Estimate {
        let std_error = (self.n > 1).then(|| (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt());
        Estimate {
            mean: self.mean,
            std_error,
            n_samples: self.n,
        }
    }
}

fn run_chunks<F>(mc: &McSpec, sample: F) -> Result<Estimate>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    mc.validate()?;
    let chunks = mc.n_samples.div_ceil(CHUNK);
    let work = || {
        (0..chunks)
            .into_par_iter()
            .map(|i| {
                let len = CHUNK.min(mc.n_samples - i * CHUNK);
                let mut rng = mc.chunk_rng(i);
                let mut m = Moments::default();
                for _ in 0..len {
                    m.push(sample(&mut rng));
                }
                m
            })
            .collect::<Vec<_>>()
    };
    let parts = if mc.workers == 0 {
        work()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(mc.workers)
            .build()
            .map_err(|e| invalid("workers", e.to_string()))?
            .install(work)
    };
    Ok(parts.into_iter().fold(Moments::default(), Moments::merge).estimate())
}

/// Monte Carlo ergodic capacity for an explicit estimation error `e_d`.
///
/// Each sample is `B (L - L_p) log₂(1 + |ĥ_d|² γ_d / (1 + |w|² γ_d))`.
pub fn mc_capacity_given_error(
    slot: &SlotConfig,
    link: &CommLink,
    e_d: f64,
    variance: EstimateVariance,
    mc: &McSpec,
) -> Result<Estimate> {
    if !(e_d >= 0.0 && e_d <= link.sigma1_sq()) {
        return Err(invalid("e_d", format!("must lie in [0, σ₁²], got {e_d}")));
    }
    if !link.gamma_d().is_finite() {
        return Err(Error::Degenerate {
            operation: "mc_ergodic_capacity",
            detail: "infinite data SNR".into(),
        });
    }
    let g = link.gamma_d();
    let hat = match variance {
        EstimateVariance::Full => *link,
        EstimateVariance::Orthogonal => {
            let v = link.sigma1_sq() - e_d;
            if v <= 0.0 {
                return Err(Error::Degenerate {
                    operation: "mc_ergodic_capacity",
                    detail: "estimate variance σ₁² − e_d vanishes".into(),
                });
            }
            CommLink::new(v, link.gamma_p(), g)?
        }
    };
    let per_symbol = run_chunks(mc, |rng| {
        let h = sample_estimated_channel_power(&hat, rng);
        let w = sample_estimation_noise_power(e_d, rng);
        (h * g / (1.0 + w * g)).ln_1p() / std::f64::consts::LN_2
    })?;
    Ok(per_symbol.scaled(slot.bandwidth() * slot.data_symbols() as f64))
}

/// Monte Carlo ergodic capacity with the pilot-dependent estimation error.
pub fn mc_ergodic_capacity(slot: &SlotConfig, link: &CommLink, mc: &McSpec) -> Result<Estimate> {
    mc_capacity_given_error(slot, link, data_error(link, slot.pilots()), EstimateVariance::Full, mc)
}

/// Monte Carlo ergodic range CRB: the sample mean of `α / (L_p X)` over
/// Rician gains `X`. Deep fades are kept.
pub fn mc_ergodic_crb(sense: &SenseLink, pilots: usize, mc: &McSpec) -> Result<Estimate> {
    sense.validate()?;
    if pilots == 0 {
        return Err(invalid("pilots", "must be at least 1"));
    }
    let alpha = alpha_coeff(sense);
    mc_mean_inverse_gain(sense.a_s, sense.sigma2_sq, mc).map(|e| e.scaled(alpha / pilots as f64))
}

/// Monte Carlo estimate of `E[1/X]` for the Rician gain.
pub fn mc_mean_inverse_gain(a_s: f64, sigma2_sq: f64, mc: &McSpec) -> Result<Estimate> {
    run_chunks(mc, |rng| 1.0 / sample_rician_gain(a_s, sigma2_sq, rng))
}

/// Received samples of one slot, plus the ground truth that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotTrace {
    /// Pilot phase at the user, `L_p` samples.
    pub pilot_rx: Vec<Complex64>,
    /// Data phase at the user, `L - L_p` samples.
    pub data_rx: Vec<Complex64>,
    /// Pilot echo at the BS, `L_p` samples.
    pub echo_rx: Vec<Complex64>,
    pub pilot_tx: Vec<Complex64>,
    pub data_tx: Vec<Complex64>,
    /// Block-fading communication channel (constant over the slot).
    pub comm_channel: Complex64,
    /// Block-fading Rician sensing channel.
    pub sense_channel: Complex64,
    pub true_range: f64,
    pub true_speed: f64,
    /// Round-trip delay `2d/c`, s. Carried as metadata; the echo samples are
    /// not resampled.
    pub delay: f64,
    /// Symbol spacing used for the Doppler phase, `1/B` s.
    pub symbol_period: f64,
}

fn complex_normal<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> Complex64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// Generates one slot: constant-envelope chirp pilots, unit-power QPSK data,
/// a Rayleigh communication channel and a Rician sensing channel, both
/// constant over the slot.
///
/// Powers: `ρ_p = ρ_d = sense.rho_p`; noise variances follow from the SNRs,
/// so an infinite SNR gives a noiseless phase.
pub fn simulate_slot(slot: &SlotConfig, comm: &CommLink, sense: &SenseLink, mc: &McSpec) -> Result<SlotTrace> {
    sense.validate()?;
    let mut rng = mc.chunk_rng(0);
    let lp = slot.pilots();
    let ld = slot.data_symbols();

    let rho = sense.rho_p;
    let sigma_p_sq = rho / comm.gamma_p();
    let sigma_d_sq = rho / comm.gamma_d();
    let sigma_s_sq = sense.echo_noise_variance();

    let pilot_tx: Vec<Complex64> = (0..lp)
        .map(|t| Complex64::from_polar(1.0, PI * (t * t) as f64 / lp as f64))
        .collect();
    let data_tx: Vec<Complex64> = (0..ld)
        .map(|_| {
            let re = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let im = if rng.random::<bool>() { 1.0 } else { -1.0 };
            Complex64::new(re, im) / 2f64.sqrt()
        })
        .collect();

    let h = complex_normal(comm.sigma1_sq(), &mut rng);
    let sigma2 = sense.sigma2_sq.sqrt();
    let n1: f64 = StandardNormal.sample(&mut rng);
    let n2: f64 = StandardNormal.sample(&mut rng);
    let h_s = Complex64::new(sense.a_s.sqrt() + sigma2 * n1, sigma2 * n2);

    let amp_p = rho.sqrt();
    let pilot_rx = pilot_tx
        .iter()
        .map(|x| h * amp_p * x + complex_normal(sigma_p_sq, &mut rng))
        .collect();
    let data_rx = data_tx
        .iter()
        .map(|x| h * amp_p * x + complex_normal(sigma_d_sq, &mut rng))
        .collect();

    let symbol_period = 1.0 / slot.bandwidth();
    let echo_amp = (sense.received_echo_power() * sense.s_rcs).sqrt();
    let echo_rx = pilot_tx
        .iter()
        .enumerate()
        .map(|(t, x)| {
            let doppler = Complex64::from_polar(
                1.0,
                4.0 * PI * sense.speed * t as f64 * symbol_period / sense.wavelength,
            );
            h_s * echo_amp * x * doppler + complex_normal(sigma_s_sq, &mut rng)
        })
        .collect();

    Ok(SlotTrace {
        pilot_rx,
        data_rx,
        echo_rx,
        pilot_tx,
        data_tx,
        comm_channel: h,
        sense_channel: h_s,
        true_range: sense.range,
        true_speed: sense.speed,
        delay: 2.0 * sense.range / sense.c,
        symbol_period,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{capacity_given_error, ergodic_capacity};
    use crate::sensing::ergodic_crb;

    fn mc(n: u64) -> McSpec {
        McSpec::new(n, 2024, 7).unwrap()
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.3).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        let m = a.merge(b);
        assert!((m.mean - all.mean).abs() < 1e-12);
        assert!((m.m2 - all.m2).abs() < 1e-9 * all.m2);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let slot = SlotConfig::new(14, 3, 1.0).unwrap();
        let link = CommLink::new(2.0, 10.0, 10.0).unwrap();
        let base = mc(200_001);
        let one = mc_ergodic_capacity(&slot, &link, &base.with_workers(1)).unwrap();
        let four = mc_ergodic_capacity(&slot, &link, &base.with_workers(4)).unwrap();
        let auto = mc_ergodic_capacity(&slot, &link, &base).unwrap();
        assert_eq!(one.mean.to_bits(), four.mean.to_bits());
        assert_eq!(one.mean.to_bits(), auto.mean.to_bits());
        assert_eq!(one.std_error.unwrap().to_bits(), four.std_error.unwrap().to_bits());
    }

    #[test]
    fn streams_differ() {
        let slot = SlotConfig::new(14, 3, 1.0).unwrap();
        let link = CommLink::new(2.0, 10.0, 10.0).unwrap();
        let a = mc_ergodic_capacity(&slot, &link, &mc(1000)).unwrap();
        let b = mc_ergodic_capacity(&slot, &link, &mc(1000).with_stream(8)).unwrap();
        assert_ne!(a.mean, b.mean);
    }

    #[test]
    fn capacity_matches_closed_form() {
        let slot = SlotConfig::new(14, 4, 1.0).unwrap();
        let link = CommLink::new(2.0, 10.0, 10.0).unwrap();
        let est = mc_ergodic_capacity(&slot, &link, &mc(1_000_000)).unwrap();
        let closed = ergodic_capacity(&slot, &link).unwrap().capacity;
        assert!(est.z_score(closed).unwrap() < 3.0);
        assert!((est.mean / closed - 1.0).abs() < 5e-3);
    }

    #[test]
    fn perfect_csi_capacity() {
        let slot = SlotConfig::new(14, 4, 1.0).unwrap();
        let link = CommLink::new(2.0, 10.0, 10.0).unwrap();
        let est = mc_capacity_given_error(&slot, &link, 0.0, EstimateVariance::Full, &mc(1_000_000)).unwrap();
        let closed = capacity_given_error(&slot, &link, 0.0).unwrap().capacity;
        assert!(est.z_score(closed).unwrap() < 3.0);
    }

    #[test]
    fn orthogonal_variance_lowers_capacity() {
        let slot = SlotConfig::new(14, 1, 1.0).unwrap();
        let link = CommLink::new(2.0, 0.5, 10.0).unwrap();
        let e_d = data_error(&link, 1);
        let full = mc_capacity_given_error(&slot, &link, e_d, EstimateVariance::Full, &mc(200_000)).unwrap();
        let orth = mc_capacity_given_error(&slot, &link, e_d, EstimateVariance::Orthogonal, &mc(200_000)).unwrap();
        assert!(orth.mean < full.mean);
    }

    #[test]
    fn single_sample_has_no_std_error() {
        let slot = SlotConfig::new(14, 4, 1.0).unwrap();
        let link = CommLink::new(2.0, 10.0, 10.0).unwrap();
        let est = mc_ergodic_capacity(&slot, &link, &mc(1)).unwrap();
        assert!(est.std_error.is_none() && est.mean >= 0.0);
        assert!(McSpec::new(0, 1, 1).is_err());
    }

    #[test]
    fn single_draws_have_the_right_sign() {
        let slot = SlotConfig::new(14, 4, 1.0).unwrap();
        let link = CommLink::new(2.0, 1.0, 1.0).unwrap();
        let sense = SenseLink::default();
        for s in 0..500 {
            let spec = mc(1).with_stream(s);
            assert!(mc_ergodic_capacity(&slot, &link, &spec).unwrap().mean >= 0.0);
            assert!(mc_ergodic_crb(&sense, 3, &spec).unwrap().mean > 0.0);
        }
    }

    #[test]
    fn std_error_scales_as_inverse_root_n() {
        let slot = SlotConfig::new(14, 4, 1.0).unwrap();
        let link = CommLink::new(2.0, 10.0, 10.0).unwrap();
        let a = mc_ergodic_capacity(&slot, &link, &mc(100_000))
            .unwrap()
            .std_error
            .unwrap();
        let b = mc_ergodic_capacity(&slot, &link, &mc(400_000))
            .unwrap()
            .std_error
            .unwrap();
        assert!((a / b / 2.0 - 1.0).abs() < 0.2);
    }

    #[test]
    fn crb_matches_closed_form() {
        let sense = SenseLink::default();
        let est = mc_ergodic_crb(&sense, 1, &mc(2_000_000)).unwrap();
        let closed = ergodic_crb(&sense, 1).unwrap();
        assert!(est.z_score(closed).unwrap() < 3.0, "{est:?} vs {closed}");
        let rayleigh = SenseLink { a_s: 0.0, ..sense };
        let est = mc_ergodic_crb(&rayleigh, 5, &mc(2_000_000)).unwrap();
        let want = alpha_coeff(&rayleigh) * PI.sqrt() / (5.0 * 2f64.sqrt());
        assert!(est.z_score(want).unwrap() < 3.0);
    }

    #[test]
    fn crb_estimate_is_linear_in_alpha() {
        let sense = SenseLink::default();
        let louder = SenseLink {
            gamma_ps: sense.gamma_ps / 2.0,
            ..sense
        };
        let a = mc_ergodic_crb(&sense, 2, &mc(10_000)).unwrap();
        let b = mc_ergodic_crb(&louder, 2, &mc(10_000)).unwrap();
        assert!((b.mean / a.mean - 2.0).abs() < 1e-14);
    }

    #[test]
    fn noiseless_pilots_are_exact() {
        let slot = SlotConfig::new(14, 4, 1e6).unwrap();
        let comm = CommLink::new(2.0, f64::INFINITY, f64::INFINITY).unwrap();
        let sense = SenseLink {
            gamma_ps: f64::INFINITY,
            ..SenseLink::default()
        };
        let tr = simulate_slot(&slot, &comm, &sense, &mc(1)).unwrap();
        assert_eq!(tr.pilot_rx.len(), 4);
        assert_eq!(tr.data_rx.len(), 10);
        assert_eq!(tr.echo_rx.len(), 4);
        for (y, x) in tr.pilot_rx.iter().zip(&tr.pilot_tx) {
            assert_eq!(*y, tr.comm_channel * sense.rho_p.sqrt() * x);
            assert!((x.norm() - 1.0).abs() < 1e-15);
        }
        for x in &tr.data_tx {
            assert!((x.norm_sqr() - 1.0).abs() < 1e-15);
        }
        assert!((tr.delay - 200.0 / sense.c).abs() < 1e-20);
    }

    #[test]
    fn zero_speed_has_no_doppler() {
        let slot = SlotConfig::new(14, 6, 1e6).unwrap();
        let comm = CommLink::new(2.0, 10.0, 10.0).unwrap();
        let sense = SenseLink {
            gamma_ps: f64::INFINITY,
            speed: 0.0,
            ..SenseLink::default()
        };
        let tr = simulate_slot(&slot, &comm, &sense, &mc(1)).unwrap();
        let amp = (sense.received_echo_power() * sense.s_rcs).sqrt();
        for (y, x) in tr.echo_rx.iter().zip(&tr.pilot_tx) {
            assert_eq!(*y, tr.sense_channel * amp * x);
        }
        let moving = SenseLink { speed: 30.0, ..sense };
        let tr2 = simulate_slot(&slot, &comm, &moving, &mc(1)).unwrap();
        let phase = (tr2.echo_rx[1] / tr.echo_rx[1]).arg();
        let want = 4.0 * PI * 30.0 * tr.symbol_period / sense.wavelength;
        assert!((phase - want).abs() < 1e-12);
    }

    #[test]
    fn echo_power_moment() {
        let slot = SlotConfig::new(14, 2, 1e6).unwrap();
        let comm = CommLink::new(2.0, 10.0, 10.0).unwrap();
        let sense = SenseLink {
            gamma_ps: f64::INFINITY,
            ..SenseLink::default()
        };
        let n = 100_000u64;
        let mut sum = 0.0;
        for s in 0..n {
            let tr = simulate_slot(&slot, &comm, &sense, &McSpec::new(1, 99, s).unwrap()).unwrap();
            sum += tr.echo_rx[0].norm_sqr();
        }
        let want = sense.received_echo_power() * sense.s_rcs * (sense.a_s + 2.0 * sense.sigma2_sq);
        assert!((sum / n as f64 / want - 1.0).abs() < 0.01);
    }

    #[test]
    fn simulated_slot_is_reproducible() {
        let slot = SlotConfig::new(14, 4, 1e6).unwrap();
        let comm = CommLink::new(2.0, 10.0, 10.0).unwrap();
        let sense = SenseLink::default();
        let a = simulate_slot(&slot, &comm, &sense, &mc(1)).unwrap();
        let b = simulate_slot(&slot, &comm, &sense, &mc(1)).unwrap();
        assert_eq!(a, b);
    }
}
