//! Capacity-per-sensing-error efficiency, the weighted utility, and the
//! pilot-length optimizer.
//!
//! The optimizer solves the continuous relaxation of
//! `max C(L_p) / (κ + δ̄(L_p))` over `L_p ∈ [1, L-1]` with Dinkelbach's method:
//! for a current ratio `q` it maximizes `C - q(κ + δ̄)`, then sets `q` to the
//! ratio at the maximizer. The integer answer is the better neighbour of the
//! continuous optimum, which is exact whenever the ratio is quasi-concave.

use crate::capacity::{capacity_continuous, capacity_curve};
use crate::channel::{CommLink, SlotConfig};
use crate::error::{invalid, Error, Result};
use crate::sensing::{ergodic_crb_unit, SenseLink};

/// Relative slack under which two efficiencies count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;
/// Dinkelbach stopping rule: `|F(q)| ≤ DINKELBACH_TOLERANCE · max(1, q)`.
pub const DINKELBACH_TOLERANCE: f64 = 1e-9;
pub const DINKELBACH_MAX_ITERATIONS: usize = 100;

/// Weights and thresholds for efficiency and utility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricConfig {
    /// Regularizer in the efficiency denominator, `κ ≥ 0`.
    pub kappa: f64,
    /// Capacity weight in the utility, `0 < η < 1`.
    pub eta: f64,
    /// Minimum capacity ratio `C / C_max` for a feasible pilot length.
    pub u_c_th: f64,
    /// Minimum sensing ratio `CRB_min / CRB` for a feasible pilot length.
    pub u_d_th: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            eta: 0.5,
            u_c_th: 0.0,
            u_d_th: 0.0,
        }
    }
}

impl MetricConfig {
    pub fn new(kappa: f64, eta: f64, u_c_th: f64, u_d_th: f64) -> Result<Self> {
        let cfg = Self {
            kappa,
            eta,
            u_c_th,
            u_d_th,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(invalid(
                "kappa",
                format!("must be finite and nonnegative, got {}", self.kappa),
            ));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(invalid("eta", format!("must lie in (0, 1), got {}", self.eta)));
        }
        for (field, v) in [("u_c_th", self.u_c_th), ("u_d_th", self.u_d_th)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(field, format!("must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

/// `C / (κ + crb)`.
pub fn efficiency(capacity: f64, crb: f64, cfg: &MetricConfig) -> Result<f64> {
    if !(capacity >= 0.0) || !(crb >= 0.0) {
        return Err(invalid(
            "efficiency",
            format!("capacity and CRB must be nonnegative, got {capacity}, {crb}"),
        ));
    }
    let den = cfg.kappa + crb;
    if den == 0.0 {
        return Err(Error::Degenerate {
            operation: "efficiency",
            detail: "κ = 0 with zero CRB".into(),
        });
    }
    Ok(capacity / den)
}

/// Efficiency at every integer pilot length `1..=L-1`.
pub fn efficiency_curve(slot: &SlotConfig, comm: &CommLink, sense: &SenseLink, cfg: &MetricConfig) -> Result<Vec<f64>> {
    let unit = ergodic_crb_unit(sense)?;
    capacity_curve(slot, comm)?
        .into_iter()
        .enumerate()
        .map(|(i, c)| efficiency(c, unit / (i + 1) as f64, cfg))
        .collect()
}

/// Index of the largest value; values within [`TIE_TOLERANCE`] of the
/// maximum resolve to the first.
///
/// # Panics
/// If `values` is empty.
pub fn argmax_first(values: &[f64]) -> usize {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .position(|&v| v >= best - TIE_TOLERANCE * best.abs())
        .expect("argmax of an empty slice")
}

/// Outcome of the pilot-length optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerReport {
    /// Best integer pilot length, in `1..=L-1`.
    pub l_p_opt: usize,
    /// Continuous maximizer, clamped to `[1, L-1]`.
    pub l_p_continuous: f64,
    /// Optimal ratio of the continuous problem.
    pub q_star: f64,
    /// Ratio at `l_p_opt`.
    pub efficiency_at_opt: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `F(q) = max N - q D` from the last iteration, evaluated at the `q`
    /// before its final update.
    pub residual: f64,
    /// `q` after each iteration, starting with the initial guess.
    pub q_history: Vec<f64>,
    /// Integer pilot lengths compared when rounding, with their ratios.
    pub candidates_examined: Vec<(usize, f64)>,
}

/// Maximizes the concave function `f` on `[lo, hi]` by golden-section
/// search. Returns the abscissa and value of the best point seen.
fn golden_section<F>(f: F, lo: f64, hi: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > 1e-11 * hi.abs().max(1.0) {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        }
    }
    // The interior probes never touch the ends, where a monotone objective
    // peaks.
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for x in [lo, hi] {
        let v = f(x)?;
        if v > best.1 {
            best = (x, v);
        }
    }
    Ok(best)
}

/// Dinkelbach maximization of `numerator(x) / denominator(x)` over real
/// `x ∈ [1, max_pilots]`, rounded to the better integer neighbour.
///
/// `numerator` must be nonnegative and concave, `denominator` positive and
/// convex. Running out of iterations is reported through `converged`, not as
/// an error.
pub fn maximize_ratio<N, D>(numerator: N, denominator: D, max_pilots: usize) -> Result<OptimizerReport>
where
    N: Fn(f64) -> Result<f64>,
    D: Fn(f64) -> Result<f64>,
{
    if max_pilots == 0 {
        return Err(invalid("max_pilots", "must be at least 1"));
    }
    let hi = max_pilots as f64;
    let ratio = |x: f64| -> Result<f64> { Ok(numerator(x)? / denominator(x)?) };

    let mut x = 1.0;
    let mut q = ratio(x)?;
    let mut q_history = vec![q];
    let mut iterations = 0;
    let mut converged = false;
    let mut residual = f64::INFINITY;
    while iterations < DINKELBACH_MAX_ITERATIONS {
        iterations += 1;
        let parametric = |t: f64| -> Result<f64> { Ok(numerator(t)? - q * denominator(t)?) };
        let (x_new, f_new) = golden_section(parametric, 1.0, hi)?;
        residual = f_new;
        if !f_new.is_finite() {
            return Err(Error::NonConvergence {
                operation: "maximize_ratio",
                detail: format!("parametric objective is {f_new} at q = {q}"),
            });
        }
        let tolerance = DINKELBACH_TOLERANCE * q.max(1.0);
        let q_new = ratio(x_new)?;
        // A positive F(q) means the new point has a strictly larger ratio.
        if f_new > 0.0 && q_new > q {
            x = x_new;
            q = q_new;
            q_history.push(q);
        }
        if f_new.abs() <= tolerance {
            converged = true;
            break;
        }
    }

    let lo_int = (x.floor() as usize).clamp(1, max_pilots);
    let hi_int = (x.ceil() as usize).clamp(1, max_pilots);
    let mut candidates_examined = vec![(lo_int, ratio(lo_int as f64)?)];
    if hi_int != lo_int {
        candidates_examined.push((hi_int, ratio(hi_int as f64)?));
    }
    let values: Vec<f64> = candidates_examined.iter().map(|c| c.1).collect();
    let (l_p_opt, efficiency_at_opt) = candidates_examined[argmax_first(&values)];

    Ok(OptimizerReport {
        l_p_opt,
        l_p_continuous: x,
        q_star: q,
        efficiency_at_opt,
        iterations,
        converged,
        residual,
        q_history,
        candidates_examined,
    })
}

/// Pilot length maximizing `C / (κ + δ̄)` over `1..=L-1`.
pub fn optimize_pilot_length(
    slot: &SlotConfig,
    comm: &CommLink,
    sense: &SenseLink,
    cfg: &MetricConfig,
) -> Result<OptimizerReport> {
    cfg.validate()?;
    let unit = ergodic_crb_unit(sense)?;
    if cfg.kappa == 0.0 && unit == 0.0 {
        return Err(Error::Degenerate {
            operation: "optimize_pilot_length",
            detail: "κ = 0 with zero CRB".into(),
        });
    }
    let (symbols, bandwidth) = (slot.symbols(), slot.bandwidth());
    maximize_ratio(
        |x| capacity_continuous(symbols, bandwidth, comm, x),
        |x| Ok(cfg.kappa + unit / x),
        symbols - 1,
    )
}

/// Utility breakdown at one pilot length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityPoint {
    pub pilots: usize,
    pub utility: f64,
    /// `C(L_p) / C_max`.
    pub capacity_ratio: f64,
    /// `CRB_min / CRB(L_p)`.
    pub crb_ratio: f64,
    pub feasible: bool,
}

/// Utility at every pilot length `1..=L-1`.
///
/// `C_max` is the largest capacity on that grid and `CRB_min` the CRB at
/// `L-1`, so both ratios lie in `(0, 1]`.
pub fn utility_curve(
    slot: &SlotConfig,
    comm: &CommLink,
    sense: &SenseLink,
    cfg: &MetricConfig,
) -> Result<Vec<UtilityPoint>> {
    let caps = capacity_curve(slot, comm)?;
    let unit = ergodic_crb_unit(sense)?;
    let crbs: Vec<f64> = (1..slot.symbols()).map(|l| unit / l as f64).collect();
    utility_from_curves(&caps, &crbs, cfg)
}

/// Utility from precomputed capacity and CRB values at pilot lengths
/// `1..=n`. The CRB is taken as smallest at the last entry.
pub fn utility_from_curves(capacities: &[f64], crbs: &[f64], cfg: &MetricConfig) -> Result<Vec<UtilityPoint>> {
    cfg.validate()?;
    if capacities.is_empty() || capacities.len() != crbs.len() {
        return Err(invalid(
            "utility",
            "capacity and CRB curves must be nonempty and equally long",
        ));
    }
    let c_max = capacities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(c_max > 0.0) {
        return Err(Error::Degenerate {
            operation: "utility",
            detail: "capacity vanishes for every pilot length".into(),
        });
    }
    let crb_min = crbs[crbs.len() - 1];
    Ok(capacities
        .iter()
        .zip(crbs)
        .enumerate()
        .map(|(i, (&c, &crb))| {
            let capacity_ratio = c / c_max;
            let crb_ratio = crb_min / crb;
            UtilityPoint {
                pilots: i + 1,
                utility: cfg.eta * capacity_ratio + (1.0 - cfg.eta) * crb_ratio,
                capacity_ratio,
                crb_ratio,
                feasible: capacity_ratio >= cfg.u_c_th && crb_ratio >= cfg.u_d_th,
            }
        })
        .collect())
}

/// `η C(L_p)/C_max + (1-η) CRB_min/CRB(L_p)`.
pub fn utility(
    slot: &SlotConfig,
    comm: &CommLink,
    sense: &SenseLink,
    cfg: &MetricConfig,
    pilots: usize,
) -> Result<f64> {
    if !(1..slot.symbols()).contains(&pilots) {
        return Err(invalid(
            "pilots",
            format!("must lie in 1..={}, got {pilots}", slot.symbols() - 1),
        ));
    }
    Ok(utility_curve(slot, comm, sense, cfg)?[pilots - 1].utility)
}

/// Pilot lengths meeting both utility thresholds, ascending. May be empty.
pub fn feasible_pilot_set(
    slot: &SlotConfig,
    comm: &CommLink,
    sense: &SenseLink,
    cfg: &MetricConfig,
) -> Result<Vec<usize>> {
    Ok(utility_curve(slot, comm, sense, cfg)?
        .into_iter()
        .filter(|p| p.feasible)
        .map(|p| p.pilots)
        .collect())
}
