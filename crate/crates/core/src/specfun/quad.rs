//! Globally adaptive 15-point Gauss–Kronrod quadrature.
//!
//! Finite intervals are bisected where the local error estimate is largest;
//! the half-line `[0, ∞)` is mapped onto `(0, 1]` by `s = (1 - t) / t` first.
//! Error estimates follow the usual QUADPACK rescaling.

use crate::error::{invalid, Error, Result};

/// Kronrod abscissae on `[0, 1]`; odd indices are the 7-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerance and subdivision budget for [`integrate`] and
/// [`integrate_semi_infinite`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    relative_tolerance: f64,
    max_subdivisions: usize,
}

impl QuadSpec {
    pub fn new(relative_tolerance: f64, max_subdivisions: usize) -> Result<Self> {
        if !(relative_tolerance > 0.0 && relative_tolerance <= 1e-3) {
            return Err(invalid(
                "relative_tolerance",
                format!("must lie in (0, 1e-3], got {relative_tolerance}"),
            ));
        }
        if max_subdivisions == 0 {
            return Err(invalid("max_subdivisions", "must be at least 1"));
        }
        Ok(Self {
            relative_tolerance,
            max_subdivisions,
        })
    }

    pub fn relative_tolerance(&self) -> f64 {
        self.relative_tolerance
    }

    pub fn max_subdivisions(&self) -> usize {
        self.max_subdivisions
    }
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut res_g = f_center * WG[3];
    let mut res_k = f_center * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let abs_half = half.abs();
    let value = res_k * half;
    res_abs *= abs_half;
    res_asc *= abs_half;

    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }

    Segment {
        a,
        b,
        value,
        error,
        abs_value: res_abs,
    }
}

/// `∫_a^b f(x) dx` to the relative tolerance in `spec`.
///
/// The integrand is never evaluated at the end points, so integrable end-point
/// singularities are tolerated as long as the adaptive refinement can resolve
/// them within the subdivision budget.
pub fn integrate<F>(f: F, a: f64, b: f64, spec: &QuadSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(invalid("bounds", format!("finite bounds required, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }

    let first = gauss_kronrod(&f, a, b);
    let mut segments = vec![first];

    loop {
        let (total, err, abs_total) = segments.iter().fold((0.0, 0.0, 0.0), |acc, s| {
            (acc.0 + s.value, acc.1 + s.error, acc.2 + s.abs_value)
        });
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::NonConvergence {
                operation: "integrate",
                detail: "integrand produced a non-finite value".into(),
            });
        }
        if err <= spec.relative_tolerance * total.abs() || err <= 100.0 * f64::EPSILON * abs_total {
            return Ok(total);
        }
        if segments.len() >= spec.max_subdivisions {
            return Err(Error::NonConvergence {
                operation: "integrate",
                detail: format!(
                    "{} subdivisions exhausted, estimated relative error {:e}",
                    segments.len(),
                    err / total.abs()
                ),
            });
        }

        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            return Err(Error::NonConvergence {
                operation: "integrate",
                detail: format!("interval [{}, {}] cannot be bisected further", seg.a, seg.b),
            });
        }
        segments.push(gauss_kronrod(&f, seg.a, mid));
        segments.push(gauss_kronrod(&f, mid, seg.b));
    }
}

/// `∫_0^∞ f(s) ds` for integrands that decay at least exponentially.
///
/// ```
/// use isac_core::specfun::{integrate_semi_infinite, QuadSpec};
/// let v = integrate_semi_infinite(|s| s * (-s).exp(), &QuadSpec::default()).unwrap();
/// assert!((v - 1.0).abs() < 1e-10);
/// ```
pub fn integrate_semi_infinite<F>(f: F, spec: &QuadSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mapped = |t: f64| {
        let s = (1.0 - t) / t;
        let v = f(s);
        // f has decayed to zero long before 1/t² overflows
        if v == 0.0 {
            0.0
        } else {
            v / (t * t)
        }
    };
    integrate(mapped, 0.0, 1.0, spec).map_err(|e| match e {
        Error::NonConvergence { detail, .. } => Error::NonConvergence {
            operation: "integrate_semi_infinite",
            detail,
        },
        other => other,
    })
}
