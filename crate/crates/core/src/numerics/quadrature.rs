use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self {
            rel_tol,
            abs_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) || self.max_subdivisions == 0 {
            return Err(Error::InvalidParameter(format!(
                "quadrature tolerances must be positive and max_subdivisions >= 1, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Log-magnitude drop (in nats) below the peak at which the real line is truncated.
pub(crate) const TRUNCATION_NATS: f64 = 40.0;

// 15-point Kronrod abscissae and weights with the embedded 7-point Gauss rule (QUADPACK qk15).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
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

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Segment {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_k = kron.abs();
    let mut fv = [0.0; 14];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        kron += WGK[j] * (f1 + f2);
        abs_k += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kron;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    let value = kron * half;
    let abs_value = abs_k * half.abs();
    let asc = asc * half.abs();
    let mut error = ((kron - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs_value > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs_value);
    }
    Segment {
        lo,
        hi,
        value,
        error,
        abs_value,
    }
}

/// Globally adaptive 15-point Gauss-Kronrod quadrature of `f` over `[lo, hi]`.
///
/// `breaks` are interior points where the initial partition is split; points
/// outside `(lo, hi)` are ignored. Refinement always bisects the segment with
/// the largest error estimate.
pub fn integrate_interval<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64> {
    if lo == hi {
        return Ok(0.0);
    }
    if !(lo < hi) {
        return integrate_interval(f, hi, lo, breaks, spec).map(|v| -v);
    }
    let mut edges: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|b| b.is_finite() && *b > lo && *b < hi)
        .collect();
    edges.push(lo);
    edges.push(hi);
    edges.sort_by(f64::total_cmp);
    edges.dedup();

    let mut heap: BinaryHeap<Segment> = edges
        .windows(2)
        .map(|w| kronrod15(&f, w[0], w[1]))
        .collect();

    loop {
        let (total, err, abs_total) = heap.iter().fold((0.0, 0.0, 0.0), |acc, s| {
            (acc.0 + s.value, acc.1 + s.error, acc.2 + s.abs_value)
        });
        let requested = spec.abs_tol.max(spec.rel_tol * total.abs());
        if !total.is_finite() {
            return Err(Error::ToleranceNotMet {
                estimate: f64::INFINITY,
                requested,
                subdivisions: heap.len(),
            });
        }
        // Roundoff floor: nothing below this is resolvable in double precision.
        if err <= requested || err <= 100.0 * f64::EPSILON * abs_total {
            return Ok(total);
        }
        if heap.len() >= spec.max_subdivisions {
            return Err(Error::ToleranceNotMet {
                estimate: err,
                requested,
                subdivisions: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            return Err(Error::ToleranceNotMet {
                estimate: err,
                requested,
                subdivisions: heap.len() + 1,
            });
        }
        heap.push(kronrod15(&f, worst.lo, mid));
        heap.push(kronrod15(&f, mid, worst.hi));
    }
}

/// Integral of `f` over the real line.
///
/// `decay_hint` is the length scale on which `f` varies; the domain is grown
/// from it until `|f|` at both ends is at least 40 nats below the largest
/// sampled magnitude, then integrated adaptively on the truncated interval.
pub fn integrate<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec, decay_hint: f64) -> Result<f64> {
    spec.validate()?;
    if !(decay_hint > 0.0) || !decay_hint.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "decay_hint must be positive and finite, got {decay_hint}"
        )));
    }
    const SAMPLES: usize = 64;
    let mut radius = decay_hint;
    let mut peak = f(0.0).abs();
    let mut inner = 0.0;
    for _ in 0..64 {
        for i in 1..=SAMPLES {
            let x = inner + (radius - inner) * i as f64 / SAMPLES as f64;
            peak = peak.max(f(x).abs()).max(f(-x).abs());
        }
        let edge = f(radius).abs().max(f(-radius).abs());
        if edge <= peak * (-TRUNCATION_NATS).exp() {
            break;
        }
        inner = radius;
        radius *= 2.0;
    }
    // Geometric ladder from the hint scale down so narrow features near the origin are seen.
    let mut breaks = vec![0.0];
    let mut x = radius;
    while x > decay_hint * 1e-3 {
        x *= 0.25;
        breaks.push(x);
        breaks.push(-x);
    }
    for i in 1..8 {
        let x = radius * i as f64 / 8.0;
        breaks.push(x);
        breaks.push(-x);
    }
    integrate_interval(f, -radius, radius, &breaks, spec)
}
