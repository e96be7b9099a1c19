//! Phase classification across parameter space.

mod bifurcation;
mod contour;
mod sequence;
mod thresholds;

pub use bifurcation::{bifurcation, BifurcationDiagram, BifurcationPath, BifurcationSample};
pub use contour::{trace_contour, trace_contour_with, ContourGrid, PhaseContour, MIN_RESOLUTION};
pub use sequence::{phase_sequence, slope_sequence, sweep_points, PhaseSequence};
pub use thresholds::{estimate_nu1, estimate_nu_thresholds, Nu1Search, NuThresholds};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::{find_root, Bracket, QuadratureSpec};
use crate::selfconsistency::slope_at_zero;
pub use crate::selfconsistency::Phase;

/// Search interval for [`critical_sigma_dawson`].
pub const CRITICAL_BRACKET: (f64, f64) = (0.05, 10.0);

/// Additive noise at which the `sigma_m = 0` model changes phase: the root of
/// `(2 theta / sigma_a^2) m_2(sigma_a) - 1`.
pub fn critical_sigma_dawson(theta: f64, a: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(theta > 0.0) || !(a > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "critical noise needs theta > 0 and a > 0, got theta={theta}, a={a}"
        )));
    }
    let (lo, hi) = CRITICAL_BRACKET;
    let slope =
        |s: f64| -> Result<f64> { slope_at_zero(&ModelParams::new(1.0, s, 0.0, a, theta)?, spec) };
    let (f_lo, f_hi) = (slope(lo)?, slope(hi)?);
    if f_lo * f_hi > 0.0 {
        return Err(Error::NoRoot {
            what: "additive-noise F'[0]",
            lo,
            hi,
        });
    }
    let g = |s: f64| slope(s).unwrap_or(f64::NAN);
    find_root(g, Bracket::new(lo, hi, f_lo, f_hi)?, 1e-12)
}

/// Stable iff `F'[0] > 0`.
pub fn classify(p: &ModelParams, spec: &QuadratureSpec) -> Result<Phase> {
    Ok(Phase::from_slope(slope_at_zero(p, spec)?))
}

/// `n` evenly spaced points covering `[lo, hi]`.
pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i + 1 == n {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}
