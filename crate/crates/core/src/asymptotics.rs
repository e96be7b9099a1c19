//! Closed-form and series results: the moment hierarchy of the additive-noise
//! model, the `sigma_m^2` coefficient of `F'[0]`, and the large-`sigma_m`
//! sign-change threshold.
//!
//! Everything here is for the `a = 1` model.

use serde::{Deserialize, Serialize};

use crate::density::StationaryDensity;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::{gamma, QuadratureSpec};
use crate::selfconsistency::slope_at_zero;

/// Multiplicative noise levels used by [`validate_small_sigma_m`].
pub const SMALL_SIGMA_M: [f64; 3] = [0.05, 0.1, 0.2];
/// Multiplicative noise levels used by [`validate_large_sigma_m`].
pub const LARGE_SIGMA_M: [f64; 3] = [20.0, 50.0, 100.0];

fn additive_params(sigma_a: f64, theta: f64) -> Result<ModelParams> {
    ModelParams::new(1.0, sigma_a, 0.0, 1.0, theta)
}

/// Even moments `m_2 .. m_10` of the symmetric additive-noise stationary measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DawsonMoments {
    pub sigma_a: f64,
    pub theta: f64,
    pub a: f64,
    pub m2: f64,
    pub m4: f64,
    pub m6: f64,
    pub m8: f64,
    pub m10: f64,
}

impl DawsonMoments {
    /// The hierarchy solved for `m_4 .. m_10` as polynomials in `m_2`.
    pub fn closed_form(m2: f64, sigma_a: f64, theta: f64) -> Self {
        let s2 = sigma_a * sigma_a;
        let s4 = s2 * s2;
        let t = theta;
        let u = 1.0 - t;
        let m4 = m2 * u + s2 / 2.0;
        let m6 = m2 * (1.5 * s2 + u * u) + s2 * u / 2.0;
        let m8 = m2 * (4.0 * s2 * u + u * u * u) + 1.25 * s4 + s2 * u * u / 2.0;
        let m10 =
            m2 * (5.25 * s4 + 7.5 * s2 * u * u + u.powi(4)) + 3.0 * s4 * u + s2 * u.powi(3) / 2.0;
        Self {
            sigma_a,
            theta,
            a: 1.0,
            m2,
            m4,
            m6,
            m8,
            m10,
        }
    }

    /// Moment `m_k` for even `k` in `0..=10`.
    pub fn get(&self, k: u32) -> Option<f64> {
        match k {
            0 => Some(1.0),
            2 => Some(self.m2),
            4 => Some(self.m4),
            6 => Some(self.m6),
            8 => Some(self.m8),
            10 => Some(self.m10),
            _ => None,
        }
    }
}

/// `m_2` of the additive-noise (`sigma_m = 0`) density with `a = 1`, `mu = 0`.
pub fn dawson_m2(sigma_a: f64, theta: f64, spec: &QuadratureSpec) -> Result<f64> {
    StationaryDensity::new(&additive_params(sigma_a, theta)?, 0.0, spec)?.moment(2)
}

/// All even moments up to `m_10` by direct quadrature.
pub fn dawson_moments(sigma_a: f64, theta: f64, spec: &QuadratureSpec) -> Result<DawsonMoments> {
    let d = StationaryDensity::new(&additive_params(sigma_a, theta)?, 0.0, spec)?;
    Ok(DawsonMoments {
        sigma_a,
        theta,
        a: 1.0,
        m2: d.moment(2)?,
        m4: d.moment(4)?,
        m6: d.moment(6)?,
        m8: d.moment(8)?,
        m10: d.moment(10)?,
    })
}

/// Fills `m_4 .. m_10` from `m_2` by the recursion
/// `m_{2p} = (1 - theta) m_{2p-2} + (2p - 3) sigma_a^2 m_{2p-4} / 2`.
pub fn moment_hierarchy(m2: f64, sigma_a: f64, theta: f64) -> Result<DawsonMoments> {
    if !(m2 > 0.0) || !m2.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "m2 must be positive, got {m2}"
        )));
    }
    let s2 = sigma_a * sigma_a;
    let mut m = [1.0, m2, 0.0, 0.0, 0.0, 0.0];
    for p in 2..=5 {
        m[p] = (1.0 - theta) * m[p - 1] + 0.5 * (2 * p - 3) as f64 * s2 * m[p - 2];
    }
    Ok(DawsonMoments {
        sigma_a,
        theta,
        a: 1.0,
        m2,
        m4: m[2],
        m6: m[3],
        m8: m[4],
        m10: m[5],
    })
}

/// The `sigma_m^2` coefficient of `F'[0]` in two algebraic forms.
///
/// `moment_combination` is the bracket built from `m_2 .. m_10`;
/// `closed_form` is the same bracket after eliminating the higher moments
/// with the hierarchy. The two coincide identically at `theta = 1` and differ
/// by a term proportional to `1 - theta` otherwise; `gap` reports the
/// difference rather than hiding it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallSigmaMGradient {
    pub nu: f64,
    pub sigma_a: f64,
    pub theta: f64,
    pub m2: f64,
    pub moment_combination: f64,
    pub closed_form: f64,
    pub gap: f64,
}

impl SmallSigmaMGradient {
    /// Predicted `d F'[0] / d sigma_m^2` at `sigma_m = 0`: the bracket carries
    /// an overall `sigma_a^2 / 2` that has been divided out.
    pub fn slope_coefficient(&self) -> f64 {
        2.0 * self.moment_combination / (self.sigma_a * self.sigma_a)
    }
}

/// Bracket `(m8 - m10)/(3 s^4) + (m6 - m4)/(3 s^2) - (1 - theta)(m6 - m8)/s^4 + m2 - nu((m4 - m6)/s^2 + m2)`.
pub fn moment_combination(m: &DawsonMoments, nu: f64) -> f64 {
    let s2 = m.sigma_a * m.sigma_a;
    let s4 = s2 * s2;
    (m.m8 - m.m10) / (3.0 * s4) + (m.m6 - m.m4) / (3.0 * s2) - (1.0 - m.theta) * (m.m6 - m.m8) / s4
        + m.m2
        - nu * ((m.m4 - m.m6) / s2 + m.m2)
}

/// The bracket rewritten in `m_2` alone.
pub fn closed_form_combination(m2: f64, nu: f64, sigma_a: f64, theta: f64) -> f64 {
    let s2 = sigma_a * sigma_a;
    let s4 = s2 * s2;
    let t = theta;
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    m2 * (nu / 2.0 - 0.25 + t2 * nu / s2 - t2 / (6.0 * s2) - t * nu / s2
        + t / (12.0 * s2)
        + 1.0 / (12.0 * s2)
        + t4 / (6.0 * s4)
        - t3 / (2.0 * s4)
        + t2 / (2.0 * s4)
        - t / (6.0 * s4))
        - t * nu / 2.0
        + 5.0 * t / 24.0
        + 1.0 / 24.0
        - t3 / (12.0 * s2)
        + t2 / (6.0 * s2)
        - t / (12.0 * s2)
}

pub fn small_sigma_m_gradient(
    nu: f64,
    sigma_a: f64,
    theta: f64,
    spec: &QuadratureSpec,
) -> Result<SmallSigmaMGradient> {
    ModelParams::new(nu, sigma_a, 0.0, 1.0, theta)?;
    let m2 = dawson_m2(sigma_a, theta, spec)?;
    let moments = moment_hierarchy(m2, sigma_a, theta)?;
    let moment_combination = moment_combination(&moments, nu);
    let closed_form = closed_form_combination(m2, nu, sigma_a, theta);
    Ok(SmallSigmaMGradient {
        nu,
        sigma_a,
        theta,
        m2,
        moment_combination,
        closed_form,
        gap: moment_combination - closed_form,
    })
}

/// `(1/2 - nu)(1 - m2) / 2`: the bracket at the critical noise when `theta = 1`.
pub fn gradient_at_critical(nu: f64, m2_at_crit: f64) -> Result<f64> {
    if !(m2_at_crit > 0.0 && m2_at_crit < 1.0) {
        return Err(Error::Domain {
            value: m2_at_crit,
            domain: "(0, 1)",
        });
    }
    Ok(0.5 * (0.5 - nu) * (1.0 - m2_at_crit))
}

/// `pi Gamma(1 - nu) / Gamma(1/2 - nu)`: the additive noise below which
/// `F'[0]` stays positive as `sigma_m -> infinity`.
pub fn large_sigma_m_sign_change(nu: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&nu) {
        return Err(Error::Domain {
            value: nu,
            domain: "[0, 0.5)",
        });
    }
    Ok(std::f64::consts::PI * gamma(1.0 - nu)? / gamma(0.5 - nu)?)
}

/// Full `F'[0]` near `sigma_m = 0` compared with the quadratic prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallSigmaMReport {
    pub gradient: SmallSigmaMGradient,
    /// `F'[0]` in the additive-noise limit.
    pub base_slope: f64,
    /// `(sigma_m, F'[0])` at [`SMALL_SIGMA_M`].
    pub samples: Vec<(f64, f64)>,
    /// `sigma_m^2` coefficient extrapolated from the two smallest samples.
    pub c1_fit: f64,
    /// `sigma_m^2` coefficient from the moment bracket.
    pub c1_predicted: f64,
    /// Residual ratio `r(0.1) / r(0.05)` with `r = dF' - c1_predicted sigma_m^2`;
    /// close to 16 when the prediction is exact. `None` when both residuals vanish.
    pub ratio_predicted: Option<f64>,
    /// Same ratio with `c1_fit`, over `r(0.2) / r(0.1)`.
    pub ratio_fitted: Option<f64>,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    if den == 0.0 || (num.abs() < 1e-14 && den.abs() < 1e-14) {
        None
    } else {
        Some(num / den)
    }
}

pub fn validate_small_sigma_m(
    nu: f64,
    sigma_a: f64,
    theta: f64,
    spec: &QuadratureSpec,
) -> Result<SmallSigmaMReport> {
    let base = ModelParams::new(nu, sigma_a, 0.0, 1.0, theta)?;
    let gradient = small_sigma_m_gradient(nu, sigma_a, theta, spec)?;
    let base_slope = slope_at_zero(&base, spec)?;
    let samples = SMALL_SIGMA_M
        .iter()
        .map(|&sm| Ok((sm, slope_at_zero(&base.with_sigma_m(sm), spec)?)))
        .collect::<Result<Vec<_>>>()?;
    let delta: Vec<f64> = samples.iter().map(|(_, v)| v - base_slope).collect();
    let scaled: Vec<f64> = samples
        .iter()
        .zip(&delta)
        .map(|((s, _), d)| d / (s * s))
        .collect();
    let c1_fit = (4.0 * scaled[0] - scaled[1]) / 3.0;
    let c1_predicted = gradient.slope_coefficient();
    let residual = |c1: f64, i: usize| delta[i] - c1 * SMALL_SIGMA_M[i] * SMALL_SIGMA_M[i];
    Ok(SmallSigmaMReport {
        gradient,
        base_slope,
        samples,
        c1_fit,
        c1_predicted,
        ratio_predicted: ratio(residual(c1_predicted, 1), residual(c1_predicted, 0)),
        ratio_fitted: ratio(residual(c1_fit, 2), residual(c1_fit, 1)),
    })
}

/// Sign of `F'[0]` at large `sigma_m` against the closed-form threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeSigmaMReport {
    pub nu: f64,
    pub sigma_a: f64,
    /// `None` for `nu >= 1/2`, where the limit is always negative.
    pub threshold: Option<f64>,
    /// `(sigma_m, F'[0])` at [`LARGE_SIGMA_M`].
    pub samples: Vec<(f64, f64)>,
    /// Predicted sign, `+1` or `-1`.
    pub expected_sign: f64,
}

impl LargeSigmaMReport {
    /// Whether every sample has the predicted sign.
    pub fn consistent(&self) -> bool {
        self.samples
            .iter()
            .all(|(_, v)| v.signum() == self.expected_sign && *v != 0.0)
    }
}

pub fn validate_large_sigma_m(
    nu: f64,
    sigma_a: f64,
    spec: &QuadratureSpec,
) -> Result<LargeSigmaMReport> {
    let base = ModelParams::unit(nu, sigma_a, 0.0)?;
    let threshold = if nu < 0.5 {
        Some(large_sigma_m_sign_change(nu)?)
    } else {
        None
    };
    let expected_sign = match threshold {
        Some(t) if sigma_a < t => 1.0,
        _ => -1.0,
    };
    let samples = LARGE_SIGMA_M
        .iter()
        .map(|&sm| Ok((sm, slope_at_zero(&base.with_sigma_m(sm), spec)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LargeSigmaMReport {
        nu,
        sigma_a,
        threshold,
        samples,
        expected_sign,
    })
}
