//! Stationary measure of the mean-field equation for a frozen mean `mu`.
//!
//! For `sigma_m > 0` the unnormalised log-density is
//!
//! ```text
//! A log(1 + u) + (2 theta mu / (sigma_a sigma_m)) atan(sigma_m x / sigma_a) - x^2 / sigma_m^2,
//! A = (a - theta - nu sigma_m^2 + sigma_a^2 / sigma_m^2) / sigma_m^2,   u = sigma_m^2 x^2 / sigma_a^2
//! ```
//!
//! which is evaluated as `c/sigma_m^2 log(1+u) + sigma_a^2/sigma_m^4 (log(1+u) - u)` with
//! `c = a - theta - nu sigma_m^2` so that the `1/sigma_m^4` terms never cancel
//! numerically. Below `sigma_m = 1e-3 sigma_a` the additive-noise limit
//! `(2/sigma_a^2)((a - theta) x^2/2 - x^4/4 + theta mu x)` is used instead.
//!
//! The exponent is an even function plus an odd one (the `mu` term), so every
//! integral is folded onto `[0, trunc]` with `cosh`/`sinh` weights.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::{find_root, integrate_interval, Bracket, QuadratureSpec};

/// Ratio `sigma_m / sigma_a` at or below which the additive-noise limit is used.
pub const SWITCH_RATIO: f64 = 1e-3;

const TRUNCATION_NATS: f64 = 40.0;
const MAX_MOMENT: u32 = 12;

/// True when the density is evaluated through the additive-noise limit.
pub fn uses_additive_limit(p: &ModelParams) -> bool {
    p.sigma_m <= SWITCH_RATIO * p.sigma_a
}

/// Unnormalised log stationary density, dispatching on the branch switch.
pub fn log_unnormalized(p: &ModelParams, mu: f64, x: f64) -> f64 {
    Exponent::new(p, mu).value(x)
}

/// The general-noise exponent regardless of the branch switch. Requires `sigma_m > 0`.
pub fn log_unnormalized_general(p: &ModelParams, mu: f64, x: f64) -> f64 {
    Exponent::general(p, mu).value(x)
}

/// The additive-noise (`sigma_m -> 0`) exponent.
pub fn log_unnormalized_additive(p: &ModelParams, mu: f64, x: f64) -> f64 {
    Exponent::additive(p, mu).value(x)
}

/// `log(1 + u) - u` without cancellation for small `u`.
fn log1p_minus_id(u: f64) -> f64 {
    if u < 0.1 {
        let mut term = -u * u;
        let mut sum = 0.0;
        for k in 2..40 {
            let contrib = term / k as f64;
            sum += contrib;
            if contrib.abs() < 1e-18 * sum.abs() {
                break;
            }
            term *= -u;
        }
        sum
    } else {
        u.ln_1p() - u
    }
}

#[derive(Debug, Clone, Copy)]
enum Exponent {
    General {
        log_coef: f64,
        defect_coef: f64,
        ratio: f64,
        odd_coef: f64,
        sensitivity_coef: f64,
        /// `c` in the peak equation `x^3 - c x - theta |mu| = 0`.
        cubic_c: f64,
        theta_mu: f64,
    },
    Additive {
        quad_coef: f64,
        quart_coef: f64,
        odd_coef: f64,
        sensitivity_coef: f64,
        cubic_c: f64,
        theta_mu: f64,
    },
}

impl Exponent {
    fn new(p: &ModelParams, mu: f64) -> Self {
        if uses_additive_limit(p) {
            Self::additive(p, mu)
        } else {
            Self::general(p, mu)
        }
    }

    fn general(p: &ModelParams, mu: f64) -> Self {
        let sa = p.sigma_a;
        let sm = p.sigma_m;
        let sm2 = sm * sm;
        let c = p.a - p.theta - p.nu * sm2;
        Self::General {
            log_coef: c / sm2,
            defect_coef: (sa * sa) / (sm2 * sm2),
            ratio: sm / sa,
            odd_coef: 2.0 * p.theta * mu / (sa * sm),
            sensitivity_coef: 2.0 * p.theta / (sa * sm),
            cubic_c: c,
            theta_mu: p.theta * mu,
        }
    }

    fn additive(p: &ModelParams, mu: f64) -> Self {
        let sa2 = p.sigma_a * p.sigma_a;
        Self::Additive {
            quad_coef: (p.a - p.theta) / sa2,
            quart_coef: 0.5 / sa2,
            odd_coef: 2.0 * p.theta * mu / sa2,
            sensitivity_coef: 2.0 * p.theta / sa2,
            cubic_c: p.a - p.theta,
            theta_mu: p.theta * mu,
        }
    }

    fn even(&self, x: f64) -> f64 {
        match *self {
            Self::General {
                log_coef,
                defect_coef,
                ratio,
                ..
            } => {
                let y = ratio * x;
                let u = y * y;
                log_coef * u.ln_1p() + defect_coef * log1p_minus_id(u)
            }
            Self::Additive {
                quad_coef,
                quart_coef,
                ..
            } => {
                let x2 = x * x;
                quad_coef * x2 - quart_coef * x2 * x2
            }
        }
    }

    /// Derivative of the exponent with respect to `mu` (odd in `x`).
    fn sensitivity(&self, x: f64) -> f64 {
        match *self {
            Self::General {
                ratio,
                sensitivity_coef,
                ..
            } => sensitivity_coef * (ratio * x).atan(),
            Self::Additive {
                sensitivity_coef, ..
            } => sensitivity_coef * x,
        }
    }

    fn odd(&self, x: f64) -> f64 {
        match *self {
            Self::General {
                ratio, odd_coef, ..
            } => odd_coef * (ratio * x).atan(),
            Self::Additive { odd_coef, .. } => odd_coef * x,
        }
    }

    fn value(&self, x: f64) -> f64 {
        self.even(x) + self.odd(x)
    }

    /// Larger of the exponent at `x` and `-x`.
    fn folded(&self, x: f64) -> f64 {
        self.even(x) + self.odd(x).abs()
    }

    /// Length scale of the `log(1+u)`/`atan` kink at the origin, if any.
    fn inner_scale(&self) -> Option<f64> {
        match *self {
            Self::General { ratio, .. } => Some(1.0 / ratio),
            Self::Additive { .. } => None,
        }
    }

    fn cubic(&self) -> (f64, f64) {
        match *self {
            Self::General {
                cubic_c, theta_mu, ..
            }
            | Self::Additive {
                cubic_c, theta_mu, ..
            } => (cubic_c, theta_mu.abs()),
        }
    }

    /// Location of the maximum of `folded` on `[0, inf)`.
    ///
    /// The folded exponent has derivative proportional to `c x - x^3 + k`
    /// (positive denominator), so its maximiser is the unique non-negative
    /// root of that cubic.
    fn peak_location(&self) -> Result<f64> {
        let (c, k) = self.cubic();
        if k == 0.0 && c <= 0.0 {
            return Ok(0.0);
        }
        let g = |x: f64| x * x * x - c * x - k;
        let hi = 2.0 * (c.max(0.0).sqrt() + k.cbrt()) + 1.0;
        if k == 0.0 {
            // Positive root is sqrt(c) exactly.
            return Ok(c.sqrt());
        }
        find_root(g, Bracket::around(&g, 0.0, hi)?, 1e-14 * hi)
    }

    /// Curvature scale of the folded exponent at its peak.
    fn peak_width(&self, x_peak: f64) -> f64 {
        let h = 1e-4 * x_peak.max(1e-2);
        let curv = (self.folded(x_peak + h) - 2.0 * self.folded(x_peak)
            + self.folded((x_peak - h).abs()))
            / (h * h);
        if curv < 0.0 {
            1.0 / (-curv).sqrt()
        } else {
            1.0
        }
    }
}

/// Normalised stationary density for fixed parameters and mean `mu`.
#[derive(Debug, Clone)]
pub struct StationaryDensity {
    params: ModelParams,
    mu: f64,
    log_norm: f64,
    trunc: f64,
    exponent: Exponent,
    peak: f64,
    breaks: Vec<f64>,
    spec: QuadratureSpec,
    /// Folded normaliser `int_0^trunc 2 e^{q} cosh(odd)` with `q = even - peak`.
    folded_norm: f64,
}

impl StationaryDensity {
    /// Normalises the stationary density for `(p, mu)`.
    pub fn new(p: &ModelParams, mu: f64, spec: &QuadratureSpec) -> Result<Self> {
        p.validate()?;
        spec.validate()?;
        if !mu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "mean must be finite, got {mu}"
            )));
        }
        let exponent = Exponent::new(p, mu);
        let x_peak = exponent.peak_location()?;
        let peak = exponent.folded(x_peak);
        let floor = peak - TRUNCATION_NATS;

        let mut hi = x_peak.max(1.0) * 2.0;
        while exponent.folded(hi) > floor {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::InvalidParameter(format!(
                    "stationary density for {p} does not decay"
                )));
            }
        }
        let lo = x_peak;
        let g = |x: f64| exponent.folded(x) - floor;
        let trunc = if g(lo) <= 0.0 {
            lo.max(f64::MIN_POSITIVE)
        } else {
            find_root(g, Bracket::around(&g, lo, hi)?, 1e-12 * hi)?
        };

        let mut breaks = Vec::new();
        if let Some(s) = exponent.inner_scale() {
            let mut x = s / 16.0;
            while x < trunc {
                breaks.push(x);
                x *= 4.0;
            }
        }
        if x_peak > 0.0 {
            let w = exponent.peak_width(x_peak);
            breaks.push(x_peak);
            for m in [1.0, 3.0, 9.0] {
                breaks.push(x_peak - m * w);
                breaks.push(x_peak + m * w);
            }
        }
        for i in 1..4 {
            breaks.push(trunc * i as f64 / 4.0);
        }

        let mut d = Self {
            params: *p,
            mu,
            log_norm: 0.0,
            trunc,
            exponent,
            peak,
            breaks,
            spec: *spec,
            folded_norm: 1.0,
        };
        let z = d.folded_integral(|_, c, _| 2.0 * c)?;
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "stationary density for {p}, mu={mu} has non-positive mass {z}"
            )));
        }
        d.folded_norm = z;
        d.log_norm = peak + z.ln();
        Ok(d)
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Logarithm of the normalisation constant of the unnormalised density.
    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    /// Half-width of the integration domain.
    pub fn trunc(&self) -> f64 {
        self.trunc
    }

    pub fn log_density(&self, x: f64) -> f64 {
        self.exponent.value(x) - self.log_norm
    }

    pub fn density(&self, x: f64) -> f64 {
        self.log_density(x).exp()
    }

    /// `int_0^trunc h(x, e^q cosh(odd), e^q sinh(odd)) dx` with `q = even - peak`.
    fn folded_integral<H: Fn(f64, f64, f64) -> f64>(&self, h: H) -> Result<f64> {
        let e = self.exponent;
        let peak = self.peak;
        let f = |x: f64| {
            let q = e.even(x) - peak;
            let s = e.odd(x);
            let (ch, sh) = if s.abs() < 1.0 {
                let w = q.exp();
                (w * s.cosh(), w * s.sinh())
            } else {
                let ep = (q + s).exp();
                let em = (q - s).exp();
                (0.5 * (ep + em), 0.5 * (ep - em))
            };
            h(x, ch, sh)
        };
        integrate_interval(f, 0.0, self.trunc, &self.breaks, &self.spec)
    }

    /// `k`-th raw moment, `k <= 12`.
    pub fn moment(&self, k: u32) -> Result<f64> {
        if k > MAX_MOMENT {
            return Err(Error::InvalidParameter(format!(
                "moments above order {MAX_MOMENT} are not supported, got {k}"
            )));
        }
        if k == 0 {
            return Ok(1.0);
        }
        let kk = k as i32;
        let raw = if k.is_multiple_of(2) {
            self.folded_integral(|x, c, _| 2.0 * x.powi(kk) * c)?
        } else {
            self.folded_integral(|x, _, s| 2.0 * x.powi(kk) * s)?
        };
        Ok(raw / self.folded_norm)
    }

    pub fn mean(&self) -> Result<f64> {
        self.moment(1)
    }

    /// Expectation of an arbitrary function under the density.
    pub fn expectation<G: Fn(f64) -> f64>(&self, g: G) -> Result<f64> {
        let raw = self.folded_integral(|x, c, s| g(x) * (c + s) + g(-x) * (c - s))?;
        Ok(raw / self.folded_norm)
    }

    /// `d/dmu` of the self-consistency function at this density's `mu`:
    /// `Cov(x, d(exponent)/dmu) - 1`.
    pub fn self_consistency_slope(&self) -> Result<f64> {
        let e = self.exponent;
        // x * sensitivity is even; sensitivity alone is odd.
        let cross =
            self.folded_integral(|x, c, _| 2.0 * x * e.sensitivity(x) * c)? / self.folded_norm;
        if self.mu == 0.0 {
            return Ok(cross - 1.0);
        }
        let mean = self.mean()?;
        let sens = self.folded_integral(|x, _, s| 2.0 * e.sensitivity(x) * s)? / self.folded_norm;
        Ok(cross - mean * sens - 1.0)
    }
}

/// Convenience wrapper for [`StationaryDensity::new`].
pub fn normalize(p: &ModelParams, mu: f64, spec: &QuadratureSpec) -> Result<StationaryDensity> {
    StationaryDensity::new(p, mu, spec)
}
