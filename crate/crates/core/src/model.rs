//! Model parameters and the coefficients of the mean-field SDE.
//!
//! The canonical form is the Itô equation
//!
//! ```text
//! dX = (a X - X^3 + (1 - nu) sigma_m^2 X - theta (X - mu)) dt + sqrt(sigma_a^2 + sigma_m^2 X^2) dW
//! ```
//!
//! where `nu` selects the stochastic-integral interpretation of the
//! multiplicative noise (0 Klimontovich, 1/2 Stratonovich, 1 Itô). Other
//! interpretations enter only through the `(1 - nu) sigma_m^2 X` correction.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the five-dimensional parameter space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Integral interpretation, in `[0, 1]`.
    pub nu: f64,
    /// Additive noise intensity, `> 0`.
    pub sigma_a: f64,
    /// Multiplicative noise intensity, `>= 0`.
    pub sigma_m: f64,
    /// Barrier parameter of the potential `x^4/4 - a x^2/2`; bistable iff `a > 0`.
    pub a: f64,
    /// Cooperation strength, `>= 0`.
    pub theta: f64,
}

impl ModelParams {
    pub fn new(nu: f64, sigma_a: f64, sigma_m: f64, a: f64, theta: f64) -> Result<Self> {
        let p = Self {
            nu,
            sigma_a,
            sigma_m,
            a,
            theta,
        };
        p.validate()?;
        Ok(p)
    }

    /// `a = theta = 1`, the normalisation used for the phase diagrams.
    pub fn unit(nu: f64, sigma_a: f64, sigma_m: f64) -> Result<Self> {
        Self::new(nu, sigma_a, sigma_m, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(format!("{what} ({self})")));
        if !(0.0..=1.0).contains(&self.nu) {
            return bad("nu must lie in [0, 1]");
        }
        if !(self.sigma_a > 0.0) || !self.sigma_a.is_finite() {
            return bad("sigma_a must be positive and finite");
        }
        if !(self.sigma_m >= 0.0) || !self.sigma_m.is_finite() {
            return bad("sigma_m must be non-negative and finite");
        }
        if !self.a.is_finite() {
            return bad("a must be finite");
        }
        if !(self.theta >= 0.0) || !self.theta.is_finite() {
            return bad("theta must be non-negative and finite");
        }
        Ok(())
    }

    /// Looser check for simulation, where `sigma_a = 0` (no additive noise) is allowed.
    pub fn validate_sde(&self) -> Result<()> {
        if self.sigma_a == 0.0 {
            return Self {
                sigma_a: 1.0,
                ..*self
            }
            .validate();
        }
        self.validate()
    }

    pub fn with_nu(self, nu: f64) -> Self {
        Self { nu, ..self }
    }

    pub fn with_sigma_a(self, sigma_a: f64) -> Self {
        Self { sigma_a, ..self }
    }

    pub fn with_sigma_m(self, sigma_m: f64) -> Self {
        Self { sigma_m, ..self }
    }

    pub fn with_a(self, a: f64) -> Self {
        Self { a, ..self }
    }

    pub fn with_theta(self, theta: f64) -> Self {
        Self { theta, ..self }
    }

    /// Linear coefficient of the noise-corrected potential gradient,
    /// `a + (1 - nu) sigma_m^2`.
    pub fn effective_a(&self) -> f64 {
        self.a + (1.0 - self.nu) * self.sigma_m * self.sigma_m
    }
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "nu={}, sigma_a={}, sigma_m={}, a={}, theta={}",
            self.nu, self.sigma_a, self.sigma_m, self.a, self.theta
        )
    }
}

/// Candidate stationary mean.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct MeanField(pub f64);

/// Itô drift `a x - x^3 + (1 - nu) sigma_m^2 x - theta (x - mu)`.
pub fn ito_drift(p: &ModelParams, mu: f64, x: f64) -> f64 {
    p.effective_a() * x - x * x * x - p.theta * (x - mu)
}

/// Noise amplitude `sqrt(sigma_a^2 + sigma_m^2 x^2)`.
pub fn diffusion(p: &ModelParams, x: f64) -> f64 {
    p.sigma_a.hypot(p.sigma_m * x)
}

/// Number of extrema (1 or 3) of the noise-corrected potential
/// `x^4/4 - (a + (1 - nu) sigma_m^2) x^2 / 2`.
pub fn effective_well_count(p: &ModelParams) -> usize {
    if p.effective_a() > 0.0 {
        3
    } else {
        1
    }
}
