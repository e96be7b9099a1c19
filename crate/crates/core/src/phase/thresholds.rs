//! The interpretation values `nu_1 < nu_2 < nu_3` at which the phase
//! portrait at `a = theta = 1` changes character.

use serde::{Deserialize, Serialize};

use super::contour::{trace_contour, ContourGrid};
use super::critical_sigma_dawson;
use crate::asymptotics::{
    dawson_m2, gradient_at_critical, large_sigma_m_sign_change, small_sigma_m_gradient,
};
use crate::error::{Error, Result};
use crate::numerics::{find_root, Bracket, QuadratureSpec};

/// Largest `nu` handed to the sign-change formula (its pole is at 1/2).
const NU2_UPPER: f64 = 0.4999;

/// Window and resolution of the contour traces used to locate `nu_1`.
///
/// `nu_1` is where the contour's largest `sigma_a` inside the window stops
/// exceeding the large-`sigma_m` asymptote. Below `nu_1` the contour
/// approaches the asymptote from the left only slowly, so the answer drifts
/// with `sigma_m_max` (about 0.135 at 10, 0.117 at 20, 0.095 at 50).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nu1Search {
    pub sigma_a: (f64, f64),
    pub sigma_m_max: f64,
    pub resolution: usize,
    /// Width of the final `nu` bracket.
    pub tol: f64,
}

impl Default for Nu1Search {
    fn default() -> Self {
        Self {
            sigma_a: (0.5, 2.0),
            sigma_m_max: 20.0,
            resolution: 64,
            tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuThresholds {
    pub sigma_c: f64,
    /// `m_2` at `sigma_c`.
    pub m2: f64,
    pub nu1: f64,
    pub nu2: f64,
    /// Root in `nu` of the quadrature-based `sigma_m^2` coefficient at `sigma_c`.
    pub nu3: f64,
    /// Root of the closed-form critical gradient.
    pub nu3_closed_form: f64,
}

/// Root of a function linear in `nu`, from its values at 0 and 1.
fn linear_root(f0: f64, f1: f64) -> f64 {
    f0 / (f0 - f1)
}

pub fn estimate_nu_thresholds(search: &Nu1Search, spec: &QuadratureSpec) -> Result<NuThresholds> {
    let sigma_c = critical_sigma_dawson(1.0, 1.0, spec)?;
    let m2 = dawson_m2(sigma_c, 1.0, spec)?;
    let nu3_closed_form = linear_root(
        gradient_at_critical(0.0, m2)?,
        gradient_at_critical(1.0, m2)?,
    );

    let bracket =
        |nu: f64| small_sigma_m_gradient(nu, sigma_c, 1.0, spec).map(|g| g.moment_combination);
    let (f0, f1) = (bracket(0.0)?, bracket(1.0)?);
    let nu3 = find_root(
        |nu| bracket(nu).unwrap_or(f64::NAN),
        Bracket::new(0.0, 1.0, f0, f1)?,
        1e-12,
    )?;

    let nu2 = nu2_for(sigma_c)?;
    let nu1 = estimate_nu1(sigma_c, nu2, search, spec)?;
    Ok(NuThresholds {
        sigma_c,
        m2,
        nu1,
        nu2,
        nu3,
        nu3_closed_form,
    })
}

/// Solves `pi Gamma(1 - nu) / Gamma(1/2 - nu) = sigma_c`.
fn nu2_for(sigma_c: f64) -> Result<f64> {
    let g = |nu: f64| {
        large_sigma_m_sign_change(nu)
            .map(|t| t - sigma_c)
            .unwrap_or(f64::NAN)
    };
    let b = Bracket::around(&g, 0.0, NU2_UPPER).map_err(|_| Error::NoRoot {
        what: "sign-change threshold minus sigma_c",
        lo: 0.0,
        hi: NU2_UPPER,
    })?;
    find_root(g, b, 1e-12)
}

/// Bisection on `nu` in `[0, nu2]` of the contour peak minus the asymptote.
pub fn estimate_nu1(
    sigma_c: f64,
    nu2: f64,
    search: &Nu1Search,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let grid = ContourGrid::new(
        search.sigma_a,
        (0.0, search.sigma_m_max),
        search.resolution,
        search.resolution,
    )?;
    if !(search.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {}",
            search.tol
        )));
    }
    let excess = |nu: f64| -> Result<f64> {
        let c = trace_contour(nu, &grid, spec)?;
        let peak = c.peak_sigma_a().unwrap_or(sigma_c);
        Ok(peak - large_sigma_m_sign_change(nu)?)
    };
    let (mut lo, mut hi) = (0.0, nu2);
    if excess(lo)? >= 0.0 || excess(hi.min(NU2_UPPER))? <= 0.0 {
        return Err(Error::NoRoot {
            what: "contour peak minus asymptote",
            lo,
            hi,
        });
    }
    while hi - lo > search.tol {
        let mid = 0.5 * (lo + hi);
        if excess(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
