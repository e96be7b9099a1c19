//! Self-consistency function `F[mu] = int (x - mu) rho[mu] dx` and its roots.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::StationaryDensity;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::{central_diff, find_root, Bracket, QuadratureSpec};

/// Number of grid points used to bracket positive roots of `F`.
pub const ROOT_SCAN_POINTS: usize = 200;
/// Absolute tolerance of the root refinement.
pub const ROOT_TOL: f64 = 1e-9;
/// Roots closer than this are merged.
pub const DEDUP_TOL: f64 = 1e-6;
/// Roots smaller than this in magnitude are identified with zero.
pub const ZERO_SNAP: f64 = 1e-7;
/// Default step of the finite-difference slope.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    /// Three stationary measures.
    Stable,
    /// A single, symmetric stationary measure.
    Unstable,
}

impl Phase {
    pub fn from_slope(slope: f64) -> Self {
        if slope > 0.0 {
            Phase::Stable
        } else {
            Phase::Unstable
        }
    }

    pub fn root_count(self) -> usize {
        match self {
            Phase::Stable => 3,
            Phase::Unstable => 1,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Stable => "stable",
            Phase::Unstable => "unstable",
        })
    }
}

/// All stationary means at a parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfConsistencyReport {
    pub params: ModelParams,
    /// Sorted ascending; always contains `0.0`.
    pub roots: Vec<f64>,
    pub derivative_at_zero: f64,
    pub phase: Phase,
}

impl SelfConsistencyReport {
    pub fn positive_root(&self) -> Option<f64> {
        self.roots.iter().copied().find(|r| *r > 0.0)
    }
}

/// `F[mu]`: mean of the stationary density at `mu`, minus `mu`.
pub fn self_consistency(p: &ModelParams, mu: f64, spec: &QuadratureSpec) -> Result<f64> {
    Ok(StationaryDensity::new(p, mu, spec)?.mean()? - mu)
}

/// `F'[0]` by differentiating under the integral sign.
///
/// With the normalised symmetric density this is
/// `(2 theta / (sigma_a sigma_m)) E[x atan(sigma_m x / sigma_a)] - 1`, or
/// `(2 theta / sigma_a^2) m_2 - 1` in the additive-noise limit.
pub fn slope_at_zero(p: &ModelParams, spec: &QuadratureSpec) -> Result<f64> {
    if p.theta == 0.0 {
        p.validate()?;
        return Ok(-1.0);
    }
    StationaryDensity::new(p, 0.0, spec)?.self_consistency_slope()
}

/// `F'[0]` by a central difference of `F` with step `h`.
pub fn slope_at_zero_fd(p: &ModelParams, h: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "step must be positive, got {h}"
        )));
    }
    let plus = self_consistency(p, h, spec)?;
    let minus = self_consistency(p, -h, spec)?;
    Ok(central_diff(|x| if x > 0.0 { plus } else { minus }, 0.0, h))
}

/// Upper end of the scan for positive roots.
pub fn scan_limit(p: &ModelParams) -> f64 {
    let reach = p.a.max(0.0) + (1.0 - p.nu) * p.sigma_m * p.sigma_m + p.theta;
    (2.0 * reach.sqrt()).max(3.0)
}

/// Finds every stationary mean.
///
/// `F` is scanned on a uniform grid over `(0, mu_max]`; sign changes are
/// refined with Brent's method and mirrored to the negative axis (`F` is
/// odd). The sign of `F` just right of zero is the sign of `F'[0]`; a root
/// below the first grid point is located by halving towards zero.
pub fn find_stationary_means(
    p: &ModelParams,
    spec: &QuadratureSpec,
) -> Result<SelfConsistencyReport> {
    p.validate()?;
    let slope = slope_at_zero(p, spec)?;
    let phase = Phase::from_slope(slope);
    let f = |mu: f64| self_consistency(p, mu, spec);

    let mu_max = scan_limit(p);
    let grid: Vec<f64> = (1..=ROOT_SCAN_POINTS)
        .map(|i| mu_max * i as f64 / ROOT_SCAN_POINTS as f64)
        .collect();
    let values: Vec<f64> = grid.par_iter().map(|&mu| f(mu)).collect::<Result<_>>()?;

    let mut brackets: Vec<(f64, f64, f64, f64)> = Vec::new();
    if slope > 0.0 && values[0] < 0.0 {
        // Root in (0, grid[0]): find a point where F is still positive.
        let mut lo = grid[0] * 0.5;
        let mut f_lo = f(lo)?;
        while f_lo <= 0.0 && lo > ZERO_SNAP {
            lo *= 0.5;
            f_lo = f(lo)?;
        }
        if f_lo > 0.0 {
            brackets.push((lo, grid[0], f_lo, values[0]));
        }
    }
    for i in 1..grid.len() {
        let (a, b) = (values[i - 1], values[i]);
        if a == 0.0 {
            brackets.push((grid[i - 1], grid[i - 1], a, a));
        } else if a * b < 0.0 {
            brackets.push((grid[i - 1], grid[i], a, b));
        }
    }
    if let Some(last) = values.last() {
        if *last == 0.0 {
            let x = *grid.last().unwrap();
            brackets.push((x, x, 0.0, 0.0));
        }
    }

    let mut positive = Vec::new();
    for (lo, hi, f_lo, f_hi) in brackets {
        let r = if lo == hi {
            lo
        } else {
            let g = |mu: f64| f(mu).unwrap_or(f64::NAN);
            find_root(g, Bracket::new(lo, hi, f_lo, f_hi)?, ROOT_TOL)?
        };
        if r.abs() >= ZERO_SNAP && positive.iter().all(|q: &f64| (q - r).abs() > DEDUP_TOL) {
            positive.push(r);
        }
    }
    positive.sort_by(f64::total_cmp);

    let mut roots: Vec<f64> = positive.iter().rev().map(|r| -r).collect();
    roots.push(0.0);
    roots.extend(positive.iter().copied());

    if roots.len() != phase.root_count() {
        return Err(Error::InconsistentRootCount {
            count: roots.len(),
            roots,
        });
    }
    Ok(SelfConsistencyReport {
        params: *p,
        roots,
        derivative_at_zero: slope,
        phase,
    })
}
