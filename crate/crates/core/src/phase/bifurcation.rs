use serde::{Deserialize, Serialize};

use super::linspace;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::QuadratureSpec;
use crate::selfconsistency::{find_stationary_means, Phase};

/// One-parameter family through parameter space. The remaining parameters
/// come from the base point handed to [`bifurcation`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BifurcationPath {
    /// `sigma_m = k sigma_a`, sweeping `sigma_a` over `range`.
    Ray { k: f64, range: (f64, f64) },
    /// Sweep `sigma_a` at the base `sigma_m`.
    SigmaA { range: (f64, f64) },
    /// Sweep `sigma_m` at the base `sigma_a`.
    SigmaM { range: (f64, f64) },
    /// Sweep `theta` at the base noises.
    Theta { range: (f64, f64) },
}

impl BifurcationPath {
    pub fn range(&self) -> (f64, f64) {
        match *self {
            Self::Ray { range, .. }
            | Self::SigmaA { range }
            | Self::SigmaM { range }
            | Self::Theta { range } => range,
        }
    }

    /// The point of the path at parameter value `t`.
    pub fn at(&self, base: &ModelParams, t: f64) -> Result<ModelParams> {
        let p = match *self {
            Self::Ray { k, .. } => base.with_sigma_a(t).with_sigma_m(k * t),
            Self::SigmaA { .. } => base.with_sigma_a(t),
            Self::SigmaM { .. } => base.with_sigma_m(t),
            Self::Theta { .. } => base.with_theta(t),
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.range();
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidParameter(format!(
                "path range must satisfy lo <= hi, got {lo}..{hi}"
            )));
        }
        if let Self::Ray { k, .. } = *self {
            if !(k >= 0.0) || !k.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "ray slope must be non-negative, got {k}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationSample {
    pub value: f64,
    /// Ascending; `[0]` or `[-r, 0, r]`.
    pub roots: Vec<f64>,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationDiagram {
    pub nu: f64,
    pub base: ModelParams,
    pub path: BifurcationPath,
    pub samples: Vec<BifurcationSample>,
}

impl BifurcationDiagram {
    /// `(value, r)` for every sample with a non-zero branch.
    pub fn positive_branch(&self) -> Vec<(f64, f64)> {
        self.samples
            .iter()
            .filter_map(|s| s.roots.last().filter(|r| **r > 0.0).map(|r| (s.value, *r)))
            .collect()
    }
}

/// Stationary means at `n_samples` evenly spaced points of `path`.
pub fn bifurcation(
    base: &ModelParams,
    path: BifurcationPath,
    n_samples: usize,
    spec: &QuadratureSpec,
) -> Result<BifurcationDiagram> {
    base.validate()?;
    path.validate()?;
    let (lo, hi) = path.range();
    // Samples run one after another; each root search already fans out.
    let samples = linspace(lo, hi, n_samples)
        .into_iter()
        .map(|t| {
            let r = find_stationary_means(&path.at(base, t)?, spec)?;
            Ok(BifurcationSample {
                value: t,
                roots: r.roots,
                phase: r.phase,
            })
        })
        .collect::<Result<_>>()?;
    Ok(BifurcationDiagram {
        nu: base.nu,
        base: *base,
        path,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::critical_sigma_dawson;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn additive_pitchfork() {
        let base = ModelParams::unit(1.0, 1.0, 0.0).unwrap();
        let d = bifurcation(
            &base,
            BifurcationPath::Ray {
                k: 0.0,
                range: (0.2, 2.0),
            },
            91,
            &spec(),
        )
        .unwrap();
        let sc = critical_sigma_dawson(1.0, 1.0, &spec()).unwrap();
        let last_stable = d.positive_branch().last().unwrap().0;
        let first_unstable = d.samples.iter().find(|s| s.roots.len() == 1).unwrap().value;
        assert!(last_stable < sc && first_unstable > sc);
        assert!((last_stable - sc).abs() < 0.02 && (first_unstable - sc).abs() < 0.03);
        let branch = d.positive_branch();
        assert!(branch.windows(2).all(|w| w[1].1 < w[0].1));
        for s in &d.samples {
            if s.roots.len() == 3 {
                assert!((s.roots[0] + s.roots[2]).abs() < 1e-6);
            }
        }
        // Away from the fold the branch is continuous.
        for w in branch.windows(2).filter(|w| w[1].0 < sc - 0.1) {
            assert!((w[0].1 - w[1].1).abs() < 0.1);
        }
    }

    #[test]
    fn coupling_stabilises_convex_potential() {
        let base = ModelParams::new(0.5, 1.0, 2.0, 0.0, 1.0).unwrap();
        let d = bifurcation(
            &base,
            BifurcationPath::Theta {
                range: (0.05, 10.0),
            },
            40,
            &spec(),
        )
        .unwrap();
        assert_eq!(d.samples.first().unwrap().roots.len(), 1);
        assert_eq!(d.samples.last().unwrap().roots.len(), 3);
    }

    #[test]
    fn too_weak_noise_correction_never_stabilises() {
        let base = ModelParams::new(0.5, 1.0, 2.0, -5.0, 1.0).unwrap();
        let d = bifurcation(
            &base,
            BifurcationPath::Theta { range: (0.1, 10.0) },
            25,
            &spec(),
        )
        .unwrap();
        assert!(d.samples.iter().all(|s| s.roots == vec![0.0]));
    }

    #[test]
    fn path_points() {
        let base = ModelParams::unit(0.5, 1.0, 0.3).unwrap();
        let p = BifurcationPath::Ray {
            k: 2.0,
            range: (0.1, 1.0),
        }
        .at(&base, 0.5)
        .unwrap();
        assert_eq!((p.sigma_a, p.sigma_m), (0.5, 1.0));
        assert!(BifurcationPath::SigmaA { range: (0.0, 1.0) }
            .at(&base, 0.0)
            .is_err());
        assert!(bifurcation(
            &base,
            BifurcationPath::Theta { range: (2.0, 1.0) },
            3,
            &spec()
        )
        .is_err());
    }
}
