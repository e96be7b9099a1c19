use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::QuadratureSpec;
use crate::selfconsistency::{find_stationary_means, slope_at_zero};

/// Minimum number of samples along a phase-sequence sweep.
pub const MIN_SEQUENCE_SAMPLES: usize = 100;

/// Run-length encoded root counts along a `sigma_m` sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSequence {
    /// Root count of each run, consecutive entries distinct.
    pub labels: Vec<usize>,
    /// `sigma_m` of the first sample of each run.
    pub starts: Vec<f64>,
}

impl PhaseSequence {
    pub fn from_counts(sigma_m: &[f64], counts: &[usize]) -> Self {
        let mut labels: Vec<usize> = Vec::new();
        let mut starts = Vec::new();
        for (s, c) in sigma_m.iter().zip(counts) {
            if labels.last() != Some(c) {
                labels.push(*c);
                starts.push(*s);
            }
        }
        Self { labels, starts }
    }
}

/// `"3→1"`, `"1→3→1"`; a single run is written with a trailing arrow, `"1→"`.
impl fmt::Display for PhaseSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.labels.iter().map(|l| l.to_string()).collect();
        f.write_str(&parts.join("→"))?;
        if self.labels.len() == 1 {
            f.write_str("→")?;
        }
        Ok(())
    }
}

/// Sweep abscissae on `[0, sigma_m_max]`, quadratically graded so the
/// small-noise end, where phase changes crowd, is resolved finely.
pub fn sweep_points(sigma_m_max: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            if i + 1 == n {
                sigma_m_max
            } else {
                sigma_m_max * t * t
            }
        })
        .collect()
}

fn check(base: &ModelParams, sigma_m_max: f64, n: usize) -> Result<()> {
    base.validate()?;
    if n < MIN_SEQUENCE_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "phase sequences need at least {MIN_SEQUENCE_SAMPLES} samples, got {n}"
        )));
    }
    if !(sigma_m_max > 0.0) || !sigma_m_max.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sigma_m_max must be positive, got {sigma_m_max}"
        )));
    }
    Ok(())
}

/// Number of stationary means as `sigma_m` grows from 0 at the base `sigma_a`.
pub fn phase_sequence(
    base: &ModelParams,
    sigma_m_max: f64,
    n_samples: usize,
    spec: &QuadratureSpec,
) -> Result<PhaseSequence> {
    check(base, sigma_m_max, n_samples)?;
    let sm = sweep_points(sigma_m_max, n_samples);
    let counts: Vec<usize> = sm
        .iter()
        .map(|&s| {
            Ok(find_stationary_means(&base.with_sigma_m(s), spec)?
                .roots
                .len())
        })
        .collect::<Result<_>>()?;
    Ok(PhaseSequence::from_counts(&sm, &counts))
}

/// The same sweep labelled from the sign of `F'[0]` alone (3 if positive).
pub fn slope_sequence(
    base: &ModelParams,
    sigma_m_max: f64,
    n_samples: usize,
    spec: &QuadratureSpec,
) -> Result<PhaseSequence> {
    check(base, sigma_m_max, n_samples)?;
    let sm = sweep_points(sigma_m_max, n_samples);
    let counts: Vec<usize> = sm
        .par_iter()
        .map(|&s| {
            Ok(if slope_at_zero(&base.with_sigma_m(s), spec)? > 0.0 {
                3
            } else {
                1
            })
        })
        .collect::<Result<_>>()?;
    Ok(PhaseSequence::from_counts(&sm, &counts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_length_labels() {
        let s = [0.0, 1.0, 2.0, 3.0, 4.0];
        let seq = PhaseSequence::from_counts(&s, &[3, 3, 1, 1, 1]);
        assert_eq!(seq.to_string(), "3→1");
        assert_eq!(seq.starts, vec![0.0, 2.0]);
        assert_eq!(
            PhaseSequence::from_counts(&s, &[1, 3, 3, 1, 1]).to_string(),
            "1→3→1"
        );
        assert_eq!(PhaseSequence::from_counts(&s, &[1; 5]).to_string(), "1→");
        assert_eq!(PhaseSequence::from_counts(&s, &[3; 5]).to_string(), "3→");
    }

    #[test]
    fn sweep_covers_range() {
        let s = sweep_points(10.0, 101);
        assert_eq!(s[0], 0.0);
        assert_eq!(*s.last().unwrap(), 10.0);
        assert!(s.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn too_few_samples_rejected() {
        let p = ModelParams::unit(1.0, 0.5, 0.0).unwrap();
        assert!(phase_sequence(&p, 5.0, 99, &QuadratureSpec::default()).is_err());
        assert!(slope_sequence(&p, 0.0, 100, &QuadratureSpec::default()).is_err());
    }

    #[test]
    fn ito_destabilises() {
        let spec = QuadratureSpec::default();
        let p = ModelParams::unit(1.0, 0.5, 0.0).unwrap();
        let seq = phase_sequence(&p, 10.0, 100, &spec).unwrap();
        assert_eq!(seq.to_string(), "3→1");
        assert_eq!(seq, slope_sequence(&p, 10.0, 100, &spec).unwrap());
    }
}
