//! Particle runs against the mean-field predictions.

use mvphase::density::StationaryDensity;
use mvphase::particles::{
    simulate, transition_stats, InitialCondition, SimulationConfig, DEFAULT_DELTA,
};
use mvphase::phase::critical_sigma_dawson;
use mvphase::selfconsistency::{find_stationary_means, Phase};
use mvphase::{ModelParams, QuadratureSpec};

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

#[test]
fn interpretation_drift_orders_a_flat_potential() {
    // a = 0: only the (1 - nu) sigma_m^2 x correction can create wells.
    let strat = ModelParams::new(0.5, 0.5, 2.0, 0.0, 3.0).unwrap();
    let ito = strat.with_nu(1.0);
    let r = find_stationary_means(&strat, &spec()).unwrap();
    assert_eq!(r.phase, Phase::Stable);
    assert_eq!(
        find_stationary_means(&ito, &spec()).unwrap().phase,
        Phase::Unstable
    );
    let root = r.positive_root().unwrap();

    let cfg = SimulationConfig::new(1000, 60.0, 1e-3, 21, 10.0)
        .with_init(InitialCondition::Constant(root));
    let est = simulate(&strat, &cfg).unwrap().time_average();
    // 0.01 allows for the finite-n offset of a 1000-particle ensemble.
    assert!(
        (est.mean - root).abs() <= 3.0 * est.se + 0.01,
        "{est:?} vs {root}"
    );

    let est = simulate(&ito, &cfg).unwrap().abs_time_average();
    assert!(est.mean < 0.3 * root, "{est:?}");
}

#[test]
fn dt_refinement_keeps_second_moment() {
    // Uncoupled particles sample the stationary density directly.
    let p = ModelParams::new(1.0, 1.0, 0.5, 1.0, 0.0).unwrap();
    let m2 = StationaryDensity::new(&p, 0.0, &spec())
        .unwrap()
        .moment(2)
        .unwrap();
    let mut est = Vec::new();
    for dt in [2e-3, 1e-3] {
        let cfg =
            SimulationConfig::new(1000, 50.0, dt, 8, 5.0).with_init(InitialCondition::Symmetric);
        est.push(simulate(&p, &cfg).unwrap().second_moment_average());
    }
    for e in &est {
        assert!((e.mean - m2).abs() <= 3.0 * e.se, "{e:?} vs {m2}");
    }
    let se = (est[0].se.powi(2) + est[1].se.powi(2)).sqrt();
    assert!((est[0].mean - est[1].mean).abs() <= 3.0 * se, "{est:?}");
}

#[test]
fn small_ensembles_switch_wells() {
    // Ordered but shallow: root 0.666 at sigma_a = 0.8.
    let p = ModelParams::unit(1.0, 0.8, 0.0).unwrap();
    let count = |n: usize| -> usize {
        (1..=4)
            .map(|seed| {
                let cfg = SimulationConfig::new(n, 100.0, 1e-3, seed, 10.0);
                transition_stats(&simulate(&p, &cfg).unwrap(), DEFAULT_DELTA)
                    .unwrap()
                    .count
            })
            .sum()
    };
    let (small, large) = (count(10), count(1000));
    assert!(small > 0, "n=10: {small}");
    assert_eq!(large, 0);
}

#[test]
fn reentrant_window_stays_ordered() {
    // nu = 0.35, just above sigma_c: ordered only for intermediate sigma_m.
    let sc = critical_sigma_dawson(1.0, 1.0, &spec()).unwrap();
    let p = ModelParams::unit(0.35, sc + 0.02, 1.5).unwrap();
    let root = find_stationary_means(&p, &spec())
        .unwrap()
        .positive_root()
        .unwrap();
    let cfg = SimulationConfig::new(2000, 200.0, 1e-3, 5, 20.0)
        .with_init(InitialCondition::Constant(root));
    let traj = simulate(&p, &cfg).unwrap();
    assert!(traj.transitions.is_empty());
    assert!(traj
        .times
        .iter()
        .zip(&traj.means)
        .filter(|(t, _)| **t >= 20.0)
        .all(|(_, m)| *m > 0.0));
    // The shallow self-consistency map leaves a finite-n offset of a few hundredths.
    let est = traj.time_average();
    assert!((est.mean - root).abs() < 0.1, "{est:?} vs {root}");
}
