//! Cross-module invariants that no single unit test owns.

use proptest::prelude::*;

use mvphase::asymptotics::{dawson_moments, moment_hierarchy};
use mvphase::numerics::{gamma, integrate_interval};
use mvphase::phase::{
    critical_sigma_dawson, phase_sequence, slope_sequence, trace_contour, ContourGrid, Phase,
};
use mvphase::selfconsistency::{find_stationary_means, slope_at_zero, slope_at_zero_fd};
use mvphase::{ModelParams, QuadratureSpec};

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn params() -> impl Strategy<Value = ModelParams> {
    (0.0..=1.0, 0.3..2.5, 0.0..3.0, -1.0..2.0, 0.2..3.0).prop_map(
        |(nu, sigma_a, sigma_m, a, theta)| ModelParams {
            nu,
            sigma_a,
            sigma_m,
            a,
            theta,
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn roots_agree_with_slope(p in params()) {
        let r = find_stationary_means(&p, &spec()).unwrap();
        prop_assert!(r.roots.len() == 1 || r.roots.len() == 3);
        prop_assert_eq!(r.roots.len(), r.phase.root_count());
        prop_assert_eq!(r.phase, Phase::from_slope(r.derivative_at_zero));
        if let [n, z, q] = r.roots[..] {
            prop_assert!(z == 0.0 && (n + q).abs() < 1e-6 && q > 0.0);
        }
    }

    #[test]
    fn analytic_slope_matches_differences(p in params()) {
        let a = slope_at_zero(&p, &spec()).unwrap();
        let b = slope_at_zero_fd(&p, 1e-4, &spec()).unwrap();
        prop_assert!((a - b).abs() <= 1e-6 * a.abs().max(1e-3), "{} vs {}", a, b);
    }

    #[test]
    fn integration_is_linear(c1 in -3.0..3.0f64, c2 in -3.0..3.0f64, w in 0.2..4.0f64) {
        let f = |x: f64| (-x * x / w).exp();
        let g = |x: f64| x.cos() * (-x.abs()).exp();
        let s = spec();
        let lhs = integrate_interval(|x| c1 * f(x) + c2 * g(x), -5.0, 5.0, &[], &s).unwrap();
        let rhs = c1 * integrate_interval(f, -5.0, 5.0, &[], &s).unwrap()
            + c2 * integrate_interval(g, -5.0, 5.0, &[0.0], &s).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn gamma_recurrence(x in 0.05..20.0f64) {
        let lhs = gamma(x + 1.0).unwrap();
        let rhs = x * gamma(x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs());
    }
}

#[test]
fn critical_noise_grows_with_coupling() {
    // Stronger coupling needs more noise to lose the ordered phase.
    let s = spec();
    let thetas = [0.25, 0.5, 1.0, 2.0, 4.0];
    let sc: Vec<f64> = thetas
        .iter()
        .map(|&t| critical_sigma_dawson(t, 1.0, &s).unwrap())
        .collect();
    assert!(sc.windows(2).all(|w| w[1] > w[0]), "{sc:?}");
}

#[test]
fn hierarchy_closure_grid() {
    for sa in [0.5, 0.8, 1.1, 1.4, 1.8] {
        for theta in [0.3, 0.7, 1.0, 1.5, 3.0] {
            let q = dawson_moments(sa, theta, &spec()).unwrap();
            let h = moment_hierarchy(q.m2, sa, theta).unwrap();
            for k in [4, 6, 8, 10] {
                let (a, b) = (q.get(k).unwrap(), h.get(k).unwrap());
                assert!(
                    (a - b).abs() <= 1e-6 * a,
                    "sa={sa} theta={theta} m{k}: {a} vs {b}"
                );
            }
        }
    }
}

#[test]
fn contours_start_at_additive_critical_point() {
    let sc = critical_sigma_dawson(1.0, 1.0, &spec()).unwrap();
    let grid = ContourGrid::new((0.1, 2.0), (0.0, 3.0), 32, 32).unwrap();
    for nu in [0.0, 0.2, 0.35, 0.49, 0.5, 0.75, 1.0] {
        let c = trace_contour(nu, &grid, &spec()).unwrap();
        assert!(c.refined, "nu={nu}");
        let first = c.polylines[0][0];
        assert_eq!(first.1, 0.0, "nu={nu}");
        assert!((first.0 - sc).abs() < 1e-3, "nu={nu}: {first:?}");
        assert!((c.axis_crossing().unwrap() - sc).abs() < 1e-3);
    }
}

#[test]
fn sequences_follow_slope_sign() {
    let sc = critical_sigma_dawson(1.0, 1.0, &spec()).unwrap();
    for (nu, sa) in [(1.0, 0.5), (0.35, sc + 0.02), (0.75, 0.8), (0.0, 1.5)] {
        let p = ModelParams::unit(nu, sa, 0.0).unwrap();
        let a = phase_sequence(&p, 10.0, 100, &spec()).unwrap();
        let b = slope_sequence(&p, 10.0, 100, &spec()).unwrap();
        assert_eq!(a, b, "nu={nu} sa={sa}");
    }
}

#[test]
fn stratonovich_contour_is_nearly_vertical_near_axis() {
    // nu = 1/2 has no sigma_m^2 correction at the critical point.
    let grid = ContourGrid::new((0.8, 1.1), (0.0, 0.5), 32, 32).unwrap();
    let c = trace_contour(0.5, &grid, &spec()).unwrap();
    let sc = critical_sigma_dawson(1.0, 1.0, &spec()).unwrap();
    for (sa, sm) in c.points() {
        assert!(
            (sa - sc).abs() < 5e-3 * (1.0 + sm * sm * 10.0),
            "({sa}, {sm})"
        );
    }
}
