//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Runs without the libtest harness so the report is printed even when
//! everything passes.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mvphase::asymptotics::{
    dawson_m2, dawson_moments, gradient_at_critical, large_sigma_m_sign_change, moment_hierarchy,
    small_sigma_m_gradient, validate_small_sigma_m,
};
use mvphase::density::StationaryDensity;
use mvphase::model::{diffusion, ito_drift};
use mvphase::numerics::{find_root, Bracket};
use mvphase::particles::{simulate, InitialCondition, NoiseForm, SimulationConfig};
use mvphase::phase::{
    bifurcation, classify, critical_sigma_dawson, estimate_nu1, phase_sequence, BifurcationPath,
    Nu1Search,
};
use mvphase::selfconsistency::{
    find_stationary_means, self_consistency, slope_at_zero, slope_at_zero_fd, Phase,
};
use mvphase::{ModelParams, QuadratureSpec, Result};

/// A criterion's verdict with the numbers behind it.
struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn sigma_c() -> Result<f64> {
    critical_sigma_dawson(1.0, 1.0, &spec())
}

fn nu2_root(sc: f64) -> Result<f64> {
    let g = |nu: f64| {
        large_sigma_m_sign_change(nu)
            .map(|t| t - sc)
            .unwrap_or(f64::NAN)
    };
    find_root(g, Bracket::around(&g, 0.0, 0.4999)?, 1e-12)
}

fn c1_dawson() -> Result<Outcome> {
    let sc = sigma_c()?;
    let m2 = dawson_m2(sc, 1.0, &spec())?;
    let implied = (2.0 * m2).sqrt();
    let pass = (m2 - 0.457).abs() <= 0.005 && (sc - implied).abs() <= 0.01;
    Ok(Outcome::new(
        pass,
        format!("sigma_c = {sc:.10}, m2 = {m2:.6} (0.457 +/- 0.005), sqrt(2 m2) = {implied:.6}"),
    ))
}

fn c2_nu3() -> Result<Outcome> {
    let sc = sigma_c()?;
    let m2 = dawson_m2(sc, 1.0, &spec())?;
    let (g0, g1) = (
        gradient_at_critical(0.0, m2)?,
        gradient_at_critical(1.0, m2)?,
    );
    let closed = g0 / (g0 - g1);
    let coef = |nu: f64| small_sigma_m_gradient(nu, sc, 1.0, &spec()).map(|g| g.moment_combination);
    let (f0, f1) = (coef(0.0)?, coef(1.0)?);
    let quad = find_root(
        |nu| coef(nu).unwrap_or(f64::NAN),
        Bracket::new(0.0, 1.0, f0, f1)?,
        1e-12,
    )?;
    Ok(Outcome::new(
        closed == 0.5 && (quad - 0.5).abs() <= 0.01,
        format!("closed-form root = {closed}, quadrature root = {quad:.8} (0.5 +/- 0.01)"),
    ))
}

fn c3_nu2() -> Result<Outcome> {
    let nu2 = nu2_root(sigma_c()?)?;
    Ok(Outcome::new(
        (nu2 - 0.28).abs() <= 0.02,
        format!("nu2 = {nu2:.6} (0.28 +/- 0.02)"),
    ))
}

fn c4_nu1() -> Result<Outcome> {
    let sc = sigma_c()?;
    let search = Nu1Search::default();
    let nu1 = estimate_nu1(sc, nu2_root(sc)?, &search, &spec())?;
    Ok(Outcome::new(
        (nu1 - 0.11).abs() <= 0.03,
        format!(
            "nu1 = {nu1:.4} (0.11 +/- 0.03) on {}x{} grids, sigma_a in {:?}, sigma_m in [0, {}]",
            search.resolution, search.resolution, search.sigma_a, search.sigma_m_max
        ),
    ))
}

fn c5_sign_change() -> Result<Outcome> {
    let at0 = large_sigma_m_sign_change(0.0)?;
    let err0 = (at0 - PI.sqrt()).abs();
    let mut prev = f64::INFINITY;
    let mut decreasing = true;
    for i in 0..=999 {
        let v = large_sigma_m_sign_change(0.4999 * i as f64 / 999.0)?;
        decreasing &= v < prev && v > 0.0;
        prev = v;
    }
    // Near the pole the threshold is pi^{3/2} (1/2 - nu) to leading order.
    let mut vanishing = true;
    let mut tail = Vec::new();
    for k in 3..=9 {
        let eps = 10f64.powi(-k);
        let v = large_sigma_m_sign_change(0.5 - eps)?;
        vanishing &= v > 0.0 && v < 6.0 * eps;
        tail.push(format!("{v:.2e}"));
    }
    Ok(Outcome::new(
        err0 <= 1e-10 && decreasing && vanishing,
        format!(
            "|f(0) - sqrt(pi)| = {err0:.1e}, strictly decreasing on 1000 points: {decreasing}, f(1/2 - 10^-k), k=3..9: [{}]",
            tail.join(", ")
        ),
    ))
}

fn c6_sequences() -> Result<Outcome> {
    let sc = sigma_c()?;
    let mid = 0.5 * (sc + large_sigma_m_sign_change(0.2)?);
    let cases = [
        (
            "nu=1, sigma_a=0.5",
            ModelParams::unit(1.0, 0.5, 0.0)?,
            10.0,
            "3→1",
        ),
        (
            "nu=0.35, sigma_a=sigma_c+0.02",
            ModelParams::unit(0.35, sc + 0.02, 0.0)?,
            10.0,
            "1→3→1",
        ),
        (
            "nu=0.2, sigma_a=mid-window",
            ModelParams::unit(0.2, mid, 0.0)?,
            50.0,
            "1→3",
        ),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, p, max, want) in cases {
        let seq = phase_sequence(&p, max, 100, &spec())?;
        let got = seq.to_string();
        pass &= got == want;
        let starts: Vec<String> = seq.starts.iter().map(|s| format!("{s:.3}")).collect();
        parts.push(format!(
            "{label} -> {got} (want {want}, runs from sigma_m [{}])",
            starts.join(", ")
        ));
    }
    Ok(Outcome::new(pass, parts.join("; ")))
}

fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    ModelParams {
        nu: rng.random_range(0.0..=1.0),
        sigma_a: rng.random_range(0.3..2.5),
        sigma_m: rng.random_range(0.0..3.0),
        a: rng.random_range(-1.0..2.0),
        theta: rng.random_range(0.2..3.0),
    }
}

fn c7_properties() -> Result<Outcome> {
    let spec = spec();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let points: Vec<ModelParams> = (0..100).map(|_| random_params(&mut rng)).collect();
    let mut notes = Vec::new();
    let mut pass = true;

    // Root count and oddness of F.
    let mut counts = [0usize; 2];
    let mut count_ok = true;
    let mut odd_err: f64 = 0.0;
    for p in &points {
        match find_stationary_means(p, &spec) {
            Ok(r) if r.roots.len() == 1 => counts[0] += 1,
            Ok(r) if r.roots.len() == 3 => counts[1] += 1,
            _ => count_ok = false,
        }
        for mu in [0.3, 0.8] {
            odd_err = odd_err
                .max((self_consistency(p, mu, &spec)? + self_consistency(p, -mu, &spec)?).abs());
        }
    }
    pass &= count_ok && odd_err <= 2e-8;
    notes.push(format!(
        "root counts on 100 points: {} x1, {} x3, other: {}",
        counts[0], counts[1], !count_ok
    ));
    notes.push(format!("max |F(mu) + F(-mu)| = {odd_err:.1e}"));

    // Analytic slope against central differences.
    let mut fd_rel: f64 = 0.0;
    for p in &points[..20] {
        let a = slope_at_zero(p, &spec)?;
        let b = slope_at_zero_fd(p, 1e-4, &spec)?;
        fd_rel = fd_rel.max((a - b).abs() / a.abs());
    }
    pass &= fd_rel <= 1e-6;
    notes.push(format!("max relative |F'_analytic - F'_fd| = {fd_rel:.1e}"));

    // Zero probability flux of the stationary density.
    let mut flux_ratio: f64 = 0.0;
    for p in &points[..20] {
        let mu = 0.3;
        let d = StationaryDensity::new(p, mu, &spec)?;
        let h = 1e-5;
        let dd = |x: f64| diffusion(p, x).powi(2) * d.density(x);
        let (mut max_rho, mut max_flux) = (0f64, 0f64);
        for i in 0..200 {
            let x = d.trunc() * (-0.6 + 1.2 * i as f64 / 199.0);
            let rho = d.density(x);
            let j = ito_drift(p, mu, x) * rho - 0.5 * (dd(x + h) - dd(x - h)) / (2.0 * h);
            max_rho = max_rho.max(rho);
            max_flux = max_flux.max(j.abs());
        }
        flux_ratio = flux_ratio.max(max_flux / max_rho);
    }
    pass &= flux_ratio <= 1e-6;
    notes.push(format!("max flux / max rho = {flux_ratio:.1e}"));

    // Moment hierarchy against direct quadrature.
    let mut hier: f64 = 0.0;
    for sa in [0.4, 0.7, 1.0, 1.5, 2.0] {
        for theta in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let q = dawson_moments(sa, theta, &spec)?;
            let h = moment_hierarchy(q.m2, sa, theta)?;
            for k in [4, 6, 8, 10] {
                let (a, b) = (q.get(k).unwrap(), h.get(k).unwrap());
                hier = hier.max((a - b).abs() / a.abs());
            }
        }
    }
    pass &= hier <= 1e-6;
    notes.push(format!("moment hierarchy max relative error = {hier:.1e}"));

    // Residual of the sigma_m^2 law shrinks like sigma_m^4: predicted
    // coefficient on the critical curve, fitted coefficient elsewhere.
    let sc = sigma_c()?;
    let mut ratios = Vec::new();
    let mut rich_ok = true;
    for nu in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let r = validate_small_sigma_m(nu, sc, 1.0, &spec)?;
        let q = r.ratio_predicted.unwrap_or(f64::NAN);
        rich_ok &= (12.0..=20.0).contains(&q);
        ratios.push(q);
        for sa in [0.6, 1.3] {
            let q = validate_small_sigma_m(nu, sa, 1.0, &spec)?
                .ratio_fitted
                .unwrap_or(f64::NAN);
            rich_ok &= (12.0..=20.0).contains(&q);
            ratios.push(q);
        }
    }
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &q| {
            (l.min(q), h.max(q))
        });
    pass &= rich_ok;
    notes.push(format!(
        "Richardson ratios in [{lo:.2}, {hi:.2}] over {} cases",
        ratios.len()
    ));

    // Ito rays cross the contour exactly once.
    let mut rays_ok = true;
    for k in [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0] {
        let phases: Vec<Phase> = (0..60)
            .map(|i| {
                let s = 0.1 + 2.9 * i as f64 / 59.0;
                classify(&ModelParams::unit(1.0, s, k * s)?, &spec)
            })
            .collect::<Result<_>>()?;
        rays_ok &=
            phases.windows(2).filter(|w| w[0] != w[1]).count() == 1 && phases[0] == Phase::Stable;
    }
    pass &= rays_ok;
    notes.push(format!("8 Ito rays with a single phase change: {rays_ok}"));

    Ok(Outcome::new(pass, notes.join("; ")))
}

/// Time average of `xbar` against the mean-field prediction.
///
/// Points keep `|F'| >= 0.3` near the root: closer to the boundary the
/// n = 2000 ensemble is visibly biased and `xbar` decorrelates too slowly
/// for a 200-unit run to pin down its own standard error.
fn c8_particles() -> Result<Outcome> {
    let spec = spec();
    let points = [
        ModelParams::unit(1.0, 0.5, 0.0)?,
        ModelParams::unit(1.0, 2.0, 0.0)?,
        ModelParams::unit(0.0, 0.5, 0.5)?,
        ModelParams::unit(0.5, 0.6, 0.5)?,
        ModelParams::unit(1.0, 1.0, 1.5)?,
    ];
    let mut pass = true;
    let mut notes = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let r = find_stationary_means(p, &spec)?;
        let (target, init) = match r.positive_root() {
            Some(root) => (root, InitialCondition::Constant(root)),
            None => (0.0, InitialCondition::Symmetric),
        };
        let cfg = SimulationConfig::new(2000, 200.0, 1e-3, 100 + i as u64, 20.0).with_init(init);
        let est = simulate(p, &cfg)?.time_average();
        let z = (est.mean - target) / est.se;
        pass &= z.abs() <= 3.0;
        notes.push(format!(
            "({}, {}, {}) {}: xbar = {:.4} +/- {:.4} vs {:.5} (z = {z:+.2})",
            p.nu, p.sigma_a, p.sigma_m, r.phase, est.mean, est.se, target
        ));
    }

    let p = ModelParams::unit(0.5, 0.6, 0.5)?;
    let root = find_stationary_means(&p, &spec)?
        .positive_root()
        .unwrap_or(0.0);
    let run = |noise| {
        let cfg = SimulationConfig::new(2000, 200.0, 1e-3, 11, 20.0)
            .with_init(InitialCondition::Constant(root))
            .with_noise(noise);
        simulate(&p, &cfg)
    };
    let (two, single) = (run(NoiseForm::TwoNoise)?, run(NoiseForm::SingleNoise)?);
    for (what, a, b) in [
        ("mean", two.time_average(), single.time_average()),
        (
            "second moment",
            two.second_moment_average(),
            single.second_moment_average(),
        ),
    ] {
        let z = (a.mean - b.mean) / (a.se * a.se + b.se * b.se).sqrt();
        pass &= z.abs() <= 3.0;
        notes.push(format!(
            "two vs single noise {what}: {:.5} vs {:.5} (z = {z:+.2})",
            a.mean, b.mean
        ));
    }
    Ok(Outcome::new(pass, notes.join("; ")))
}

fn stabilises(base: &ModelParams, theta: (f64, f64)) -> Result<(bool, Vec<Phase>)> {
    let d = bifurcation(base, BifurcationPath::Theta { range: theta }, 60, &spec())?;
    let phases: Vec<Phase> = d.samples.iter().map(|s| s.phase).collect();
    let change = phases
        .windows(2)
        .any(|w| w[0] == Phase::Unstable && w[1] == Phase::Stable);
    Ok((change, phases))
}

fn c9_convex() -> Result<Outcome> {
    let theta = (0.05, 20.0);
    let (flat, _) = stabilises(&ModelParams::new(0.5, 1.0, 2.0, 0.0, 1.0)?, theta)?;
    let (deep3, _) = stabilises(&ModelParams::new(0.5, 1.0, 3.0, -5.0, 1.0)?, theta)?;
    let (deep35, _) = stabilises(&ModelParams::new(0.5, 1.0, 3.5, -5.0, 1.0)?, theta)?;
    // (1 - nu) sigma_m^2 against 5: 4.5 and 6.125.
    Ok(Outcome::new(
        flat && !deep3 && deep35,
        format!(
            "theta in {theta:?}: a=0, sigma_m=2 changes: {flat}; a=-5, sigma_m=3.0 changes: {deep3} (want false); a=-5, sigma_m=3.5 changes: {deep35}"
        ),
    ))
}

type Check = (u32, &'static str, Duration, fn() -> Result<Outcome>);

fn main() -> ExitCode {
    let min = |m: u64| Duration::from_secs(60 * m);
    let checks: [Check; 9] = [
        (
            1,
            "Dawson critical point",
            Duration::from_secs(5),
            c1_dawson,
        ),
        (2, "threshold nu3", Duration::from_secs(30), c2_nu3),
        (3, "threshold nu2", Duration::from_secs(5), c3_nu2),
        (4, "threshold nu1", min(10), c4_nu1),
        (
            5,
            "sign-change range",
            Duration::from_secs(5),
            c5_sign_change,
        ),
        (6, "phase sequences", min(5), c6_sequences),
        (7, "property suite", min(10), c7_properties),
        (8, "particle / mean-field agreement", min(10), c8_particles),
        (9, "convex-potential stabilisation", min(5), c9_convex),
    ];
    let mut failed = 0;
    for (id, name, limit, run) in checks {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(o) => (o.pass && took <= limit, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id} [{}] {name}: {detail} ({:.2} s, limit {} s)",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
