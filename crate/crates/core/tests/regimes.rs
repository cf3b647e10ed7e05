//! Regime-level behaviour at the reference parameters (Da = 0.15, n = 1.5,
//! β = 2, γ = 15, δ = 3, f = 0.5) under the default discretization.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use recycle_reactor::analysis::bursts::{detect_bursts, BurstConfig};
use recycle_reactor::analysis::delay_map::{burst_delay_map, distinct_points};
use recycle_reactor::analysis::lyapunov::{
    divergence_curve, least_squares_slope, lyapunov_benettin, lyapunov_variational, windowed_lyapunov,
};
use recycle_reactor::analysis::regime::{classify_regime, RegimeLabel};
use recycle_reactor::dynamics::{recycle_step, simulate_orbit};
use recycle_reactor::sweep::{bracket_regime_boundary, chaos_predicate, run_sweep, SweepPlan, SweepValues};
use recycle_reactor::{IntegratorConfig, ReactorParams, State};

fn cfg() -> IntegratorConfig {
    IntegratorConfig::default()
}

/// Inlet state after `n` passes from the origin.
fn settled(p: &ReactorParams, n: usize) -> State {
    let mut s = State::default();
    for _ in 0..n {
        s = recycle_step(s, p, &cfg()).unwrap().0;
    }
    s
}

#[test]
fn periodic_case_is_never_called_chaotic() {
    let p = ReactorParams::reference(-0.0335);
    let mut rng = StdRng::seed_from_u64(20);
    for _ in 0..20 {
        let inlet = State::new(rng.random_range(0.0..0.4), rng.random_range(-0.03..0.1));
        let r = classify_regime(&p, &cfg(), inlet, 10_000).unwrap();
        assert!(
            matches!(r.label, RegimeLabel::Periodic(_) | RegimeLabel::Steady),
            "{inlet:?}: {}",
            r.label
        );
    }
}

#[test]
fn estimators_agree_where_converged() {
    let mut compared = 0;
    for theta_h in [-0.0339, -0.0337, -0.0335, -0.0331, -0.03299, -0.0325, -0.032] {
        let p = ReactorParams::reference(theta_h);
        let v = lyapunov_variational(&p, &cfg(), State::default(), 2000, 10_000).unwrap();
        let b = lyapunov_benettin(&p, &cfg(), State::default(), 2000, 10_000, 1e-9).unwrap();
        if v.std_error < 0.002 && b.std_error < 0.002 {
            compared += 1;
            assert!(
                (v.lambda - b.lambda).abs() < 0.005,
                "{theta_h}: {} vs {}",
                v.lambda,
                b.lambda
            );
        }
    }
    assert!(compared >= 5, "only {compared} converged orbits");
}

#[test]
fn benettin_insensitive_to_separation() {
    let p = ReactorParams::reference(-0.03299);
    let a = lyapunov_benettin(&p, &cfg(), State::default(), 2000, 20_000, 1e-7).unwrap();
    let b = lyapunov_benettin(&p, &cfg(), State::default(), 2000, 20_000, 1e-10).unwrap();
    assert!(a.lambda > 0.0);
    assert!((a.lambda - b.lambda).abs() < 0.005, "{} vs {}", a.lambda, b.lambda);
}

#[test]
fn divergence_matches_lambda_when_chaotic() {
    let p = ReactorParams::reference(-0.03299);
    let lambda = lyapunov_variational(&p, &cfg(), State::default(), 2000, 20_000)
        .unwrap()
        .lambda;
    // single curves are finite-time estimates; average over 40 starts 500 passes apart
    let mut s = settled(&p, 2000);
    let mut slopes = Vec::new();
    for _ in 0..40 {
        let curve = divergence_curve(&p, &cfg(), s, 1e-8, 5000).unwrap();
        slopes.push(least_squares_slope(&curve).unwrap());
        for _ in 0..500 {
            s = recycle_step(s, &p, &cfg()).unwrap().0;
        }
    }
    let slope = slopes.iter().sum::<f64>() / slopes.len() as f64;
    assert!((slope - lambda).abs() < 0.3 * lambda, "slope {slope} vs λ {lambda}");
}

#[test]
fn divergence_shrinks_when_periodic() {
    let p = ReactorParams::reference(-0.0335);
    let start = settled(&p, 2000);
    let curve = divergence_curve(&p, &cfg(), start, 1e-8, 300).unwrap();
    assert!(least_squares_slope(&curve).unwrap() <= 0.0);
    assert!(curve.last().unwrap().1 < curve[0].1);
}

#[test]
fn periodic_windows_are_non_positive() {
    let p = ReactorParams::reference(-0.0335);
    let w = windowed_lyapunov(&p, &cfg(), settled(&p, 2000), 500, 500, 5000).unwrap();
    assert_eq!(w.len(), 10);
    assert!(w.iter().all(|&(_, l)| l <= 0.0), "{w:?}");
}

#[test]
fn burst_peak_map_is_spread() {
    let p = ReactorParams::reference(-0.033003);
    let series = simulate_orbit(State::default(), &p, &cfg(), 60_000, 2000).unwrap();
    let bursts = detect_bursts(&series, &BurstConfig::default()).unwrap();
    assert!(bursts.events.len() >= 100, "{} bursts", bursts.events.len());
    let mut first = bursts.clone();
    first.events.truncate(100);
    let pairs = burst_delay_map(&first).unwrap();
    assert!(distinct_points(&pairs, 1e-6) >= 20);
}

#[test]
fn sweep_points_show_periodic_and_bursting_attractors() {
    let mut plan = SweepPlan::new("theta_h", SweepValues::List(vec![-0.034, -0.0335, -0.033003, -0.032]));
    plan.n_record = 2000;
    let t = run_sweep(&plan, &ReactorParams::default(), &cfg()).unwrap();
    let distinct = |thetas: &[f64]| {
        let pairs: Vec<(f64, f64)> = thetas.iter().map(|&t| (t, 0.0)).collect();
        distinct_points(&pairs, 1e-6)
    };
    let periodic = &t.points[1];
    assert_eq!(periodic.period, Some(8));
    assert_eq!(distinct(&periodic.thetas), 8);
    let bursting = &t.points[2];
    assert_eq!(bursting.period, None);
    assert!(distinct(&bursting.thetas) > 1000);
    assert!(bursting.theta_range() > periodic.theta_range());
}

#[test]
fn chaos_boundary_between_reported_points() {
    let p = ReactorParams::default();
    let b = bracket_regime_boundary(
        &p,
        &cfg(),
        "theta_h",
        -0.03305,
        -0.03295,
        chaos_predicate(State::default(), 1000, 3000),
    )
    .unwrap();
    assert!(!b.value_lo && b.value_hi);
    assert!(b.hi - b.lo <= 1e-8);
    assert!(b.lo > -0.03305 && b.hi < -0.03295);
}
