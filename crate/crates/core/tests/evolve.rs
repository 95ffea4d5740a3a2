mod common;

use std::sync::Arc;

use common::*;
use num_complex::Complex64 as C64;
use tclprep::coefficients::{ExponentialSwitch, SwitchOn};
use tclprep::evolve::{evolve_constant, integrate, integrate_with, jolt_metrics, IntegrateOptions, JOLT_WINDOW};
use tclprep::io::{read_trajectory, write_trajectory, TRAJECTORY_HEADER};
use tclprep::operator::{pauli, Operator};
use tclprep::scenario::{Grid, Preparation, Scenario};
use tclprep::Error;

fn mixed() -> Operator {
    Operator::from_rows(&[
        vec![C64::new(0.7, 0.0), C64::new(0.1, 0.25)],
        vec![C64::new(0.1, -0.25), C64::new(0.3, 0.0)],
    ])
    .unwrap()
}

fn equilibrium(lam: f64, rho: Operator, t_max: f64) -> Scenario {
    let sys = tls(lam);
    Scenario::new("equilibrium", Preparation::Equilibrium { h_minus: sys.h0.clone() }, &sys, rho, Grid::new(t_max)).unwrap()
}

#[test]
fn uncoupled_evolution_is_unitary() {
    for rho in [excited(), Operator::projector(&pauli::plus()), mixed()] {
        let s = Scenario::factorized("free", &tls(100.0), rho.clone(), Grid::new(3.0)).unwrap().with_coupling_strength(0.0);
        let traj = integrate(&s).unwrap();
        let p0 = traj.observables[0].purity;
        let drift = traj.observables.iter().map(|o| (o.purity - p0).abs()).fold(0.0, f64::max);
        assert!(drift <= 1e-9, "purity drift {drift:.2e}");
        let t = *traj.times.last().unwrap();
        let exact = conjugate_oracle(&(&pauli::sigma_z() * 0.5), t, &rho);
        assert!(traj.final_state().max_distance(&exact) < 1e-9);
    }
}

#[test]
fn time_independent_generator_matches_matrix_exponential() {
    let s = equilibrium(100.0, mixed(), 3.0);
    let traj = integrate(&s).unwrap();
    let l = s.liouvillian(traj.dt).unwrap();
    for (t, rho) in traj.times.iter().zip(&traj.states) {
        let exact = evolve_constant(&l, 0.0, &s.rho_init, *t).unwrap();
        assert!(rho.max_distance(&exact) <= 1e-7, "t = {t}");
    }
    let g = traj.gamma();
    let g0 = g[0];
    assert!(g.iter().all(|x| (x - g0).abs() <= 1e-6 * g0.abs()));
    assert!((g0 - traj.gamma_inf.unwrap()).abs() <= 1e-9 * g0);
}

#[test]
fn excited_population_decays_monotonically_after_the_jolt() {
    let lam = 100.0;
    let s = Scenario::factorized("factorized", &tls(lam), excited(), Grid::new(4.0).with_decimate(10)).unwrap();
    let traj = integrate(&s).unwrap();
    let after: Vec<f64> =
        traj.times.iter().zip(&traj.observables).filter(|(t, _)| **t >= JOLT_WINDOW / lam).map(|(_, o)| o.p_e).collect();
    assert!(after.len() > 10);
    for w in after.windows(2) {
        assert!(w[1] < w[0]);
    }
    assert!(traj.min_eigenvalue > -1e-6);
}

#[test]
fn jolt_window_is_stored_at_full_resolution() {
    let lam = 100.0;
    let s = Scenario::factorized("factorized", &tls(lam), excited(), Grid::new(2.0).with_decimate(25)).unwrap();
    let traj = integrate(&s).unwrap();
    let dt = traj.dt;
    let window: Vec<f64> = traj.times.iter().copied().filter(|t| *t <= JOLT_WINDOW / lam * (1.0 + 1e-12)).collect();
    assert_eq!(window.len(), (JOLT_WINDOW / lam / dt).round() as usize + 1);
    let later = traj.times.iter().filter(|t| **t > JOLT_WINDOW / lam * (1.0 + 1e-12)).count();
    let expect = ((2.0 - JOLT_WINDOW / lam) / (25.0 * dt)).round() as usize;
    assert!(later.abs_diff(expect) <= 1, "{later} vs {expect}");
    assert!((traj.times.last().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn halving_the_step_changes_observables_by_less_than_tolerance() {
    let lam = 100.0;
    let s = Scenario::factorized("factorized", &tls(lam), mixed(), Grid::new(1.0)).unwrap();
    let opts = IntegrateOptions { step_halving: false, ..Default::default() };
    let coarse = integrate_with(&s, opts).unwrap();
    let mut fine = s.clone();
    fine.grid = fine.grid.with_dt(coarse.dt / 2.0);
    let fine = integrate_with(&fine, opts).unwrap();
    let mut worst = 0.0f64;
    for (t, o) in coarse.times.iter().zip(&coarse.observables) {
        let k = fine.times.iter().position(|x| (x - t).abs() < 1e-12).unwrap();
        let f = &fine.observables[k];
        worst = worst
            .max((o.p_e - f.p_e).abs())
            .max((o.rho01 - f.rho01).norm())
            .max((o.purity - f.purity).abs())
            .max((o.gamma.unwrap() - f.gamma.unwrap()).abs());
    }
    assert!(worst <= 1e-6, "largest change {worst:.2e}");
    let checked = integrate(&s).unwrap();
    assert!(checked.error_estimate.unwrap() <= 1e-6);
}

#[test]
fn integrator_converges_at_fourth_order() {
    let lam = 20.0;
    let s = Scenario::factorized("factorized", &tls(lam), mixed(), Grid::new(0.5)).unwrap();
    let opts = IntegrateOptions { step_halving: false, ..Default::default() };
    let finals: Vec<Operator> = [0.02, 0.01, 0.005]
        .iter()
        .map(|dt| {
            let mut x = s.clone();
            x.grid = x.grid.with_dt(*dt);
            integrate_with(&x, opts).unwrap().final_state().clone()
        })
        .collect();
    let e1 = finals[0].max_distance(&finals[1]);
    let e2 = finals[1].max_distance(&finals[2]);
    let order = (e1 / e2).log2();
    assert!(order >= 3.5, "measured order {order:.2} ({e1:.2e}, {e2:.2e})");
}

#[test]
fn failed_step_halving_names_the_scenario() {
    let s = Scenario::factorized("coarse-run", &tls(100.0), excited(), Grid::new(0.2).with_dt(0.02)).unwrap();
    let err = integrate_with(&s, IntegrateOptions { step_halving: true, tolerance: 1e-12 }).unwrap_err();
    assert!(matches!(err, Error::Scenario { .. }));
    assert!(format!("{err}").contains("coarse-run"));
}

#[test]
fn jolt_metrics_examples() {
    let lam = 10.0;
    let times: Vec<f64> = (0..=1000).map(|k| k as f64 * 0.005).collect();
    let flat = vec![0.3; times.len()];
    let m = jolt_metrics(&times, &flat, 0.3, lam).unwrap();
    assert_eq!((m.peak, m.peak_time, m.settle_time), (0.3, 0.0, 0.0));
    let doubled = jolt_metrics(&times, &vec![0.33; times.len()], 0.33, lam).unwrap();
    assert!((m.with_comparison(&doubled).cutoff_sensitivity.unwrap() - 0.1).abs() < 1e-12);

    let coarse: Vec<f64> = (0..=100).map(|k| k as f64 * 0.05).collect();
    assert!(jolt_metrics(&coarse, &vec![0.3; coarse.len()], 0.3, lam).is_err());
    let short: Vec<f64> = (0..=100).map(|k| k as f64 * 0.005).collect();
    assert!(jolt_metrics(&short, &vec![0.3; short.len()], 0.3, lam).is_err());
}

#[test]
fn unprepared_and_switched_jolts() {
    let lam = 100.0;
    let factorized = Scenario::factorized("factorized", &tls(lam), excited(), Grid::new(1.0)).unwrap();
    let m0 = integrate(&factorized).unwrap().jolt_metrics(lam).unwrap();
    assert!(m0.peak_time >= 0.1 / lam && m0.peak_time <= 10.0 / lam);

    let tau = 16.0 / lam;
    let sw: Arc<dyn SwitchOn> = Arc::new(ExponentialSwitch::new(tau).unwrap());
    let switched = Scenario::switched("switched", &tls(lam), sw, excited(), Grid::new(1.0)).unwrap();
    let m1 = integrate(&switched).unwrap().jolt_metrics(lam).unwrap();
    assert!(m1.peak < m0.peak);
    assert!(m1.peak_time > m0.peak_time);
    assert!(m1.peak_time >= 0.1 * tau && m1.peak_time <= 10.0 * tau);
    assert!(m1.settle_time.is_finite() && m1.settle_time <= 1.0);
}

#[test]
fn trajectory_csv_round_trips_bitwise() {
    let s = Scenario::factorized("factorized", &tls(100.0), mixed(), Grid::new(0.6).with_decimate(7)).unwrap();
    let traj = integrate(&s).unwrap();
    let mut buf = Vec::new();
    write_trajectory(&mut buf, &traj).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().next().unwrap(), TRAJECTORY_HEADER.join(","));
    let second = text.lines().nth(1).unwrap();
    for field in second.split(',') {
        let mantissa = field.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17, "{field}");
    }
    let rows = read_trajectory(buf.as_slice()).unwrap();
    assert_eq!(rows.len(), traj.len());
    for (r, (t, o)) in rows.iter().zip(traj.times.iter().zip(&traj.observables)) {
        assert_eq!(r.t.to_bits(), t.to_bits());
        assert_eq!(r.p_e.to_bits(), o.p_e.to_bits());
        assert_eq!(r.re_rho01.to_bits(), o.rho01.re.to_bits());
        assert_eq!(r.im_rho01.to_bits(), o.rho01.im.to_bits());
        assert_eq!(r.purity.to_bits(), o.purity.to_bits());
        assert_eq!(r.gamma.to_bits(), o.gamma.unwrap().to_bits());
    }
}

#[test]
fn invariants_hold_along_trajectories() {
    for rho in [excited(), mixed()] {
        let s = Scenario::factorized("factorized", &tls(50.0), rho, Grid::new(1.0)).unwrap();
        let inv = integrate(&s).unwrap().invariants();
        assert!(inv.trace_residual <= 1e-8 && inv.hermiticity_residual <= 1e-8);
    }
}
