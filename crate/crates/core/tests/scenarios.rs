mod common;

use std::sync::Arc;

use common::*;
use tclprep::coefficients::{diamond_asymptotic, ExponentialSwitch, SwitchOn};
use tclprep::evolve::{integrate, integrate_with, IntegrateOptions};
use tclprep::liouvillian::{generator_matrix, unvectorize, vectorize};
use tclprep::operator::{pauli, Operator, StateVector};
use tclprep::scenario::{
    flipping_hamiltonian, prepare_by_decoherence, prepare_by_equilibration, prepare_by_flipping, prepare_by_freezing,
    swap_hamiltonian, validate, Grid, Preparation, Scenario, System,
};

fn thermal_tls(lam: f64, beta: f64) -> System {
    let bath = tclprep::bath::BathSpec::thermal(
        tclprep::bath::SpectralDensity::ohmic(ETA, lam).unwrap(),
        beta,
    )
    .unwrap();
    System::new(&pauli::sigma_z() * 0.5, pauli::sigma_x(), bath).unwrap()
}

fn dephasing(lam: f64) -> System {
    System::new(&pauli::sigma_z() * 0.5, pauli::sigma_z(), zero_t_bath(lam)).unwrap()
}

fn no_halving() -> IntegrateOptions {
    IntegrateOptions { step_halving: false, ..Default::default() }
}

#[test]
fn decoherence_accepts_only_incoherent_mixtures() {
    let sys = dephasing(100.0);
    assert!(prepare_by_decoherence(&sys, &Operator::diagonal(&[0.3, 0.7]), Grid::new(1.0)).is_ok());
    let plus = Operator::projector(&pauli::plus());
    assert!(prepare_by_decoherence(&sys, &plus, Grid::new(1.0)).is_err());
}

#[test]
fn decoherence_keeps_populations_and_kills_coherence() {
    let sys = dephasing(100.0);
    let s = prepare_by_decoherence(&sys, &Operator::diagonal(&[0.3, 0.7]), Grid::new(5.0)).unwrap();
    let traj = integrate(&s).unwrap();
    let drift = traj.observables.iter().map(|o| (o.p_e - 0.3).abs()).fold(0.0, f64::max);
    assert!(drift <= 1e-8, "population drift {drift:.2e}");

    // at finite temperature a coherent start loses its coherence; at zero
    // temperature the ohmic α̂(0) is imaginary and there is no net dephasing
    let warm = System::new(&pauli::sigma_z() * 0.5, pauli::sigma_z(), thermal_tls(100.0, 1.0).bath).unwrap();
    let mut coherent = prepare_by_decoherence(&warm, &Operator::diagonal(&[0.3, 0.7]), Grid::new(5.0)).unwrap();
    coherent.rho_init = Operator::projector(&pauli::plus());
    let traj = integrate(&coherent).unwrap();
    let first = traj.observables[0].rho01.norm();
    let last = traj.observables.last().unwrap().rho01.norm();
    assert!(last < first);
    let drift = traj.observables.iter().map(|o| (o.p_e - 0.5).abs()).fold(0.0, f64::max);
    assert!(drift <= 1e-8);
}

#[test]
fn equilibration_hamiltonian_and_fixed_point() {
    let (lam, beta) = (100.0, 1.0);
    let sys = thermal_tls(lam, beta);
    let target = Operator::diagonal(&[0.1, 0.9]);
    let (s, report) = prepare_by_equilibration(&sys, &target, Grid::new(1.0)).unwrap();
    let h_minus = match &s.preparation {
        Preparation::Equilibrium { h_minus } => h_minus.clone(),
        other => panic!("unexpected preparation {}", other.name()),
    };
    // splitting T log 9, population ratio 9
    let e = h_minus.eigh().values;
    assert!(((e[1] - e[0]) - 9f64.ln() / beta).abs() < 1e-12);
    assert!((report.adiabatic_ratio.unwrap() - 9.0).abs() < 1e-9);
    assert!(report.all_clear());

    // relaxation under the H₋ generator stays O(η) close to the target
    let c = thermal(lam, beta);
    let a = diamond_asymptotic(&sys.coupling, &h_minus, &c).unwrap();
    let m = generator_matrix(&h_minus, &[(sys.coupling.clone(), a)]);
    let relaxed = unvectorize(&(expm(&(m * num_complex::Complex64::new(400.0, 0.0))) * vectorize(&target))).unwrap();
    let deviation = relaxed.max_distance(&target);
    assert!(deviation <= ETA, "steady state deviates by {deviation:.3e}");
}

#[test]
fn equilibration_rejects_singular_targets_and_zero_temperature() {
    let sys = thermal_tls(100.0, 1.0);
    let pure = Operator::projector(&pauli::excited());
    assert!(prepare_by_equilibration(&sys, &pure, Grid::new(1.0)).is_err());
    assert!(prepare_by_equilibration(&tls(100.0), &Operator::diagonal(&[0.5, 0.5]), Grid::new(1.0)).is_err());
}

#[test]
fn freezing_prepares_the_target_projector() {
    let sys = tls(100.0);
    let s = prepare_by_freezing(&sys, &pauli::plus(), None, Grid::new(1.0)).unwrap();
    assert!(s.rho_init.max_distance(&Operator::projector(&pauli::plus())) < 1e-15);
    match &s.preparation {
        Preparation::Equilibrium { h_minus } => {
            let expect = &Operator::projector(&pauli::plus()) * -1.0;
            assert!(h_minus.max_distance(&expect) < 1e-15);
        }
        other => panic!("unexpected preparation {}", other.name()),
    }
    assert!(prepare_by_freezing(&thermal_tls(100.0, 1.0), &pauli::plus(), None, Grid::new(1.0)).is_err());
    assert!(prepare_by_freezing(&sys, &pauli::plus(), Some(-1.0), Grid::new(1.0)).is_err());
}

#[test]
fn ground_state_target_under_the_system_hamiltonian_has_equilibrium_coefficients() {
    let sys = tls(100.0);
    let s = Scenario::new(
        "ground",
        Preparation::Equilibrium { h_minus: sys.h0.clone() },
        &sys,
        Operator::projector(&pauli::ground()),
        Grid::new(1.0),
    )
    .unwrap();
    let asym = diamond_asymptotic(&sys.coupling, &sys.h0, &zero_t(100.0)).unwrap();
    let track = s.coefficient_track(s.dt(), 1.0).unwrap();
    for t in [0.0, 0.005, 0.3, 1.0] {
        assert!(track.at(t).unwrap().max_distance(&asym) <= 1e-10 * asym.max_abs());
    }
}

#[test]
fn flipping_hamiltonian_oracles() {
    let tau = 0.7;
    let h = flipping_hamiltonian(&pauli::ground(), &pauli::excited(), tau).unwrap();
    assert!(h.max_distance(&(&pauli::sigma_x() * (std::f64::consts::FRAC_PI_2 / tau))) < 1e-15);
    let g = Operator::projector(&pauli::ground());
    let full = conjugate_oracle(&h, tau, &g);
    assert!((full.get(0, 0).re - 1.0).abs() < 1e-12);
    let half = conjugate_oracle(&h, tau / 2.0, &g);
    assert!((half.get(0, 0).re - 0.5).abs() < 1e-12);
    let twice = conjugate_oracle(&h, 2.0 * tau, &g);
    assert!(twice.max_distance(&g) < 1e-12);

    let bad = StateVector::from_real(&[1.0, 1.0]).unwrap();
    assert!(flipping_hamiltonian(&pauli::ground(), &bad, tau).is_err());
    assert!(flipping_hamiltonian(&pauli::ground(), &pauli::excited(), 0.0).is_err());
}

#[test]
fn swap_hamiltonian_oracles() {
    let tau = 1.3;
    let h = swap_hamiltonian(2, tau).unwrap();
    let a = density_from(&[0.3, -0.2, 0.5, 0.1, -0.4, 0.8, 0.2, 0.6], 2);
    let b = density_from(&[-0.7, 0.1, 0.2, 0.9, 0.3, -0.5, 0.4, 0.1], 2);
    let swapped = conjugate_oracle(&h, tau, &a.kron(&b));
    assert!(swapped.trace_distance(&b.kron(&a)) <= 1e-10);
    let same = conjugate_oracle(&h, tau, &a.kron(&a));
    assert!(same.max_distance(&a.kron(&a)) <= 1e-10);
    let back = conjugate_oracle(&h, 2.0 * tau, &a.kron(&b));
    assert!(back.max_distance(&a.kron(&b)) <= 1e-10);
    assert!(swap_hamiltonian(0, tau).is_err());
    assert!(h.is_hermitian(1e-15));
}

#[test]
fn flip_fidelity_degrades_with_longer_exposure() {
    let lam = 20.0;
    let sys = tls(lam);
    let h_minus = &pauli::sigma_z() * 0.5;
    let mut last = 1.0 + 1e-12;
    for tau in [5.0, 10.0, 20.0] {
        let s = prepare_by_flipping(&sys, &h_minus, &pauli::excited(), tau, Grid::new(tau)).unwrap();
        let traj = integrate_with(&s, no_halving()).unwrap();
        let f = traj.final_state().get(0, 0).re;
        assert!(f < last, "τ_P = {tau}: fidelity {f} not below {last}");
        last = f;
    }
}

#[test]
fn nonequilibrium_without_drive_is_equilibrium() {
    let sys = tls(100.0);
    let h_minus = &Operator::projector(&pauli::excited()) * -1.0;
    let rho = Operator::projector(&pauli::excited());
    let eq = Scenario::new("eq", Preparation::Equilibrium { h_minus: h_minus.clone() }, &sys, rho.clone(), Grid::new(1.0))
        .unwrap();
    let ne = Scenario::new("ne", Preparation::Nonequilibrium { h_minus, drive: None }, &sys, rho, Grid::new(1.0)).unwrap();
    let (a, b) = (eq.coefficient_track(eq.dt(), 1.0).unwrap(), ne.coefficient_track(ne.dt(), 1.0).unwrap());
    for t in [0.0, 0.002, 0.05, 1.0] {
        assert!(a.at(t).unwrap().max_distance(&b.at(t).unwrap()) < 1e-14);
    }
}

#[test]
fn validation_flags() {
    let sys = tls(100.0);
    let fast: Arc<dyn SwitchOn> = Arc::new(ExponentialSwitch::new(0.001).unwrap());
    let slow: Arc<dyn SwitchOn> = Arc::new(ExponentialSwitch::new(0.5).unwrap());
    let r = validate(&Scenario::switched("fast", &sys, fast, excited(), Grid::new(1.0)).unwrap());
    assert!(r.switch_flag && !r.all_clear());
    let r = validate(&Scenario::switched("slow", &sys, slow, excited(), Grid::new(1.0)).unwrap());
    assert!(r.all_clear());
    let r = validate(&Scenario::factorized("wide", &tls(5.0), excited(), Grid::new(1.0)).unwrap());
    assert!(r.system_frequency_flag);
    let h_minus = &pauli::sigma_z() * 0.5;
    let r = validate(&prepare_by_flipping(&sys, &h_minus, &pauli::excited(), 0.001, Grid::new(1.0)).unwrap());
    assert!(r.drive_flag);
}

#[test]
fn constructors_reject_bad_inputs() {
    let sys = tls(100.0);
    assert!(Scenario::factorized("x", &sys, Operator::diagonal(&[0.6, 0.6]), Grid::new(1.0)).is_err());
    assert!(Scenario::factorized("x", &sys, Operator::identity(3).scale_real(1.0 / 3.0), Grid::new(1.0)).is_err());
    assert!(Scenario::factorized("x", &sys, excited(), Grid::new(-1.0)).is_err());
    let k = Operator::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
    assert!(System::new(k, pauli::sigma_x(), zero_t_bath(100.0)).is_err());
}
