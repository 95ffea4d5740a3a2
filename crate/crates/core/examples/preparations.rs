// The preparation recipes: decoherence, equilibration, flipping and
// swapping, with their validity reports.

use tclprep::bath::{BathSpec, SpectralDensity};
use tclprep::evolve::integrate;
use tclprep::operator::{pauli, Operator};
use tclprep::propagator::conjugate_propagate;
use tclprep::scenario::{
    flipping_hamiltonian, prepare_by_decoherence, prepare_by_equilibration, prepare_by_flipping, swap_hamiltonian,
    validate, Grid, System,
};

pub fn run_example() -> tclprep::Result<()> {
    let lam = 100.0;
    let cold = BathSpec::zero_temperature(SpectralDensity::ohmic(0.05, lam)?);
    let warm = BathSpec::thermal(SpectralDensity::ohmic(0.05, lam)?, 1.0)?;
    let h0 = &pauli::sigma_z() * 0.5;

    // decoherence: L = σz, an incoherent mixture stays put
    let dephasing = System::new(h0.clone(), pauli::sigma_z(), cold)?;
    let s = prepare_by_decoherence(&dephasing, &Operator::diagonal(&[0.3, 0.7]), Grid::new(1.0).with_decimate(100))?;
    let traj = integrate(&s)?;
    println!("decoherence: p_e(0) = {:.10}, p_e(1) = {:.10}", traj.observables[0].p_e, traj.observables.last().unwrap().p_e);

    // equilibration at β = 1/Ω
    let thermal = System::new(h0.clone(), pauli::sigma_x(), warm)?;
    let (s, report) = prepare_by_equilibration(&thermal, &Operator::diagonal(&[0.1, 0.9]), Grid::new(1.0))?;
    println!("equilibration: {s}; population ratio {:.3}, warnings {:?}", report.adiabatic_ratio.unwrap_or(f64::NAN), report.warnings);

    // flipping: closed-system check, then a coupled run
    let tau = 10.0;
    let hp = flipping_hamiltonian(&pauli::ground(), &pauli::excited(), tau)?;
    let flipped = conjugate_propagate(&hp, tau, &Operator::projector(&pauli::ground()))?;
    println!("flip at zero coupling: excited population {:.12}", flipped.get(0, 0).re);
    let flip = prepare_by_flipping(&System::new(h0.clone(), pauli::sigma_x(), cold)?, &h0, &pauli::excited(), tau, Grid::new(tau).with_decimate(100))?;
    let traj = integrate(&flip)?;
    println!("flip with coupling: excited population at τ_P = {:.6}; report {:?}", traj.observables.last().unwrap().p_e, validate(&flip).warnings);

    // swapping
    let hs = swap_hamiltonian(2, tau)?;
    let a = Operator::diagonal(&[0.25, 0.75]);
    let b = Operator::projector(&pauli::plus());
    let out = conjugate_propagate(&hs, tau, &a.kron(&b))?;
    println!("swap at zero coupling: distance to b⊗a {:.2e}", out.trace_distance(&b.kron(&a)));
    Ok(())
}

#[allow(dead_code)]
fn main() -> tclprep::Result<()> {
    run_example()
}
