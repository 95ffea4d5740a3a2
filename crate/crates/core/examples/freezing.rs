// An excited two-level system: factorized start against preparation by
// freezing (the bath relaxes the system into the ground state |e⟩ of
// H₋ = −(Λ/100)|e⟩⟨e| before H₀ = (Ω/2)σz takes over at t = 0).

use tclprep::bath::{BathSpec, SpectralDensity};
use tclprep::evolve::integrate;
use tclprep::operator::{pauli, Operator};
use tclprep::scenario::{prepare_by_freezing, Grid, Scenario, System};

pub fn run_example() -> tclprep::Result<()> {
    let lam = 100.0;
    let bath = BathSpec::zero_temperature(SpectralDensity::ohmic(0.05, lam)?);
    let system = System::new(&pauli::sigma_z() * 0.5, pauli::sigma_x(), bath)?;
    let grid = Grid::new(3.0).with_decimate(50);

    let unprepared = integrate(&Scenario::factorized("unprepared", &system, Operator::projector(&pauli::excited()), grid)?)?;
    let prepared = integrate(&prepare_by_freezing(&system, &pauli::excited(), None, grid)?)?;
    let gamma_inf = prepared.gamma_inf.unwrap_or(f64::NAN);

    println!("{:>10} {:>12} {:>12} {:>10} {:>10}", "t", "Γ unprep", "Γ prep", "p_e unprep", "p_e prep");
    let marks = [0.0, 0.005, 0.01, 0.02, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 3.0];
    for (i, t) in unprepared.times.iter().enumerate() {
        if !marks.iter().any(|m| (m - t).abs() < 1e-9) {
            continue;
        }
        let (u, p) = (unprepared.observables[i], prepared.observables[i]);
        println!(
            "{t:>10.4} {:>12.5} {:>12.5} {:>10.6} {:>10.6}",
            u.gamma.unwrap_or(f64::NAN),
            p.gamma.unwrap_or(f64::NAN),
            u.p_e,
            p.p_e
        );
    }
    let pu = unprepared.jolt_metrics(lam)?;
    let pp = prepared.jolt_metrics(lam)?;
    println!("Γ(∞) = {gamma_inf:.5}; peak unprepared {:.4}, prepared {:.4}, ratio {:.4}", pu.peak, pp.peak, pp.peak / pu.peak);
    Ok(())
}

#[allow(dead_code)]
fn main() -> tclprep::Result<()> {
    run_example()
}
