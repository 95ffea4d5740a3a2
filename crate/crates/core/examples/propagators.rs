// Unitary propagators on operators, piecewise-constant Hamiltonian
// schedules and the mixing map M(t) = G₊(t,0) G₋(0,t).

use std::f64::consts::PI;

use tclprep::operator::{pauli, Operator};
use tclprep::propagator::{conjugate_propagate, mixing_operator, schedule_propagate, HamiltonianSchedule};

pub fn run_example() -> tclprep::Result<()> {
    let h = &pauli::sigma_z() * 0.5;
    let flipped = conjugate_propagate(&h, PI, &pauli::sigma_x())?;
    println!("e^(-iHπ) σx e^(iHπ) with H = σz/2:\n{}", flipped.matrix());

    // H₋ = 0, then σz/2 on [0, 1), σx/2 on [1, 2.5), σz on [2.5, ∞)
    let schedule = HamiltonianSchedule::new(
        &Operator::zeros(2),
        &[
            (0.0, 1.0, h.clone()),
            (1.0, 2.5, &pauli::sigma_x() * 0.5),
            (2.5, f64::INFINITY, pauli::sigma_z()),
        ],
    )?;
    let x = pauli::sigma_y();
    let direct = schedule_propagate(&schedule, 3.0, 0.2, &x)?;
    let composed = schedule_propagate(&schedule, 3.0, 1.7, &schedule_propagate(&schedule, 1.7, 0.2, &x)?)?;
    println!("group property G(3,1.7)G(1.7,0.2) vs G(3,0.2): {:.2e}", direct.max_distance(&composed));
    println!(
        "spectrum preserved: trace {:.2e}, hermiticity residual {:.2e}",
        direct.trace().norm(),
        direct.hermiticity_residual()
    );

    let quench = HamiltonianSchedule::quench(&Operator::zeros(2), &h)?;
    let m = mixing_operator(&quench, PI, &pauli::sigma_x())?;
    println!("M(π){{σx}} for H₋ = 0, H₊ = σz/2:\n{}", m.matrix());
    Ok(())
}

#[allow(dead_code)]
fn main() -> tclprep::Result<()> {
    run_example()
}
