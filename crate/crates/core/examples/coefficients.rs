// The four coefficient variants (A◇L)(t) for a two-level system with
// H = (Ω/2)σz, L = σx and a zero-temperature ohmic bath at Λ = 100Ω.

use std::sync::Arc;

use tclprep::bath::{BathSpec, CorrelationFunction, SpectralDensity};
use tclprep::coefficients::{DiamondCoefficient, ExponentialSwitch, Variant};
use tclprep::operator::{pauli, Operator};
use tclprep::propagator::HamiltonianSchedule;

pub fn run_example() -> tclprep::Result<()> {
    let lam = 100.0;
    let corr = CorrelationFunction::new(BathSpec::zero_temperature(SpectralDensity::ohmic(0.05, lam)?));
    let h0 = &pauli::sigma_z() * 0.5;
    let h_minus = &Operator::projector(&pauli::excited()) * -(lam / 100.0);
    let l = pauli::sigma_x();

    let horizon = 2.0;
    let finite = DiamondCoefficient::new(Variant::Finite, l.clone(), HamiltonianSchedule::constant(&h0)?, corr)?
        .track(horizon)?;
    let switched = DiamondCoefficient::new(
        Variant::Switched(Arc::new(ExponentialSwitch::new(16.0 / lam)?)),
        l.clone(),
        HamiltonianSchedule::constant(&h0)?,
        corr,
    )?
    .track(horizon)?;
    let asymptotic = DiamondCoefficient::new(Variant::Asymptotic, l.clone(), HamiltonianSchedule::constant(&h0)?, corr)?
        .track(horizon)?;
    let prepared = DiamondCoefficient::new(Variant::Prepared, l, HamiltonianSchedule::quench(&h_minus, &h0)?, corr)?
        .track(horizon)?;

    let a_inf = asymptotic.at(0.0)?;
    println!("(A◇L)(∞) for H₀:\n{}", a_inf.matrix());
    println!("{:>8} {:>14} {:>14} {:>14}", "Λt", "finite", "switched", "prepared");
    println!("{:>8} {:>14} {:>14} {:>14}", "", "‖A−A∞‖/‖A∞‖", "", "");
    for lt in [0.0, 0.5, 1.0, 2.0, 5.0, 20.0, 100.0, 200.0] {
        let t = lt / lam;
        let rel = |a: Operator| (a - a_inf.clone()).frobenius_norm() / a_inf.frobenius_norm();
        println!(
            "{lt:>8} {:>14.4e} {:>14.4e} {:>14.4e}",
            rel(finite.at(t)?),
            rel(switched.at(t)?),
            rel(prepared.at(t)?)
        );
    }
    println!("largest kernel quadrature error: {:.2e}", finite.error_estimate());
    Ok(())
}

#[allow(dead_code)]
fn main() -> tclprep::Result<()> {
    run_example()
}
