// Jolt of the decay rate after a sudden coupling, and its suppression by
// exponential switch-on with τs = 1, 2, 4, 8, 16 / Λ (Λ = 100Ω).

use std::sync::Arc;

use tclprep::bath::{BathSpec, SpectralDensity};
use tclprep::coefficients::ExponentialSwitch;
use tclprep::evolve::integrate;
use tclprep::operator::{pauli, Operator};
use tclprep::scenario::{Grid, Scenario, System};

pub fn run_example() -> tclprep::Result<()> {
    let lam = 100.0;
    let bath = BathSpec::zero_temperature(SpectralDensity::ohmic(0.05, lam)?);
    let system = System::new(&pauli::sigma_z() * 0.5, pauli::sigma_x(), bath)?;
    let excited = Operator::projector(&pauli::excited());
    let grid = Grid::new(1.0).with_decimate(20);

    let mut scenarios = vec![Scenario::factorized("sudden", &system, excited.clone(), grid)?];
    for k in [1.0, 2.0, 4.0, 8.0, 16.0] {
        scenarios.push(Scenario::switched(
            format!("tau_s={k}/Λ"),
            &system,
            Arc::new(ExponentialSwitch::new(k / lam)?),
            excited.clone(),
            grid,
        )?);
    }
    println!("{:>14} {:>10} {:>10} {:>10} {:>10}", "scenario", "peak Γ", "Λ·t_peak", "t_settle", "Γ(∞)");
    for s in &scenarios {
        let traj = integrate(s)?;
        let m = traj.jolt_metrics(lam)?;
        println!(
            "{:>14} {:>10.4} {:>10.2} {:>10.3} {:>10.4}",
            s.name,
            m.peak,
            m.peak_time * lam,
            m.settle_time,
            traj.gamma_inf.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> tclprep::Result<()> {
    run_example()
}
