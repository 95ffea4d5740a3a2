// The master-equation generator as an action and as a dense matrix:
// trace preservation, spectrum of the asymptotic generator and the decay
// rate Γ(t) = −Tr(P_e 𝓛(t){P_e}).

use tclprep::bath::{BathSpec, CorrelationFunction, SpectralDensity};
use tclprep::coefficients::diamond_asymptotic;
use tclprep::liouvillian::{decay_rate_from, eigenvalues, generator_matrix, trace_residual};
use tclprep::operator::pauli;
use tclprep::scenario::{Grid, Scenario, System};

pub fn run_example() -> tclprep::Result<()> {
    let bath = BathSpec::zero_temperature(SpectralDensity::ohmic(0.05, 100.0)?);
    let h0 = &pauli::sigma_z() * 0.5;
    let l = pauli::sigma_x();
    let a_inf = diamond_asymptotic(&l, &h0, &CorrelationFunction::new(bath))?;
    let channels = [(l.clone(), a_inf)];
    let m = generator_matrix(&h0, &channels);
    println!("asymptotic generator: left null residual {:.2e}", trace_residual(&m));
    for ev in eigenvalues(&m) {
        println!("  eigenvalue {:+.6e} {:+.6e}i", ev.re, ev.im);
    }
    println!("Γ(∞) = {:.6}, 2πηΩe^(-Ω/Λ) = {:.6}", decay_rate_from(&h0, &channels)?, 2.0 * std::f64::consts::PI * 0.05 * (-0.01f64).exp());

    let system = System::new(h0, l, bath)?;
    let s = Scenario::factorized("factorized", &system, tclprep::operator::Operator::projector(&pauli::excited()), Grid::new(0.5))?;
    let gen = s.liouvillian(s.dt())?;
    println!("{:>8} {:>12}", "Λt", "Γ(t)");
    for lt in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0] {
        println!("{lt:>8} {:>12.6}", gen.decay_rate(lt / 100.0)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> tclprep::Result<()> {
    run_example()
}
