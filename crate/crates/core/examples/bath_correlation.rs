// Bath correlation function of a zero-temperature and a thermal ohmic bath:
// α(t), its Fourier transform α̃(ω), the one-sided transform α̂(ω) by two
// independent routes, and the KMS check.

use tclprep::bath::{BathSpec, CorrelationFunction, Evaluation, HalfFourierMethod, SpectralDensity};

pub fn run_example() -> tclprep::Result<()> {
    let density = SpectralDensity::ohmic(0.05, 100.0)?;
    let cold = CorrelationFunction::new(BathSpec::zero_temperature(density));
    let warm = CorrelationFunction::new(BathSpec::thermal(density, 1.0)?);
    let warm_quad = warm.with_evaluation(Evaluation::Quadrature);

    println!("{:>10} {:>24} {:>24} {:>12}", "Λt", "α(t) zero T", "α(t) β=1", "quad/closed");
    for lt in [0.0, 0.5, 1.0, 3.0, 10.0, 100.0] {
        let t = lt / 100.0;
        let a0 = cold.alpha(t)?;
        let a1 = warm.alpha(t)?;
        let q = warm_quad.alpha(t)?;
        println!(
            "{lt:>10} {:>11.4e}{:+11.4e}i {:>11.4e}{:+11.4e}i {:>12.3e}",
            a0.re,
            a0.im,
            a1.re,
            a1.im,
            (q - a1).norm() / a1.norm()
        );
    }

    println!("\n{:>6} {:>14} {:>14} {:>26} {:>12}", "ω", "α̃ zero T", "α̃ β=1", "α̂(ω) β=1", "routes Δ");
    for w in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let spectral = warm.alpha_half_fourier_with(w, HalfFourierMethod::Spectral)?;
        let damped = warm.alpha_half_fourier_with(w, HalfFourierMethod::DampedQuadrature)?;
        println!(
            "{w:>6} {:>14.6e} {:>14.6e} {:>12.6e}{:+12.6e}i {:>12.3e}",
            cold.alpha_tilde(w),
            warm.alpha_tilde(w),
            spectral.re,
            spectral.im,
            (spectral - damped).norm() / spectral.norm()
        );
    }

    let grid = [-5.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 5.0];
    let report = warm.kms_check(&grid);
    println!(
        "\nKMS at β = 1: max relative violation {:.2e} (at ω = {:?}), passes: {}",
        report.max_relative_violation,
        report.worst_frequency,
        report.passes()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> tclprep::Result<()> {
    run_example()
}
