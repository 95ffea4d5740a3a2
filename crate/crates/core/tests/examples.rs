//! Every example runs to completion.

mod bath_correlation {
    include!("../examples/bath_correlation.rs");
}

#[test]
fn bath_correlation_runs() {
    bath_correlation::run_example().unwrap();
}

mod propagators {
    include!("../examples/propagators.rs");
}

#[test]
fn propagators_runs() {
    propagators::run_example().unwrap();
}

mod coefficients {
    include!("../examples/coefficients.rs");
}

#[test]
fn coefficients_runs() {
    coefficients::run_example().unwrap();
}

mod generator {
    include!("../examples/generator.rs");
}

#[test]
fn generator_runs() {
    generator::run_example().unwrap();
}

mod switch_on {
    include!("../examples/switch_on.rs");
}

#[test]
fn switch_on_runs() {
    switch_on::run_example().unwrap();
}

mod freezing {
    include!("../examples/freezing.rs");
}

#[test]
fn freezing_runs() {
    freezing::run_example().unwrap();
}

mod preparations {
    include!("../examples/preparations.rs");
}

#[test]
fn preparations_runs() {
    preparations::run_example().unwrap();
}

mod config_run {
    include!("../examples/config_run.rs");
}

#[test]
fn config_run_runs() {
    config_run::run_example().unwrap();
}
