// Drive a run from a config file, exactly as the command line does, and
// read the written CSVs back.

use std::path::Path;

use tclprep::config::{run, RunOptions};
use tclprep::io::read_trajectory;

pub fn run_example() -> tclprep::Result<()> {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/fig2.cfg");
    let out = std::env::temp_dir().join(format!("tclprep-config-run-{}", std::process::id()));
    let report = run(
        &config,
        &RunOptions {
            output: Some(out.clone()),
            overrides: vec!["grid.t_max_times_omega=1.0".into()],
            ..Default::default()
        },
    )?;
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    let prepared = out.join("fig2_prepared.csv");
    let rows = read_trajectory(std::fs::File::open(&prepared).map_err(|e| tclprep::Error::Io { path: prepared.clone(), source: e })?)?;
    let last = rows.last().expect("non-empty");
    println!("prepared run: {} rows, Γ(t_max) = {:.6}", rows.len(), last.gamma);
    std::fs::remove_dir_all(&out).ok();
    Ok(())
}

#[allow(dead_code)]
fn main() -> tclprep::Result<()> {
    run_example()
}
