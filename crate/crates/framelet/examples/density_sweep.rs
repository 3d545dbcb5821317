//! Runs a small seeded Monte Carlo sweep: restores the phantom at one grid
//! size over several sample densities, then calibrates the closed-form error
//! bound on the hardest cell and checks it covers every other cell. Uses the
//! same experiment harness as the `sweep` subcommand.

use std::path::PathBuf;

use framelet::harness::{run_sweep, ExperimentConfig, NoiseMode};

fn main() -> framelet::Result<()> {
    let cfg = ExperimentConfig {
        grid_sizes: vec![64],
        densities: vec![0.3, 0.5, 0.7, 0.9],
        realizations: 10,
        eta: 0.0,
        noise_mode: NoiseMode::Fixed,
        output_dir: PathBuf::from("density_sweep_out"),
        ..ExperimentConfig::default()
    };
    cfg.validate()?;
    let outcome = run_sweep(&cfg)?;

    println!("{} restorations finished", outcome.records.len());
    println!(
        "{:>5} {:>6} {:>16} {:>18} {:>9}",
        "N", "rho", "max emp error", "calibrated bound", "covered"
    );
    for row in &outcome.summary {
        println!(
            "{:>5} {:>6.2} {:>16.6e} {:>18.6e} {:>9}",
            row.n,
            row.rho,
            row.max_emp_error,
            row.calibrated_bound,
            row.max_emp_error <= row.calibrated_bound * (1.0 + 1e-12)
        );
    }
    println!();
    println!("the lowest-density cell anchors the calibration, so its bound");
    println!("matches its measured maximum exactly; denser cells sit below it");
    Ok(())
}
