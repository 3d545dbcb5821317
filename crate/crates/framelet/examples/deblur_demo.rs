//! Deconvolves a Gaussian-blurred phantom observed at every pixel. The blur
//! spectrum is strictly positive but small at high frequencies, so the data
//! weight must be large for the data term to pin down the solution; the
//! default weight is overridden accordingly.

use framelet::bounds::empirical_error;
use framelet::framelets::bspline_bank;
use framelet::harness::make_phantom;
use framelet::operators::{BlurKernel, Measurement, MeasurementOp, SampleSet};
use framelet::solver::{solve, SolverConfig};
use framelet::transform::LambdaWeights;

fn main() -> framelet::Result<()> {
    let n = 64;
    let truth = make_phantom(n, 1.0)?;
    let op = MeasurementOp::GaussianBlur(BlurKernel::new(1.0, 9)?);
    let consts = op.constants()?;
    println!("operator: {}", op.describe());
    println!("spectral floor: {:.4e}, sup-norm: {:.4}", consts.sigma_min, consts.inf_norm);

    let samples = SampleSet::full(n);
    let meas = Measurement::synthesize(&op, &truth, &samples, 0.0, 1)?;
    let blurred = meas.zero_filled()?;
    println!("blurred error vs truth:  {:.4e}", empirical_error(&blurred, &truth)?);

    let bank = bspline_bank(2)?;
    let weights = LambdaWeights::schedule(n, 2, 1, 0.0)?;
    let mut cfg = SolverConfig::default_for(1.0);
    cfg.mu = 1e6; // heavy data weight: the blur is invertible, trust the data
    cfg.max_inner_cg = 2000;
    let result = solve(&op, &meas, &bank, &weights, &cfg)?;
    println!(
        "restored error vs truth: {:.4e} ({} outer iterations)",
        empirical_error(&result.u_star, &truth)?,
        result.iterations
    );

    blurred.write_pgm("deblur_observed.pgm")?;
    result.u_star.write_pgm("deblur_restored.pgm")?;
    println!("wrote deblur_observed.pgm, deblur_restored.pgm");
    Ok(())
}
