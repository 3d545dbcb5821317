//! Tabulates the closed-form restoration error bound across sample densities
//! and problem sizes, together with the critical accuracy where the two
//! failure-probability pressures balance and the failure probability at that
//! point. The bound scales like the square root of (log size / samples).

use framelet::bounds::{
    critical_accuracy, failure_probability, restoration_error_bound, tv_comparison_constant,
    BoundParams,
};

fn main() -> framelet::Result<()> {
    let base = BoundParams {
        box_m: 1.0,
        beta: 0.0,
        a: 1.0,
        c_w: tv_comparison_constant(2)?,
        c_f: 1.0,
        sigma_min: 1.0,
        inf_norm: 1.0,
        rho: 0.5,
        eta: 0.01,
        omega: 64.0 * 64.0,
    };
    println!(
        "{:>6} {:>8} {:>8} {:>13} {:>13} {:>13} {:>13}",
        "N", "rho", "eta", "sampling", "noise", "total", "eps*"
    );
    for n in [32usize, 64, 128, 256] {
        let omega = (n * n) as f64;
        for rho in [0.3, 0.5, 0.7, 1.0] {
            let p = base.with_omega(omega).with_rho(rho).validated()?;
            let bound = restoration_error_bound(&p)?;
            let m = p.sample_count();
            let eps = critical_accuracy(&p, m)?;
            println!(
                "{:>6} {:>8.2} {:>8.3} {:>13.4e} {:>13.4e} {:>13.4e} {:>13.4e}",
                n, rho, p.eta, bound.sampling_term, bound.noise_term, bound.total, eps
            );
        }
    }

    let p = base.validated()?;
    let m = p.sample_count();
    let eps = critical_accuracy(&p, m)?;
    println!();
    println!("at N=64, rho=0.5: failure probability at eps* = {:.4e}", failure_probability(&p, m, eps)?);
    println!("(equals 1/|Omega| = {:.4e} by construction)", 1.0 / p.omega);
    Ok(())
}
