//! Measures how far the sampling/interpolation pair sits inside its
//! stability bound: the ratio of captured energy to signal energy for
//! analysis, and of synthesized energy to coefficient energy. Both stay at
//! or below one for every spline order and grid level; a unit impulse at
//! order 2 lands exactly at 1/9.

use framelet::continuum::{analysis_bessel_ratio, synthesis_bessel_ratio, BsplineScaler, PeriodicFunction};
use framelet::grid::ImageGrid;

fn main() -> framelet::Result<()> {
    println!("{:<7} {:<6} {:>16} {:>16}", "order", "level", "analysis ratio", "synthesis ratio");
    let f = PeriodicFunction::smooth_bump(1.0);
    for order in [1usize, 2, 4] {
        for level in [3u32, 4, 5] {
            let phi = BsplineScaler::new(order, level)?;
            let a = analysis_bessel_ratio(&f, &phi, 6, 64)?;
            let n = phi.grid_n();
            let mut data = vec![0.0; n * n];
            for (i, v) in data.iter_mut().enumerate() {
                *v = ((i * 2654435761) % 97) as f64 / 97.0 - 0.5;
            }
            let v = ImageGrid::new(n, 1.0, data)?;
            let s = synthesis_bessel_ratio(&v, &phi, 6)?;
            println!("{order:<7} {level:<6} {a:>16.6} {s:>16.6}");
            assert!(a <= 1.0 + 1e-10 && s <= 1.0 + 1e-10);
        }
    }

    let phi = BsplineScaler::new(2, 4)?;
    let n = phi.grid_n();
    let mut delta = vec![0.0; n * n];
    delta[(n / 2) * n + n / 2] = 1.0;
    let ratio = synthesis_bessel_ratio(&ImageGrid::new(n, 1.0, delta)?, &phi, 6)?;
    println!();
    println!("unit impulse, order 2: synthesis ratio = {ratio:.12} (exact value 1/9)");
    assert!((ratio - 1.0 / 9.0).abs() < 1e-12);
    Ok(())
}
