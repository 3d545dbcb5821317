//! Exercises every on-disk format in one pipeline: phantom to PGM and raw
//! images, coefficients to the binary container, samples and measurements to
//! CSV, and a filter bank to its text form — reading each back and checking
//! the round trip.

use framelet::framelets::{bspline_bank, FilterBank};
use framelet::grid::ImageGrid;
use framelet::harness::make_phantom;
use framelet::operators::{Measurement, MeasurementOp, SampleSet};
use framelet::transform::{analyze, FrameCoefficients};

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn main() -> framelet::Result<()> {
    let dir = std::env::temp_dir().join("framelet_roundtrip");
    std::fs::create_dir_all(&dir)?;
    let n = 32;
    let img = make_phantom(n, 1.0)?;

    // raw image: exact
    let raw = dir.join("image.raw");
    img.write_raw(&raw)?;
    let back = ImageGrid::read_raw(&raw)?;
    println!("raw image round trip:   max diff {:.3e}", max_abs_diff(img.data(), back.data()));

    // pgm image: quantized to 8 bits
    let pgm = dir.join("image.pgm");
    img.write_pgm(&pgm)?;
    let back = ImageGrid::read_pgm(&pgm, 1.0)?;
    println!("pgm image round trip:   max diff {:.3e} (8-bit quantization)", max_abs_diff(img.data(), back.data()));

    // coefficient container: exact
    let bank = bspline_bank(2)?;
    let coeffs = analyze(&img, &bank, 2)?;
    let cpath = dir.join("coeffs.bin");
    coeffs.write_binary(&cpath)?;
    let cback = FrameCoefficients::read_binary(&cpath)?;
    let mut worst = 0.0f64;
    for key in coeffs.keys() {
        worst = worst.max(max_abs_diff(coeffs.plane(key), cback.plane(key)));
    }
    println!("coefficient container:  max diff {worst:.3e} over {} planes", coeffs.plane_count());

    // sample set + measurement CSVs: exact (full-precision decimal floats)
    let samples = SampleSet::with_density(n, 0.4, 5)?;
    let spath = dir.join("samples.csv");
    samples.write_csv(&spath)?;
    let sback = SampleSet::read_csv(&spath, n)?;
    println!("sample set csv:         indices equal: {}", samples.indices() == sback.indices());

    let meas = Measurement::synthesize(&MeasurementOp::Identity, &img, &samples, 0.05, 5)?;
    let mpath = dir.join("measurement.csv");
    meas.write_csv(&mpath)?;
    let mback = Measurement::read_csv(&mpath, n, 1.0, 0.05)?;
    println!("measurement csv:        max diff {:.3e}", max_abs_diff(meas.values(), mback.values()));

    // filter bank text form: exact
    let text = bank.to_text();
    let bback = FilterBank::from_text(&text)?;
    println!("filter bank text:       banks equal: {}", bank == bback);

    println!("files under {}", dir.display());
    Ok(())
}
