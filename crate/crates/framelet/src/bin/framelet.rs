//! Command-line front end: forward/inverse transforms on image files,
//! single restorations, bound tables, Monte Carlo sweeps, and a self-check
//! suite. All heavy lifting lives in the library; this binary only parses
//! arguments and shuttles files.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use framelet::bounds::{
    accuracy_equation_gap, check_tv_comparison, covering_log_bound, critical_accuracy,
    discrete_tv, empirical_error, failure_probability, restoration_error_bound,
    tv_comparison_constant, BoundParams,
};
use framelet::continuum::{analysis_bessel_ratio, BsplineScaler, PeriodicFunction};
use framelet::framelets::{bspline_bank, verify_uep};
use framelet::grid::ImageGrid;
use framelet::harness::{make_phantom, run_to_files, ExperimentConfig};
use framelet::operators::{
    sampler_uniformity_statistic, BlurKernel, Measurement, MeasurementOp, SampleSet, WaveletOp,
};
use framelet::solver::{solve, SolverConfig};
use framelet::transform::{analyze, synthesize, FrameCoefficients, LambdaWeights};

#[derive(Parser)]
#[command(
    name = "framelet",
    about = "Wavelet-frame image restoration and error-bound toolkit",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze an image into frame coefficients, or synthesize it back.
    Transform(TransformArgs),
    /// Restore one image from degraded, subsampled measurements.
    Restore(RestoreArgs),
    /// Print the closed-form constants and error bounds for one parameter set.
    Bounds(BoundsArgs),
    /// Run a seeded Monte Carlo sweep over grid sizes and densities.
    Sweep(SweepArgs),
    /// Run the invariant self-checks and exit non-zero on any failure.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Analyze,
    Synthesize,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(value_enum)]
    direction: Direction,
    /// Input file: an image (.pgm or .raw) when analyzing, a coefficient
    /// container when synthesizing.
    #[arg(long)]
    input: PathBuf,
    /// Output file: coefficient container, or image (.pgm/.raw).
    #[arg(long)]
    output: PathBuf,
    /// Filter bank order (1 = Haar-like, 2 = piecewise linear, ...).
    #[arg(long, default_value_t = 1)]
    order: usize,
    /// Decomposition levels.
    #[arg(long, default_value_t = 1)]
    levels: usize,
    /// Box bound used when reading PGM images.
    #[arg(long, default_value_t = 1.0)]
    box_m: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum OperatorKind {
    Identity,
    Blur,
    Wavelet,
}

#[derive(Args)]
struct RestoreArgs {
    /// Ground-truth input image (.pgm or .raw); measurements are synthesized
    /// from it. Defaults to the built-in phantom when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Restored output image (.pgm or .raw).
    #[arg(long)]
    output: PathBuf,
    /// Grid side used with the built-in phantom.
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, value_enum, default_value_t = OperatorKind::Identity)]
    operator: OperatorKind,
    /// Gaussian blur width (with --operator blur).
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Blur window side (odd, with --operator blur).
    #[arg(long, default_value_t = 9)]
    window: usize,
    /// Wavelet decomposition levels (with --operator wavelet).
    #[arg(long, default_value_t = 2)]
    op_levels: usize,
    /// Sample density in (0, 1].
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    /// Noise level.
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    order: usize,
    #[arg(long, default_value_t = 1)]
    levels: usize,
    /// Weight decay exponent.
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// Box bound used when reading PGM images / making the phantom.
    #[arg(long, default_value_t = 1.0)]
    box_m: f64,
    /// Data-term weight override.
    #[arg(long)]
    mu: Option<f64>,
    /// Outer iteration cap override.
    #[arg(long)]
    max_outer: Option<usize>,
    /// Write the per-iteration trace CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the sampled measurement CSV here.
    #[arg(long)]
    measurement: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Text,
    Csv,
}

#[derive(Args)]
struct BoundsArgs {
    /// Box bound on pixel values.
    #[arg(long, default_value_t = 1.0)]
    box_m: f64,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// Covering-radius exponent (radii down to omega^(-a) admissible).
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Filter bank order; sets the TV-comparison constant.
    #[arg(long, default_value_t = 2)]
    order: usize,
    /// Coefficient-norm constant.
    #[arg(long, default_value_t = 1.0)]
    c_f: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma_min: f64,
    #[arg(long, default_value_t = 1.0)]
    inf_norm: f64,
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    /// Pixel count |Omega| = N^2.
    #[arg(long, default_value_t = 4096.0)]
    omega: f64,
    /// Covering radius for the covering-number bound.
    #[arg(long, default_value_t = 1.0)]
    r_cov: f64,
    #[arg(long, value_enum, default_value_t = TableFormat::Text)]
    format: TableFormat,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment config (TOML). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory override.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Grid sizes override, e.g. "32,64".
    #[arg(long)]
    grid_sizes: Option<String>,
    /// Densities override, e.g. "0.3,0.5,0.7".
    #[arg(long)]
    densities: Option<String>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    base_seed: Option<u64>,
    /// Print the default config as TOML and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run the reduced (faster) check set.
    #[arg(long)]
    quick: bool,
}

fn read_image(path: &PathBuf, box_m: f64) -> anyhow::Result<ImageGrid> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let img = match ext {
        "pgm" => ImageGrid::read_pgm(path, box_m)?,
        _ => ImageGrid::read_raw(path)?,
    };
    Ok(img)
}

fn write_image(path: &PathBuf, img: &ImageGrid) -> anyhow::Result<()> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    match ext {
        "pgm" => img.write_pgm(path)?,
        _ => img.write_raw(path)?,
    }
    Ok(())
}

fn cmd_transform(a: TransformArgs) -> anyhow::Result<()> {
    let bank = bspline_bank(a.order)?;
    match a.direction {
        Direction::Analyze => {
            let img = read_image(&a.input, a.box_m).context("reading input image")?;
            let coeffs = analyze(&img, &bank, a.levels)?;
            coeffs.write_binary(&a.output)?;
            println!(
                "analyzed {}x{} image into {} planes -> {}",
                img.n(),
                img.n(),
                coeffs.plane_count(),
                a.output.display()
            );
        }
        Direction::Synthesize => {
            let coeffs = FrameCoefficients::read_binary(&a.input).context("reading coefficients")?;
            let img = synthesize(&coeffs, &bank)?;
            write_image(&a.output, &img)?;
            println!("synthesized {}x{} image -> {}", img.n(), img.n(), a.output.display());
        }
    }
    Ok(())
}

fn cmd_restore(a: RestoreArgs) -> anyhow::Result<()> {
    let truth = match &a.input {
        Some(path) => read_image(path, a.box_m).context("reading input image")?,
        None => make_phantom(a.n, a.box_m)?,
    };
    let n = truth.n();
    let op = match a.operator {
        OperatorKind::Identity => MeasurementOp::Identity,
        OperatorKind::Blur => MeasurementOp::GaussianBlur(BlurKernel::new(a.sigma, a.window)?),
        OperatorKind::Wavelet => MeasurementOp::OrthonormalWavelet(WaveletOp::haar(a.op_levels)?),
    };
    let samples = SampleSet::with_density(n, a.rho, a.seed)?;
    let meas = Measurement::synthesize(&op, &truth, &samples, a.eta, a.seed)?;
    if let Some(path) = &a.measurement {
        meas.write_csv(path)?;
    }
    let bank = bspline_bank(a.order)?;
    let weights = LambdaWeights::schedule(n, a.order, a.levels, a.beta)?;
    let mut cfg = SolverConfig::default_for(truth.range_m());
    if let Some(mu) = a.mu {
        cfg.mu = mu;
    }
    if let Some(mo) = a.max_outer {
        cfg.max_outer = mo;
    }
    cfg.trace_path = a.trace.clone();
    let res = solve(&op, &meas, &bank, &weights, &cfg)?;
    write_image(&a.output, &res.u_star)?;
    println!(
        "restored {}x{} image in {} iterations (converged: {})",
        n, n, res.iterations, res.converged
    );
    println!("  operator:        {}", op.describe());
    println!("  density:         {:.4} ({} samples)", samples.density(), samples.len());
    println!("  data residual:   {:.6e}", res.residual);
    println!("  objective:       {:.6e}", res.objective);
    println!("  empirical error: {:.6e}", empirical_error(&res.u_star, &truth)?);
    println!("  output:          {}", a.output.display());
    Ok(())
}

fn cmd_bounds(a: BoundsArgs) -> anyhow::Result<()> {
    let p = BoundParams {
        box_m: a.box_m,
        beta: a.beta,
        a: a.a,
        c_w: tv_comparison_constant(a.order)?,
        c_f: a.c_f,
        sigma_min: a.sigma_min,
        inf_norm: a.inf_norm,
        rho: a.rho,
        eta: a.eta,
        omega: a.omega,
    }
    .validated()?;
    let bound = restoration_error_bound(&p)?;
    let m = p.sample_count();
    let eps = critical_accuracy(&p, m)?;
    let rows: Vec<(&str, f64)> = vec![
        ("tv_comparison_constant", p.c_w),
        ("b_exponent", p.b()),
        ("sample_count", m as f64),
        ("bound_prefactor", bound.prefactor),
        ("sampling_term", bound.sampling_term),
        ("noise_term", bound.noise_term),
        ("error_bound_total", bound.total),
        ("critical_accuracy", eps),
        ("balance_residual", accuracy_equation_gap(&p, m, eps)?),
        ("failure_probability", failure_probability(&p, m, eps)?),
        ("covering_log_bound", covering_log_bound(&p, a.r_cov)?),
    ];
    match a.format {
        TableFormat::Text => {
            for (name, value) in rows {
                println!("{name:<24} {value:.12e}");
            }
        }
        TableFormat::Csv => {
            println!("parameter,value");
            for (name, value) in rows {
                println!("{name},{value:.17e}");
            }
        }
    }
    Ok(())
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> anyhow::Result<Vec<T>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<T>()
                .map_err(|_| anyhow::anyhow!("bad {what} entry: {tok:?}"))
        })
        .collect()
}

fn cmd_sweep(a: SweepArgs) -> anyhow::Result<()> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::load(path).context("loading config")?,
        None => ExperimentConfig::default(),
    };
    if let Some(dir) = a.output_dir {
        cfg.output_dir = dir;
    }
    if let Some(s) = &a.grid_sizes {
        cfg.grid_sizes = parse_list(s, "grid size")?;
    }
    if let Some(s) = &a.densities {
        cfg.densities = parse_list(s, "density")?;
    }
    if let Some(r) = a.realizations {
        cfg.realizations = r;
    }
    if let Some(e) = a.eta {
        cfg.eta = e;
    }
    if let Some(s) = a.base_seed {
        cfg.base_seed = s;
    }
    if a.print_config {
        print!("{}", cfg.to_toml_string()?);
        return Ok(());
    }
    let (records_path, summary_path) = run_to_files(&cfg)?;
    println!("records -> {}", records_path.display());
    println!("summary -> {}", summary_path.display());
    for line in std::fs::read_to_string(&summary_path)?.lines() {
        println!("  {line}");
    }
    Ok(())
}

struct CheckSet {
    failures: usize,
}

impl CheckSet {
    fn report(&mut self, name: &str, ok: bool, detail: String) {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failures += 1;
        }
    }
}

fn cmd_verify(a: VerifyArgs) -> anyhow::Result<()> {
    let mut checks = CheckSet { failures: 0 };
    let grid = if a.quick { 64 } else { 256 };

    // filter-bank identities on a frequency grid
    for r in 1..=4usize {
        let bank = bspline_bank(r)?;
        let residual = verify_uep(&bank, grid)?;
        checks.report(
            &format!("filter identities r={r}"),
            residual <= 1e-12,
            format!("max residual {residual:.3e} on a {grid}^2 grid"),
        );
    }

    // perfect reconstruction and energy equality
    let mut worst_rec = 0.0f64;
    let mut worst_energy = 0.0f64;
    let trials = if a.quick { 5 } else { 25 };
    for (r, levels, n) in [(1usize, 1usize, 32usize), (2, 2, 32), (4, 2, 64)] {
        let bank = bspline_bank(r)?;
        for t in 0..trials {
            let img = noise_image(n, 1000 + t as u64);
            let c = analyze(&img, &bank, levels)?;
            let back = synthesize(&c, &bank)?;
            let rec = img
                .data()
                .iter()
                .zip(back.data())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max);
            let energy = ((c.norm_sqr() - img.norm_sqr()) / img.norm_sqr()).abs();
            worst_rec = worst_rec.max(rec);
            worst_energy = worst_energy.max(energy);
        }
    }
    checks.report(
        "perfect reconstruction",
        worst_rec <= 1e-10 && worst_energy <= 1e-10,
        format!("max |WtWu - u| = {worst_rec:.3e}, max energy defect {worst_energy:.3e}"),
    );

    // TV comparison inequality on random and structured images
    let mut violations = 0usize;
    let mut tested = 0usize;
    for r in [1usize, 2, 4] {
        let bank = bspline_bank(r)?;
        for l in [1usize, 2] {
            for t in 0..(if a.quick { 10 } else { 50 }) {
                let img = noise_image(16, 9000 + t as u64);
                if !check_tv_comparison(&img, &bank, l)?.holds {
                    violations += 1;
                }
                tested += 1;
            }
            let phantom = make_phantom(32, 1.0)?;
            if !check_tv_comparison(&phantom, &bank, l)?.holds {
                violations += 1;
            }
            tested += 1;
        }
    }
    checks.report(
        "tv comparison",
        violations == 0,
        format!("{violations} violations in {tested} images"),
    );

    // closed-form critical accuracy vs the balance equation
    let p = BoundParams {
        box_m: 1.0,
        beta: 0.0,
        a: 1.0,
        c_w: 12.0,
        c_f: 1.0,
        sigma_min: 1.0,
        inf_norm: 1.0,
        rho: 0.5,
        eta: 0.0,
        omega: 4096.0,
    };
    let m = p.sample_count();
    let eps = critical_accuracy(&p, m)?;
    let gap = accuracy_equation_gap(&p, m, eps)?;
    let scale = (2.0 * p.omega.ln()).max(1.0);
    checks.report(
        "critical accuracy root",
        (gap / scale).abs() <= 1e-9,
        format!("balance residual {gap:.3e} at eps = {eps:.6e}"),
    );

    // sampler uniformity (chi-square at 1% significance, 15 dof)
    let stat = sampler_uniformity_statistic(4, 1, if a.quick { 2_000 } else { 20_000 }, 42)?;
    checks.report(
        "sampler uniformity",
        stat <= 30.5779,
        format!("chi-square statistic {stat:.3} vs 30.578 (1% critical, 15 dof)"),
    );

    // scaling-function stability ratios
    let mut worst_ratio = 0.0f64;
    for n in [1usize, 2, 4] {
        for j in [3u32, 4] {
            let phi = BsplineScaler::new(n, j)?;
            let u = PeriodicFunction::smooth_bump(1.0);
            worst_ratio = worst_ratio.max(analysis_bessel_ratio(&u, &phi, 6, 64)?);
            let defect = phi.partition_of_unity_defect(10_000, 5);
            if defect > 1e-12 {
                worst_ratio = f64::INFINITY;
            }
        }
    }
    checks.report(
        "scaling-function stability",
        worst_ratio <= 1.0 + 1e-10,
        format!("max Bessel ratio {worst_ratio:.6}"),
    );

    // end-to-end: exact recovery from full, clean samples
    let phantom = make_phantom(32, 1.0)?;
    let op = MeasurementOp::Identity;
    let samples = SampleSet::full(32);
    let meas = Measurement::synthesize(&op, &phantom, &samples, 0.0, 1)?;
    let bank = bspline_bank(1)?;
    let weights = LambdaWeights::schedule(32, 1, 1, 0.0)?;
    let res = solve(&op, &meas, &bank, &weights, &SolverConfig::default_for(1.0))?;
    let err = empirical_error(&res.u_star, &phantom)?;
    checks.report(
        "exact-data recovery",
        err <= 1e-10,
        format!("empirical error {err:.3e}"),
    );

    // phantom TV sanity
    let tv = discrete_tv(&phantom);
    checks.report(
        "phantom structure",
        tv > 0.0 && phantom.data().iter().all(|&v| (0.0..=1.0).contains(&v)),
        format!("tv = {tv:.3}"),
    );

    if checks.failures > 0 {
        bail!("{} verification check(s) failed", checks.failures);
    }
    println!("all checks passed");
    Ok(())
}

fn noise_image(n: usize, seed: u64) -> ImageGrid {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * n).map(|_| rng.gen::<f64>()).collect();
    ImageGrid::new(n, 1.0, data).expect("valid grid")
}

/// Restore default SIGPIPE handling so that piping table output into
/// `head`-like consumers terminates quietly instead of panicking.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() -> anyhow::Result<()> {
    reset_sigpipe();
    match Cli::parse().command {
        Command::Transform(a) => cmd_transform(a),
        Command::Restore(a) => cmd_restore(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
    }
}
