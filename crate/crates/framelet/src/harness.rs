//! Experiment harness: a canonical piecewise-linear phantom scene, seeded
//! Monte Carlo sweeps over grid size and sample density, worst-case bound
//! calibration, and deterministic CSV reporting.
//!
//! A sweep ranges over grid sizes `N` and densities `rho`; each `(N, rho)`
//! cell runs a configured number of seeded realizations (random sample set,
//! optional noise, one solve each). Records are aggregated into a per-cell
//! maximum empirical error which is compared against the theoretical error
//! bound scaled by a single factor fixed at a worst-case anchor cell.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    coefficient_norm_constant, empirical_error, restoration_error_bound, tv_comparison_constant,
    BoundParams,
};
use crate::framelets::bspline_bank;
use crate::grid::ImageGrid;
use crate::operators::{BlurKernel, Measurement, MeasurementOp, SampleSet, WaveletOp};
use crate::solver::{solve, SolverConfig};
use crate::transform::LambdaWeights;
use crate::{Error, Result};

/// Measurement operator selection in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    /// Plain sampling (inpainting).
    Identity,
    /// Separable truncated Gaussian blur.
    GaussianBlur { sigma: f64, window: usize },
    /// Built-in orthonormal wavelet family: `haar` or `daubechies4`.
    Wavelet { family: String, levels: usize },
    /// Orthonormal wavelet from explicit conjugate-mirror-filter taps.
    CustomWavelet {
        taps: Vec<f64>,
        offset: i64,
        levels: usize,
    },
}

impl OperatorSpec {
    pub fn to_operator(&self) -> Result<MeasurementOp> {
        match self {
            OperatorSpec::Identity => Ok(MeasurementOp::Identity),
            OperatorSpec::GaussianBlur { sigma, window } => {
                Ok(MeasurementOp::GaussianBlur(BlurKernel::new(*sigma, *window)?))
            }
            OperatorSpec::Wavelet { family, levels } => match family.as_str() {
                "haar" => Ok(MeasurementOp::OrthonormalWavelet(WaveletOp::haar(*levels)?)),
                "daubechies4" => Ok(MeasurementOp::OrthonormalWavelet(WaveletOp::daubechies4(
                    *levels,
                )?)),
                other => Err(Error::bad_param(
                    "operator.family",
                    format!("unknown wavelet family {other:?} (try haar, daubechies4)"),
                )),
            },
            OperatorSpec::CustomWavelet {
                taps,
                offset,
                levels,
            } => Ok(MeasurementOp::OrthonormalWavelet(WaveletOp::from_cmf(
                taps.clone(),
                *offset,
                *levels,
            )?)),
        }
    }
}

/// Whether the noise vector is drawn once per `(N, rho)` cell and reused
/// across realizations, or redrawn per realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    Fixed,
    PerRealization,
}

/// Which sweep cell pins the calibration factor: the lowest sample density
/// (ties broken toward the smallest grid) or the lowest resolution (ties
/// broken toward the smallest density).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationAnchor {
    LowestDensity,
    LowestResolution,
}

/// Solver overrides for a config file; unset fields fall back to
/// [`SolverConfig::default_for`] the experiment's box bound.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub mu: Option<f64>,
    pub kappa: Option<f64>,
    pub max_outer: Option<usize>,
    pub max_inner_cg: Option<usize>,
    pub tol_rel: Option<f64>,
    pub tol_feas: Option<f64>,
    pub cg_tol: Option<f64>,
}

impl SolverSettings {
    pub fn to_config(&self, box_m: f64) -> SolverConfig {
        let mut c = SolverConfig::default_for(box_m);
        if let Some(v) = self.mu {
            c.mu = v;
        }
        if let Some(v) = self.kappa {
            c.kappa = v;
        }
        if let Some(v) = self.max_outer {
            c.max_outer = v;
        }
        if let Some(v) = self.max_inner_cg {
            c.max_inner_cg = v;
        }
        if let Some(v) = self.tol_rel {
            c.tol_rel = v;
        }
        if let Some(v) = self.tol_feas {
            c.tol_feas = v;
        }
        if let Some(v) = self.cg_tol {
            c.cg_tol = v;
        }
        c
    }
}

/// Full sweep description, (de)serializable as TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub operator: OperatorSpec,
    /// Grid sides, each a power of two and at least 8.
    pub grid_sizes: Vec<usize>,
    /// Sample densities in `(0, 1]`.
    pub densities: Vec<f64>,
    pub realizations: usize,
    /// Noise level; 0 means exact data.
    pub eta: f64,
    /// Weight decay exponent of the coefficient schedule.
    pub beta: f64,
    /// Filter bank order.
    pub order: usize,
    /// Decomposition levels.
    pub levels: usize,
    /// Box bound on pixel values.
    pub box_m: f64,
    pub base_seed: u64,
    pub noise_mode: NoiseMode,
    pub calibration: CalibrationAnchor,
    pub solver: SolverSettings,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            operator: OperatorSpec::Identity,
            grid_sizes: vec![32, 64, 128],
            densities: vec![0.3, 0.5, 0.7],
            realizations: 10,
            eta: 0.0,
            beta: 0.0,
            order: 1,
            levels: 1,
            box_m: 1.0,
            base_seed: 7,
            noise_mode: NoiseMode::Fixed,
            calibration: CalibrationAnchor::LowestDensity,
            solver: SolverSettings::default(),
            output_dir: PathBuf::from("experiment_out"),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        for &n in &self.grid_sizes {
            if !n.is_power_of_two() || n < 8 {
                return Err(Error::BadGridSize {
                    n,
                    reason: "sweep grids must be dyadic and at least 8",
                });
            }
        }
        if self.grid_sizes.is_empty() {
            return Err(Error::bad_param("grid_sizes", "need at least one grid size"));
        }
        if self.densities.is_empty() {
            return Err(Error::bad_param("densities", "need at least one density"));
        }
        for &rho in &self.densities {
            if !(rho > 0.0 && rho <= 1.0) {
                return Err(Error::bad_param(
                    "densities",
                    format!("density must lie in (0,1], got {rho}"),
                ));
            }
        }
        if self.realizations == 0 {
            return Err(Error::bad_param("realizations", "need at least one realization"));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::bad_param("eta", format!("noise level must be >= 0, got {}", self.eta)));
        }
        if !(self.box_m > 0.0 && self.box_m.is_finite()) {
            return Err(Error::bad_param("box_m", format!("box bound must be positive, got {}", self.box_m)));
        }
        if self.order == 0 {
            return Err(Error::BadOrder(self.order));
        }
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(s).map_err(|e| Error::Parse(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }
}

/// One solved realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub n: usize,
    pub rho: f64,
    pub seed: u64,
    pub emp_error: f64,
    pub iters: usize,
    pub residual: f64,
    pub converged: bool,
}

/// One aggregated `(N, rho)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub n: usize,
    pub rho: f64,
    pub max_emp_error: f64,
    pub calibrated_bound: f64,
}

/// Records plus their calibrated per-cell summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub records: Vec<ExperimentRecord>,
    pub summary: Vec<SummaryRow>,
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic per-realization seed from the base seed and the cell
/// coordinates. `rep = u64::MAX` is reserved for the cell's shared noise
/// stream.
pub fn derive_seed(base: u64, n: usize, rho_index: usize, rep: u64) -> u64 {
    let mut h = base ^ 0x9e37_79b9_7f4a_7c15;
    for v in [n as u64, rho_index as u64, rep] {
        h = mix64(h.wrapping_add(mix64(v.wrapping_add(0x9e37_79b9_7f4a_7c15))));
    }
    h
}

const NOISE_REP: u64 = u64::MAX;

/// Deterministic synthetic scene: constant background (0.2 M) with two
/// axis-aligned plateaus (0.85 M and 0.55 M) and one band ramping linearly
/// from 0.2 M to 0.9 M. Region edges sit on the 16ths lattice, so pixel
/// counts scale exactly with `N^2` for dyadic `N >= 16`.
pub fn make_phantom(n: usize, box_m: f64) -> Result<ImageGrid> {
    if n < 8 {
        return Err(Error::BadGridSize {
            n,
            reason: "phantom needs at least 8 pixels per axis",
        });
    }
    if !(box_m > 0.0 && box_m.is_finite()) {
        return Err(Error::bad_param("box_m", format!("box bound must be positive, got {box_m}")));
    }
    let inside = |x: f64, lo16: f64, hi16: f64| x >= lo16 / 16.0 && x < hi16 / 16.0;
    let mut img = ImageGrid::zeros(n, box_m)?;
    for k1 in 0..n {
        let x1 = (k1 as f64 + 0.5) / n as f64;
        for k2 in 0..n {
            let x2 = (k2 as f64 + 0.5) / n as f64;
            let v = if inside(x1, 2.0, 7.0) && inside(x2, 3.0, 9.0) {
                0.85
            } else if inside(x1, 9.0, 14.0) && inside(x2, 2.0, 6.0) {
                0.55
            } else if inside(x1, 9.0, 14.0) && inside(x2, 8.0, 14.0) {
                0.2 + 0.7 * (x2 - 8.0 / 16.0) / (6.0 / 16.0)
            } else {
                0.2
            };
            img.set(k1, k2, v * box_m);
        }
    }
    Ok(img)
}

/// Runs every `(N, rho, realization)` cell of the config. Realizations
/// within a cell run in parallel; the output order is the deterministic
/// `(N, rho, realization)` nesting of the config lists.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let bank = bspline_bank(cfg.order)?;
    let op = cfg.operator.to_operator()?;
    let solver_cfg = cfg.solver.to_config(cfg.box_m);
    let mut records = Vec::new();
    let mut c_f_by_n = BTreeMap::new();
    for &n in &cfg.grid_sizes {
        let phantom = make_phantom(n, cfg.box_m)?;
        let weights = LambdaWeights::schedule(n, cfg.order, cfg.levels, cfg.beta)?;
        c_f_by_n.insert(n, coefficient_norm_constant(&phantom, &bank, &weights)?);
        for (rho_index, &rho) in cfg.densities.iter().enumerate() {
            let cell_noise_seed = derive_seed(cfg.base_seed, n, rho_index, NOISE_REP);
            let cell: Result<Vec<ExperimentRecord>> = (0..cfg.realizations)
                .into_par_iter()
                .map(|rep| {
                    let seed = derive_seed(cfg.base_seed, n, rho_index, rep as u64);
                    let samples = SampleSet::with_density(n, rho, seed)?;
                    let noise_seed = match cfg.noise_mode {
                        NoiseMode::Fixed => cell_noise_seed,
                        NoiseMode::PerRealization => derive_seed(seed, n, rho_index, NOISE_REP),
                    };
                    let meas = Measurement::synthesize(&op, &phantom, &samples, cfg.eta, noise_seed)?;
                    let res = solve(&op, &meas, &bank, &weights, &solver_cfg)?;
                    Ok(ExperimentRecord {
                        n,
                        rho,
                        seed,
                        emp_error: empirical_error(&res.u_star, &phantom)?,
                        iters: res.iterations,
                        residual: res.residual,
                        converged: res.converged,
                    })
                })
                .collect();
            records.extend(cell?);
        }
    }
    let consts = op.constants()?;
    let c_w = tv_comparison_constant(cfg.order)?;
    let bound_fn = |n: usize, rho: f64| -> Result<f64> {
        let p = BoundParams {
            box_m: cfg.box_m,
            beta: cfg.beta,
            a: 1.0,
            c_w,
            c_f: c_f_by_n[&n],
            sigma_min: consts.sigma_min,
            inf_norm: consts.inf_norm,
            rho,
            eta: cfg.eta,
            omega: (n * n) as f64,
        };
        Ok(restoration_error_bound(&p)?.total)
    };
    let summary = calibrate_bound(&records, cfg.calibration, bound_fn)?;
    Ok(SweepOutcome { records, summary })
}

/// Scales the theoretical bound by the single factor that makes it equal the
/// anchor cell's maximum empirical error, and evaluates the scaled bound on
/// every cell. Cells appear in first-record order.
pub fn calibrate_bound(
    records: &[ExperimentRecord],
    anchor: CalibrationAnchor,
    mut bound_fn: impl FnMut(usize, f64) -> Result<f64>,
) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(Error::bad_param("records", "cannot calibrate an empty record set"));
    }
    let mut cells: Vec<(usize, f64, f64)> = Vec::new(); // (n, rho, max_err)
    for r in records {
        match cells
            .iter_mut()
            .find(|(n, rho, _)| *n == r.n && rho.to_bits() == r.rho.to_bits())
        {
            Some(cell) => cell.2 = cell.2.max(r.emp_error),
            None => cells.push((r.n, r.rho, r.emp_error)),
        }
    }
    let anchor_cell = *cells
        .iter()
        .min_by(|a, b| match anchor {
            CalibrationAnchor::LowestDensity => a
                .1
                .partial_cmp(&b.1)
                .unwrap()
                .then(a.0.cmp(&b.0)),
            CalibrationAnchor::LowestResolution => {
                a.0.cmp(&b.0).then(a.1.partial_cmp(&b.1).unwrap())
            }
        })
        .expect("non-empty");
    let anchor_bound = bound_fn(anchor_cell.0, anchor_cell.1)?;
    if !(anchor_bound > 0.0 && anchor_bound.is_finite()) {
        return Err(Error::bad_param(
            "anchor",
            format!("theoretical bound at the anchor cell is not positive: {anchor_bound}"),
        ));
    }
    let factor = anchor_cell.2 / anchor_bound;
    let mut rows = Vec::with_capacity(cells.len());
    for (n, rho, max_err) in cells {
        rows.push(SummaryRow {
            n,
            rho,
            max_emp_error: max_err,
            calibrated_bound: factor * bound_fn(n, rho)?,
        });
    }
    Ok(rows)
}

/// Writes records as `N,rho,seed,emp_error,iters,residual,converged`.
pub fn write_records_csv(path: impl AsRef<Path>, records: &[ExperimentRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
    w.write_record(["N", "rho", "seed", "emp_error", "iters", "residual", "converged"])
        .map_err(|e| Error::Parse(e.to_string()))?;
    for r in records {
        w.write_record([
            r.n.to_string(),
            format!("{}", r.rho),
            r.seed.to_string(),
            format!("{:.17e}", r.emp_error),
            r.iters.to_string(),
            format!("{:.17e}", r.residual),
            r.converged.to_string(),
        ])
        .map_err(|e| Error::Parse(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the [`write_records_csv`] format.
pub fn read_records_csv(path: impl AsRef<Path>) -> Result<Vec<ExperimentRecord>> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        if rec.len() != 7 {
            return Err(Error::Parse("record rows must have 7 fields".into()));
        }
        let field = |i: usize| rec[i].trim().to_string();
        out.push(ExperimentRecord {
            n: field(0).parse().map_err(|_| Error::Parse(format!("bad N: {}", &rec[0])))?,
            rho: field(1).parse().map_err(|_| Error::Parse(format!("bad rho: {}", &rec[1])))?,
            seed: field(2).parse().map_err(|_| Error::Parse(format!("bad seed: {}", &rec[2])))?,
            emp_error: field(3)
                .parse()
                .map_err(|_| Error::Parse(format!("bad emp_error: {}", &rec[3])))?,
            iters: field(4).parse().map_err(|_| Error::Parse(format!("bad iters: {}", &rec[4])))?,
            residual: field(5)
                .parse()
                .map_err(|_| Error::Parse(format!("bad residual: {}", &rec[5])))?,
            converged: field(6)
                .parse()
                .map_err(|_| Error::Parse(format!("bad converged: {}", &rec[6])))?,
        });
    }
    Ok(out)
}

/// Writes the summary as `N,rho,max_emp_error,calibrated_bound`.
pub fn write_summary_csv(path: impl AsRef<Path>, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
    w.write_record(["N", "rho", "max_emp_error", "calibrated_bound"])
        .map_err(|e| Error::Parse(e.to_string()))?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            format!("{}", r.rho),
            format!("{:.17e}", r.max_emp_error),
            format!("{:.17e}", r.calibrated_bound),
        ])
        .map_err(|e| Error::Parse(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the sweep and writes `records.csv` and `summary.csv` under the
/// config's output directory; returns the two paths.
pub fn run_to_files(cfg: &ExperimentConfig) -> Result<(PathBuf, PathBuf)> {
    let outcome = run_sweep(cfg)?;
    fs::create_dir_all(&cfg.output_dir)?;
    let records_path = cfg.output_dir.join("records.csv");
    let summary_path = cfg.output_dir.join("summary.csv");
    write_records_csv(&records_path, &outcome.records)?;
    write_summary_csv(&summary_path, &outcome.summary)?;
    Ok((records_path, summary_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::discrete_tv;
    use approx::assert_abs_diff_eq;

    #[test]
    fn phantom_region_counts_scale_exactly() {
        let m = 2.0;
        for n in [16usize, 32, 64] {
            let img = make_phantom(n, m).unwrap();
            let scale = (n / 16) * (n / 16);
            let count = |v: f64| img.data().iter().filter(|&&x| (x - v).abs() < 1e-12).count();
            assert_eq!(count(0.85 * m), 30 * scale, "plateau A at N={n}");
            assert_eq!(count(0.55 * m), 20 * scale, "plateau B at N={n}");
            // ramp band pixels are strictly between background and top value
            let ramp = img
                .data()
                .iter()
                .filter(|&&x| x > 0.2 * m + 1e-12 && (x - 0.85 * m).abs() > 1e-12 && (x - 0.55 * m).abs() > 1e-12)
                .count();
            assert_eq!(ramp, 30 * scale, "ramp band at N={n}");
            for &v in img.data() {
                assert!((0.0..=m).contains(&v));
            }
        }
        assert!(make_phantom(4, 1.0).is_err());
    }

    #[test]
    fn phantom_tv_scales_like_edge_length() {
        let per_n: Vec<f64> = [32usize, 64, 128]
            .iter()
            .map(|&n| discrete_tv(&make_phantom(n, 1.0).unwrap()) / n as f64)
            .collect();
        let max = per_n.iter().cloned().fold(f64::MIN, f64::max);
        let min = per_n.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min <= 2.0, "tv per edge length: {per_n:?}");
    }

    #[test]
    fn seeds_are_deterministic_and_distinct() {
        let a = derive_seed(7, 32, 0, 0);
        assert_eq!(a, derive_seed(7, 32, 0, 0));
        let others = [
            derive_seed(7, 32, 0, 1),
            derive_seed(7, 32, 1, 0),
            derive_seed(7, 64, 0, 0),
            derive_seed(8, 32, 0, 0),
            derive_seed(7, 32, 0, NOISE_REP),
        ];
        for (i, o) in others.iter().enumerate() {
            assert_ne!(a, *o, "collision with variant {i}");
        }
    }

    #[test]
    fn config_toml_round_trip_and_validation() {
        let cfg = ExperimentConfig {
            operator: OperatorSpec::GaussianBlur { sigma: 1.0, window: 9 },
            grid_sizes: vec![16, 32],
            densities: vec![0.5, 1.0],
            realizations: 2,
            eta: 0.05,
            solver: SolverSettings {
                max_outer: Some(50),
                ..SolverSettings::default()
            },
            ..ExperimentConfig::default()
        };
        let text = cfg.to_toml_string().unwrap();
        let back = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, back);

        // minimal file with defaults filled in
        let minimal = "\n[operator]\nkind = \"identity\"\n";
        let parsed = ExperimentConfig::from_toml_str(minimal).unwrap();
        assert_eq!(parsed.grid_sizes, vec![32, 64, 128]);
        assert_eq!(parsed.noise_mode, NoiseMode::Fixed);
        assert_eq!(parsed.calibration, CalibrationAnchor::LowestDensity);

        for bad in [
            "grid_sizes = [12]\n[operator]\nkind = \"identity\"\n",
            "densities = [0.0]\n[operator]\nkind = \"identity\"\n",
            "realizations = 0\n[operator]\nkind = \"identity\"\n",
            "eta = -1.0\n[operator]\nkind = \"identity\"\n",
            "[operator]\nkind = \"wavelet\"\nfamily = \"nope\"\nlevels = 1\n",
        ] {
            let parsed = ExperimentConfig::from_toml_str(bad)
                .and_then(|c| c.operator.to_operator().map(|_| c));
            assert!(parsed.is_err(), "accepted bad config: {bad}");
        }
    }

    #[test]
    fn calibration_anchors_and_shape() {
        let rec = |n: usize, rho: f64, err: f64| ExperimentRecord {
            n,
            rho,
            seed: 0,
            emp_error: err,
            iters: 1,
            residual: 0.0,
            converged: true,
        };
        let records = vec![
            rec(64, 0.3, 0.9),
            rec(64, 0.3, 1.2),
            rec(64, 0.5, 0.8),
            rec(64, 0.7, 0.5),
        ];
        // bound shaped like rho^(-1/2)
        let rows = calibrate_bound(&records, CalibrationAnchor::LowestDensity, |_, rho| {
            Ok(rho.powf(-0.5))
        })
        .unwrap();
        assert_eq!(rows.len(), 3);
        assert_abs_diff_eq!(rows[0].calibrated_bound, 1.2, epsilon = 1e-15);
        assert_abs_diff_eq!(rows[0].max_emp_error, 1.2, epsilon = 1e-15);
        // shape preserved: calibrated(rho) = 1.2 * (rho/0.3)^(-1/2)
        assert_abs_diff_eq!(
            rows[1].calibrated_bound,
            1.2 * (0.5f64 / 0.3).powf(-0.5),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            rows[2].calibrated_bound,
            1.2 * (0.7f64 / 0.3).powf(-0.5),
            epsilon = 1e-12
        );

        // lowest-resolution anchor picks the smallest N
        let records = vec![rec(32, 0.5, 2.0), rec(64, 0.5, 0.5)];
        let rows = calibrate_bound(&records, CalibrationAnchor::LowestResolution, |n, _| {
            Ok(1.0 / n as f64)
        })
        .unwrap();
        assert_abs_diff_eq!(rows[0].calibrated_bound, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rows[1].calibrated_bound, 1.0, epsilon = 1e-15);

        assert!(calibrate_bound(&[], CalibrationAnchor::LowestDensity, |_, _| Ok(1.0)).is_err());
    }

    #[test]
    fn sweep_is_deterministic_and_exact_at_full_density() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            grid_sizes: vec![16],
            densities: vec![0.5, 1.0],
            realizations: 2,
            output_dir: dir.path().join("out"),
            ..ExperimentConfig::default()
        };
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(a, b, "sweep must be bit-deterministic");
        assert_eq!(a.records.len(), 4);
        // full density with the identity operator recovers the phantom
        for r in a.records.iter().filter(|r| r.rho == 1.0) {
            assert!(r.converged);
            assert!(r.emp_error <= 1e-10, "rho=1 error {}", r.emp_error);
        }
        // byte-identical CSVs
        let (rp1, sp1) = run_to_files(&cfg).unwrap();
        let bytes1 = (fs::read(&rp1).unwrap(), fs::read(&sp1).unwrap());
        let (rp2, sp2) = run_to_files(&cfg).unwrap();
        let bytes2 = (fs::read(&rp2).unwrap(), fs::read(&sp2).unwrap());
        assert_eq!(bytes1, bytes2);
        // round trip
        let back = read_records_csv(&rp1).unwrap();
        assert_eq!(back, a.records);
        // summary: anchor cell (rho = 0.5) matches its max error
        assert_eq!(a.summary.len(), 2);
        let max_low: f64 = a
            .records
            .iter()
            .filter(|r| r.rho == 0.5)
            .map(|r| r.emp_error)
            .fold(f64::MIN, f64::max);
        assert_abs_diff_eq!(a.summary[0].calibrated_bound, max_low, epsilon = 1e-15);
    }
}
