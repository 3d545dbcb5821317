//! Measurement operators, random sample sets, and measurement synthesis.
//!
//! Three operator families share one interface, each with certified spectral
//! constants that do not depend on the grid size:
//!
//! * identity (pure inpainting), `sigma_min = ||A||_inf = 1`;
//! * periodic convolution with a truncated, normalized Gaussian kernel,
//!   `sigma_min >= C e^(-sigma^2 pi^2)` by the Poisson summation formula;
//! * an orthonormal (decimated) tensor wavelet transform built from a
//!   conjugate-mirror low-pass filter, for which `A^T A = I` exactly.
//!
//! A measurement takes `A f` on a uniformly random pixel subset and adds a
//! noise vector whose empirical mean is exactly 0 and whose empirical second
//! moment is exactly `eta^2` (Gaussian draw followed by an affine
//! recenter/rescale), so the solver's constraint level is exact rather than
//! approximate.

use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::framelets::Filter1D;
use crate::grid::ImageGrid;
use crate::transform::conv_axis;
use crate::{Error, Result};

/// Certified operator constants: a lower bound on the smallest singular
/// value and an upper bound on the `l_inf -> l_inf` operator norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorConstants {
    pub sigma_min: f64,
    pub inf_norm: f64,
}

/// Truncated, normalized Gaussian convolution kernel (separable).
#[derive(Debug, Clone, PartialEq)]
pub struct BlurKernel {
    sigma: f64,
    kernel_size: usize,
    taps: Filter1D,
}

impl BlurKernel {
    /// Builds a `kernel_size x kernel_size` Gaussian window with standard
    /// deviation `sigma`, normalized so the 2D taps sum to 1.
    pub fn new(sigma: f64, kernel_size: usize) -> Result<Self> {
        if sigma <= 0.0 || !sigma.is_finite() {
            return Err(Error::bad_param("sigma", format!("must be positive, got {sigma}")));
        }
        if kernel_size % 2 == 0 || kernel_size == 0 {
            return Err(Error::bad_param(
                "kernel_size",
                format!("window must be odd, got {kernel_size}"),
            ));
        }
        let w = (kernel_size / 2) as i64;
        let raw: Vec<f64> = (-w..=w)
            .map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp())
            .collect();
        let z: f64 = raw.iter().sum();
        let taps = Filter1D::new(raw.into_iter().map(|v| v / z).collect(), -w)?;
        Ok(BlurKernel {
            sigma,
            kernel_size,
            taps,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn kernel_size(&self) -> usize {
        self.kernel_size
    }

    /// Normalized 1D factor of the separable kernel.
    pub fn taps(&self) -> &Filter1D {
        &self.taps
    }

    /// Analytic lower bound on the kernel symbol over `[-pi, pi]`, valid for
    /// every grid size.
    ///
    /// Poisson summation gives, for the untruncated Gaussian,
    /// `theta(xi) = sqrt(2 pi sigma^2) * sum_m exp(-sigma^2 (xi+2 pi m)^2 / 2)
    ///           >= sqrt(2 pi sigma^2) * exp(-sigma^2 pi^2 / 2)`.
    /// Truncation to the window removes at most
    /// `T = 2 * sum_(k>w) exp(-k^2 / (2 sigma^2))` from the cosine sum, so
    /// the normalized 1D symbol is at least `(theta_min - T) / Z_w` where
    /// `Z_w` is the window normalizer. The 2D bound is the square.
    pub fn sigma_min_certificate(&self) -> Result<f64> {
        let s2 = self.sigma * self.sigma;
        let theta_min = (2.0 * std::f64::consts::PI * s2).sqrt()
            * (-s2 * std::f64::consts::PI * std::f64::consts::PI / 2.0).exp();
        let w = self.kernel_size as i64 / 2;
        let mut tail = 0.0;
        let mut k = w + 1;
        loop {
            let t = (-((k * k) as f64) / (2.0 * s2)).exp();
            tail += 2.0 * t;
            if t < 1e-300 || k > w + 2000 {
                break;
            }
            k += 1;
        }
        let z = z_of(&self.taps);
        let one_d = (theta_min - tail) / z;
        if one_d <= 0.0 {
            return Err(Error::DegenerateMeasurement(format!(
                "Gaussian window too small for a positive spectral certificate \
                 (sigma={}, size={})",
                self.sigma, self.kernel_size
            )));
        }
        Ok(one_d * one_d)
    }
}

/// The window normalizer `Z_w = sum_(|k|<=w) exp(-k^2/(2 sigma^2))`,
/// recovered from the normalized taps (center tap equals `1/Z_w`).
fn z_of(taps: &Filter1D) -> f64 {
    1.0 / taps.at(0)
}

/// Orthonormal decimated wavelet transform from a conjugate-mirror filter.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletOp {
    low: Filter1D,
    high: Filter1D,
    levels: usize,
}

impl WaveletOp {
    /// Builds the operator from a conjugate-mirror low-pass filter `h`
    /// (taps summing to sqrt(2), orthonormal even shifts). The high-pass
    /// mirror is `h1[k] = (-1)^(1-k) h[1-k]`.
    pub fn from_cmf(taps: Vec<f64>, offset: i64, levels: usize) -> Result<Self> {
        let low = Filter1D::new(taps, offset)?;
        if levels == 0 {
            return Err(Error::bad_param("levels", "need at least one level"));
        }
        let sum = low.sum();
        if (sum - std::f64::consts::SQRT_2).abs() > 1e-8 {
            return Err(Error::bad_param(
                "taps",
                format!("low-pass taps must sum to sqrt(2), got {sum}"),
            ));
        }
        for m in 1..low.len() {
            let mut dot = 0.0;
            for i in 0..low.len() {
                let k = low.offset() + i as i64;
                dot += low.at(k) * low.at(k + 2 * m as i64);
            }
            if dot.abs() > 1e-8 {
                return Err(Error::bad_param(
                    "taps",
                    format!("taps are not orthonormal to their 2*{m} shift (dot={dot:.3e})"),
                ));
            }
        }
        // h1[k] = (-1)^(1-k) h[1-k], supported on [2-offset-len, 1-offset].
        let len = low.len() as i64;
        let h_off = 2 - low.offset() - len;
        let h_taps: Vec<f64> = (h_off..=(1 - low.offset()))
            .map(|k| {
                let sign = if (1 - k).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                sign * low.at(1 - k)
            })
            .collect();
        let high = Filter1D::new(h_taps, h_off)?;
        Ok(WaveletOp { low, high, levels })
    }

    /// Haar filter `h = [1/sqrt2, 1/sqrt2]`.
    pub fn haar(levels: usize) -> Result<Self> {
        let v = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_cmf(vec![v, v], 0, levels)
    }

    /// Daubechies length-4 filter.
    pub fn daubechies4(levels: usize) -> Result<Self> {
        let s3 = 3f64.sqrt();
        let d = 4.0 * std::f64::consts::SQRT_2;
        Self::from_cmf(
            vec![(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d],
            0,
            levels,
        )
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn low_pass(&self) -> &Filter1D {
        &self.low
    }

    pub fn high_pass(&self) -> &Filter1D {
        &self.high
    }

    fn check_n(&self, n: usize) -> Result<()> {
        let div = 1usize << self.levels;
        if n % div != 0 {
            return Err(Error::BadGridSize {
                n,
                reason: "grid side must be divisible by 2^levels for the wavelet operator",
            });
        }
        if (n >> (self.levels - 1)) < self.low.len() {
            return Err(Error::BadGridSize {
                n,
                reason: "coarsest level shorter than the wavelet filter",
            });
        }
        Ok(())
    }

    /// One decimated analysis pass along `axis` on the leading
    /// `sub x sub` block: approx coefficients land in the first half,
    /// details in the second half.
    fn analysis_pass(&self, data: &mut [f64], n: usize, sub: usize, axis: usize) {
        let half = sub / 2;
        let mut line = vec![0.0; sub];
        let mut out = vec![0.0; sub];
        for j in 0..sub {
            for i in 0..sub {
                let (k1, k2) = if axis == 0 { (i, j) } else { (j, i) };
                line[i] = data[k1 * n + k2];
            }
            for i in 0..half {
                let mut a = 0.0;
                let mut d = 0.0;
                for (t, &hv) in self.low.taps().iter().enumerate() {
                    let k = self.low.offset() + t as i64;
                    let src = (2 * i as i64 + k).rem_euclid(sub as i64) as usize;
                    a += hv * line[src];
                }
                for (t, &gv) in self.high.taps().iter().enumerate() {
                    let k = self.high.offset() + t as i64;
                    let src = (2 * i as i64 + k).rem_euclid(sub as i64) as usize;
                    d += gv * line[src];
                }
                out[i] = a;
                out[half + i] = d;
            }
            for i in 0..sub {
                let (k1, k2) = if axis == 0 { (i, j) } else { (j, i) };
                data[k1 * n + k2] = out[i];
            }
        }
    }

    /// Exact transpose of [`WaveletOp::analysis_pass`].
    fn synthesis_pass(&self, data: &mut [f64], n: usize, sub: usize, axis: usize) {
        let half = sub / 2;
        let mut line = vec![0.0; sub];
        let mut out = vec![0.0; sub];
        for j in 0..sub {
            for i in 0..sub {
                let (k1, k2) = if axis == 0 { (i, j) } else { (j, i) };
                line[i] = data[k1 * n + k2];
            }
            out.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..half {
                for (t, &hv) in self.low.taps().iter().enumerate() {
                    let k = self.low.offset() + t as i64;
                    let dst = (2 * i as i64 + k).rem_euclid(sub as i64) as usize;
                    out[dst] += hv * line[i];
                }
                for (t, &gv) in self.high.taps().iter().enumerate() {
                    let k = self.high.offset() + t as i64;
                    let dst = (2 * i as i64 + k).rem_euclid(sub as i64) as usize;
                    out[dst] += gv * line[half + i];
                }
            }
            for i in 0..sub {
                let (k1, k2) = if axis == 0 { (i, j) } else { (j, i) };
                data[k1 * n + k2] = out[i];
            }
        }
    }

    fn forward(&self, u: &ImageGrid) -> Result<ImageGrid> {
        self.check_n(u.n())?;
        let n = u.n();
        let mut data = u.data().to_vec();
        for l in 0..self.levels {
            let sub = n >> l;
            self.analysis_pass(&mut data, n, sub, 0);
            self.analysis_pass(&mut data, n, sub, 1);
        }
        u.with_data(data)
    }

    fn transpose(&self, v: &ImageGrid) -> Result<ImageGrid> {
        self.check_n(v.n())?;
        let n = v.n();
        let mut data = v.data().to_vec();
        for l in (0..self.levels).rev() {
            let sub = n >> l;
            self.synthesis_pass(&mut data, n, sub, 1);
            self.synthesis_pass(&mut data, n, sub, 0);
        }
        v.with_data(data)
    }
}

/// A measurement operator `A` acting on square images.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasurementOp {
    Identity,
    GaussianBlur(BlurKernel),
    OrthonormalWavelet(WaveletOp),
}

impl MeasurementOp {
    /// Default deblurring kernel: 9x9 window, sigma = 1.
    pub fn default_blur() -> Result<Self> {
        Ok(MeasurementOp::GaussianBlur(BlurKernel::new(1.0, 9)?))
    }

    /// Default wavelet operator: Haar, 2 levels.
    pub fn default_wavelet() -> Result<Self> {
        Ok(MeasurementOp::OrthonormalWavelet(WaveletOp::haar(2)?))
    }

    /// Applies `A`.
    pub fn apply(&self, u: &ImageGrid) -> Result<ImageGrid> {
        match self {
            MeasurementOp::Identity => Ok(u.clone()),
            MeasurementOp::GaussianBlur(k) => {
                let tmp = conv_axis(u.data(), u.n(), &k.taps, 0, 1);
                u.with_data(conv_axis(&tmp, u.n(), &k.taps, 1, 1))
            }
            MeasurementOp::OrthonormalWavelet(w) => w.forward(u),
        }
    }

    /// Applies the exact transpose `A^T`.
    pub fn adjoint(&self, v: &ImageGrid) -> Result<ImageGrid> {
        match self {
            MeasurementOp::Identity => Ok(v.clone()),
            MeasurementOp::GaussianBlur(k) => {
                // Transpose of circular convolution is convolution with the
                // time-reversed taps (here equal to the taps by symmetry,
                // but reversed explicitly).
                let rev = k.taps.reversed();
                let tmp = conv_axis(v.data(), v.n(), &rev, 0, 1);
                v.with_data(conv_axis(&tmp, v.n(), &rev, 1, 1))
            }
            MeasurementOp::OrthonormalWavelet(w) => w.transpose(v),
        }
    }

    /// Certified constants, independent of the grid size: a lower bound on
    /// the smallest singular value and an upper bound on the row-sum norm.
    ///
    /// For the wavelet operator the row-sum bound is `||h||_1^(2*levels)`
    /// (one analysis pass per axis and per level); with one level this is
    /// the classical `||h||_1^2`.
    pub fn constants(&self) -> Result<OperatorConstants> {
        match self {
            MeasurementOp::Identity => Ok(OperatorConstants {
                sigma_min: 1.0,
                inf_norm: 1.0,
            }),
            MeasurementOp::GaussianBlur(k) => Ok(OperatorConstants {
                sigma_min: k.sigma_min_certificate()?,
                inf_norm: {
                    let s = k.taps.l1_norm();
                    s * s
                },
            }),
            MeasurementOp::OrthonormalWavelet(w) => Ok(OperatorConstants {
                sigma_min: 1.0,
                inf_norm: w.low.l1_norm().powi(2 * w.levels as i32),
            }),
        }
    }

    /// Exact minimum spectral modulus on the size-`n` grid.
    ///
    /// The blur operator is a separable circulant, so its singular values
    /// are the absolute symbol products on the DFT grid. The identity and
    /// the orthonormal wavelet have all singular values equal to 1.
    pub fn spectral_min(&self, n: usize) -> Result<f64> {
        match self {
            MeasurementOp::Identity | MeasurementOp::OrthonormalWavelet(_) => Ok(1.0),
            MeasurementOp::GaussianBlur(k) => {
                if n == 0 {
                    return Err(Error::BadGridSize { n, reason: "empty grid" });
                }
                let min1 = (0..n)
                    .map(|j| {
                        let xi = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                        k.taps.dft(xi).norm()
                    })
                    .fold(f64::INFINITY, f64::min);
                Ok(min1 * min1)
            }
        }
    }

    /// Short human-readable descriptor used in reports.
    pub fn describe(&self) -> String {
        match self {
            MeasurementOp::Identity => "identity".to_string(),
            MeasurementOp::GaussianBlur(k) => {
                format!("gaussian_blur(sigma={}, window={})", k.sigma, k.kernel_size)
            }
            MeasurementOp::OrthonormalWavelet(w) => {
                format!("orthonormal_wavelet(taps={}, levels={})", w.low.len(), w.levels)
            }
        }
    }
}

/// A uniformly random set of observed pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    n: usize,
    indices: Vec<usize>,
    mask: Vec<bool>,
}

impl SampleSet {
    /// Draws a uniform `m`-subset of the `n x n` pixels via a seeded partial
    /// Fisher-Yates shuffle; deterministic given the seed.
    pub fn draw(n: usize, m: usize, seed: u64) -> Result<Self> {
        let total = n * n;
        if m == 0 || m > total {
            return Err(Error::bad_param(
                "m",
                format!("sample count must lie in 1..={total}, got {m}"),
            ));
        }
        let mut pool: Vec<usize> = (0..total).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..m {
            let j = rng.gen_range(i..total);
            pool.swap(i, j);
        }
        let mut indices: Vec<usize> = pool[..m].to_vec();
        indices.sort_unstable();
        Ok(Self::from_sorted(n, indices))
    }

    /// Density-parameterized draw with `m = max(1, round(rho * n^2))`.
    pub fn with_density(n: usize, rho: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) || rho == 0.0 {
            return Err(Error::bad_param("rho", format!("density must lie in (0,1], got {rho}")));
        }
        let m = ((rho * (n * n) as f64).round() as usize).clamp(1, n * n);
        SampleSet::draw(n, m, seed)
    }

    /// Every pixel observed.
    pub fn full(n: usize) -> Self {
        Self::from_sorted(n, (0..n * n).collect())
    }

    /// Builds from explicit flat indices (sorted, deduplicated internally;
    /// duplicates are an error).
    pub fn from_indices(n: usize, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.is_empty() {
            return Err(Error::bad_param("indices", "sample set must be non-empty"));
        }
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::bad_param("indices", "duplicate sample index"));
        }
        if *indices.last().unwrap() >= n * n {
            return Err(Error::bad_param("indices", "sample index out of range"));
        }
        Ok(Self::from_sorted(n, indices))
    }

    fn from_sorted(n: usize, indices: Vec<usize>) -> Self {
        let mut mask = vec![false; n * n];
        for &i in &indices {
            mask[i] = true;
        }
        SampleSet { n, indices, mask }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Realized density `m / n^2`.
    pub fn density(&self) -> f64 {
        self.indices.len() as f64 / (self.n * self.n) as f64
    }

    /// Sorted flat (row-major) pixel indices.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    #[inline]
    pub fn contains(&self, flat: usize) -> bool {
        self.mask[flat]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Gathers the sampled entries of a full field.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.indices.iter().map(|&i| full[i]).collect()
    }

    /// Scatters sampled values back to a zero-filled full field.
    pub fn scatter(&self, values: &[f64]) -> Vec<f64> {
        debug_assert_eq!(values.len(), self.indices.len());
        let mut full = vec![0.0; self.n * self.n];
        for (&i, &v) in self.indices.iter().zip(values) {
            full[i] = v;
        }
        full
    }

    /// Zeroes the unobserved entries of a full field in place.
    pub fn project(&self, full: &mut [f64]) {
        for (v, &keep) in full.iter_mut().zip(&self.mask) {
            if !keep {
                *v = 0.0;
            }
        }
    }

    /// Writes the sorted `k1,k2` CSV.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
        w.write_record(["k1", "k2"]).map_err(|e| Error::Parse(e.to_string()))?;
        for &i in &self.indices {
            w.write_record([(i / self.n).to_string(), (i % self.n).to_string()])
                .map_err(|e| Error::Parse(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the [`SampleSet::write_csv`] format for a grid of side `n`.
    pub fn read_csv(path: impl AsRef<Path>, n: usize) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
        let mut indices = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            if rec.len() != 2 {
                return Err(Error::Parse("sample CSV rows must be k1,k2".into()));
            }
            let k1: usize = rec[0].trim().parse().map_err(|_| Error::Parse(format!("bad k1: {}", &rec[0])))?;
            let k2: usize = rec[1].trim().parse().map_err(|_| Error::Parse(format!("bad k2: {}", &rec[1])))?;
            if k1 >= n || k2 >= n {
                return Err(Error::Parse(format!("sample ({k1},{k2}) out of range for N={n}")));
            }
            indices.push(k1 * n + k2);
        }
        SampleSet::from_indices(n, indices)
    }
}

/// Observed data `g = (A f)|_Lambda + noise` with exact empirical noise
/// moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    n: usize,
    range_m: f64,
    eta: f64,
    samples: SampleSet,
    values: Vec<f64>,
}

impl Measurement {
    /// Synthesizes a measurement of `f` through `op` on `samples`.
    ///
    /// For `eta > 0` the noise is an i.i.d. Gaussian draw recentered to mean
    /// exactly 0 and rescaled so `(1/m) sum noise^2 = eta^2` exactly; this
    /// needs at least two samples. `eta = 0` returns `A f` on the samples
    /// bit-exactly.
    pub fn synthesize(
        op: &MeasurementOp,
        f: &ImageGrid,
        samples: &SampleSet,
        eta: f64,
        seed: u64,
    ) -> Result<Self> {
        if samples.n() != f.n() {
            return Err(Error::DimensionMismatch(format!(
                "sample set is for N={}, image has N={}",
                samples.n(),
                f.n()
            )));
        }
        if eta < 0.0 || !eta.is_finite() {
            return Err(Error::bad_param("eta", format!("noise level must be >= 0, got {eta}")));
        }
        let af = op.apply(f)?;
        let mut values = samples.restrict(af.data());
        if eta > 0.0 {
            let noise = draw_exact_noise(values.len(), eta, seed)?;
            for (v, e) in values.iter_mut().zip(noise) {
                *v += e;
            }
        }
        Ok(Measurement {
            n: f.n(),
            range_m: f.range_m(),
            eta,
            samples: samples.clone(),
            values,
        })
    }

    /// Wraps existing per-sample values (e.g. read from disk).
    pub fn from_values(
        n: usize,
        range_m: f64,
        eta: f64,
        samples: SampleSet,
        values: Vec<f64>,
    ) -> Result<Self> {
        if samples.n() != n {
            return Err(Error::DimensionMismatch("sample set size mismatch".into()));
        }
        if values.len() != samples.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} samples",
                values.len(),
                samples.len()
            )));
        }
        Ok(Measurement {
            n,
            range_m,
            eta,
            samples,
            values,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn range_m(&self) -> f64 {
        self.range_m
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn samples(&self) -> &SampleSet {
        &self.samples
    }

    /// Values in `samples().indices()` order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The observed data scattered to a zero-filled image.
    pub fn zero_filled(&self) -> Result<ImageGrid> {
        ImageGrid::new(self.n, self.range_m, self.samples.scatter(&self.values))
    }

    /// Mean squared residual `(1/m) sum_(k in Lambda) |(A u)[k] - g[k]|^2`.
    pub fn residual(&self, op: &MeasurementOp, u: &ImageGrid) -> Result<f64> {
        let au = op.apply(u)?;
        let on = self.samples.restrict(au.data());
        let m = self.values.len() as f64;
        Ok(on
            .iter()
            .zip(&self.values)
            .map(|(a, g)| (a - g) * (a - g))
            .sum::<f64>()
            / m)
    }

    /// Writes `k1,k2,value` CSV rows in sample order.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
        w.write_record(["k1", "k2", "value"]).map_err(|e| Error::Parse(e.to_string()))?;
        for (&i, v) in self.samples.indices().iter().zip(&self.values) {
            w.write_record([
                (i / self.n).to_string(),
                (i % self.n).to_string(),
                format!("{v:.17e}"),
            ])
            .map_err(|e| Error::Parse(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the [`Measurement::write_csv`] format; grid size, box bound and
    /// noise level are external metadata supplied by the caller.
    pub fn read_csv(path: impl AsRef<Path>, n: usize, range_m: f64, eta: f64) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            if rec.len() != 3 {
                return Err(Error::Parse("measurement CSV rows must be k1,k2,value".into()));
            }
            let k1: usize = rec[0].trim().parse().map_err(|_| Error::Parse(format!("bad k1: {}", &rec[0])))?;
            let k2: usize = rec[1].trim().parse().map_err(|_| Error::Parse(format!("bad k2: {}", &rec[1])))?;
            let v: f64 = rec[2].trim().parse().map_err(|_| Error::Parse(format!("bad value: {}", &rec[2])))?;
            if k1 >= n || k2 >= n {
                return Err(Error::Parse(format!("sample ({k1},{k2}) out of range for N={n}")));
            }
            indices.push(k1 * n + k2);
            values.push(v);
        }
        // Values must follow the sorted-index order the writer produced.
        let mut order: Vec<usize> = (0..indices.len()).collect();
        order.sort_by_key(|&i| indices[i]);
        let sorted_values: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        let sorted_indices: Vec<usize> = order.iter().map(|&i| indices[i]).collect();
        let samples = SampleSet::from_indices(n, sorted_indices)?;
        Measurement::from_values(n, range_m, eta, samples, sorted_values)
    }
}

/// Gaussian noise with empirical mean exactly 0 and empirical second moment
/// exactly `eta^2` (affine recenter/rescale of an i.i.d. draw).
pub fn draw_exact_noise(m: usize, eta: f64, seed: u64) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(Error::DegenerateMeasurement(
            "cannot match both noise moments with fewer than 2 samples".into(),
        ));
    }
    let normal = Normal::new(0.0, eta).map_err(|e| Error::bad_param("eta", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise: Vec<f64> = (0..m).map(|_| normal.sample(&mut rng)).collect();
    let mean = noise.iter().sum::<f64>() / m as f64;
    for v in &mut noise {
        *v -= mean;
    }
    let rms = (noise.iter().map(|v| v * v).sum::<f64>() / m as f64).sqrt();
    if rms == 0.0 {
        return Err(Error::DegenerateMeasurement(
            "degenerate noise draw (all values equal)".into(),
        ));
    }
    let s = eta / rms;
    for v in &mut noise {
        *v *= s;
    }
    Ok(noise)
}

/// Chi-square uniformity statistic for the sampler: over `trials` seeded
/// draws of `m`-subsets of the `n^2` pixels, forms the Pearson sum on
/// per-pixel inclusion counts with the finite-population variance
/// correction. Under uniform sampling the returned statistic is
/// asymptotically chi-square with `n^2 - 1` degrees of freedom.
pub fn sampler_uniformity_statistic(n: usize, m: usize, trials: usize, base_seed: u64) -> Result<f64> {
    let total = n * n;
    if m == 0 || m >= total {
        return Err(Error::bad_param("m", "need 1 <= m < n^2 for a non-degenerate statistic"));
    }
    let mut counts = vec![0u64; total];
    for t in 0..trials {
        let s = SampleSet::draw(n, m, base_seed + t as u64)?;
        for &i in s.indices() {
            counts[i] += 1;
        }
    }
    let p = m as f64 / total as f64;
    let mean = trials as f64 * p;
    let var = trials as f64 * p * (1.0 - p);
    let s: f64 = counts.iter().map(|&c| (c as f64 - mean).powi(2) / var).sum();
    Ok(s * (total as f64 - 1.0) / total as f64)
}
