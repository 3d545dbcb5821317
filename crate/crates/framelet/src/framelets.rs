//! B-spline tight frame filter banks.
//!
//! A bank of order `r` consists of one low-pass filter `a_0` and `r`
//! high-pass filters `a_1 .. a_r`, built from the averaging mask `p = [1,1]`
//! and the difference mask `q = [1,-1]`:
//!
//! ```text
//! a_0 = 2^-r * p*...*p              (r factors)
//! a_a = (-1)^(a+1) * 2^-r * sqrt(C(r,a)) * p^(r-a) * q^a    for a = 1..r
//! ```
//!
//! all centred on the support `{-floor(r/2), ..., ceil(r/2)}`. Two-dimensional
//! bands are tensor products `a_(a1,a2)[k] = a_a1[k1] * a_a2[k2]`; the band
//! index set excludes `(0,0)`, which only survives as the final low-pass
//! plane of a multi-level transform.
//!
//! The bank satisfies the unitary extension principle: on the Fourier side
//! the squared moduli of all filters sum to one, and the shifted products
//! cancel for the three half-period shifts. [`verify_uep`] checks both
//! identities numerically on a frequency grid.

use num_complex::Complex64;

use crate::{Error, Result};

/// One-dimensional filter with explicit integer support.
///
/// `taps[i]` is the coefficient at index `offset + i`, i.e. the filter is
/// supported on `{offset, ..., offset + taps.len() - 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Filter1D {
    taps: Vec<f64>,
    offset: i64,
}

impl Filter1D {
    /// Builds a filter from taps and the index of the first tap.
    pub fn new(taps: Vec<f64>, offset: i64) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::bad_param("taps", "filter must have at least one tap"));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::bad_param("taps", "filter taps must be finite"));
        }
        Ok(Filter1D { taps, offset })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Coefficient at index `k` (zero outside the support).
    pub fn at(&self, k: i64) -> f64 {
        let i = k - self.offset;
        if i < 0 || i as usize >= self.taps.len() {
            0.0
        } else {
            self.taps[i as usize]
        }
    }

    /// Sum of all taps (the DC response).
    pub fn sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    /// l1 norm of the taps.
    pub fn l1_norm(&self) -> f64 {
        self.taps.iter().map(|t| t.abs()).sum()
    }

    /// Time-reversed filter `b[k] = a[-k]`.
    pub fn reversed(&self) -> Filter1D {
        let mut taps = self.taps.clone();
        taps.reverse();
        Filter1D {
            taps,
            offset: -(self.offset + self.taps.len() as i64 - 1),
        }
    }

    /// Inserts `m - 1` zeros between consecutive taps (dilation by `m`).
    pub fn upsample(&self, m: usize) -> Filter1D {
        assert!(m >= 1, "upsampling factor must be positive");
        if m == 1 {
            return self.clone();
        }
        let mut taps = vec![0.0; (self.taps.len() - 1) * m + 1];
        for (i, &t) in self.taps.iter().enumerate() {
            taps[i * m] = t;
        }
        Filter1D {
            taps,
            offset: self.offset * m as i64,
        }
    }

    /// Full (aperiodic) convolution; supports add.
    pub fn convolve(&self, other: &Filter1D) -> Filter1D {
        let mut taps = vec![0.0; self.taps.len() + other.taps.len() - 1];
        for (i, &a) in self.taps.iter().enumerate() {
            for (j, &b) in other.taps.iter().enumerate() {
                taps[i + j] += a * b;
            }
        }
        Filter1D {
            taps,
            offset: self.offset + other.offset,
        }
    }

    /// Folds the filter onto `Z/nZ`: `P_n(a)[k] = sum_j a[k + n*j]`.
    pub fn periodize(&self, n: usize) -> Vec<f64> {
        assert!(n >= 1);
        let mut out = vec![0.0; n];
        for (i, &t) in self.taps.iter().enumerate() {
            let k = (self.offset + i as i64).rem_euclid(n as i64) as usize;
            out[k] += t;
        }
        out
    }

    /// Fourier transform `a_hat(xi) = sum_k a[k] exp(-i xi k)`.
    pub fn dft(&self, xi: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &t) in self.taps.iter().enumerate() {
            let k = (self.offset + i as i64) as f64;
            acc += Complex64::from_polar(t, -xi * k);
        }
        acc
    }
}

/// Exact binomial coefficient as f64 (exact for the small orders used here).
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    let mut row = vec![1.0_f64];
    for _ in 0..n {
        let mut next = vec![1.0; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    row[k]
}

/// A filter bank of order `r`: filters `a_0 .. a_r` indexed by `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    order: usize,
    filters: Vec<Filter1D>,
}

impl FilterBank {
    /// Wraps pre-built filters; validates the count and the low-pass DC sum.
    pub fn from_filters(order: usize, filters: Vec<Filter1D>) -> Result<Self> {
        if order < 1 {
            return Err(Error::BadOrder(order));
        }
        if filters.len() != order + 1 {
            return Err(Error::DimensionMismatch(format!(
                "bank of order {} needs {} filters, got {}",
                order,
                order + 1,
                filters.len()
            )));
        }
        let dc = filters[0].sum();
        if (dc - 1.0).abs() > 1e-12 {
            return Err(Error::bad_param(
                "filters",
                format!("low-pass taps must sum to 1, got {dc}"),
            ));
        }
        Ok(FilterBank { order, filters })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// 1D filter for sub-band index `alpha` in `0..=order`.
    pub fn filter(&self, alpha: usize) -> &Filter1D {
        &self.filters[alpha]
    }

    pub fn filters(&self) -> &[Filter1D] {
        &self.filters
    }

    /// High-pass 2D band indices `{0..r}^2 \ {(0,0)}` in lexicographic order.
    pub fn bands(&self) -> Vec<(usize, usize)> {
        let r = self.order;
        let mut out = Vec::with_capacity((r + 1) * (r + 1) - 1);
        for a1 in 0..=r {
            for a2 in 0..=r {
                if (a1, a2) != (0, 0) {
                    out.push((a1, a2));
                }
            }
        }
        out
    }

    /// Serializes as one line per filter: `alpha offset tap tap ...`,
    /// taps in scientific notation with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (alpha, f) in self.filters.iter().enumerate() {
            s.push_str(&format!("{} {}", alpha, f.offset()));
            for t in f.taps() {
                s.push_str(&format!(" {:.16e}", t));
            }
            s.push('\n');
        }
        s
    }

    /// Parses the [`FilterBank::to_text`] format.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut filters = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let alpha: usize = parts
                .next()
                .ok_or_else(|| Error::Parse(format!("line {}: missing alpha", lineno + 1)))?
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: bad alpha: {e}", lineno + 1)))?;
            if alpha != filters.len() {
                return Err(Error::Parse(format!(
                    "line {}: expected alpha {}, got {}",
                    lineno + 1,
                    filters.len(),
                    alpha
                )));
            }
            let offset: i64 = parts
                .next()
                .ok_or_else(|| Error::Parse(format!("line {}: missing offset", lineno + 1)))?
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: bad offset: {e}", lineno + 1)))?;
            let taps: std::result::Result<Vec<f64>, _> = parts.map(str::parse).collect();
            let taps =
                taps.map_err(|e| Error::Parse(format!("line {}: bad tap: {e}", lineno + 1)))?;
            filters.push(Filter1D::new(taps, offset)?);
        }
        if filters.is_empty() {
            return Err(Error::Parse("no filters in input".into()));
        }
        FilterBank::from_filters(filters.len() - 1, filters)
    }
}

/// Builds the B-spline bank of order `r >= 1`.
///
/// `r = 1` is the Haar pair, `r = 2` the piecewise-linear bank
/// `a_0 = 1/4[1,2,1]`, `a_1 = sqrt(2)/4[1,0,-1]`, `a_2 = 1/4[-1,2,-1]`,
/// `r = 3` / `r = 4` the quadratic and cubic banks; any larger order follows
/// the same closed form.
pub fn bspline_bank(r: usize) -> Result<FilterBank> {
    if r < 1 {
        return Err(Error::BadOrder(r));
    }
    let p = Filter1D::new(vec![1.0, 1.0], 0)?;
    let q = Filter1D::new(vec![1.0, -1.0], 0)?;
    let offset = -((r / 2) as i64);
    let scale = 0.5_f64.powi(r as i32);
    let mut filters = Vec::with_capacity(r + 1);
    for alpha in 0..=r {
        // p^(r-alpha) * q^alpha on the natural support {0..r}, then centred.
        let mut conv = Filter1D::new(vec![1.0], 0)?;
        for _ in 0..(r - alpha) {
            conv = conv.convolve(&p);
        }
        for _ in 0..alpha {
            conv = conv.convolve(&q);
        }
        // low-pass stays positive; high-pass signs follow (-1)^(alpha+1), a
        // global per-filter sign with no effect on the frame identities
        let sign = if alpha == 0 || alpha % 2 == 1 { 1.0 } else { -1.0 };
        let coef = sign * scale * binomial(r, alpha).sqrt();
        let taps = conv.taps().iter().map(|t| coef * t).collect();
        filters.push(Filter1D::new(taps, offset)?);
    }
    FilterBank::from_filters(r, filters)
}

/// Separable 2D filter for band `(a1, a2)` at decomposition level `level`.
///
/// Level 0 is the plain tensor band; level `l` is the dilated band convolved
/// with all coarser low-pass factors (the undecimated cascade).
#[derive(Debug, Clone, PartialEq)]
pub struct LevelFilter {
    level: usize,
    band: (usize, usize),
    row: Filter1D,
    col: Filter1D,
}

impl LevelFilter {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn band(&self) -> (usize, usize) {
        self.band
    }

    /// Filter applied along axis 0 (first index).
    pub fn row_filter(&self) -> &Filter1D {
        &self.row
    }

    /// Filter applied along axis 1 (second index).
    pub fn col_filter(&self) -> &Filter1D {
        &self.col
    }

    /// Materializes the full 2D mask, row-major, with the support offset of
    /// element `(0,0)`.
    pub fn taps2d(&self) -> (Vec<f64>, (i64, i64), (usize, usize)) {
        let (nr, nc) = (self.row.len(), self.col.len());
        let mut taps = vec![0.0; nr * nc];
        for (i, &a) in self.row.taps().iter().enumerate() {
            for (j, &b) in self.col.taps().iter().enumerate() {
                taps[i * nc + j] = a * b;
            }
        }
        (taps, (self.row.offset(), self.col.offset()), (nr, nc))
    }

    /// 2D coefficient at index `(k1, k2)`.
    pub fn at(&self, k1: i64, k2: i64) -> f64 {
        self.row.at(k1) * self.col.at(k2)
    }

    /// Folds the 2D mask onto the `n x n` torus, row-major.
    pub fn periodize(&self, n: usize) -> Vec<f64> {
        let pr = self.row.periodize(n);
        let pc = self.col.periodize(n);
        let mut out = vec![0.0; n * n];
        for k1 in 0..n {
            for k2 in 0..n {
                out[k1 * n + k2] = pr[k1] * pc[k2];
            }
        }
        out
    }
}

/// 1D level-`l` cascade for sub-band `alpha`: the `2^l`-dilated filter
/// convolved with the dilated low-pass filters of all coarser levels.
pub fn cascade_1d(bank: &FilterBank, alpha: usize, level: usize) -> Filter1D {
    let mut f = bank.filter(alpha).upsample(1 << level);
    for l in (0..level).rev() {
        f = f.convolve(&bank.filter(0).upsample(1 << l));
    }
    f
}

/// Plain tensor-product band filter (level 0).
pub fn tensor_band(bank: &FilterBank, band: (usize, usize)) -> Result<LevelFilter> {
    level_filter(bank, band, 0)
}

/// Separable level-`level` band filter for `band = (a1, a2)`.
pub fn level_filter(bank: &FilterBank, band: (usize, usize), level: usize) -> Result<LevelFilter> {
    let r = bank.order();
    if band.0 > r || band.1 > r {
        return Err(Error::bad_param(
            "band",
            format!("band {:?} out of range for order {}", band, r),
        ));
    }
    Ok(LevelFilter {
        level,
        band,
        row: cascade_1d(bank, band.0, level),
        col: cascade_1d(bank, band.1, level),
    })
}

/// Maximum deviation from the unitary extension principle over a uniform
/// `grid_n x grid_n` frequency grid on `[-pi, pi)^2`.
///
/// Checks the partition identity `sum_bands |a_hat|^2 = 1` and the three
/// shifted-product identities for `nu` in `{(0,pi),(pi,0),(pi,pi)}`; returns
/// the largest absolute residual. `grid_n` must be even and at least 8 so
/// that `xi + pi` lands back on the grid.
pub fn verify_uep(bank: &FilterBank, grid_n: usize) -> Result<f64> {
    if grid_n < 8 || grid_n % 2 != 0 {
        return Err(Error::bad_param(
            "grid_n",
            format!("need an even grid of at least 8 points, got {grid_n}"),
        ));
    }
    let r = bank.order();
    // Cached 1D responses at every grid frequency; xi + pi is a half-grid
    // rotation, so shifted values are lookups.
    let mut resp = vec![vec![Complex64::new(0.0, 0.0); grid_n]; r + 1];
    for (alpha, row) in resp.iter_mut().enumerate() {
        for (i, v) in row.iter_mut().enumerate() {
            let xi = -std::f64::consts::PI
                + 2.0 * std::f64::consts::PI * i as f64 / grid_n as f64;
            *v = bank.filter(alpha).dft(xi);
        }
    }
    let half = grid_n / 2;
    let shifts = [(0usize, half), (half, 0usize), (half, half)];
    let mut worst = 0.0_f64;
    for i in 0..grid_n {
        for j in 0..grid_n {
            let mut power = 0.0;
            for a1 in 0..=r {
                for a2 in 0..=r {
                    power += (resp[a1][i] * resp[a2][j]).norm_sqr();
                }
            }
            worst = worst.max((power - 1.0).abs());
            for &(s1, s2) in &shifts {
                let i2 = (i + s1) % grid_n;
                let j2 = (j + s2) % grid_n;
                let mut cross = Complex64::new(0.0, 0.0);
                for a1 in 0..=r {
                    for a2 in 0..=r {
                        cross += resp[a1][i]
                            * resp[a2][j]
                            * (resp[a1][i2] * resp[a2][j2]).conj();
                    }
                }
                worst = worst.max(cross.norm());
            }
        }
    }
    Ok(worst)
}
