//! Undecimated frame transforms on periodic grids.
//!
//! The analysis operator `W` maps an `N x N` image to `L*(r+1)^2 - L + 1`
//! coefficient planes of the same size: for each level `l` every 2D band
//! `(a1, a2) != (0,0)` of the order-`r` bank, plus one final low-pass plane
//! at level `L-1`. Filtering is periodic (circular) and uses the dilated
//! filter cascade, so no plane is ever downsampled.
//!
//! `W` is a tight frame: `synthesize(analyze(u)) == u` and
//! `||W u||_2 == ||u||_2`, with `synthesize` the exact adjoint of `analyze`.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::framelets::{Filter1D, FilterBank, LevelFilter};
use crate::grid::ImageGrid;
use crate::{Error, Result};

/// Identifies one coefficient plane: decomposition level and 2D band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PlaneKey {
    pub level: usize,
    pub band: (usize, usize),
}

impl PlaneKey {
    /// The single unfiltered plane `(L-1, (0,0))` kept by the transform.
    pub fn is_lowpass(&self) -> bool {
        self.band == (0, 0)
    }
}

/// Plane order: by level, then band `(a1, a2)` lexicographically; the band
/// `(0,0)` is skipped everywhere except at the final level.
pub fn plane_keys(order: usize, levels: usize) -> Vec<PlaneKey> {
    let mut keys = Vec::with_capacity(levels * (order + 1) * (order + 1) - levels + 1);
    for l in 0..levels {
        for a1 in 0..=order {
            for a2 in 0..=order {
                if (a1, a2) == (0, 0) && l != levels - 1 {
                    continue;
                }
                keys.push(PlaneKey {
                    level: l,
                    band: (a1, a2),
                });
            }
        }
    }
    keys
}

fn plane_index(order: usize, levels: usize, key: PlaneKey) -> usize {
    let per_level = (order + 1) * (order + 1) - 1;
    let lex = key.band.0 * (order + 1) + key.band.1;
    if key.level == levels - 1 {
        key.level * per_level + lex
    } else {
        debug_assert!(lex >= 1);
        key.level * per_level + lex - 1
    }
}

/// Frame coefficients of one image: same-size planes in [`plane_keys`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameCoefficients {
    n: usize,
    order: usize,
    levels: usize,
    range_m: f64,
    planes: Vec<Vec<f64>>,
}

impl FrameCoefficients {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn range_m(&self) -> f64 {
        self.range_m
    }

    pub fn keys(&self) -> Vec<PlaneKey> {
        plane_keys(self.order, self.levels)
    }

    pub fn plane_count(&self) -> usize {
        self.planes.len()
    }

    pub fn plane(&self, key: PlaneKey) -> &[f64] {
        &self.planes[plane_index(self.order, self.levels, key)]
    }

    pub fn plane_by_index(&self, idx: usize) -> &[f64] {
        &self.planes[idx]
    }

    pub fn planes(&self) -> &[Vec<f64>] {
        &self.planes
    }

    pub fn planes_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.planes
    }

    /// Zero coefficients with the same shape as `self`.
    pub fn zeros_like(&self) -> FrameCoefficients {
        FrameCoefficients {
            n: self.n,
            order: self.order,
            levels: self.levels,
            range_m: self.range_m,
            planes: vec![vec![0.0; self.n * self.n]; self.planes.len()],
        }
    }

    /// Sum of squares over every plane (including the low-pass plane).
    pub fn norm_sqr(&self) -> f64 {
        self.planes
            .iter()
            .map(|p| p.iter().map(|v| v * v).sum::<f64>())
            .sum()
    }

    /// Euclidean inner product against matching coefficients.
    pub fn dot(&self, other: &FrameCoefficients) -> Result<f64> {
        self.check_shape(other)?;
        let mut acc = 0.0;
        for (a, b) in self.planes.iter().zip(&other.planes) {
            for (x, y) in a.iter().zip(b) {
                acc += x * y;
            }
        }
        Ok(acc)
    }

    pub(crate) fn check_shape(&self, other: &FrameCoefficients) -> Result<()> {
        if self.n != other.n || self.order != other.order || self.levels != other.levels {
            return Err(Error::DimensionMismatch(format!(
                "coefficient shapes differ: (N={},r={},L={}) vs (N={},r={},L={})",
                self.n, self.order, self.levels, other.n, other.order, other.levels
            )));
        }
        Ok(())
    }

    /// Writes the binary container: magic, `u32` N/r/L/plane-count, `f64`
    /// range, the plane directory (level, a1, a2 per plane), then row-major
    /// little-endian `f64` planes in directory order.
    pub fn write_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(b"FRMC0001")?;
        for v in [self.n, self.order, self.levels, self.planes.len()] {
            f.write_all(&(v as u32).to_le_bytes())?;
        }
        f.write_all(&self.range_m.to_le_bytes())?;
        for key in self.keys() {
            for v in [key.level, key.band.0, key.band.1] {
                f.write_all(&(v as u32).to_le_bytes())?;
            }
        }
        for plane in &self.planes {
            for &v in plane {
                f.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Reads the [`FrameCoefficients::write_binary`] format.
    pub fn read_binary(path: impl AsRef<Path>) -> Result<Self> {
        let mut f = fs::File::open(path)?;
        let mut magic = [0u8; 8];
        f.read_exact(&mut magic)?;
        if &magic != b"FRMC0001" {
            return Err(Error::Parse("bad coefficient container magic".into()));
        }
        let mut b4 = [0u8; 4];
        let mut next_u32 = |f: &mut fs::File| -> Result<usize> {
            f.read_exact(&mut b4)?;
            Ok(u32::from_le_bytes(b4) as usize)
        };
        let n = next_u32(&mut f)?;
        let order = next_u32(&mut f)?;
        let levels = next_u32(&mut f)?;
        let count = next_u32(&mut f)?;
        let expected = plane_keys(order, levels);
        if count != expected.len() {
            return Err(Error::Parse(format!(
                "container lists {} planes, shape (r={},L={}) requires {}",
                count,
                order,
                levels,
                expected.len()
            )));
        }
        let mut b8 = [0u8; 8];
        f.read_exact(&mut b8)?;
        let range_m = f64::from_le_bytes(b8);
        for want in &expected {
            let level = next_u32(&mut f)?;
            let a1 = next_u32(&mut f)?;
            let a2 = next_u32(&mut f)?;
            if level != want.level || (a1, a2) != want.band {
                return Err(Error::Parse(format!(
                    "plane directory mismatch: got (l={level}, band=({a1},{a2})), expected (l={}, band={:?})",
                    want.level, want.band
                )));
            }
        }
        let mut planes = Vec::with_capacity(count);
        for _ in 0..count {
            let mut plane = vec![0.0; n * n];
            for v in &mut plane {
                f.read_exact(&mut b8)?;
                *v = f64::from_le_bytes(b8);
            }
            planes.push(plane);
        }
        Ok(FrameCoefficients {
            n,
            order,
            levels,
            range_m,
            planes,
        })
    }
}

/// Circular convolution of one axis with a (possibly dilated) 1D filter:
/// `out[k] = sum_j a[j] * u[k - dilation*j]`, indices mod `n`.
pub(crate) fn conv_axis(data: &[f64], n: usize, f: &Filter1D, axis: usize, dilation: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for (i, &t) in f.taps().iter().enumerate() {
        if t == 0.0 {
            continue;
        }
        let shift = ((f.offset() + i as i64) * dilation as i64).rem_euclid(n as i64) as usize;
        if axis == 0 {
            for k1 in 0..n {
                let src = (k1 + n - shift) % n;
                let (o, s) = (k1 * n, src * n);
                for k2 in 0..n {
                    out[o + k2] += t * data[s + k2];
                }
            }
        } else {
            for k1 in 0..n {
                let o = k1 * n;
                for k2 in 0..n {
                    let src = (k2 + n - shift) % n;
                    out[o + k2] += t * data[o + src];
                }
            }
        }
    }
    out
}

/// Circular convolution along one axis of an image.
pub fn circ_conv_axis(u: &ImageGrid, f: &Filter1D, axis: usize) -> Result<ImageGrid> {
    if axis > 1 {
        return Err(Error::bad_param("axis", "axis must be 0 or 1"));
    }
    u.with_data(conv_axis(u.data(), u.n(), f, axis, 1))
}

/// Circular convolution with a separable 2D mask.
pub fn circ_conv(u: &ImageGrid, mask: &LevelFilter) -> Result<ImageGrid> {
    let tmp = conv_axis(u.data(), u.n(), mask.row_filter(), 0, 1);
    u.with_data(conv_axis(&tmp, u.n(), mask.col_filter(), 1, 1))
}

fn check_levels(n: usize, levels: usize) -> Result<u32> {
    if !n.is_power_of_two() {
        return Err(Error::BadGridSize {
            n,
            reason: "transform requires a power-of-two side length",
        });
    }
    let j = n.trailing_zeros() as usize;
    if levels < 1 || levels > j.saturating_sub(1) {
        return Err(Error::BadLevels { levels, n });
    }
    Ok(j as u32)
}

/// Analysis transform `W u`: all high-pass planes over `levels` levels plus
/// the final low-pass plane.
pub fn analyze(u: &ImageGrid, bank: &FilterBank, levels: usize) -> Result<FrameCoefficients> {
    check_levels(u.n(), levels)?;
    let n = u.n();
    let r = bank.order();
    let keys = plane_keys(r, levels);
    let mut planes = vec![Vec::new(); keys.len()];
    // The analysis filters are the time-reversed bank filters, dilated by
    // 2^l at level l and applied to the running low-pass image.
    let rev: Vec<Filter1D> = (0..=r).map(|a| bank.filter(a).reversed()).collect();
    let mut cur = u.data().to_vec();
    for l in 0..levels {
        let d = 1usize << l;
        let row_pass: Vec<Vec<f64>> = (0..=r)
            .map(|a1| conv_axis(&cur, n, &rev[a1], 0, d))
            .collect();
        let mut next_low = Vec::new();
        for a1 in 0..=r {
            for a2 in 0..=r {
                let plane = conv_axis(&row_pass[a1], n, &rev[a2], 1, d);
                if (a1, a2) == (0, 0) {
                    if l == levels - 1 {
                        let idx = plane_index(r, levels, PlaneKey { level: l, band: (0, 0) });
                        planes[idx] = plane.clone();
                    }
                    next_low = plane;
                } else {
                    let idx = plane_index(r, levels, PlaneKey { level: l, band: (a1, a2) });
                    planes[idx] = plane;
                }
            }
        }
        cur = next_low;
    }
    Ok(FrameCoefficients {
        n,
        order: r,
        levels,
        range_m: u.range_m(),
        planes,
    })
}

/// Synthesis transform `W^T c`, the exact adjoint of [`analyze`]. For
/// coefficients produced by [`analyze`] this reconstructs the image.
pub fn synthesize(c: &FrameCoefficients, bank: &FilterBank) -> Result<ImageGrid> {
    check_levels(c.n, c.levels)?;
    if bank.order() != c.order {
        return Err(Error::DimensionMismatch(format!(
            "bank order {} does not match coefficient order {}",
            bank.order(),
            c.order
        )));
    }
    let n = c.n;
    let r = c.order;
    let mut cur = c
        .plane(PlaneKey {
            level: c.levels - 1,
            band: (0, 0),
        })
        .to_vec();
    for l in (0..c.levels).rev() {
        let d = 1usize << l;
        let mut acc = vec![0.0; n * n];
        for a1 in 0..=r {
            let mut col_sum = vec![0.0; n * n];
            for a2 in 0..=r {
                let plane = if (a1, a2) == (0, 0) {
                    &cur
                } else {
                    c.plane(PlaneKey { level: l, band: (a1, a2) })
                };
                let col = conv_axis(plane, n, bank.filter(a2), 1, d);
                for (o, v) in col_sum.iter_mut().zip(col) {
                    *o += v;
                }
            }
            let row = conv_axis(&col_sum, n, bank.filter(a1), 0, d);
            for (o, v) in acc.iter_mut().zip(row) {
                *o += v;
            }
        }
        cur = acc;
    }
    ImageGrid::new(n, c.range_m, cur)
}

/// Level-dependent coefficient weights `lambda_(l,band) = 2^(beta * (J-l-1))`
/// with zero weight on the low-pass plane (`J = log2 N`).
///
/// The data model allows per-pixel weights via
/// [`LambdaWeights::with_per_pixel`]; the default schedule is constant on
/// each plane.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaWeights {
    beta: f64,
    n: usize,
    order: usize,
    levels: usize,
    scalars: Vec<f64>,
    per_pixel: Option<Vec<Vec<f64>>>,
}

impl LambdaWeights {
    /// Builds the default dyadic schedule.
    pub fn schedule(n: usize, order: usize, levels: usize, beta: f64) -> Result<Self> {
        let j = check_levels(n, levels)? as i64;
        if !(-1.0..=1.0).contains(&beta) {
            return Err(Error::bad_param("beta", format!("beta must lie in [-1,1], got {beta}")));
        }
        let scalars = plane_keys(order, levels)
            .iter()
            .map(|key| {
                if key.is_lowpass() {
                    0.0
                } else {
                    // Upsilon(l) = J - l - 1 is a positive integer for
                    // l <= L-1 <= J-2 and never exceeds J = log2 sqrt(|Omega|) * 2 / 2.
                    2f64.powf(beta * (j - key.level as i64 - 1) as f64)
                }
            })
            .collect();
        Ok(LambdaWeights {
            beta,
            n,
            order,
            levels,
            scalars,
            per_pixel: None,
        })
    }

    /// Replaces the schedule with explicit per-pixel weights (one map per
    /// plane, row-major, low-pass map ignored and treated as zero).
    pub fn with_per_pixel(mut self, maps: Vec<Vec<f64>>) -> Result<Self> {
        if maps.len() != self.scalars.len() {
            return Err(Error::DimensionMismatch(format!(
                "need {} weight maps, got {}",
                self.scalars.len(),
                maps.len()
            )));
        }
        if maps.iter().any(|m| m.len() != self.n * self.n) {
            return Err(Error::DimensionMismatch("weight map size mismatch".into()));
        }
        self.per_pixel = Some(maps);
        Ok(self)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Per-plane scalar weight (0 on the low-pass plane).
    pub fn scalar(&self, plane_idx: usize) -> f64 {
        self.scalars[plane_idx]
    }

    /// Weight of one coefficient.
    #[inline]
    pub fn value(&self, plane_idx: usize, pix: usize) -> f64 {
        if self.scalars[plane_idx] == 0.0 {
            return 0.0; // low-pass stays unweighted even with custom maps
        }
        match &self.per_pixel {
            Some(maps) => maps[plane_idx][pix],
            None => self.scalars[plane_idx],
        }
    }
}

/// Weighted l1 norm of the high-pass coefficients; the low-pass plane does
/// not contribute.
pub fn weighted_l1(c: &FrameCoefficients, w: &LambdaWeights) -> Result<f64> {
    if c.n != w.n || c.order != w.order || c.levels != w.levels {
        return Err(Error::DimensionMismatch(
            "weights do not match coefficient shape".into(),
        ));
    }
    let keys = c.keys();
    let mut acc = 0.0;
    for (idx, key) in keys.iter().enumerate() {
        if key.is_lowpass() {
            continue;
        }
        let plane = &c.planes[idx];
        if w.per_pixel.is_none() {
            let s = w.scalars[idx];
            acc += s * plane.iter().map(|v| v.abs()).sum::<f64>();
        } else {
            for (pix, v) in plane.iter().enumerate() {
                acc += w.value(idx, pix) * v.abs();
            }
        }
    }
    Ok(acc)
}
