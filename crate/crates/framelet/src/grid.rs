//! Square periodic image grids and their on-disk formats.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::{Error, Result};

/// An `n x n` image of f64 samples, row-major, with a declared dynamic range
/// `[0, range_m]`.
///
/// The grid is logically periodic: all transforms and operators index it
/// modulo `n`. Values are not clamped on construction; the range is the
/// contract used by the solver's box constraint and by the 8-bit image
/// export.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    n: usize,
    range_m: f64,
    data: Vec<f64>,
}

impl ImageGrid {
    /// Builds a grid from row-major data.
    pub fn new(n: usize, range_m: f64, data: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::BadGridSize {
                n,
                reason: "side length must be at least 2",
            });
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} samples for N={}, got {}",
                n * n,
                n,
                data.len()
            )));
        }
        if !(range_m > 0.0) || !range_m.is_finite() {
            return Err(Error::bad_param("range_m", "dynamic range must be positive"));
        }
        Ok(ImageGrid { n, range_m, data })
    }

    /// All-zero grid.
    pub fn zeros(n: usize, range_m: f64) -> Result<Self> {
        ImageGrid::new(n, range_m, vec![0.0; n * n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn range_m(&self) -> f64 {
        self.range_m
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn at(&self, k1: usize, k2: usize) -> f64 {
        self.data[k1 * self.n + k2]
    }

    #[inline]
    pub fn set(&mut self, k1: usize, k2: usize, v: f64) {
        self.data[k1 * self.n + k2] = v;
    }

    /// Replaces the sample data, keeping size and range.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self> {
        ImageGrid::new(self.n, self.range_m, data)
    }

    /// Squared Euclidean norm of all samples.
    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Clamps every sample into `[0, range_m]` in place.
    pub fn clamp_to_range(&mut self) {
        let m = self.range_m;
        for v in &mut self.data {
            *v = v.clamp(0.0, m);
        }
    }

    /// log2 of the side length; errors unless `n` is a power of two.
    pub fn log2_n(&self) -> Result<u32> {
        if !self.n.is_power_of_two() {
            return Err(Error::BadGridSize {
                n: self.n,
                reason: "side length must be a power of two",
            });
        }
        Ok(self.n.trailing_zeros())
    }

    /// Writes a binary PGM (P5, maxval 255); samples map linearly from
    /// `[0, range_m]` to `[0, 255]` with clamping and round-to-nearest.
    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = Vec::with_capacity(self.n * self.n + 32);
        out.extend_from_slice(format!("P5\n{} {}\n255\n", self.n, self.n).as_bytes());
        for &v in &self.data {
            let byte = (v / self.range_m * 255.0).round().clamp(0.0, 255.0) as u8;
            out.push(byte);
        }
        fs::write(path, out)?;
        Ok(())
    }

    /// Reads a binary PGM (P5, maxval 255) and maps `[0, 255]` linearly to
    /// `[0, range_m]`. Only square images are accepted.
    pub fn read_pgm(path: impl AsRef<Path>, range_m: f64) -> Result<Self> {
        let bytes = fs::read(path)?;
        let mut pos = 0usize;

        fn next_token(bytes: &[u8], pos: &mut usize) -> Result<String> {
            // Skips whitespace and '#' comment lines between header fields.
            loop {
                while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                    *pos += 1;
                }
                if *pos < bytes.len() && bytes[*pos] == b'#' {
                    while *pos < bytes.len() && bytes[*pos] != b'\n' {
                        *pos += 1;
                    }
                    continue;
                }
                break;
            }
            let start = *pos;
            while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if start == *pos {
                return Err(Error::Parse("truncated PGM header".into()));
            }
            Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
        }

        let magic = next_token(&bytes, &mut pos)?;
        if magic != "P5" {
            return Err(Error::Parse(format!("expected P5 magic, got {magic}")));
        }
        let w: usize = next_token(&bytes, &mut pos)?
            .parse()
            .map_err(|e| Error::Parse(format!("bad width: {e}")))?;
        let h: usize = next_token(&bytes, &mut pos)?
            .parse()
            .map_err(|e| Error::Parse(format!("bad height: {e}")))?;
        let maxval: usize = next_token(&bytes, &mut pos)?
            .parse()
            .map_err(|e| Error::Parse(format!("bad maxval: {e}")))?;
        if w != h {
            return Err(Error::Parse(format!("image must be square, got {w}x{h}")));
        }
        if maxval != 255 {
            return Err(Error::Parse(format!("only maxval 255 supported, got {maxval}")));
        }
        // Exactly one whitespace byte separates header and raster.
        pos += 1;
        if bytes.len() < pos + w * h {
            return Err(Error::Parse("truncated PGM raster".into()));
        }
        let data = bytes[pos..pos + w * h]
            .iter()
            .map(|&b| b as f64 / 255.0 * range_m)
            .collect();
        ImageGrid::new(w, range_m, data)
    }

    /// Writes the raw format: `u64` side length, `f64` range, then `n*n`
    /// row-major little-endian f64 samples.
    pub fn write_raw(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(&(self.n as u64).to_le_bytes())?;
        f.write_all(&self.range_m.to_le_bytes())?;
        for &v in &self.data {
            f.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads the [`ImageGrid::write_raw`] format.
    pub fn read_raw(path: impl AsRef<Path>) -> Result<Self> {
        let mut f = fs::File::open(path)?;
        let mut buf8 = [0u8; 8];
        f.read_exact(&mut buf8)?;
        let n = u64::from_le_bytes(buf8) as usize;
        f.read_exact(&mut buf8)?;
        let range_m = f64::from_le_bytes(buf8);
        let mut data = vec![0.0; n * n];
        for v in &mut data {
            f.read_exact(&mut buf8)?;
            *v = f64::from_le_bytes(buf8);
        }
        ImageGrid::new(n, range_m, data)
    }
}
