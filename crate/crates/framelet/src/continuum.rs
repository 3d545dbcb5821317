//! Function-space counterpart of the discrete machinery: periodic test
//! functions on `[0,1)^2`, cardinal B-spline scaling functions, quadrature
//! sampling and interpolation between functions and grids, L2 distances,
//! Bessel-type stability ratios, and the frame-coefficient decay constant.
//!
//! A grid image and a function are linked in both directions:
//!
//! * sampling: `u[k] = 2^(2J) <f, phi(2^J . - k)>` (local averaging against
//!   the scaled B-spline), computed by composite Gauss-Legendre quadrature;
//! * interpolation: `u_J(x) = sum_k u[k] phi(2^J x - k)`, periodic.
//!
//! For a bank of order `r` the matching scaling function is the cardinal
//! B-spline of order `n = r` (support `[0, r]`), whose refinement mask is
//! exactly the bank's low-pass filter; this makes the discrete transform of
//! a sampled image agree with the continuum framelet inner products, which
//! is what [`estimate_decay_constant`] exploits.

use std::fmt;
use std::sync::Arc;

use crate::framelets::FilterBank;
use crate::grid::ImageGrid;
use crate::transform::{analyze, plane_keys, PlaneKey};
use crate::{Error, Result};

/// A bounded periodic function on the unit torus `[0,1)^2`.
#[derive(Clone)]
pub struct PeriodicFunction {
    name: String,
    box_m: f64,
    eval: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for PeriodicFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PeriodicFunction({}, box={})", self.name, self.box_m)
    }
}

fn frac(t: f64) -> f64 {
    t - t.floor()
}

impl PeriodicFunction {
    /// Wraps an evaluator; values are expected to lie in `[0, box_m]`.
    pub fn new(
        name: impl Into<String>,
        box_m: f64,
        eval: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        PeriodicFunction {
            name: name.into(),
            box_m,
            eval: Arc::new(eval),
        }
    }

    /// Constant function at half the box bound.
    pub fn constant(box_m: f64) -> Self {
        let c = 0.5 * box_m;
        PeriodicFunction::new("constant", box_m, move |_, _| c)
    }

    /// Piecewise-linear ramp with jump discontinuities: a sawtooth in `x1`
    /// (jumps at `x1 = 0` and `x1 = 1/2`) blended with a continuous tent
    /// wave in `x2`. Low-regularity catalog entry.
    pub fn ramp_with_jump(box_m: f64) -> Self {
        PeriodicFunction::new("ramp", box_m, move |x1, x2| {
            let saw = frac(2.0 * x1);
            let tri = 1.0 - (2.0 * frac(x2) - 1.0).abs();
            box_m * (0.6 * saw + 0.4 * tri)
        })
    }

    /// Smooth periodic bump `box_m (1 + sin(2 pi x1) sin(2 pi x2)) / 2`.
    pub fn smooth_bump(box_m: f64) -> Self {
        PeriodicFunction::new("bump", box_m, move |x1, x2| {
            let s = (2.0 * std::f64::consts::PI * x1).sin() * (2.0 * std::f64::consts::PI * x2).sin();
            0.5 * box_m * (1.0 + s)
        })
    }

    /// Catalog lookup: `constant`, `ramp`, or `bump`.
    pub fn by_name(name: &str, box_m: f64) -> Result<Self> {
        match name {
            "constant" => Ok(Self::constant(box_m)),
            "ramp" => Ok(Self::ramp_with_jump(box_m)),
            "bump" => Ok(Self::smooth_bump(box_m)),
            other => Err(Error::bad_param(
                "function",
                format!("unknown catalog function {other:?} (try constant, ramp, bump)"),
            )),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn box_m(&self) -> f64 {
        self.box_m
    }

    /// Evaluates with periodic wrapping of the coordinates.
    #[inline]
    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        (self.eval)(frac(x1), frac(x2))
    }
}

/// Cardinal B-spline `B_n` of order `n` (support `[0, n]`, degree `n-1`),
/// evaluated by the two-term recursion
/// `B_n(t) = (t B_(n-1)(t) + (n-t) B_(n-1)(t-1)) / (n-1)`.
pub fn bspline(order_n: usize, t: f64) -> f64 {
    debug_assert!(order_n >= 1);
    if t < 0.0 || t >= order_n as f64 {
        return 0.0;
    }
    if order_n == 1 {
        return 1.0;
    }
    let nm1 = (order_n - 1) as f64;
    (t * bspline(order_n - 1, t) + (order_n as f64 - t) * bspline(order_n - 1, t - 1.0)) / nm1
}

/// The scaled, periodized B-spline family `phi(2^J x - k)` on the torus.
///
/// The profile is the centred spline `phi(t) = B_n(t + floor(n/2))` with
/// support `[-floor(n/2), n - floor(n/2))`, matching the alignment of the
/// centred filter-bank masks: the low-pass filter of the order-`n` bank is
/// exactly the refinement mask of this `phi`, which is what makes the
/// discrete transform of a sampled image agree with continuum framelet
/// inner products level by level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BsplineScaler {
    order_n: usize,
    level_j: u32,
}

impl BsplineScaler {
    /// Requires `2^J >= n` so the periodized translates keep single wrap.
    pub fn new(order_n: usize, level_j: u32) -> Result<Self> {
        if order_n == 0 {
            return Err(Error::BadOrder(order_n));
        }
        if (1usize << level_j) < order_n {
            return Err(Error::bad_param(
                "level_j",
                format!("need 2^J >= spline order, got 2^{level_j} < {order_n}"),
            ));
        }
        Ok(BsplineScaler { order_n, level_j })
    }

    pub fn order(&self) -> usize {
        self.order_n
    }

    pub fn level(&self) -> u32 {
        self.level_j
    }

    pub fn grid_n(&self) -> usize {
        1usize << self.level_j
    }

    /// Centring shift `floor(n/2)` of the profile.
    pub fn shift(&self) -> usize {
        self.order_n / 2
    }

    /// The unscaled profile `phi(t) = B_n(t + floor(n/2))`.
    pub fn profile(&self, t: f64) -> f64 {
        refinable_profile(self.order_n, t)
    }

    /// One periodized axis factor `phi(2^J x - k)`, `x` on the torus.
    pub fn eval_axis(&self, x: f64, k: i64) -> f64 {
        let scale = self.grid_n() as f64;
        let t = (scale * frac(x) - k as f64 + self.shift() as f64).rem_euclid(scale);
        bspline(self.order_n, t)
    }

    /// Tensor value `phi(2^J x1 - k1) phi(2^J x2 - k2)`.
    pub fn eval2(&self, x: (f64, f64), k: (i64, i64)) -> f64 {
        self.eval_axis(x.0, k.0) * self.eval_axis(x.1, k.1)
    }

    /// Maximum deviation of `sum_k phi(2^J x - k)` from 1 over random
    /// points (the family is a partition of unity on each axis).
    pub fn partition_of_unity_defect(&self, trials: usize, seed: u64) -> f64 {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_grid = self.grid_n() as i64;
        let shift = self.shift() as i64;
        let mut worst = 0.0f64;
        for _ in 0..trials {
            let x: f64 = rng.gen();
            let t0 = (n_grid as f64) * x;
            let base = t0.floor() as i64 + shift;
            let mut sum = 0.0;
            for dk in 0..self.order_n as i64 {
                sum += self.eval_axis(x, (base - dk).rem_euclid(n_grid));
            }
            worst = worst.max((sum - 1.0).abs());
        }
        worst
    }
}

/// Centred refinable profile `phi(t) = B_n(t + floor(n/2))`, the function
/// whose refinement mask is the order-`n` bank's low-pass filter.
pub fn refinable_profile(order_n: usize, t: f64) -> f64 {
    bspline(order_n, t + (order_n / 2) as f64)
}

/// Gauss-Legendre nodes and weights on `[0, 1]` (weights sum to 1).
pub fn gauss_legendre(q: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if q < 2 {
        return Err(Error::bad_param("quad_order", "need at least 2 quadrature points"));
    }
    if q > 64 {
        return Err(Error::bad_param("quad_order", "quadrature order capped at 64"));
    }
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for i in 0..q {
        // initial guess for the i-th root of P_q on [-1, 1]
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        for _ in 0..100 {
            // evaluate P_q and P_q' by the three-term recurrence
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=q {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = q as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for k in 2..=q {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = q as f64 * (x * p1 - p0) / (x * x - 1.0);
        // roots come out descending in x, so (1 - x) / 2 ascends
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    Ok((nodes, weights))
}

/// Function values on the composite quadrature lattice
/// `x = (cell + node) / cells` per axis.
fn lattice_values(
    f: &PeriodicFunction,
    cells: usize,
    nodes: &[f64],
) -> Vec<f64> {
    let q = nodes.len();
    let mut coords = Vec::with_capacity(cells * q);
    for c in 0..cells {
        for s in nodes {
            coords.push((c as f64 + s) / cells as f64);
        }
    }
    let mut vals = vec![0.0; coords.len() * coords.len()];
    for (i, &x1) in coords.iter().enumerate() {
        for (j, &x2) in coords.iter().enumerate() {
            vals[i * coords.len() + j] = f.eval(x1, x2);
        }
    }
    vals
}

/// Samples a function to a `2^J` grid: `u[k] = 2^(2J) <f, phi_(J,k)>`,
/// computed with `quad_order`-point Gauss-Legendre per dyadic cell.
pub fn sample_image(f: &PeriodicFunction, phi: &BsplineScaler, quad_order: usize) -> Result<ImageGrid> {
    let (nodes, weights) = gauss_legendre(quad_order)?;
    let n_grid = phi.grid_n();
    let n_taps = phi.order();
    let q = quad_order;
    // spline factor per (cell offset, node)
    let mut spline_vals = vec![0.0; n_taps * q];
    for c in 0..n_taps {
        for (i, s) in nodes.iter().enumerate() {
            spline_vals[c * q + i] = bspline(n_taps, c as f64 + s);
        }
    }
    let fv = lattice_values(f, n_grid, &nodes);
    let stride = n_grid * q;
    let shift = phi.shift();
    let mut out = vec![0.0; n_grid * n_grid];
    for k1 in 0..n_grid {
        for k2 in 0..n_grid {
            let mut acc = 0.0;
            // support cells of phi(2^J x - k) run from k - shift
            for c1 in 0..n_taps {
                let row = ((k1 + c1 + n_grid - shift) % n_grid) * q;
                for i in 0..q {
                    let w1 = weights[i] * spline_vals[c1 * q + i];
                    let base = (row + i) * stride;
                    for c2 in 0..n_taps {
                        let col = ((k2 + c2 + n_grid - shift) % n_grid) * q;
                        let mut inner = 0.0;
                        for j in 0..q {
                            inner += weights[j] * spline_vals[c2 * q + j] * fv[base + col + j];
                        }
                        acc += w1 * inner;
                    }
                }
            }
            out[k1 * n_grid + k2] = acc;
        }
    }
    ImageGrid::new(n_grid, f.box_m(), out)
}

/// Interpolates a grid to a function: `u_J(x) = sum_k u[k] phi(2^J x - k)`.
pub fn interpolate(u: &ImageGrid, phi: &BsplineScaler) -> Result<PeriodicFunction> {
    if u.n() != phi.grid_n() {
        return Err(Error::DimensionMismatch(format!(
            "grid N={} does not match scaler level 2^{}",
            u.n(),
            phi.level()
        )));
    }
    let n_grid = u.n();
    let n_taps = phi.order();
    let shift = phi.shift() as i64;
    let data: Vec<f64> = u.data().to_vec();
    let name = format!("interpolant_{n_grid}");
    Ok(PeriodicFunction::new(name, u.range_m(), move |x1, x2| {
        let t1 = n_grid as f64 * x1;
        let t2 = n_grid as f64 * x2;
        // contributing translates run from floor(t) + shift downwards
        let b1 = t1.floor() as i64 + shift;
        let b2 = t2.floor() as i64 + shift;
        let f1 = t1 - t1.floor();
        let f2 = t2 - t2.floor();
        let mut acc = 0.0;
        for d1 in 0..n_taps as i64 {
            // phi(t - k) = B_n(t - k + shift) = B_n(frac(t) + d)
            let w1 = bspline(n_taps, f1 + d1 as f64);
            if w1 == 0.0 {
                continue;
            }
            let k1 = (b1 - d1).rem_euclid(n_grid as i64) as usize;
            for d2 in 0..n_taps as i64 {
                let w2 = bspline(n_taps, f2 + d2 as f64);
                if w2 == 0.0 {
                    continue;
                }
                let k2 = (b2 - d2).rem_euclid(n_grid as i64) as usize;
                acc += data[k1 * n_grid + k2] * w1 * w2;
            }
        }
        acc
    }))
}

/// `sqrt(int |f - g|^2)` by composite Gauss-Legendre quadrature on a
/// `cells x cells` uniform partition.
pub fn l2_distance(f: &PeriodicFunction, g: &PeriodicFunction, cells: usize, quad_order: usize) -> Result<f64> {
    if cells == 0 {
        return Err(Error::bad_param("cells", "need at least one quadrature cell"));
    }
    let (nodes, weights) = gauss_legendre(quad_order)?;
    let h = 1.0 / cells as f64;
    let mut acc = 0.0;
    for c1 in 0..cells {
        for (i, s1) in nodes.iter().enumerate() {
            let x1 = (c1 as f64 + s1) * h;
            for c2 in 0..cells {
                for (j, s2) in nodes.iter().enumerate() {
                    let x2 = (c2 as f64 + s2) * h;
                    let d = f.eval(x1, x2) - g.eval(x1, x2);
                    acc += weights[i] * weights[j] * d * d;
                }
            }
        }
    }
    Ok((acc * h * h).sqrt())
}

/// `sqrt(int f^2)`.
pub fn l2_norm(f: &PeriodicFunction, cells: usize, quad_order: usize) -> Result<f64> {
    let zero = PeriodicFunction::new("zero", 1.0, |_, _| 0.0);
    l2_distance(f, &zero, cells, quad_order)
}

/// Stability ratio of the analysis map `u -> (<u, phi_(J,k)>)_k`:
/// `sum_k |<u, phi_(J,k)>|^2 / (n^2 2^(-2J) ||u||^2)`, at most 1.
pub fn analysis_bessel_ratio(
    u: &PeriodicFunction,
    phi: &BsplineScaler,
    quad_order: usize,
    norm_cells: usize,
) -> Result<f64> {
    let img = sample_image(u, phi, quad_order)?;
    let scale = (phi.grid_n() * phi.grid_n()) as f64; // 2^(2J)
    let lhs: f64 = img.data().iter().map(|v| (v / scale) * (v / scale)).sum();
    let norm = l2_norm(u, norm_cells, quad_order)?;
    if norm == 0.0 {
        return Ok(0.0);
    }
    let rhs = (phi.order() * phi.order()) as f64 / scale * norm * norm;
    Ok(lhs / rhs)
}

/// Stability ratio of the synthesis map `v -> sum_k v[k] phi_(J,k)`:
/// `||sum_k v[k] phi_(J,k)||^2 / (n^2 2^(-2J) ||v||^2)`, at most 1.
pub fn synthesis_bessel_ratio(v: &ImageGrid, phi: &BsplineScaler, quad_order: usize) -> Result<f64> {
    let vn = v.norm_sqr();
    if vn == 0.0 {
        return Ok(0.0);
    }
    let interp = interpolate(v, phi)?;
    // the interpolant is a polynomial on each dyadic cell, so per-cell
    // quadrature with enough points is exact
    let q = quad_order.max(phi.order());
    let norm = l2_norm(&interp, phi.grid_n(), q)?;
    let scale = (phi.grid_n() * phi.grid_n()) as f64;
    let rhs = (phi.order() * phi.order()) as f64 / scale * vn;
    Ok(norm * norm / rhs)
}

/// Frame-coefficient inner products `<f, psi_(band, lambda, k)>` for every
/// `k` in the `2^base_j` grid, via sampling on a refined grid anchored at
/// `refined_j` and one discrete analysis cascade.
///
/// Two regimes share one identity: coefficients at continuum level
/// `lambda < base_j` carry scale `2^(-base_j)` and stride
/// `2^(refined_j - base_j)`; levels `lambda >= base_j` carry scale
/// `2^(-lambda)` and stride `2^(refined_j - lambda)` (corner-anchored).
pub fn framelet_inner_products(
    f: &PeriodicFunction,
    bank: &FilterBank,
    base_j: u32,
    lambda: u32,
    band: (usize, usize),
    refined_j: u32,
    quad_order: usize,
) -> Result<Vec<f64>> {
    if refined_j <= lambda {
        return Err(Error::bad_param(
            "refined_j",
            format!("refined level {refined_j} must exceed the coefficient level {lambda}"),
        ));
    }
    if band == (0, 0) || band.0 > bank.order() || band.1 > bank.order() {
        return Err(Error::bad_param("band", format!("invalid high-pass band {band:?}")));
    }
    let phi = BsplineScaler::new(bank.order(), refined_j)?;
    let sampled = sample_image(f, &phi, quad_order)?;
    let analysis_level = (refined_j - 1 - lambda) as usize;
    let coeffs = analyze(&sampled, bank, analysis_level + 1)?;
    let plane = coeffs.plane(PlaneKey {
        level: analysis_level,
        band,
    });
    let n_base = 1usize << base_j;
    let n_ref = 1usize << refined_j;
    let (scale, stride) = if lambda < base_j {
        (2f64.powi(-(base_j as i32)), 1usize << (refined_j - base_j))
    } else {
        (2f64.powi(-(lambda as i32)), 1usize << (refined_j - lambda))
    };
    let mut out = vec![0.0; n_base * n_base];
    for k1 in 0..n_base {
        for k2 in 0..n_base {
            out[k1 * n_base + k2] = scale * plane[(k1 * stride) * n_ref + k2 * stride];
        }
    }
    Ok(out)
}

/// Truncated decay-constant estimate with its analytic tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayEstimate {
    /// Partial sum `sum_(lambda = J-L)^(cutoff) 2^(beta lambda)
    /// sum_(k, band) |<f, psi_(band, lambda, k)>|`.
    pub value: f64,
    /// Bound on the omitted levels, from `|<f, psi>| <= 2^(-lambda) M
    /// ||psi_band||_L1`, finite for `beta < 1`.
    pub tail_bound: f64,
    pub cutoff: u32,
    /// Anchor level of the refined sampling grid (`cutoff + 1`).
    pub refined_j: u32,
}

/// Estimates the coefficient decay constant of `f` for the weight exponent
/// `beta`: levels `J-L` through `cutoff` are summed exactly (one refined
/// sampling + analysis cascade), deeper levels are covered by the reported
/// tail bound. Requires `cutoff >= J-1` so the tail estimate applies, and
/// `L <= J - 1`.
pub fn estimate_decay_constant(
    f: &PeriodicFunction,
    bank: &FilterBank,
    beta: f64,
    base_j: u32,
    levels: usize,
    cutoff: u32,
    quad_order: usize,
) -> Result<DecayEstimate> {
    if !(-1.0..1.0).contains(&beta) {
        return Err(Error::bad_param("beta", format!("beta must lie in [-1,1), got {beta}")));
    }
    if levels == 0 || levels as u32 >= base_j {
        return Err(Error::bad_param(
            "levels",
            format!("need 1 <= L <= J-1, got L={levels}, J={base_j}"),
        ));
    }
    if cutoff + 1 < base_j {
        return Err(Error::bad_param(
            "cutoff",
            format!("cutoff {cutoff} below J-1 = {} leaves an unbounded gap", base_j - 1),
        ));
    }
    let refined_j = cutoff + 1;
    let r = bank.order();
    let phi = BsplineScaler::new(r, refined_j)?;
    let sampled = sample_image(f, &phi, quad_order)?;
    let lambda_min = base_j - levels as u32; // >= 1
    let analysis_levels = (refined_j - lambda_min) as usize; // <= refined_j - 1
    let coeffs = analyze(&sampled, bank, analysis_levels)?;
    let n_base = 1usize << base_j;
    let n_ref = 1usize << refined_j;
    let mut value = 0.0;
    for lambda in lambda_min..=cutoff {
        let analysis_level = (refined_j - 1 - lambda) as usize;
        let (scale, stride) = if lambda < base_j {
            (2f64.powi(-(base_j as i32)), 1usize << (refined_j - base_j))
        } else {
            (2f64.powi(-(lambda as i32)), 1usize << (refined_j - lambda))
        };
        let mut level_sum = 0.0;
        for key in plane_keys(r, analysis_levels) {
            if key.level != analysis_level || key.is_lowpass() {
                continue;
            }
            let plane = coeffs.plane(key);
            for k1 in 0..n_base {
                for k2 in 0..n_base {
                    level_sum += plane[(k1 * stride) * n_ref + k2 * stride].abs();
                }
            }
        }
        value += 2f64.powf(beta * lambda as f64) * scale * level_sum;
    }
    // tail over lambda > cutoff: |<f, psi_(band,lambda,k)>| <= 2^(-lambda) M ||psi_band||_1
    // with ||psi_band||_1 <= ||a_(b1)||_1 ||a_(b2)||_1.
    let mut psi_l1_sum = 0.0;
    for (b1, b2) in bank.bands() {
        psi_l1_sum += bank.filter(b1).l1_norm() * bank.filter(b2).l1_norm();
    }
    let omega = (n_base * n_base) as f64;
    let ratio = 2f64.powf(beta - 1.0);
    // geometric series over lambda >= cutoff + 1
    let tail_bound =
        f.box_m() * psi_l1_sum * omega * ratio.powf((cutoff + 1) as f64) / (1.0 - ratio);
    Ok(DecayEstimate {
        value,
        tail_bound,
        cutoff,
        refined_j,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framelets::bspline_bank;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (nodes, weights) = gauss_legendre(4).unwrap();
        assert_eq!(nodes.len(), 4);
        assert_abs_diff_eq!(weights.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        // exact for degree <= 2q-1 = 7 on [0,1]
        for p in 0..=7usize {
            let integral: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(x, w)| w * x.powi(p as i32))
                .sum();
            assert_abs_diff_eq!(integral, 1.0 / (p as f64 + 1.0), epsilon = 1e-14);
        }
        // two-point rule has the classical nodes 1/2 +- 1/(2 sqrt 3)
        let (n2, w2) = gauss_legendre(2).unwrap();
        assert_abs_diff_eq!(n2[0], 0.5 - 0.5 / 3f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(n2[1], 0.5 + 0.5 / 3f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(w2[0], 0.5, epsilon = 1e-14);
        assert!(gauss_legendre(1).is_err());
    }

    #[test]
    fn bspline_values_and_mass() {
        // box
        assert_eq!(bspline(1, 0.5), 1.0);
        assert_eq!(bspline(1, 1.5), 0.0);
        // hat: peak 1 at t=1
        assert_abs_diff_eq!(bspline(2, 1.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(bspline(2, 0.25), 0.25, epsilon = 1e-15);
        // cubic: center value 2/3 at t=2
        assert_abs_diff_eq!(bspline(4, 2.0), 2.0 / 3.0, epsilon = 1e-14);
        // unit mass for several orders, via quadrature
        let (nodes, weights) = gauss_legendre(6).unwrap();
        for n in [1usize, 2, 3, 4] {
            let mut mass = 0.0;
            for c in 0..n {
                for (x, w) in nodes.iter().zip(&weights) {
                    mass += w * bspline(n, c as f64 + x);
                }
            }
            assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-13);
            // range [0, 1]
            for c in 0..n {
                for (x, _) in nodes.iter().zip(&weights) {
                    let v = bspline(n, c as f64 + x);
                    assert!((0.0..=1.0).contains(&v));
                }
            }
        }
    }

    #[test]
    fn partition_of_unity_holds() {
        for n in [1usize, 2, 4] {
            for j in [3u32, 4, 5] {
                let phi = BsplineScaler::new(n, j).unwrap();
                let defect = phi.partition_of_unity_defect(10_000, 5);
                assert!(defect <= 1e-12, "n={n} J={j} defect={defect:e}");
            }
        }
        assert!(BsplineScaler::new(4, 1).is_err()); // 2^1 < 4
    }

    #[test]
    fn sampling_constant_and_linear_functions() {
        let f = PeriodicFunction::constant(2.0); // value 1.0
        let phi = BsplineScaler::new(2, 3).unwrap();
        let img = sample_image(&f, &phi, 4).unwrap();
        for v in img.data() {
            assert_abs_diff_eq!(v, &1.0, epsilon = 1e-13);
        }
        // box spline at J=2: samples are cell averages; f = x1 gives midpoints
        let lin = PeriodicFunction::new("x1", 1.0, |x1, _| x1);
        let haar = BsplineScaler::new(1, 2).unwrap();
        let img = sample_image(&lin, &haar, 4).unwrap();
        for k1 in 0..4 {
            for k2 in 0..4 {
                assert_abs_diff_eq!(img.at(k1, k2), (k1 as f64 + 0.5) / 4.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn quadrature_order_self_consistency() {
        let f = PeriodicFunction::smooth_bump(1.0);
        let phi = BsplineScaler::new(2, 4).unwrap();
        let a = sample_image(&f, &phi, 8).unwrap();
        let b = sample_image(&f, &phi, 16).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-10);
        }
    }

    #[test]
    fn interpolation_reproduces_constants_and_deltas() {
        let phi = BsplineScaler::new(2, 3).unwrap();
        let c = ImageGrid::new(8, 1.0, vec![0.7; 64]).unwrap();
        let interp = interpolate(&c, &phi).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let (x1, x2): (f64, f64) = (rng.gen(), rng.gen());
            assert_abs_diff_eq!(interp.eval(x1, x2), 0.7, epsilon = 1e-13);
        }
        let mut d = ImageGrid::zeros(8, 1.0).unwrap();
        d.set(3, 5, 1.0);
        let interp = interpolate(&d, &phi).unwrap();
        for _ in 0..100 {
            let (x1, x2): (f64, f64) = (rng.gen(), rng.gen());
            let expected = phi.eval2((x1, x2), (3, 5));
            assert_abs_diff_eq!(interp.eval(x1, x2), expected, epsilon = 1e-13);
        }
    }

    #[test]
    fn l2_distance_basics_and_refinement() {
        let zero = PeriodicFunction::new("zero", 1.0, |_, _| 0.0);
        let c = PeriodicFunction::new("c", 1.0, |_, _| 0.6);
        assert_abs_diff_eq!(l2_distance(&c, &c, 8, 4).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(l2_distance(&zero, &c, 8, 4).unwrap(), 0.6, epsilon = 1e-13);
        // dyadic breakpoints align with cells: refining changes little
        let ramp = PeriodicFunction::ramp_with_jump(1.0);
        let bump = PeriodicFunction::smooth_bump(1.0);
        let coarse = l2_distance(&ramp, &bump, 32, 4).unwrap();
        let fine = l2_distance(&ramp, &bump, 64, 4).unwrap();
        assert!(
            ((coarse - fine) / fine).abs() <= 1e-6,
            "coarse={coarse} fine={fine}"
        );
    }

    #[test]
    fn bessel_ratios_stay_below_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for n in [1usize, 2, 4] {
            for j in [3u32, 4, 5] {
                let phi = BsplineScaler::new(n, j).unwrap();
                for trial in 0..12 {
                    // random low-order trigonometric polynomial, offset into [0, M]
                    let a: Vec<f64> = (0..9).map(|_| rng.gen::<f64>() - 0.5).collect();
                    let u = PeriodicFunction::new("trig", 4.0, move |x1, x2| {
                        let b1 = [1.0, (2.0 * std::f64::consts::PI * x1).sin(), (2.0 * std::f64::consts::PI * x1).cos()];
                        let b2 = [1.0, (2.0 * std::f64::consts::PI * x2).sin(), (2.0 * std::f64::consts::PI * x2).cos()];
                        let mut acc = 2.0;
                        for p in 0..3 {
                            for q in 0..3 {
                                acc += a[p * 3 + q] * b1[p] * b2[q];
                            }
                        }
                        acc
                    });
                    let ratio = analysis_bessel_ratio(&u, &phi, 6, 64).unwrap();
                    assert!(
                        ratio <= 1.0 + 1e-10,
                        "analysis ratio {ratio} at n={n} J={j} trial={trial}"
                    );
                    let img_data: Vec<f64> = (0..(1usize << (2 * j))).map(|_| rng.gen::<f64>() - 0.5).collect();
                    let v = ImageGrid::new(1 << j, 1.0, img_data).unwrap();
                    let ratio = synthesis_bessel_ratio(&v, &phi, 4).unwrap();
                    assert!(
                        ratio <= 1.0 + 1e-10,
                        "synthesis ratio {ratio} at n={n} J={j} trial={trial}"
                    );
                }
            }
        }
    }

    #[test]
    fn delta_synthesis_ratio_is_one_ninth_for_hat_spline() {
        // single-pixel delta with the order-2 spline: the ratio is
        // ||phi_(J,k)||^2 / (n^2 2^(-2J)) = (2/3)^2 / 4 = 1/9.
        let phi = BsplineScaler::new(2, 4).unwrap();
        let mut v = ImageGrid::zeros(16, 1.0).unwrap();
        v.set(5, 9, 1.0);
        let ratio = synthesis_bessel_ratio(&v, &phi, 4).unwrap();
        assert_abs_diff_eq!(ratio, 1.0 / 9.0, epsilon = 1e-12);
        // zero sequence: ratio defined as 0
        let z = ImageGrid::zeros(16, 1.0).unwrap();
        assert_eq!(synthesis_bessel_ratio(&z, &phi, 4).unwrap(), 0.0);
    }

    /// Direct quadrature of one framelet inner product, fully independent of
    /// the sampling/transform route: evaluates `psi_(band,lambda,k)`
    /// pointwise through the two-scale relation and integrates against `f`.
    fn direct_inner_product(
        f: &PeriodicFunction,
        bank: &FilterBank,
        base_j: u32,
        lambda: u32,
        band: (usize, usize),
        k: (usize, usize),
        cells: usize,
        q: usize,
    ) -> f64 {
        let n = bank.order();
        let psi_1d = |a_idx: usize, t: f64| -> f64 {
            let filt = bank.filter(a_idx);
            let mut acc = 0.0;
            for (i, &tap) in filt.taps().iter().enumerate() {
                let kk = filt.offset() + i as i64;
                acc += tap * refinable_profile(n, 2.0 * t - kk as f64);
            }
            2.0 * acc
        };
        // psi_(band,lambda,k)(x): amplitude 2^lambda with integer translates
        // for lambda >= J, amplitude 2^(2 lambda - J) with translates on the
        // 2^(-J) grid for lambda < J; periodized over the torus.
        let psi = |x1: f64, x2: f64| -> f64 {
            let scale = 2f64.powf(lambda as f64);
            let (amp, sh1, sh2) = if lambda >= base_j {
                (scale, k.0 as f64, k.1 as f64)
            } else {
                let s = 2f64.powf(lambda as f64 - base_j as f64);
                (scale * s, s * k.0 as f64, s * k.1 as f64)
            };
            let mut acc = 0.0;
            for m1 in -1..=1i64 {
                for m2 in -1..=1i64 {
                    let t1 = scale * (x1 + m1 as f64) - sh1;
                    let t2 = scale * (x2 + m2 as f64) - sh2;
                    acc += psi_1d(band.0, t1) * psi_1d(band.1, t2);
                }
            }
            amp * acc
        };
        let (nodes, weights) = gauss_legendre(q).unwrap();
        let h = 1.0 / cells as f64;
        let mut acc = 0.0;
        for c1 in 0..cells {
            for (i, s1) in nodes.iter().enumerate() {
                let x1 = (c1 as f64 + s1) * h;
                for c2 in 0..cells {
                    for (j, s2) in nodes.iter().enumerate() {
                        let x2 = (c2 as f64 + s2) * h;
                        acc += weights[i] * weights[j] * f.eval(x1, x2) * psi(x1, x2);
                    }
                }
            }
        }
        acc * h * h
    }

    #[test]
    fn sampled_route_matches_direct_quadrature_for_inner_products() {
        let bank = bspline_bank(2).unwrap();
        let f = PeriodicFunction::smooth_bump(1.0);
        // regime lambda < J
        let base_j = 3u32;
        let got = framelet_inner_products(&f, &bank, base_j, 2, (1, 0), 6, 8).unwrap();
        for k in [(0usize, 0usize), (3, 5), (7, 2)] {
            let want = direct_inner_product(&f, &bank, base_j, 2, (1, 0), k, 64, 6);
            let idx = k.0 * 8 + k.1;
            assert!(
                (got[idx] - want).abs() <= 1e-8 * (1.0 + want.abs()),
                "lambda<J k={k:?}: got {} want {}",
                got[idx],
                want
            );
        }
        // regime lambda >= J
        let got = framelet_inner_products(&f, &bank, base_j, 4, (1, 1), 6, 8).unwrap();
        for k in [(1usize, 1usize), (6, 4)] {
            let want = direct_inner_product(&f, &bank, base_j, 4, (1, 1), k, 64, 6);
            let idx = k.0 * 8 + k.1;
            assert!(
                (got[idx] - want).abs() <= 1e-8 * (1.0 + want.abs()),
                "lambda>=J k={k:?}: got {} want {}",
                got[idx],
                want
            );
        }
    }

    #[test]
    fn decay_constant_vanishes_for_constants_and_grows_monotonically() {
        let bank = bspline_bank(2).unwrap();
        let c = PeriodicFunction::constant(1.0);
        let est = estimate_decay_constant(&c, &bank, 0.0, 3, 1, 3, 4).unwrap();
        assert!(est.value <= 1e-10, "constant decay sum {}", est.value);
        let ramp = PeriodicFunction::ramp_with_jump(1.0);
        let e3 = estimate_decay_constant(&ramp, &bank, 0.0, 3, 1, 3, 4).unwrap();
        let e4 = estimate_decay_constant(&ramp, &bank, 0.0, 3, 1, 4, 4).unwrap();
        let e5 = estimate_decay_constant(&ramp, &bank, 0.0, 3, 1, 5, 4).unwrap();
        assert!(e4.value >= e3.value && e5.value >= e4.value);
        // growth between cutoffs stays within the earlier tail bound
        assert!(e4.value - e3.value <= e3.tail_bound * (1.0 + 1e-9));
        assert!(e5.value - e4.value <= e4.tail_bound * (1.0 + 1e-9));
        // tail bounds shrink (beta < 1)
        assert!(e5.tail_bound < e4.tail_bound && e4.tail_bound < e3.tail_bound);
        // invalid arguments
        assert!(estimate_decay_constant(&ramp, &bank, 0.0, 3, 1, 1, 4).is_err()); // cutoff < J-1
        assert!(estimate_decay_constant(&ramp, &bank, 0.0, 3, 3, 4, 4).is_err()); // L > J-1
    }

    #[test]
    fn catalog_lookup_and_ranges() {
        for name in ["constant", "ramp", "bump"] {
            let f = PeriodicFunction::by_name(name, 3.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            for _ in 0..1000 {
                let v = f.eval(rng.gen(), rng.gen());
                assert!((0.0..=3.0).contains(&v), "{name} out of range: {v}");
            }
        }
        assert!(PeriodicFunction::by_name("nope", 1.0).is_err());
    }
}
