//! Split Bregman solver for the constrained weighted-l1 restoration model
//!
//! ```text
//!   minimize ||lambda . W u||_1   over u in [0, M]^Omega
//!   subject to (1/m) sum_(k in Lambda) |(A u)[k] - g[k]|^2 <= eta^2
//! ```
//!
//! (exact data match on the samples when `eta = 0`).
//!
//! Each outer iteration performs: (i) a conjugate-gradient solve of the
//! normal equations `(mu A^T R_Lambda A + kappa I) u = mu A^T R_Lambda g_w +
//! kappa W^T (d - b)` — the identity `W^T W = I` turns the splitting penalty
//! into `kappa I` — followed by exact projection onto the box; (ii) a
//! per-coefficient soft-threshold `d = shrink(W u + b, lambda/kappa)` with
//! zero threshold on the low-pass plane; (iii) the Bregman update
//! `b += W u - d`; and (iv) a Bregman update of the working data `g_w` that
//! enforces the sample constraint. Step (iv) treats the sampled values as a
//! second splitting variable `v` constrained to the discrepancy ball
//! `||v - g|| <= eta sqrt(m)`: the shifted point `A u + b_g` is projected
//! onto the ball, the out-of-ball excess accumulates in the multiplier
//! `b_g`, and the next quadratic solve fits `g_w = v - b_g`. With `eta = 0`
//! the ball is the single point `g` and the update is exactly the classical
//! noise-free residual add-back `g_w += g - A u`; with `eta > 0` the
//! add-back force vanishes once the shifted point enters the ball (the
//! discrepancy principle), while the multiplier holds the iterate on the
//! ball boundary instead of letting it overfit into the interior, so the
//! scheme converges to the constrained minimizer rather than to a penalty
//! minimizer of some frozen working data.
//!
//! Convergence requires all four fixed-point conditions at once: the data
//! residual meets the discrepancy target, the iterate stops moving
//! (relative change below `tol_rel`), and both splittings are consistent
//! (`||W u - d|| / ||W u||` and `||A u - v|| / ||A u||` on the samples below
//! `tol_rel`). The splitting tests matter: early iterates can sit still
//! through one quadratic solve while the splitting variables are far from
//! their fixed points `d = W u`, `v = A u`, and stopping there would return
//! a feasible but unoptimized image.

use std::path::PathBuf;

use crate::framelets::FilterBank;
use crate::grid::ImageGrid;
use crate::operators::{Measurement, MeasurementOp, SampleSet};
use crate::transform::{analyze, synthesize, weighted_l1, FrameCoefficients, LambdaWeights};
use crate::{Error, Result};

/// Solver knobs. `mu` weights the data term, `kappa` the splitting term.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub mu: f64,
    pub kappa: f64,
    pub max_outer: usize,
    pub max_inner_cg: usize,
    /// Stop when the relative change of the iterate drops below this and the
    /// residual target is met.
    pub tol_rel: f64,
    /// Feasibility slack on `(1/m) sum |A u - g|^2` versus `eta^2`.
    pub tol_feas: f64,
    /// Relative residual target of the inner conjugate-gradient solve.
    pub cg_tol: f64,
    /// When set, stream one `iter,objective,residual,merit` CSV row per
    /// outer iteration to this path.
    pub trace_path: Option<PathBuf>,
}

impl SolverConfig {
    /// Defaults scaled to the box bound: `mu = 10 / M^2`, `kappa = 1`.
    pub fn default_for(range_m: f64) -> Self {
        SolverConfig {
            mu: 10.0 / (range_m * range_m),
            kappa: 1.0,
            max_outer: 500,
            max_inner_cg: 200,
            tol_rel: 1e-3,
            tol_feas: 1e-10,
            cg_tol: 1e-8,
            trace_path: None,
        }
    }

    fn check(&self) -> Result<()> {
        for (name, v) in [
            ("mu", self.mu),
            ("kappa", self.kappa),
            ("tol_rel", self.tol_rel),
            ("tol_feas", self.tol_feas),
            ("cg_tol", self.cg_tol),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::bad_param("solver_config", format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_outer == 0 || self.max_inner_cg == 0 {
            return Err(Error::bad_param("solver_config", "iteration caps must be at least 1"));
        }
        Ok(())
    }
}

/// One logged outer iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    /// `||lambda . W u||_1` at this iterate.
    pub objective: f64,
    /// `(1/m) sum_(k in Lambda) |(A u)[k] - g[k]|^2` against the original data.
    pub residual: f64,
    /// Diagnostic merit `mu/2 * sum_Lambda |A u - g|^2 + ||lambda . d||_1`.
    pub merit: f64,
}

/// Solver output.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub u_star: ImageGrid,
    pub iterations: usize,
    /// Final `||lambda . W u_star||_1`.
    pub objective: f64,
    /// Final mean squared residual on the samples.
    pub residual: f64,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

/// Per-entry soft threshold with per-plane levels: `sign(x) max(|x|-t, 0)`.
/// The threshold of the low-pass plane must be zero.
pub fn soft_threshold(c: &FrameCoefficients, thresholds: &[f64]) -> Result<FrameCoefficients> {
    if thresholds.len() != c.plane_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} thresholds for {} planes",
            thresholds.len(),
            c.plane_count()
        )));
    }
    for (key, &t) in c.keys().iter().zip(thresholds) {
        if t < 0.0 {
            return Err(Error::bad_param("thresholds", format!("negative threshold {t}")));
        }
        if key.is_lowpass() && t != 0.0 {
            return Err(Error::bad_param(
                "thresholds",
                "the low-pass plane must not be thresholded",
            ));
        }
    }
    let mut out = c.clone();
    for (plane, &t) in out.planes_mut().iter_mut().zip(thresholds) {
        if t == 0.0 {
            continue;
        }
        for v in plane.iter_mut() {
            *v = shrink_scalar(*v, t);
        }
    }
    Ok(out)
}

#[inline]
fn shrink_scalar(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// `d = shrink(c, lambda/kappa)` honoring per-pixel weights.
fn shrink_weighted(c: &FrameCoefficients, w: &LambdaWeights, kappa: f64) -> FrameCoefficients {
    let mut out = c.clone();
    let keys = out.keys();
    for (idx, plane) in out.planes_mut().iter_mut().enumerate() {
        if keys[idx].is_lowpass() {
            continue;
        }
        for (pix, v) in plane.iter_mut().enumerate() {
            let t = w.value(idx, pix) / kappa;
            *v = shrink_scalar(*v, t);
        }
    }
    out
}

fn sub_coeffs(a: &FrameCoefficients, b: &FrameCoefficients) -> FrameCoefficients {
    let mut out = a.clone();
    for (pa, pb) in out.planes_mut().iter_mut().zip(b.planes()) {
        for (x, y) in pa.iter_mut().zip(pb) {
            *x -= y;
        }
    }
    out
}

fn add_coeffs_into(dst: &mut FrameCoefficients, src: &FrameCoefficients) {
    for (pa, pb) in dst.planes_mut().iter_mut().zip(src.planes()) {
        for (x, y) in pa.iter_mut().zip(pb) {
            *x += y;
        }
    }
}

/// Applies `v -> mu * A^T R_Lambda A v + kappa * v`.
fn normal_op(
    op: &MeasurementOp,
    samples: &SampleSet,
    mu: f64,
    kappa: f64,
    v: &ImageGrid,
) -> Result<Vec<f64>> {
    let mut av = op.apply(v)?;
    samples.project(av.data_mut());
    let atav = op.adjoint(&av)?;
    Ok(atav
        .data()
        .iter()
        .zip(v.data())
        .map(|(a, b)| mu * a + kappa * b)
        .collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Conjugate gradients on the normal operator, warm-started at `x0`.
fn cg_solve(
    op: &MeasurementOp,
    samples: &SampleSet,
    mu: f64,
    kappa: f64,
    rhs: &[f64],
    x0: &ImageGrid,
    tol: f64,
    max_iter: usize,
) -> Result<ImageGrid> {
    let mut x = x0.clone();
    let opx = normal_op(op, samples, mu, kappa, &x)?;
    let mut r: Vec<f64> = rhs.iter().zip(&opx).map(|(b, a)| b - a).collect();
    let mut p = r.clone();
    let mut rs = dot(&r, &r);
    let target = tol * tol * dot(rhs, rhs).max(f64::MIN_POSITIVE);
    for _ in 0..max_iter {
        if rs <= target {
            break;
        }
        let p_img = x.with_data(p.clone())?;
        let ap = normal_op(op, samples, mu, kappa, &p_img)?;
        let denom = dot(&p, &ap);
        if denom <= 0.0 {
            break; // numerically exhausted (operator is SPD)
        }
        let alpha = rs / denom;
        for ((xv, pv), (rv, apv)) in x
            .data_mut()
            .iter_mut()
            .zip(&p)
            .zip(r.iter_mut().zip(&ap))
        {
            *xv += alpha * pv;
            *rv -= alpha * apv;
        }
        let rs_new = dot(&r, &r);
        let beta = rs_new / rs;
        rs = rs_new;
        for (pv, rv) in p.iter_mut().zip(&r) {
            *pv = rv + beta * *pv;
        }
    }
    Ok(x)
}

/// Runs the split Bregman iteration. The decomposition depth is taken from
/// the weights; the measurement supplies data, samples, noise level, and the
/// box bound.
pub fn solve(
    op: &MeasurementOp,
    meas: &Measurement,
    bank: &FilterBank,
    weights: &LambdaWeights,
    cfg: &SolverConfig,
) -> Result<SolverResult> {
    cfg.check()?;
    if weights.n() != meas.n() {
        return Err(Error::DimensionMismatch(format!(
            "weights are for N={}, measurement has N={}",
            weights.n(),
            meas.n()
        )));
    }
    if weights.order() != bank.order() {
        return Err(Error::DimensionMismatch(format!(
            "weights are for order {}, bank has order {}",
            weights.order(),
            bank.order()
        )));
    }
    let levels = weights.levels();
    let samples = meas.samples();
    let g = meas.values();
    let m = g.len() as f64;
    let eta2 = meas.eta() * meas.eta();
    let feas_target = eta2 + cfg.tol_feas;

    let mut trace_writer = match &cfg.trace_path {
        Some(p) => {
            let mut w = csv::Writer::from_path(p).map_err(|e| Error::Parse(e.to_string()))?;
            w.write_record(["iter", "objective", "residual", "merit"])
                .map_err(|e| Error::Parse(e.to_string()))?;
            Some(w)
        }
        None => None,
    };

    // Warm start: adjoint of the zero-filled data, projected onto the box.
    let mut u = op.adjoint(&meas.zero_filled()?)?;
    u.clamp_to_range();
    let mut d = analyze(&u, bank, levels)?;
    let mut b = d.zeros_like();
    // Data-side splitting state: v starts at g, its multiplier at zero, so
    // the first quadratic solve fits the observed data.
    let mut g_work: Vec<f64> = g.to_vec();
    let mut b_data: Vec<f64> = vec![0.0; g.len()];
    let radius = meas.eta() * m.sqrt();

    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut objective = weighted_l1(&d, weights)?;
    let mut residual = meas.residual(op, &u)?;

    for outer in 1..=cfg.max_outer {
        iterations = outer;
        let u_prev_norm = u.norm_sqr().sqrt();

        // (i) quadratic subproblem + box projection
        let dmb = sub_coeffs(&d, &b);
        let wt = synthesize(&dmb, bank)?;
        let scattered = ImageGrid::new(meas.n(), meas.range_m(), samples.scatter(&g_work))?;
        let at = op.adjoint(&scattered)?;
        let rhs: Vec<f64> = at
            .data()
            .iter()
            .zip(wt.data())
            .map(|(a, w)| cfg.mu * a + cfg.kappa * w)
            .collect();
        let u_new = cg_solve(
            op,
            samples,
            cfg.mu,
            cfg.kappa,
            &rhs,
            &u,
            cfg.cg_tol,
            cfg.max_inner_cg,
        )?;
        let diff_norm = u_new
            .data()
            .iter()
            .zip(u.data())
            .map(|(a, c)| (a - c) * (a - c))
            .sum::<f64>()
            .sqrt();
        u = u_new;
        u.clamp_to_range();

        // (ii) shrinkage and (iii) Bregman update: with cpb = W u + b,
        // the new multiplier is b + W u - d = cpb - d.
        let c = analyze(&u, bank, levels)?;
        let mut cpb = c.clone();
        add_coeffs_into(&mut cpb, &b);
        d = shrink_weighted(&cpb, weights, cfg.kappa);
        b = sub_coeffs(&cpb, &d);
        let split_gap =
            (sub_coeffs(&c, &d).norm_sqr() / c.norm_sqr().max(f64::MIN_POSITIVE)).sqrt();

        // bookkeeping against the original data
        let au = op.apply(&u)?;
        let au_on: Vec<f64> = samples.restrict(au.data());
        residual = au_on
            .iter()
            .zip(g)
            .map(|(a, gv)| (a - gv) * (a - gv))
            .sum::<f64>()
            / m;
        objective = weighted_l1(&c, weights)?;
        let merit = 0.5 * cfg.mu * m * residual + weighted_l1(&d, weights)?;
        let row = TraceRow {
            iter: outer,
            objective,
            residual,
            merit,
        };
        if let Some(w) = trace_writer.as_mut() {
            w.write_record([
                outer.to_string(),
                format!("{objective:.17e}"),
                format!("{residual:.17e}"),
                format!("{merit:.17e}"),
            ])
            .map_err(|e| Error::Parse(e.to_string()))?;
        }
        trace.push(row);

        // (iv) data-side splitting: project the shifted sample values onto
        // the discrepancy ball around g, accumulate the out-of-ball excess
        // in the multiplier, and refresh the working data g_w = v - b_g.
        // For eta = 0 (radius zero) v = g and this is the residual add-back
        // g_w += g - A u of the noise-free Bregman loop.
        let z: Vec<f64> = au_on.iter().zip(&b_data).map(|(a, bd)| a + bd).collect();
        let dev_norm = z
            .iter()
            .zip(g)
            .map(|(zv, gv)| (zv - gv) * (zv - gv))
            .sum::<f64>()
            .sqrt();
        let scale = if dev_norm > radius { radius / dev_norm } else { 1.0 };
        let mut data_gap_sqr = 0.0;
        for (((gw, bd), zv), (gv, a)) in g_work
            .iter_mut()
            .zip(b_data.iter_mut())
            .zip(&z)
            .zip(g.iter().zip(&au_on))
        {
            let v = gv + scale * (zv - gv);
            data_gap_sqr += (a - v) * (a - v);
            *bd = zv - v;
            *gw = 2.0 * v - zv;
        }
        let au_norm = au_on.iter().map(|a| a * a).sum::<f64>();
        let data_gap = (data_gap_sqr / au_norm.max(f64::MIN_POSITIVE)).sqrt();

        let rel_change = diff_norm / (u_prev_norm + 1e-30);
        if residual <= feas_target
            && rel_change <= cfg.tol_rel
            && split_gap <= cfg.tol_rel
            && data_gap <= cfg.tol_rel
        {
            converged = true;
            break;
        }
    }

    if let Some(mut w) = trace_writer {
        w.flush()?;
    }

    Ok(SolverResult {
        u_star: u,
        iterations,
        objective,
        residual,
        converged,
        trace,
    })
}
