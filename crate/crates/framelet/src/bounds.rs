//! Closed-form error estimates for frame-based restoration from random
//! samples, plus the discrete total variation and its comparison against
//! frame-coefficient norms.
//!
//! The central quantity is a high-probability bound on the mean-squared
//! restoration error: with `|Omega| = N^2` pixels, sample density `rho`,
//! noise level `eta`, and an operator with certified constants
//! `sigma_min`/`norm_inf`, the error `(1/|Omega|) ||u - f||^2` is bounded by
//!
//! ```text
//!   prefactor * rho^(-1/2) * |Omega|^(-min(1+beta,1)/4) * (log2|Omega|)^(3/2)
//!     + (16/3) * sigma_min^(-2) * eta^2
//! ```
//!
//! with probability at least `1 - 1/|Omega|`. The prefactor and the critical
//! accuracy level behind it combine a covering-number estimate of the
//! hypothesis set with a Bernstein-type concentration argument; both are
//! evaluated here in closed form, and the defining balance equation is kept
//! separately so root-finding can cross-check the closed form.

use crate::framelets::{binomial, FilterBank};
use crate::grid::ImageGrid;
use crate::transform::{analyze, weighted_l1, LambdaWeights};
use crate::{Error, Result};

/// Inputs to the error estimates.
///
/// `c_w` is the TV-comparison constant, `c_f` the coefficient-norm constant
/// normalized so that `||lambda . W f||_1 <= c_f |Omega|^(1/2)`, and `a >= 1`
/// the covering-radius exponent (radii down to `|Omega|^(-a)` are admissible).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub box_m: f64,
    pub beta: f64,
    pub a: f64,
    pub c_w: f64,
    pub c_f: f64,
    pub sigma_min: f64,
    pub inf_norm: f64,
    pub rho: f64,
    pub eta: f64,
    pub omega: f64,
}

impl BoundParams {
    /// Validates every field; call once after construction.
    pub fn validated(self) -> Result<Self> {
        let checks: [(&'static str, f64, bool); 10] = [
            ("box_m", self.box_m, self.box_m > 0.0),
            ("beta", self.beta, self.beta > -1.0 && self.beta < 1.0),
            ("a", self.a, self.a >= 1.0),
            ("c_w", self.c_w, self.c_w >= 1.0),
            ("c_f", self.c_f, self.c_f > 0.0),
            ("sigma_min", self.sigma_min, self.sigma_min > 0.0),
            ("inf_norm", self.inf_norm, self.inf_norm > 0.0),
            ("rho", self.rho, self.rho > 0.0 && self.rho <= 1.0),
            ("eta", self.eta, self.eta >= 0.0),
            ("omega", self.omega, self.omega >= 4.0),
        ];
        for (name, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(Error::bad_param(name, format!("invalid value {value}")));
            }
        }
        Ok(self)
    }

    /// `b = max(1 - beta, 1)`, branch taken symbolically on the sign of beta.
    pub fn b(&self) -> f64 {
        if self.beta <= 0.0 {
            1.0 - self.beta
        } else {
            1.0
        }
    }

    /// `min(1 + beta, 1)`, the decay exponent of the sampling term; equals
    /// `2 - b` identically.
    pub fn error_exponent(&self) -> f64 {
        if self.beta <= 0.0 {
            1.0 + self.beta
        } else {
            1.0
        }
    }

    /// The recurring product `(4a + b) * c_w * c_f * (1 + c_w * c_f)`.
    fn structure_product(&self) -> f64 {
        (4.0 * self.a + self.b()) * self.c_w * self.c_f * (1.0 + self.c_w * self.c_f)
    }

    /// Sample count `m = rho * omega`, rounded.
    pub fn sample_count(&self) -> usize {
        (self.rho * self.omega).round().max(1.0) as usize
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }
}

/// Discrete total variation: forward differences in both axes, counting only
/// pairs whose forward neighbor stays inside the grid (no wraparound).
pub fn discrete_tv(u: &ImageGrid) -> f64 {
    let n = u.n();
    let d = u.data();
    let mut tv = 0.0;
    for k1 in 0..n {
        for k2 in 0..n {
            let v = d[k1 * n + k2];
            if k1 + 1 < n {
                tv += (d[(k1 + 1) * n + k2] - v).abs();
            }
            if k2 + 1 < n {
                tv += (d[k1 * n + k2 + 1] - v).abs();
            }
        }
    }
    tv
}

/// The constant `C_W = max(6 * max_band sqrt(binom(r,a1) binom(r,a2)), 1)`
/// comparing the discrete TV against the (unweighted) l1 norm of the
/// high-pass frame coefficients.
pub fn tv_comparison_constant(order: usize) -> Result<f64> {
    if order == 0 {
        return Err(Error::BadOrder(order));
    }
    let mut best = 0.0f64;
    for a1 in 0..=order {
        for a2 in 0..=order {
            if (a1, a2) == (0, 0) {
                continue;
            }
            let p = binomial(order, a1) * binomial(order, a2);
            best = best.max(p.sqrt());
        }
    }
    Ok((6.0 * best).max(1.0))
}

/// Result of checking `TV(u) <= C_W * ||W u||_1` on one image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvComparison {
    pub tv: f64,
    pub coeff_l1: f64,
    pub constant: f64,
    pub holds: bool,
}

/// Evaluates both sides of the TV / frame-coefficient comparison: the
/// discrete TV and the plain (unweighted) l1 norm of all high-pass planes.
pub fn check_tv_comparison(u: &ImageGrid, bank: &FilterBank, levels: usize) -> Result<TvComparison> {
    let c = analyze(u, bank, levels)?;
    let mut l1 = 0.0;
    for (idx, key) in c.keys().iter().enumerate() {
        if key.is_lowpass() {
            continue;
        }
        l1 += c.plane_by_index(idx).iter().map(|v| v.abs()).sum::<f64>();
    }
    let tv = discrete_tv(u);
    let constant = tv_comparison_constant(bank.order())?;
    Ok(TvComparison {
        tv,
        coeff_l1: l1,
        constant,
        holds: tv <= constant * l1 + 1e-9,
    })
}

/// The two-term high-probability error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBound {
    /// Grid-independent prefactor of the sampling term.
    pub prefactor: f64,
    /// `prefactor * rho^(-1/2) * omega^(-exponent/4) * (log2 omega)^(3/2)`.
    pub sampling_term: f64,
    /// `(16/3) * sigma_min^(-2) * eta^2`.
    pub noise_term: f64,
    pub total: f64,
}

/// Evaluates the restoration error bound for the given parameters.
pub fn restoration_error_bound(p: &BoundParams) -> Result<ErrorBound> {
    let p = p.validated()?;
    let prefactor = (64.0 * p.inf_norm * p.inf_norm * p.box_m * p.box_m)
        / (3.0 * p.sigma_min * p.sigma_min)
        * (4.0 + 3.0 * (5.0 * p.structure_product()).sqrt());
    let log2_omega = p.omega.log2();
    let sampling_term = prefactor
        * p.rho.powf(-0.5)
        * p.omega.powf(-p.error_exponent() / 4.0)
        * log2_omega.powf(1.5);
    let noise_term = 16.0 / 3.0 * p.eta * p.eta / (p.sigma_min * p.sigma_min);
    Ok(ErrorBound {
        prefactor,
        sampling_term,
        noise_term,
        total: sampling_term + noise_term,
    })
}

/// Upper bound on the log covering number of the hypothesis set by
/// sup-norm balls of radius `r_cov`:
/// `ln N <= C_a * omega^(b/2) * log2(omega) / r_cov` with
/// `C_a = 20 M (4a+b) C_W C_f (1 + C_W C_f)`, valid for radii at least
/// `omega^(-a)`.
pub fn covering_log_bound(p: &BoundParams, r_cov: f64) -> Result<f64> {
    let p = p.validated()?;
    let r_min = p.omega.powf(-p.a);
    if r_cov < r_min {
        return Err(Error::bad_param(
            "r_cov",
            format!("radius {r_cov:.3e} below the admissible minimum {r_min:.3e} = omega^(-a)"),
        ));
    }
    let c_a = 20.0 * p.box_m * p.structure_product();
    Ok(c_a * p.omega.powf(p.b() / 2.0) * p.omega.log2() / r_cov)
}

/// Left-hand side minus right-hand side of the balance equation that defines
/// the critical accuracy level `eps`:
///
/// ```text
///   240 ||A||_inf^2 M^2 (4a+b) C_W C_f (1+C_W C_f) omega^(b/2) log2(omega)
///   -------------------------------------------------------------------
///                        sigma_min^2 * eps
///     - (3 m sigma_min^2 eps) / (256 ||A||_inf^2 M^2)   -   ln(1/omega)
/// ```
///
/// The gap is strictly decreasing in `eps`, so the equation has a unique
/// positive root. Kept verbatim (coefficients 240 and 3/256) so that root
/// finding on it is an independent route to [`critical_accuracy`].
pub fn accuracy_equation_gap(p: &BoundParams, m: usize, eps: f64) -> Result<f64> {
    let p = p.validated()?;
    if m == 0 {
        return Err(Error::bad_param("m", "need at least one sample"));
    }
    if eps <= 0.0 {
        return Err(Error::bad_param("eps", "accuracy level must be positive"));
    }
    let a2m2 = p.inf_norm * p.inf_norm * p.box_m * p.box_m;
    let s2 = p.sigma_min * p.sigma_min;
    let covering_part =
        240.0 * a2m2 * p.structure_product() * p.omega.powf(p.b() / 2.0) * p.omega.log2()
            / (s2 * eps);
    let concentration_part = 3.0 * m as f64 * s2 * eps / (256.0 * a2m2);
    Ok(covering_part - concentration_part - (1.0 / p.omega).ln())
}

/// Closed-form critical accuracy level: the unique positive root of the
/// balance equation, written as
///
/// ```text
///   eps = 128 ||A||_inf^2 M^2 / (3 m sigma_min^2)
///         * [ ln(omega) + sqrt( ln^2(omega)
///             + (45/4) m (4a+b) C_W C_f (1+C_W C_f) omega^(b/2) log2(omega) ) ]
/// ```
pub fn critical_accuracy(p: &BoundParams, m: usize) -> Result<f64> {
    let p = p.validated()?;
    if m == 0 {
        return Err(Error::bad_param("m", "need at least one sample"));
    }
    let a2m2 = p.inf_norm * p.inf_norm * p.box_m * p.box_m;
    let s2 = p.sigma_min * p.sigma_min;
    let ln_omega = p.omega.ln();
    let disc = ln_omega * ln_omega
        + 45.0 / 4.0
            * m as f64
            * p.structure_product()
            * p.omega.powf(p.b() / 2.0)
            * p.omega.log2();
    Ok(128.0 * a2m2 / (3.0 * m as f64 * s2) * (ln_omega + disc.sqrt()))
}

/// Failure-probability bound at accuracy `eps`: the covering bound at radius
/// `sigma_min^2 eps / (12 ||A||_inf^2 M)` combined with the concentration
/// exponent `3 m sigma_min^2 eps / (256 ||A||_inf^2 M^2)`. At the critical
/// accuracy this evaluates to exactly `1/omega`.
pub fn failure_probability(p: &BoundParams, m: usize, eps: f64) -> Result<f64> {
    let p = p.validated()?;
    if m == 0 {
        return Err(Error::bad_param("m", "need at least one sample"));
    }
    if eps <= 0.0 {
        return Err(Error::bad_param("eps", "accuracy level must be positive"));
    }
    let a2m2 = p.inf_norm * p.inf_norm * p.box_m * p.box_m;
    let s2 = p.sigma_min * p.sigma_min;
    let r_cov = s2 * eps / (12.0 * p.inf_norm * p.inf_norm * p.box_m);
    let ln_cover = covering_log_bound(&p, r_cov)?;
    let exponent = 3.0 * m as f64 * s2 * eps / (256.0 * a2m2);
    Ok((ln_cover - exponent).exp())
}

/// Mean squared error `(1/N^2) sum (u - f)^2`.
pub fn empirical_error(u: &ImageGrid, f: &ImageGrid) -> Result<f64> {
    if u.n() != f.n() {
        return Err(Error::DimensionMismatch(format!(
            "grids differ: {} vs {}",
            u.n(),
            f.n()
        )));
    }
    let sum: f64 = u
        .data()
        .iter()
        .zip(f.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / (u.n() * u.n()) as f64)
}

/// Instance-checkable coefficient-norm constant: the smallest `c_f` with
/// `||lambda . W f||_1 <= c_f |Omega|^(1/2)`, i.e. the weighted l1 norm of
/// the frame coefficients of `f` divided by `N`.
pub fn coefficient_norm_constant(
    f: &ImageGrid,
    bank: &FilterBank,
    weights: &LambdaWeights,
) -> Result<f64> {
    let c = analyze(f, bank, weights.levels())?;
    Ok(weighted_l1(&c, weights)? / f.n() as f64)
}
