//! Shared fixtures and an independent reference minimizer for the
//! integration suite.
//!
//! The reference solves the same constrained model as the library solver —
//!
//! ```text
//!   minimize ||lambda . W u||_1  over u in [0, M]^Omega
//!   subject to ||R_Lambda(A u) - g||_2 <= eta sqrt(m)
//! ```
//!
//! — but with a primal–dual (Chambolle–Pock) iteration that shares no
//! algorithmic structure with the split Bregman path under test: no
//! shrinkage splitting, no Bregman add-back, no conjugate gradients. Both
//! routes may only agree because they minimize the same functional.

use framelet::framelets::{bspline_bank, FilterBank};
use framelet::grid::ImageGrid;
use framelet::harness::make_phantom;
use framelet::operators::{BlurKernel, Measurement, MeasurementOp, SampleSet, WaveletOp};
use framelet::transform::{analyze, synthesize, LambdaWeights};

/// One solver-equivalence scenario at N = 8.
pub struct Fixture {
    pub name: &'static str,
    pub order: usize,
    pub levels: usize,
    pub op: MeasurementOp,
    pub rho: f64,
    pub eta: f64,
    pub seed: u64,
}

pub const FIXTURE_N: usize = 8;
pub const FIXTURE_M: f64 = 1.0;

/// The full equivalence suite: identity/blur/wavelet operators, full and
/// partial sampling, clean and noisy data, both filter-bank orders.
pub fn fixture_set() -> Vec<Fixture> {
    vec![
        Fixture {
            name: "identity_full_clean",
            order: 1,
            levels: 1,
            op: MeasurementOp::Identity,
            rho: 1.0,
            eta: 0.0,
            seed: 101,
        },
        Fixture {
            name: "identity_three_quarters_clean",
            order: 1,
            levels: 1,
            op: MeasurementOp::Identity,
            rho: 0.75,
            eta: 0.0,
            seed: 102,
        },
        Fixture {
            name: "identity_half_noisy",
            order: 1,
            levels: 1,
            op: MeasurementOp::Identity,
            rho: 0.5,
            eta: 0.1,
            seed: 103,
        },
        Fixture {
            name: "blur_full_clean",
            order: 2,
            levels: 1,
            op: MeasurementOp::GaussianBlur(BlurKernel::new(0.8, 5).unwrap()),
            rho: 1.0,
            eta: 0.0,
            seed: 104,
        },
        Fixture {
            name: "blur_seventy_percent_noisy",
            order: 1,
            levels: 1,
            op: MeasurementOp::GaussianBlur(BlurKernel::new(0.8, 5).unwrap()),
            rho: 0.7,
            eta: 0.05,
            seed: 105,
        },
        Fixture {
            name: "wavelet_sixty_percent_clean",
            order: 2,
            levels: 1,
            op: MeasurementOp::OrthonormalWavelet(WaveletOp::haar(1).unwrap()),
            rho: 0.6,
            eta: 0.0,
            seed: 106,
        },
    ]
}

/// Builds the shared problem data for a fixture: ground truth, measurement,
/// filter bank, and weights.
pub fn fixture_problem(fx: &Fixture) -> (ImageGrid, Measurement, FilterBank, LambdaWeights) {
    let truth = make_phantom(FIXTURE_N, FIXTURE_M).unwrap();
    let samples = SampleSet::with_density(FIXTURE_N, fx.rho, fx.seed).unwrap();
    let meas = Measurement::synthesize(&fx.op, &truth, &samples, fx.eta, fx.seed).unwrap();
    let bank = bspline_bank(fx.order).unwrap();
    let weights = LambdaWeights::schedule(FIXTURE_N, fx.order, fx.levels, 0.0).unwrap();
    (truth, meas, bank, weights)
}

fn clamp_box(v: f64, m: f64) -> f64 {
    v.clamp(0.0, m)
}

/// Primal–dual reference minimizer. Dual variables: `p` on the frame
/// coefficients (projected onto the per-entry box `|p| <= lambda`, the
/// conjugate of the weighted l1 norm, with the low-pass plane pinned to
/// zero) and `q` on the sampled data (Moreau prox of the conjugate of the
/// `eta sqrt(m)`-ball indicator). Primal step: box projection. Step sizes
/// obey `tau sigma ||K||^2 < 1` with `||K||^2 <= ||W||^2 + ||A||^2 = 2`.
pub fn reference_minimizer(
    op: &MeasurementOp,
    meas: &Measurement,
    bank: &FilterBank,
    weights: &LambdaWeights,
    iterations: usize,
) -> ImageGrid {
    let n = meas.n();
    let box_m = meas.range_m();
    let samples = meas.samples();
    let g = meas.values();
    let m = g.len();
    let levels = weights.levels();
    let radius = meas.eta() * (m as f64).sqrt();

    let step = 0.7 / 2f64.sqrt();
    let (tau, sigma) = (step, step);

    let mut u = ImageGrid::zeros(n, box_m).unwrap();
    let mut ubar = u.clone();
    let mut p = analyze(&u, bank, levels).unwrap().zeros_like();
    let lowpass: Vec<bool> = p.keys().iter().map(|k| k.is_lowpass()).collect();
    let mut q = vec![0.0f64; m];

    for _ in 0..iterations {
        // dual ascent on the coefficient block, then project onto the
        // weighted l-infinity ball (the conjugate of the weighted l1 norm)
        let wub = analyze(&ubar, bank, levels).unwrap();
        for (idx, (plane, wplane)) in p.planes_mut().iter_mut().zip(wub.planes()).enumerate() {
            if lowpass[idx] {
                for v in plane.iter_mut() {
                    *v = 0.0;
                }
                continue;
            }
            for (pix, (pv, wv)) in plane.iter_mut().zip(wplane).enumerate() {
                let lim = weights.value(idx, pix);
                *pv = (*pv + sigma * wv).clamp(-lim, lim);
            }
        }

        // dual ascent on the data block: prox of the conjugate of the
        // ||. - g||_2 <= radius ball via Moreau's identity
        let aub = op.apply(&ubar).unwrap();
        let aub_on = samples.restrict(aub.data());
        let mut z: Vec<f64> = q
            .iter()
            .zip(&aub_on)
            .zip(g)
            .map(|((qv, av), gv)| qv + sigma * av - sigma * gv)
            .collect();
        if radius > 0.0 {
            let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            let scale = (1.0 - sigma * radius / norm.max(f64::MIN_POSITIVE)).max(0.0);
            for v in z.iter_mut() {
                *v *= scale;
            }
        }
        q = z;

        // primal descent + box projection, then extrapolation
        let wtp = synthesize(&p, bank).unwrap();
        let scattered = ImageGrid::new(n, box_m, samples.scatter(&q)).unwrap();
        let atq = op.adjoint(&scattered).unwrap();
        let mut u_new = u.clone();
        for ((uv, (wv, av)), old) in u_new
            .data_mut()
            .iter_mut()
            .zip(wtp.data().iter().zip(atq.data()))
            .zip(u.data())
        {
            *uv = clamp_box(old - tau * (wv + av), box_m);
        }
        for ((bv, nv), ov) in ubar
            .data_mut()
            .iter_mut()
            .zip(u_new.data())
            .zip(u.data())
        {
            *bv = 2.0 * nv - ov;
        }
        u = u_new;
    }
    u
}
