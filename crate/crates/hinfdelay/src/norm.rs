//! The predictor–corrector pipeline for the H∞ norm.
//!
//! Prediction searches for the largest level ξ at which the discretized
//! operator still has imaginary-axis eigenvalues, either by plain bisection
//! or by the quadratically convergent level-set iteration that probes the
//! geometric-mean midpoints between consecutive crossing frequencies.
//! Correction then refines each predicted peak against the true system by a
//! damped Gauss–Newton iteration on the 4n+3 real equations
//!
//! ```text
//! H_ξ(jω)[u; v] = 0,   c*[u; v] = 1,   Im{v*(I + Σ Aᵢτᵢe^(−jωτᵢ))u} = 0
//! ```
//!
//! in the 4n+2 real unknowns (u, v, ω, ξ), where c is the frozen seed
//! eigenvector. The system is consistent at a singular-value peak, so the
//! least-squares iteration converges to a zero-residual point.

use nalgebra::{DMatrix, DVector};

use crate::collocation;
use crate::error::{Error, Result};
use crate::level_matrices::{build_level_matrices, LevelMatrices};
use crate::linalg::{self, C64};
use crate::spectral::{
    build_discretized_operator, build_mesh, hamiltonian_operator, imaginary_eigenvalues,
    ImagSpectrum, SpectralMesh, DEFAULT_IMAG_TOL,
};
use crate::system::DelaySystem;

/// Prediction strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Plain bisection on the level (robust, linearly convergent).
    Bisection,
    /// Level-set iteration probing midpoints between crossing frequencies.
    LevelSet,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Bisection => "bisection",
            Method::LevelSet => "levelset",
        }
    }
}

/// Options for [`hinf_norm`].
#[derive(Debug, Clone)]
pub struct NormOptions {
    /// Mesh order N (2N+1 collocation points). Ignored for delay-free
    /// systems, which use the Hamiltonian matrix directly.
    pub n: usize,
    /// Prediction tolerance.
    pub tol: f64,
    /// Prediction strategy.
    pub method: Method,
    /// Optional candidate peak frequency used to initialize the level-set
    /// lower bound.
    pub omega_hint: Option<f64>,
    /// Relative tolerance for classifying eigenvalues as imaginary-axis.
    pub imag_tol: f64,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions {
            n: 8,
            tol: 1e-8,
            method: Method::LevelSet,
            omega_hint: None,
            imag_tol: DEFAULT_IMAG_TOL,
        }
    }
}

/// Output of a prediction step.
#[derive(Debug, Clone)]
pub struct PredictionResult {
    /// The predictor's estimate of the approximant norm.
    pub xi_pred: f64,
    /// Final feasible lower bound ξ_l (an exactly attained singular value,
    /// or the initial bound when no crossing exists above it).
    pub xi_lower: f64,
    /// Crossing frequencies of the final feasible level, ascending.
    pub omegas: Vec<f64>,
    /// θ=0 eigenvector blocks seeding the correction; aligned with `omegas`.
    /// The first n entries are the u part, the last n the v part.
    pub seeds: Vec<DVector<C64>>,
    /// Level iterations performed.
    pub iterations: usize,
    /// Strategy that produced this prediction.
    pub method: Method,
    /// Finite frequency at which the lower bound was attained; `None` when
    /// it came from the feedthrough gain σ₁(D) (supremum approached only as
    /// ω → ∞).
    pub lower_bound_omega: Option<f64>,
}

/// One corrected peak.
#[derive(Debug, Clone)]
pub struct PeakCandidate {
    pub u: DVector<C64>,
    pub v: DVector<C64>,
    /// Corrected peak frequency ω̂.
    pub omega: f64,
    /// Corrected level ξ̂ = σ(G(jω̂)).
    pub xi: f64,
    /// Final residual norm of the 4n+3 equations.
    pub residual_norm: f64,
    /// Whether the residual dropped below tol·(1 + ‖H_ξ(jω)‖_F).
    pub converged: bool,
    /// Gauss–Newton iterations performed.
    pub iterations: usize,
}

/// How the reported norm was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Accuracy {
    /// A corrected peak: accurate to the correction residual tolerance.
    Corrected,
    /// No crossings above the lower bound: the bound itself is the norm
    /// (attained at ω = 0 or as the feedthrough gain).
    LowerBound,
    /// Correction failed on every candidate; the prediction is reported.
    PredictionOnly,
}

impl Accuracy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Accuracy::Corrected => "corrected",
            Accuracy::LowerBound => "lower-bound-exact",
            Accuracy::PredictionOnly => "prediction-only",
        }
    }
}

/// Final norm report.
#[derive(Debug, Clone)]
pub struct NormResult {
    /// The H∞ norm ξ̂.
    pub norm: f64,
    /// Peak frequency ω̂; `None` when the supremum is only approached as
    /// ω → ∞ (feedthrough-dominated system).
    pub omega_peak: Option<f64>,
    pub prediction: PredictionResult,
    pub candidates: Vec<PeakCandidate>,
    /// Mesh order used; 0 for the delay-free Hamiltonian path.
    pub n_used: usize,
    pub accuracy: Accuracy,
}

/// Options for the Gauss–Newton correction.
#[derive(Debug, Clone)]
pub struct CorrectionOptions {
    pub max_iterations: usize,
    /// Convergence threshold relative to 1 + ‖H_ξ(jω)‖_F.
    pub residual_tol: f64,
    /// Maximum step halvings per iteration.
    pub max_halvings: usize,
}

impl Default for CorrectionOptions {
    fn default() -> Self {
        CorrectionOptions {
            max_iterations: 50,
            residual_tol: 1e-10,
            max_halvings: 20,
        }
    }
}

const MAX_BISECTION_ITERATIONS: usize = 200;
const MAX_LEVEL_ITERATIONS: usize = 100;
/// Finite-difference step factor for the (ω, ξ) Jacobian columns.
const FD_STEP: f64 = 1e-7;
/// Relative clearance kept between ξ probes and σ₁(D).
const XI_GUARD: f64 = 1e-10;
/// Looser classification tolerance for the final seed extraction: at a
/// near-tangent level the crossing eigenvalues are nearly defective and the
/// computed pair can drift off the axis by roughly the square root of the
/// backward error.
const SEED_IMAG_TOL: f64 = 1e-5;

fn guard_level(sigma1_d: f64) -> f64 {
    sigma1_d * (1.0 + XI_GUARD)
}

fn level_operator(
    sys: &DelaySystem,
    mesh: Option<&SpectralMesh>,
    xi: f64,
) -> Result<crate::spectral::DiscretizedOperator> {
    let lm = build_level_matrices(sys, xi)?;
    if sys.delay_count() == 0 {
        Ok(hamiltonian_operator(&lm))
    } else {
        let mesh = mesh.ok_or_else(|| {
            Error::InvalidArgument("a mesh is required for systems with delays".into())
        })?;
        build_discretized_operator(&lm, mesh)
    }
}

/// Crossing frequencies of the level operator, no eigenvectors: the test
/// performed at every level iteration.
fn level_crossings(
    sys: &DelaySystem,
    mesh: Option<&SpectralMesh>,
    xi: f64,
    imag_tol: f64,
) -> Result<Vec<f64>> {
    crate::spectral::imaginary_omegas(&level_operator(sys, mesh, xi)?, imag_tol)
}

/// Full imaginary-axis spectrum with eigenvector seeds.
fn level_spectrum(
    sys: &DelaySystem,
    mesh: Option<&SpectralMesh>,
    xi: f64,
    imag_tol: f64,
) -> Result<ImagSpectrum> {
    imaginary_eigenvalues(&level_operator(sys, mesh, xi)?, imag_tol)
}

/// σ₁ of the rational approximant at ω (exact transfer function when the
/// system is delay-free).
fn sigma1_gn(sys: &DelaySystem, mesh: Option<&SpectralMesh>, omega: f64) -> Result<f64> {
    match mesh {
        Some(mesh) if sys.delay_count() > 0 => Ok(collocation::eval_gn(sys, mesh, omega)?.sigma1()),
        _ => Ok(sys.eval_transfer(omega)?.sigma1()),
    }
}

fn seed_spectrum(
    sys: &DelaySystem,
    mesh: Option<&SpectralMesh>,
    xi_lower: f64,
    imag_tol: f64,
) -> Result<(Vec<f64>, Vec<DVector<C64>>)> {
    if xi_lower > guard_level(sys.sigma1_d()) {
        let spec = level_spectrum(sys, mesh, xi_lower, imag_tol.max(SEED_IMAG_TOL))?;
        Ok((spec.omegas, spec.eigvecs_at_zero_node))
    } else {
        Ok((Vec::new(), Vec::new()))
    }
}

/// Bisection predictor: brackets the largest level with imaginary-axis
/// eigenvalues to within 2·tol, then reads the crossing spectrum of the
/// final feasible level.
pub fn predict_bisection(
    sys: &DelaySystem,
    mesh: Option<&SpectralMesh>,
    tol: f64,
) -> Result<PredictionResult> {
    predict_bisection_with(sys, mesh, tol, DEFAULT_IMAG_TOL)
}

pub(crate) fn predict_bisection_with(
    sys: &DelaySystem,
    mesh: Option<&SpectralMesh>,
    tol: f64,
    imag_tol: f64,
) -> Result<PredictionResult> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument("tol must be > 0".into()));
    }
    let g0 = sys.eval_transfer(0.0)?.sigma1();
    let s1d = sys.sigma1_d();
    let mut xi_l = g0.max(s1d).max(tol);
    let lower_bound_omega = if g0 >= s1d { Some(0.0) } else { None };
    let mut xi_h = f64::INFINITY;
    let mut iterations = 0;

    while xi_h - xi_l > 2.0 * tol {
        iterations += 1;
        if iterations > MAX_BISECTION_ITERATIONS {
            return Err(Error::NoConvergence {
                what: "bisection predictor",
                iterations: MAX_BISECTION_ITERATIONS,
            });
        }
        let xi = if xi_h.is_infinite() {
            2.0 * xi_l
        } else {
            0.5 * (xi_l + xi_h)
        };
        if level_crossings(sys, mesh, xi, imag_tol)?.is_empty() {
            xi_h = xi;
        } else {
            xi_l = xi;
        }
    }

    let xi_pred = 0.5 * (xi_l + xi_h);
    let (omegas, seeds) = seed_spectrum(sys, mesh, xi_l, imag_tol)?;
    Ok(PredictionResult {
        xi_pred,
        xi_lower: xi_l,
        omegas,
        seeds,
        iterations,
        method: Method::Bisection,
        lower_bound_omega,
    })
}

/// Level-set predictor: raises the lower bound to the largest singular value
/// found at the geometric-mean midpoints of consecutive crossing frequencies
/// until the level ξ_l(1+2·tol) has no crossings left.
pub fn predict_levelset(
    sys: &DelaySystem,
    mesh: Option<&SpectralMesh>,
    tol: f64,
    omega_hint: Option<f64>,
) -> Result<PredictionResult> {
    predict_levelset_with(sys, mesh, tol, omega_hint, DEFAULT_IMAG_TOL)
}

pub(crate) fn predict_levelset_with(
    sys: &DelaySystem,
    mesh: Option<&SpectralMesh>,
    tol: f64,
    omega_hint: Option<f64>,
    imag_tol: f64,
) -> Result<PredictionResult> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument("tol must be > 0".into()));
    }
    let g0 = sys.eval_transfer(0.0)?.sigma1();
    let s1d = sys.sigma1_d();
    let mut xi_l = g0.max(s1d).max(tol);
    let mut lower_bound_omega = if g0 >= s1d { Some(0.0) } else { None };
    if let Some(hint) = omega_hint {
        if !hint.is_finite() || hint < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "omega_hint must be >= 0, got {hint}"
            )));
        }
        let s = sigma1_gn(sys, mesh, hint)?;
        if s > xi_l {
            xi_l = s;
            lower_bound_omega = Some(hint);
        }
    }

    let mut iterations = 0;
    let xi_pred;
    loop {
        iterations += 1;
        if iterations > MAX_LEVEL_ITERATIONS {
            return Err(Error::NoConvergence {
                what: "level-set predictor",
                iterations: MAX_LEVEL_ITERATIONS,
            });
        }
        let xi = xi_l * (1.0 + 2.0 * tol);
        let crossings = level_crossings(sys, mesh, xi, imag_tol)?;
        if crossings.is_empty() {
            xi_pred = 0.5 * (xi + xi_l);
            break;
        }

        // probe midpoints; a lone crossing is probed directly, and an
        // interval starting at ω = 0 uses the arithmetic midpoint since the
        // geometric mean degenerates there
        let probes: Vec<f64> = if crossings.len() == 1 {
            vec![crossings[0]]
        } else {
            crossings
                .windows(2)
                .map(|pair| {
                    if pair[0] <= imag_tol * pair[1].max(1.0) {
                        0.5 * pair[1]
                    } else {
                        (pair[0] * pair[1]).sqrt()
                    }
                })
                .collect()
        };

        let mut best = f64::NEG_INFINITY;
        let mut best_omega = 0.0;
        for &mu in &probes {
            let s = match sigma1_gn(sys, mesh, mu) {
                Ok(s) => s,
                // spurious pole of p_N at the probe: perturb and retry once
                Err(Error::CollocationSingular { .. }) => {
                    sigma1_gn(sys, mesh, mu * (1.0 + 1e-8) + 1e-12)?
                }
                Err(e) => return Err(e),
            };
            if s > best {
                best = s;
                best_omega = mu;
            }
        }
        let previous = xi_l;
        if best > xi_l {
            xi_l = best;
            lower_bound_omega = Some(best_omega);
        }
        debug_assert!(xi_l >= previous, "level-set lower bound must not decrease");
    }

    let (omegas, seeds) = seed_spectrum(sys, mesh, xi_l, imag_tol)?;
    Ok(PredictionResult {
        xi_pred,
        xi_lower: xi_l,
        omegas,
        seeds,
        iterations,
        method: Method::LevelSet,
        lower_bound_omega,
    })
}

/// I + Σᵢ Aᵢ τᵢ e^(−jωτᵢ): the weight matrix of the peak derivative
/// condition.
fn delay_weight_matrix(sys: &DelaySystem, omega: f64) -> DMatrix<C64> {
    let n = sys.n();
    let mut k = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    for term in sys.delays() {
        let w = (C64::new(0.0, -omega * term.tau)).exp() * C64::new(term.tau, 0.0);
        for i in 0..n {
            for j in 0..n {
                k[(i, j)] += w * C64::new(term.a[(i, j)], 0.0);
            }
        }
    }
    k
}

fn residual_core(
    sys: &DelaySystem,
    lm: &LevelMatrices,
    u: &DVector<C64>,
    v: &DVector<C64>,
    omega: f64,
    c: &DVector<C64>,
) -> (DVector<f64>, f64) {
    let n = sys.n();
    let h = lm.eval_h(C64::new(0.0, omega));
    let scale = 1.0 + h.norm();

    let mut w = DVector::from_element(2 * n, C64::new(0.0, 0.0));
    w.rows_mut(0, n).copy_from(u);
    w.rows_mut(n, n).copy_from(v);
    let hw = &h * &w;
    let cw = c.dotc(&w);
    let k = delay_weight_matrix(sys, omega);
    let deriv = v.dotc(&(&k * u)).im;

    let mut r = DVector::zeros(4 * n + 3);
    for i in 0..2 * n {
        r[i] = hw[i].re;
        r[2 * n + i] = hw[i].im;
    }
    r[4 * n] = cw.re - 1.0;
    r[4 * n + 1] = cw.im;
    r[4 * n + 2] = deriv;
    (r, scale)
}

/// The stacked 4n+3 residual of the correction system at (u, v, ω, ξ), with
/// the normalization c*[u; v] = 1 frozen at the seed vector `c`:
/// real and imaginary parts of H_ξ(jω)[u; v], real and imaginary parts of
/// c*[u; v] − 1, and the scalar derivative condition
/// Im{v*(I + Σ Aᵢτᵢe^(−jωτᵢ))u}.
pub fn correction_residual(
    sys: &DelaySystem,
    xi: f64,
    u: &DVector<C64>,
    v: &DVector<C64>,
    omega: f64,
    c: &DVector<C64>,
) -> Result<DVector<f64>> {
    let lm = build_level_matrices(sys, xi)?;
    Ok(residual_core(sys, &lm, u, v, omega, c).0)
}

/// Gauss–Newton Jacobian: analytic in (u, v) (the residual is linear there),
/// central finite differences in ω and ξ.
fn correction_jacobian(
    sys: &DelaySystem,
    xi: f64,
    u: &DVector<C64>,
    v: &DVector<C64>,
    omega: f64,
    c: &DVector<C64>,
    xi_floor: f64,
) -> Result<DMatrix<f64>> {
    let n = sys.n();
    let rows = 4 * n + 3;
    let mut jac = DMatrix::zeros(rows, 4 * n + 2);
    let lm = build_level_matrices(sys, xi)?;
    let h = lm.eval_h(C64::new(0.0, omega));

    for k in 0..2 * n {
        let col_re = if k < n { k } else { n + k };
        let col_im = if k < n { n + k } else { 2 * n + k };
        for i in 0..2 * n {
            let hik = h[(i, k)];
            jac[(i, col_re)] = hik.re;
            jac[(2 * n + i, col_re)] = hik.im;
            jac[(i, col_im)] = -hik.im;
            jac[(2 * n + i, col_im)] = hik.re;
        }
        let ck = c[k];
        jac[(4 * n, col_re)] = ck.re;
        jac[(4 * n, col_im)] = ck.im;
        jac[(4 * n + 1, col_re)] = -ck.im;
        jac[(4 * n + 1, col_im)] = ck.re;
    }

    let kmat = delay_weight_matrix(sys, omega);
    let a = kmat.adjoint() * v;
    let b = &kmat * u;
    for k in 0..n {
        jac[(4 * n + 2, k)] = -a[k].im;
        jac[(4 * n + 2, n + k)] = a[k].re;
        jac[(4 * n + 2, 2 * n + k)] = b[k].im;
        jac[(4 * n + 2, 3 * n + k)] = -b[k].re;
    }

    // ω column: the level matrices do not depend on ω, so reuse them
    let h_w = FD_STEP * omega.abs().max(1.0);
    let rp = residual_core(sys, &lm, u, v, omega + h_w, c).0;
    let rm = residual_core(sys, &lm, u, v, omega - h_w, c).0;
    for i in 0..rows {
        jac[(i, 4 * n)] = (rp[i] - rm[i]) / (2.0 * h_w);
    }

    // ξ column: rebuild the level matrices on both sides; fall back to a
    // forward difference when the backward point would cross the D_ξ guard
    let h_x = FD_STEP * xi.abs().max(1.0);
    if xi - h_x > xi_floor {
        let lp = build_level_matrices(sys, xi + h_x)?;
        let lms = build_level_matrices(sys, xi - h_x)?;
        let rp = residual_core(sys, &lp, u, v, omega, c).0;
        let rm = residual_core(sys, &lms, u, v, omega, c).0;
        for i in 0..rows {
            jac[(i, 4 * n + 1)] = (rp[i] - rm[i]) / (2.0 * h_x);
        }
    } else {
        let lp = build_level_matrices(sys, xi + h_x)?;
        let r0 = residual_core(sys, &lm, u, v, omega, c).0;
        let rp = residual_core(sys, &lp, u, v, omega, c).0;
        for i in 0..rows {
            jac[(i, 4 * n + 1)] = (rp[i] - r0[i]) / h_x;
        }
    }

    Ok(jac)
}

/// Runs the damped Gauss–Newton correction from every prediction seed.
/// Per-candidate failures are recorded in the candidate, never fatal.
/// Duplicate peaks (two seeds converging to the same frequency) are merged.
pub fn correct(
    sys: &DelaySystem,
    prediction: &PredictionResult,
    opts: &CorrectionOptions,
) -> Result<Vec<PeakCandidate>> {
    let n = sys.n();
    let xi_floor = guard_level(sys.sigma1_d()).max(f64::MIN_POSITIVE);
    let mut candidates = Vec::with_capacity(prediction.seeds.len());

    for (idx, seed) in prediction.seeds.iter().enumerate() {
        let seed_norm = seed.norm();
        if seed_norm == 0.0 {
            continue;
        }
        let c = seed.map(|x| x / C64::new(seed_norm, 0.0));
        let mut u = c.rows(0, n).into_owned();
        let mut v = c.rows(n, n).into_owned();
        let mut omega = prediction.omegas[idx];
        let mut xi = prediction.xi_pred.max(xi_floor);

        let lm = build_level_matrices(sys, xi)?;
        let (mut r, mut scale) = residual_core(sys, &lm, &u, &v, omega, &c);
        let mut rn = r.norm();
        let mut iterations = 0;

        // iterate past the convergence threshold while steps still help:
        // the residual can be orders of magnitude less sensitive to ξ than
        // to ω (the ξ-dependent blocks carry 1/ξ² factors), so stopping at
        // the first sub-threshold residual can leave ξ several digits short
        while rn > f64::EPSILON * scale && iterations < opts.max_iterations {
            iterations += 1;
            let jac = correction_jacobian(sys, xi, &u, &v, omega, &c, xi_floor)?;
            let delta = linalg::least_squares(&jac, &(-&r))?;

            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..=opts.max_halvings {
                let mut u2 = u.clone();
                let mut v2 = v.clone();
                for k in 0..n {
                    u2[k] += C64::new(step * delta[k], step * delta[n + k]);
                    v2[k] += C64::new(step * delta[2 * n + k], step * delta[3 * n + k]);
                }
                let omega2 = omega + step * delta[4 * n];
                let xi2 = (xi + step * delta[4 * n + 1]).max(xi_floor);
                match build_level_matrices(sys, xi2) {
                    Ok(lm2) => {
                        let (r2, scale2) = residual_core(sys, &lm2, &u2, &v2, omega2, &c);
                        let rn2 = r2.norm();
                        if rn2 < rn {
                            u = u2;
                            v = v2;
                            omega = omega2;
                            xi = xi2;
                            r = r2;
                            rn = rn2;
                            scale = scale2;
                            accepted = true;
                            break;
                        }
                    }
                    Err(Error::SingularDxi { .. }) => {}
                    Err(e) => return Err(e),
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        let converged = rn <= opts.residual_tol * scale;

        candidates.push(PeakCandidate {
            u,
            v,
            omega: omega.abs(),
            xi,
            residual_norm: rn,
            converged,
            iterations,
        });
    }

    Ok(merge_duplicate_peaks(candidates))
}

/// Merges candidates whose corrected frequencies agree to 1e-6 relative,
/// keeping the best-converged representative of each group.
fn merge_duplicate_peaks(mut candidates: Vec<PeakCandidate>) -> Vec<PeakCandidate> {
    candidates.sort_by(|a, b| a.omega.partial_cmp(&b.omega).unwrap());
    let mut merged: Vec<PeakCandidate> = Vec::with_capacity(candidates.len());
    for cand in candidates {
        if let Some(last) = merged.last_mut() {
            if (cand.omega - last.omega).abs() <= 1e-6 * last.omega.abs().max(1.0) {
                let replace = match (cand.converged, last.converged) {
                    (true, false) => true,
                    (false, true) => false,
                    _ => cand.residual_norm < last.residual_norm,
                };
                if replace {
                    *last = cand;
                }
                continue;
            }
        }
        merged.push(cand);
    }
    merged
}

/// Computes the H∞ norm: prediction at fixed mesh order, then Gauss–Newton
/// correction of every predicted peak. Falls back to the exact lower bound
/// when no crossings exist above it, and to the raw prediction (flagged)
/// when correction fails everywhere.
pub fn hinf_norm(sys: &DelaySystem, opts: &NormOptions) -> Result<NormResult> {
    let mesh = if sys.delay_count() > 0 {
        Some(build_mesh(opts.n, sys.tau_max())?)
    } else {
        None
    };
    let prediction = match opts.method {
        Method::Bisection => predict_bisection_with(sys, mesh.as_ref(), opts.tol, opts.imag_tol)?,
        Method::LevelSet => {
            predict_levelset_with(sys, mesh.as_ref(), opts.tol, opts.omega_hint, opts.imag_tol)?
        }
    };
    let candidates = correct(sys, &prediction, &CorrectionOptions::default())?;

    let best = candidates
        .iter()
        .filter(|c| c.converged)
        .max_by(|a, b| a.xi.partial_cmp(&b.xi).unwrap());
    let (norm, omega_peak, accuracy) = match best {
        Some(cand) => (cand.xi, Some(cand.omega), Accuracy::Corrected),
        None if candidates.is_empty() => (
            prediction.xi_lower,
            prediction.lower_bound_omega,
            Accuracy::LowerBound,
        ),
        None => (
            prediction.xi_pred,
            prediction.omegas.first().copied(),
            Accuracy::PredictionOnly,
        ),
    };

    Ok(NormResult {
        norm,
        omega_peak,
        n_used: if sys.delay_count() > 0 { opts.n } else { 0 },
        accuracy,
        prediction,
        candidates,
    })
}
