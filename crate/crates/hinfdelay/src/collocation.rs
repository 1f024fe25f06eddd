//! The collocation polynomial p_N(t; λ) and the rational approximant
//! transfer function G_N(jω).
//!
//! p_N is the unique polynomial of degree ≤ 2N with p_N(0; λ) = 1 and
//! p_N'(θᵢ; λ) = λ·p_N(θᵢ; λ) at every nonzero mesh node: the collocation
//! solution of ż = λz, and a rational approximation of e^(λt) in λ for fixed
//! t. Substituting p_N(−τᵢ; jω) for e^(−jωτᵢ) in the transfer function gives
//! G_N, whose singular-value level crossings coincide with the imaginary-axis
//! eigenvalues of the discretized operator on the same mesh.
//!
//! The coefficients are solved for in a Chebyshev basis mapped to
//! [−τmax, τmax], which keeps the bordered collocation system well
//! conditioned at the node counts used here. G_N is only ever evaluated
//! pointwise; no rational expression is formed.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::spectral::SpectralMesh;
use crate::system::{DelaySystem, FrequencyResponse};

/// Coefficients of p_N(·; λ) and its values at the negated delays.
#[derive(Debug, Clone)]
pub struct CollocationEval {
    /// The argument λ the polynomial was built for.
    pub lambda: C64,
    /// p_N(−τᵢ; λ) for each requested delay, in input order.
    pub values_at_minus_tau: Vec<C64>,
    /// Chebyshev coefficients of p_N on [−τmax, τmax].
    pub coeffs: DVector<C64>,
    tau_max: f64,
}

impl CollocationEval {
    /// Evaluates p_N(t; λ) from the Chebyshev coefficients (Clenshaw).
    pub fn eval(&self, t: f64) -> C64 {
        let x = t / self.tau_max;
        let n = self.coeffs.len();
        let mut b1 = C64::new(0.0, 0.0);
        let mut b2 = C64::new(0.0, 0.0);
        let two_x = C64::new(2.0 * x, 0.0);
        for k in (1..n).rev() {
            let b = two_x * b1 - b2 + self.coeffs[k];
            b2 = b1;
            b1 = b;
        }
        C64::new(x, 0.0) * b1 - b2 + self.coeffs[0]
    }
}

/// Chebyshev polynomials T_j(x) at x, j = 0…count−1.
fn chebyshev_values(x: f64, count: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(count);
    for j in 0..count {
        let v = match j {
            0 => 1.0,
            1 => x,
            _ => 2.0 * x * t[j - 1] - t[j - 2],
        };
        t.push(v);
    }
    t
}

/// Derivatives T'_j(x) = j·U_{j−1}(x), j = 0…count−1.
fn chebyshev_derivatives(x: f64, count: usize) -> Vec<f64> {
    let mut u = Vec::with_capacity(count);
    for j in 0..count {
        let v = match j {
            0 => 1.0,
            1 => 2.0 * x,
            _ => 2.0 * x * u[j - 1] - u[j - 2],
        };
        u.push(v);
    }
    let mut d = Vec::with_capacity(count);
    d.push(0.0);
    for j in 1..count {
        d.push(j as f64 * u[j - 1]);
    }
    d
}

/// Solves the bordered collocation system for p_N(·; λ) on the mesh and
/// evaluates the polynomial at −τ for every τ in `taus`.
///
/// The (2N+1)×(2N+1) complex system stacks the normalization row
/// p_N(0) = 1 over the 2N rows p_N'(θᵢ) − λ·p_N(θᵢ) = 0 at the nonzero
/// nodes in ascending order.
pub fn solve_pn(mesh: &SpectralMesh, lambda: C64, taus: &[f64]) -> Result<CollocationEval> {
    let count = 2 * mesh.order() + 1;
    let tau_max = mesh.tau_max();
    let mut a = DMatrix::from_element(count, count, C64::new(0.0, 0.0));
    let mut rhs = DVector::from_element(count, C64::new(0.0, 0.0));

    let t0 = chebyshev_values(0.0, count);
    for j in 0..count {
        a[(0, j)] = C64::new(t0[j], 0.0);
    }
    rhs[0] = C64::new(1.0, 0.0);

    let mut row = 1;
    for &node in mesh.nodes() {
        if node == 0.0 {
            continue;
        }
        let x = node / tau_max;
        let vals = chebyshev_values(x, count);
        let ders = chebyshev_derivatives(x, count);
        for j in 0..count {
            // d/dt = (1/tau_max) d/dx on the mapped interval
            let dp = C64::new(ders[j] / tau_max, 0.0);
            a[(row, j)] = dp - lambda * C64::new(vals[j], 0.0);
        }
        row += 1;
    }
    debug_assert_eq!(row, count);

    let coeffs = linalg::solve_complex(&a, &DMatrix::from_column_slice(count, 1, rhs.as_slice()))
        .ok_or(Error::CollocationSingular { lambda })?
        .column(0)
        .into_owned();

    let eval = CollocationEval {
        lambda,
        values_at_minus_tau: Vec::new(),
        coeffs,
        tau_max,
    };
    let values_at_minus_tau = taus.iter().map(|&tau| eval.eval(-tau)).collect();
    Ok(CollocationEval {
        values_at_minus_tau,
        ..eval
    })
}

/// Evaluates the rational approximant G_N(jω): the transfer function with
/// every e^(−jωτᵢ) replaced by p_N(−τᵢ; jω). For a delay-free system this is
/// exactly G(jω).
pub fn eval_gn(sys: &DelaySystem, mesh: &SpectralMesh, omega: f64) -> Result<FrequencyResponse> {
    if sys.delay_count() == 0 {
        return sys.eval_transfer(omega);
    }
    if mesh.tau_max() < sys.tau_max() {
        return Err(Error::MeshTooSmall {
            tau_max: mesh.tau_max(),
            max_delay: sys.tau_max(),
        });
    }
    let jw = C64::new(0.0, omega);
    let pn = solve_pn(mesh, jw, &sys.taus())?;

    let n = sys.n();
    let mut resolvent = DMatrix::from_fn(n, n, |i, j| C64::new(-sys.a0()[(i, j)], 0.0));
    for i in 0..n {
        resolvent[(i, i)] += jw;
    }
    for (term, p) in sys.delays().iter().zip(pn.values_at_minus_tau.iter()) {
        for i in 0..n {
            for j in 0..n {
                resolvent[(i, j)] -= *p * C64::new(term.a[(i, j)], 0.0);
            }
        }
    }
    let b = sys.b().map(|x| C64::new(x, 0.0));
    let x = linalg::solve_complex(&resolvent, &b).ok_or(Error::SingularResolvent { omega })?;
    let mut value = sys.c().map(|x| C64::new(x, 0.0)) * x;
    for i in 0..sys.d().nrows() {
        for j in 0..sys.d().ncols() {
            value[(i, j)] += C64::new(sys.d()[(i, j)], 0.0);
        }
    }
    let singular_values = linalg::singular_values(&value)?;
    Ok(FrequencyResponse {
        omega,
        value,
        singular_values,
    })
}
