//! The ξ-dependent block matrices that tie singular-value level crossings of
//! G(jω) to an eigenvalue problem.
//!
//! For a level ξ > 0 with D_ξ = DᵀD − ξ²I nonsingular, the blocks are
//!
//! ```text
//! M0 = [ A0 − B D_ξ⁻¹ Dᵀ C        −B D_ξ⁻¹ Bᵀ              ]
//!      [ ξ² Cᵀ (DDᵀ − ξ²I)⁻¹ C    −A0ᵀ + Cᵀ D D_ξ⁻¹ Bᵀ     ]
//!
//! Mᵢ = [ Aᵢ 0 ]     M₋ᵢ = [ 0  0     ]
//!      [ 0  0 ]            [ 0  −Aᵢᵀ ]
//! ```
//!
//! and the associated nonlinear eigenvalue matrix is
//! H_ξ(λ) = λI − M0 − Σᵢ (Mᵢ e^(−λτᵢ) + M₋ᵢ e^(λτᵢ)). G(jω) has a singular
//! value equal to ξ exactly when det H_ξ(jω) = 0. In the delay-free case M0
//! is the classical Hamiltonian matrix of the bounded-real level test.
//!
//! Note the lower-left block inverts the output-side Gram matrix DDᵀ − ξ²I;
//! for D = 0 it reduces to −CᵀC and for square D both Gram variants have the
//! same singular ξ values.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::system::DelaySystem;

/// Relative nonsingularity threshold for D_ξ.
const DXI_GUARD: f64 = 1e-12;

/// The ξ-level block matrices of a system.
#[derive(Debug, Clone)]
pub struct LevelMatrices {
    xi: f64,
    d_xi: DMatrix<f64>,
    m0: DMatrix<f64>,
    m_plus: Vec<DMatrix<f64>>,
    m_minus: Vec<DMatrix<f64>>,
    taus: Vec<f64>,
}

impl LevelMatrices {
    /// The level ξ the blocks were built for.
    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// D_ξ = DᵀD − ξ²I.
    pub fn d_xi(&self) -> &DMatrix<f64> {
        &self.d_xi
    }

    /// The 2n×2n delay-free block M0.
    pub fn m0(&self) -> &DMatrix<f64> {
        &self.m0
    }

    /// The blocks Mᵢ, i = 1…m.
    pub fn m_plus(&self) -> &[DMatrix<f64>] {
        &self.m_plus
    }

    /// The blocks M₋ᵢ, i = 1…m.
    pub fn m_minus(&self) -> &[DMatrix<f64>] {
        &self.m_minus
    }

    /// Delays shared with the source system, ascending.
    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    /// State dimension n (half the block size).
    pub fn state_dim(&self) -> usize {
        self.m0.nrows() / 2
    }

    /// Evaluates H_ξ(λ) = λI − M0 − Σᵢ (Mᵢ e^(−λτᵢ) + M₋ᵢ e^(λτᵢ)).
    pub fn eval_h(&self, lambda: C64) -> DMatrix<C64> {
        let dim = self.m0.nrows();
        let mut h = DMatrix::from_fn(dim, dim, |i, j| C64::new(-self.m0[(i, j)], 0.0));
        for i in 0..dim {
            h[(i, i)] += lambda;
        }
        for (k, tau) in self.taus.iter().enumerate() {
            let e_minus = (-lambda * C64::new(*tau, 0.0)).exp();
            let e_plus = (lambda * C64::new(*tau, 0.0)).exp();
            let mp = &self.m_plus[k];
            let mm = &self.m_minus[k];
            for i in 0..dim {
                for j in 0..dim {
                    let s =
                        e_minus * C64::new(mp[(i, j)], 0.0) + e_plus * C64::new(mm[(i, j)], 0.0);
                    h[(i, j)] -= s;
                }
            }
        }
        h
    }
}

/// Assembles the level matrices for a system at level ξ.
///
/// Fails with [`Error::SingularDxi`] when ξ is within relative tolerance of
/// a singular value of D (where D_ξ or DDᵀ − ξ²I become singular).
pub fn build_level_matrices(sys: &DelaySystem, xi: f64) -> Result<LevelMatrices> {
    if !xi.is_finite() || xi <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "xi must be positive, got {xi}"
        )));
    }
    let n = sys.n();
    let n_u = sys.n_inputs();
    let n_y = sys.n_outputs();
    let d = sys.d();
    let sigma_d = if d.iter().all(|x| *x == 0.0) {
        vec![0.0; n_u.min(n_y)]
    } else {
        linalg::singular_values_real(d)?
    };
    let sigma1_d = sigma_d.first().copied().unwrap_or(0.0);

    // xi clear of sigma_1(D), or D_xi still well-conditioned (xi between
    // well-separated singular values)
    if xi <= sigma1_d * (1.0 + DXI_GUARD) {
        let xi2 = xi * xi;
        // eigenvalues of D'D and DD' are the squared singular values padded
        // with zeros up to n_u resp. n_y
        let mut gaps_min = f64::INFINITY;
        let mut gaps_max: f64 = 0.0;
        let padded = n_u.max(n_y);
        for i in 0..padded {
            let s2 = sigma_d.get(i).map_or(0.0, |s| s * s);
            let gap = (s2 - xi2).abs();
            gaps_min = gaps_min.min(gap);
            gaps_max = gaps_max.max(gap);
        }
        if gaps_min <= DXI_GUARD * gaps_max {
            return Err(Error::SingularDxi { xi, sigma1_d });
        }
    }

    let xi2 = xi * xi;
    let mut d_xi = d.transpose() * d;
    for i in 0..n_u {
        d_xi[(i, i)] -= xi2;
    }
    let mut d_xi_out = d * d.transpose();
    for i in 0..n_y {
        d_xi_out[(i, i)] -= xi2;
    }

    // apply the inverses through factorizations of the two Gram matrices
    let dt_c = d.transpose() * sys.c();
    let x_dc = linalg::solve_real(&d_xi, &dt_c).ok_or(Error::SingularDxi { xi, sigma1_d })?;
    let x_bt = linalg::solve_real(&d_xi, &sys.b().transpose())
        .ok_or(Error::SingularDxi { xi, sigma1_d })?;
    let x_c = linalg::solve_real(&d_xi_out, sys.c()).ok_or(Error::SingularDxi { xi, sigma1_d })?;

    let tl = sys.a0() - sys.b() * &x_dc;
    let tr = -(sys.b() * &x_bt);
    let bl = sys.c().transpose() * &x_c * xi2;
    let br = -sys.a0().transpose() + sys.c().transpose() * sys.d() * &x_bt;

    let mut m0 = DMatrix::zeros(2 * n, 2 * n);
    m0.view_mut((0, 0), (n, n)).copy_from(&tl);
    m0.view_mut((0, n), (n, n)).copy_from(&tr);
    m0.view_mut((n, 0), (n, n)).copy_from(&bl);
    m0.view_mut((n, n), (n, n)).copy_from(&br);

    let mut m_plus = Vec::with_capacity(sys.delay_count());
    let mut m_minus = Vec::with_capacity(sys.delay_count());
    for term in sys.delays() {
        let mut mp = DMatrix::zeros(2 * n, 2 * n);
        mp.view_mut((0, 0), (n, n)).copy_from(&term.a);
        m_plus.push(mp);
        let mut mm = DMatrix::zeros(2 * n, 2 * n);
        mm.view_mut((n, n), (n, n))
            .copy_from(&(-term.a.transpose()));
        m_minus.push(mm);
    }

    Ok(LevelMatrices {
        xi,
        d_xi,
        m0,
        m_plus,
        m_minus,
        taus: sys.taus(),
    })
}

/// Relative residual of the determinant identity
///
/// ```text
/// det H_ξ(jω) · det D_ξ  =  det(G*(jω)G(jω) − ξ²I) · det A(jω) · det(−A(jω)*)
/// ```
///
/// with A(jω) = jωI − A0 − Σ Aᵢe^(−jωτᵢ). Both sides are evaluated through
/// log-scaled LU determinants; the return value is |LHS/RHS − 1|. Used as a
/// correctness probe in tests.
pub fn det_identity_residual(sys: &DelaySystem, lm: &LevelMatrices, omega: f64) -> Result<f64> {
    let jw = C64::new(0.0, omega);
    let h = lm.eval_h(jw);
    let (lhs_log, lhs_arg) = {
        let (l1, a1) = linalg::log_det(&h);
        let (l2, a2) = linalg::log_det_real(lm.d_xi());
        (l1 + l2, a1 + a2)
    };

    let fr = sys.eval_transfer(omega)?;
    let mut gram = fr.value.adjoint() * &fr.value;
    let xi2 = lm.xi() * lm.xi();
    for i in 0..gram.nrows() {
        gram[(i, i)] -= C64::new(xi2, 0.0);
    }
    let a = sys.characteristic_matrix(jw);
    let n = sys.n() as f64;
    let (lg, ag) = linalg::log_det(&gram);
    let (la, _) = linalg::log_det(&a);
    // det A · det(−A*) = det A · conj((−1)^n det A): the args cancel,
    // leaving |det A|² with phase −nπ
    let rhs_log = lg + 2.0 * la;
    let rhs_arg = ag - n * std::f64::consts::PI;

    let ratio = C64::new(lhs_log - rhs_log, 0.0).exp().re;
    let phase = C64::new(0.0, lhs_arg - rhs_arg).exp();
    Ok((C64::new(ratio, 0.0) * phase - C64::new(1.0, 0.0)).norm())
}
