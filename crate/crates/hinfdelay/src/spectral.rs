//! Spectral collocation machinery: the symmetric Chebyshev–Lobatto mesh on
//! [−τmax, τmax], barycentric interpolation and differentiation, the
//! discretized operator matrix, and extraction of its imaginary-axis
//! eigenvalues.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::level_matrices::LevelMatrices;
use crate::linalg::{self, C64};

/// Default relative tolerance for classifying an eigenvalue as lying on the
/// imaginary axis.
pub const DEFAULT_IMAG_TOL: f64 = 1e-7;

/// Symmetric collocation mesh of 2N+1 points on [−τmax, τmax].
///
/// The nodes are Chebyshev–Lobatto points reparameterized to be odd
/// symmetric, θᵢ = τmax·sin(iπ/(2N)) for i = −N…N, so that θ₀ = 0 and
/// θ₋ᵢ = −θᵢ exactly. Interpolation and differentiation use barycentric
/// formulas, which stay well conditioned at the node counts used here.
#[derive(Debug, Clone)]
pub struct SpectralMesh {
    order: usize,
    tau_max: f64,
    nodes: Vec<f64>,
    bary_weights: Vec<f64>,
    diff_matrix: DMatrix<f64>,
}

/// Builds the symmetric mesh of order N (2N+1 nodes).
pub fn build_mesh(order: usize, tau_max: f64) -> Result<SpectralMesh> {
    if order < 1 {
        return Err(Error::InvalidMesh("N must be >= 1".into()));
    }
    if !tau_max.is_finite() || tau_max <= 0.0 {
        return Err(Error::InvalidMesh(format!(
            "tau_max must be positive, got {tau_max}"
        )));
    }
    let n = order as i64;
    let count = 2 * order + 1;
    let mut nodes = Vec::with_capacity(count);
    for i in -n..=n {
        let node = if i == 0 {
            0.0
        } else if i == -n {
            -tau_max
        } else if i == n {
            tau_max
        } else {
            tau_max * (i as f64 * std::f64::consts::PI / (2.0 * n as f64)).sin()
        };
        nodes.push(node);
    }

    // closed-form Chebyshev–Lobatto barycentric weights (common scale is
    // irrelevant): w_i = (−1)^(N−i), halved at the endpoints
    let mut bary_weights = Vec::with_capacity(count);
    for i in -n..=n {
        let sign = if (n - i) % 2 == 0 { 1.0 } else { -1.0 };
        let scale = if i == -n || i == n { 0.5 } else { 1.0 };
        bary_weights.push(sign * scale);
    }

    // differentiation matrix from the barycentric weights, with the
    // negative-sum trick for the diagonal
    let mut diff = DMatrix::zeros(count, count);
    for i in 0..count {
        let mut row_sum = 0.0;
        for k in 0..count {
            if k == i {
                continue;
            }
            let d = (bary_weights[k] / bary_weights[i]) / (nodes[i] - nodes[k]);
            diff[(i, k)] = d;
            row_sum += d;
        }
        diff[(i, i)] = -row_sum;
    }

    Ok(SpectralMesh {
        order,
        tau_max,
        nodes,
        bary_weights,
        diff_matrix: diff,
    })
}

impl SpectralMesh {
    /// Mesh order N.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Interval half-width τmax.
    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    /// The 2N+1 nodes, ascending, with θ₀ = 0.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Barycentric weights of the node set.
    pub fn bary_weights(&self) -> &[f64] {
        &self.bary_weights
    }

    /// Differentiation matrix with entries d'ᵢₖ = l'ₖ(θᵢ).
    pub fn diff_matrix(&self) -> &DMatrix<f64> {
        &self.diff_matrix
    }

    /// Evaluates all Lagrange cardinal polynomials at t via the barycentric
    /// interpolation formula. Exact cardinal values when t hits a node.
    pub fn lagrange_row(&self, t: f64) -> Vec<f64> {
        let count = self.nodes.len();
        if let Some(hit) = self.nodes.iter().position(|&x| x == t) {
            let mut row = vec![0.0; count];
            row[hit] = 1.0;
            return row;
        }
        let mut row = Vec::with_capacity(count);
        let mut denom = 0.0;
        for k in 0..count {
            let term = self.bary_weights[k] / (t - self.nodes[k]);
            row.push(term);
            denom += term;
        }
        for v in &mut row {
            *v /= denom;
        }
        row
    }
}

/// The real square matrix approximating the level operator on the mesh.
///
/// All block rows except the middle one are mesh differentiation rows and do
/// not depend on ξ or the system; the middle block row carries the level
/// matrices.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    matrix: DMatrix<f64>,
    xi: f64,
    block_size: usize,
}

impl DiscretizedOperator {
    /// The assembled (2N+1)·2n square matrix.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Level the operator was built for.
    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Block size 2n.
    pub fn block_size(&self) -> usize {
        self.block_size
    }

    fn middle_block(&self) -> usize {
        (self.matrix.nrows() / self.block_size - 1) / 2
    }
}

/// Assembles the discretized operator for the given level matrices on the
/// given mesh.
pub fn build_discretized_operator(
    lm: &LevelMatrices,
    mesh: &SpectralMesh,
) -> Result<DiscretizedOperator> {
    let max_delay = lm.taus().last().copied().unwrap_or(0.0);
    if mesh.tau_max() < max_delay {
        return Err(Error::MeshTooSmall {
            tau_max: mesh.tau_max(),
            max_delay,
        });
    }
    let count = 2 * mesh.order() + 1;
    let bs = 2 * lm.state_dim();
    let dim = count * bs;
    let mut matrix = DMatrix::zeros(dim, dim);

    // differentiation rows: block (i,k) = l'ₖ(θᵢ)·I for i ≠ middle
    let mid = mesh.order();
    for bi in 0..count {
        if bi == mid {
            continue;
        }
        for bk in 0..count {
            let d = mesh.diff_matrix()[(bi, bk)];
            for r in 0..bs {
                matrix[(bi * bs + r, bk * bs + r)] = d;
            }
        }
    }

    // middle block row: aₖ = M0·lₖ(0) + Σᵢ (Mᵢ·lₖ(−τᵢ) + M₋ᵢ·lₖ(τᵢ))
    let row_at_zero = mesh.lagrange_row(0.0);
    let mut blocks: Vec<DMatrix<f64>> = row_at_zero.iter().map(|&l| lm.m0() * l).collect();
    for (i, &tau) in lm.taus().iter().enumerate() {
        let row_minus = mesh.lagrange_row(-tau);
        let row_plus = mesh.lagrange_row(tau);
        for (bk, block) in blocks.iter_mut().enumerate() {
            if row_minus[bk] != 0.0 {
                *block += &lm.m_plus()[i] * row_minus[bk];
            }
            if row_plus[bk] != 0.0 {
                *block += &lm.m_minus()[i] * row_plus[bk];
            }
        }
    }
    for (bk, block) in blocks.iter().enumerate() {
        matrix
            .view_mut((mid * bs, bk * bs), (bs, bs))
            .copy_from(block);
    }

    Ok(DiscretizedOperator {
        matrix,
        xi: lm.xi(),
        block_size: bs,
    })
}

/// Delay-free path: the operator is the 2n×2n block M0 itself (the classical
/// Hamiltonian level test), no mesh involved.
pub fn hamiltonian_operator(lm: &LevelMatrices) -> DiscretizedOperator {
    DiscretizedOperator {
        matrix: lm.m0().clone(),
        xi: lm.xi(),
        block_size: lm.m0().nrows(),
    }
}

/// The imaginary-axis part of an operator's spectrum.
#[derive(Debug, Clone)]
pub struct ImagSpectrum {
    /// Crossing frequencies, ascending, deduplicated within `tol_used`.
    pub omegas: Vec<f64>,
    /// For each ω, the θ=0 block of a unit-norm eigenvector: the [u; v] seed
    /// for the correction step.
    pub eigvecs_at_zero_node: Vec<DVector<C64>>,
    /// Relative tolerance used for classification and dedup.
    pub tol_used: f64,
}

/// All eigenvalues of the operator matrix (dense QR algorithm).
pub fn operator_eigenvalues(op: &DiscretizedOperator) -> Result<Vec<C64>> {
    linalg::eigenvalues(op.matrix().clone())
}

/// Classifies and deduplicates the imaginary-axis part of a spectrum,
/// returning the nonnegative frequencies ascending.
fn classify_imaginary(eigs: &[C64], rel_tol: f64) -> Vec<f64> {
    let mut cands: Vec<f64> = eigs
        .iter()
        .filter(|l| l.re.abs() <= rel_tol * l.norm().max(1.0) && l.im >= 0.0)
        .map(|l| l.im)
        .collect();
    cands.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut omegas: Vec<f64> = Vec::new();
    let mut cluster: Vec<f64> = Vec::new();
    let flush = |cluster: &mut Vec<f64>, omegas: &mut Vec<f64>| {
        if !cluster.is_empty() {
            let mean = cluster.iter().sum::<f64>() / cluster.len() as f64;
            omegas.push(mean);
            cluster.clear();
        }
    };
    for w in cands {
        match cluster.last() {
            Some(&last) if w - last <= rel_tol * w.max(1.0) => cluster.push(w),
            _ => {
                flush(&mut cluster, &mut omegas);
                cluster.push(w);
            }
        }
    }
    flush(&mut cluster, &mut omegas);
    omegas
}

/// Crossing frequencies only, without eigenvectors: the cheap test used
/// inside level iterations.
pub(crate) fn imaginary_omegas(op: &DiscretizedOperator, rel_tol: f64) -> Result<Vec<f64>> {
    if rel_tol.is_nan() || rel_tol <= 0.0 {
        return Err(Error::InvalidArgument("rel_tol must be > 0".into()));
    }
    let eigs = linalg::eigenvalues(op.matrix().clone())?;
    Ok(classify_imaginary(&eigs, rel_tol))
}

/// Computes the full spectrum of the operator and keeps the eigenvalues on
/// the imaginary axis: λ is accepted when |Re λ| ≤ rel_tol·max(1, |λ|).
/// Returns the nonnegative-frequency representatives, ascending, with the
/// θ=0 block of a unit-norm eigenvector for each (by inverse iteration).
pub fn imaginary_eigenvalues(op: &DiscretizedOperator, rel_tol: f64) -> Result<ImagSpectrum> {
    if rel_tol.is_nan() || rel_tol <= 0.0 {
        return Err(Error::InvalidArgument("rel_tol must be > 0".into()));
    }
    let eigs = linalg::eigenvalues(op.matrix().clone())?;
    let omegas = classify_imaginary(&eigs, rel_tol);

    let mut eigvecs = Vec::with_capacity(omegas.len());
    if !omegas.is_empty() {
        let ac = op.matrix().map(|x| C64::new(x, 0.0));
        for (idx, &w) in omegas.iter().enumerate() {
            let full = inverse_iteration(&ac, C64::new(0.0, w), idx as u64)?;
            let bs = op.block_size();
            let start = op.middle_block() * bs;
            eigvecs.push(full.rows(start, bs).into_owned());
        }
    }

    Ok(ImagSpectrum {
        omegas,
        eigvecs_at_zero_node: eigvecs,
        tol_used: rel_tol,
    })
}

/// Two steps of inverse iteration at the given shift. The shift is nudged
/// off the exact eigenvalue if the factorization collapses.
fn inverse_iteration(a: &DMatrix<C64>, shift: C64, salt: u64) -> Result<DVector<C64>> {
    let dim = a.nrows();
    let scale = a.norm().max(1.0);
    let mut perturb = 0.0;
    for _attempt in 0..5 {
        let mut m = a.clone();
        let s = shift + C64::new(perturb, 0.0);
        for i in 0..dim {
            m[(i, i)] -= s;
        }
        let lu = m.lu();
        let mut x = linalg::seeded_unit_vector(dim, 0x5eed ^ salt);
        let mut ok = true;
        for _ in 0..2 {
            match lu.solve(&x) {
                Some(y) if y.iter().all(|c| c.re.is_finite() && c.im.is_finite()) => {
                    let norm = y.norm();
                    if norm == 0.0 {
                        ok = false;
                        break;
                    }
                    x = y / C64::new(norm, 0.0);
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(x);
        }
        perturb = if perturb == 0.0 {
            1e-13 * scale
        } else {
            perturb * 100.0
        };
    }
    Err(Error::EigenFailure(
        "inverse iteration failed to produce an eigenvector".into(),
    ))
}
