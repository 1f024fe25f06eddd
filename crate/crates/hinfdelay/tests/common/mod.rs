//! Shared fixtures and a seeded generator of random stable delay systems.
#![allow(dead_code)]

use hinfdelay::DelaySystem;
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::Rng;

pub fn mat(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, data)
}

/// Scalar fixture ẋ = −3x + x(t−1) + u, y = x: norm 1/2 at ω = 0.
pub fn s1() -> DelaySystem {
    DelaySystem::new(
        mat(1, 1, &[-3.0]),
        vec![(1.0, mat(1, 1, &[1.0]))],
        mat(1, 1, &[1.0]),
        mat(1, 1, &[1.0]),
        mat(1, 1, &[0.0]),
    )
    .unwrap()
}

/// Delay-free lag G(s) = 1/(s+1): norm 1 at ω = 0.
pub fn first_order_lag() -> DelaySystem {
    DelaySystem::new(
        mat(1, 1, &[-1.0]),
        vec![],
        mat(1, 1, &[1.0]),
        mat(1, 1, &[1.0]),
        mat(1, 1, &[0.0]),
    )
    .unwrap()
}

/// Delay-free resonant system 1/(s² + 0.1s + 1): interior peak near ω = 1.
pub fn resonant() -> DelaySystem {
    DelaySystem::new(
        mat(2, 2, &[0.0, 1.0, -1.0, -0.1]),
        vec![],
        mat(2, 1, &[0.0, 1.0]),
        mat(1, 2, &[1.0, 0.0]),
        mat(1, 1, &[0.0]),
    )
    .unwrap()
}

/// Two lightly damped modes with a sharp dominant peak (norm ≈ 20 near
/// ω = 1): stresses the ξ-accuracy of the correction at large levels.
pub fn sharp_double_resonance() -> DelaySystem {
    DelaySystem::new(
        mat(
            4,
            4,
            &[
                0.0, 1.0, 0.0, 0.0, //
                -1.0, -0.05, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, -4.2, -0.102,
            ],
        ),
        vec![],
        mat(4, 1, &[0.0, 1.0, 0.0, 1.0]),
        mat(1, 4, &[1.0, 0.0, 0.98, 0.0]),
        mat(1, 1, &[0.0]),
    )
    .unwrap()
}

/// Static system with B = 0 and D = [[2]]: norm 2 with no finite peak.
pub fn static_gain_two() -> DelaySystem {
    DelaySystem::new(
        mat(1, 1, &[-1.0]),
        vec![],
        mat(1, 1, &[0.0]),
        mat(1, 1, &[1.0]),
        mat(1, 1, &[2.0]),
    )
    .unwrap()
}

pub fn rand_mat(rng: &mut StdRng, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-scale..scale))
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().singular_values()[0]
}

/// Largest eigenvalue of the symmetric part (logarithmic norm).
fn log_norm(a: &DMatrix<f64>) -> f64 {
    let sym = (a + a.transpose()) * 0.5;
    nalgebra::SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Parameters for [`random_stable_system`].
pub struct SystemShape {
    pub n: usize,
    pub nu: usize,
    pub ny: usize,
    /// Delays; empty for a delay-free system.
    pub taus: Vec<f64>,
    /// Scale of the feedthrough matrix D (0 disables it).
    pub d_scale: f64,
    /// Stability margin: all characteristic roots end up left of −margin.
    pub margin: f64,
    /// Mix in a skew-dominant A0 so the response peaks away from ω = 0.
    pub oscillatory: bool,
}

/// Draws a random system and shifts A0 until the logarithmic-norm bound
/// μ(A0) + Σᵢ ‖Aᵢ‖₂ ≤ −margin guarantees stability for every delay value.
pub fn random_stable_system(rng: &mut StdRng, shape: &SystemShape) -> DelaySystem {
    let n = shape.n;
    let mut a0 = if shape.oscillatory {
        let w = rand_mat(rng, n, n, 2.0);
        &w - w.transpose() + rand_mat(rng, n, n, 0.3)
    } else {
        rand_mat(rng, n, n, 1.0)
    };
    let delays: Vec<(f64, DMatrix<f64>)> = shape
        .taus
        .iter()
        .map(|&tau| (tau, rand_mat(rng, n, n, 0.4)))
        .collect();
    let coupling: f64 = delays.iter().map(|(_, a)| spectral_norm(a)).sum();
    let shift = log_norm(&a0) + coupling + shape.margin;
    for i in 0..n {
        a0[(i, i)] -= shift;
    }
    let b = rand_mat(rng, n, shape.nu, 1.0);
    let c = rand_mat(rng, shape.ny, n, 1.0);
    let d = if shape.d_scale > 0.0 {
        rand_mat(rng, shape.ny, shape.nu, shape.d_scale)
    } else {
        DMatrix::zeros(shape.ny, shape.nu)
    };
    DelaySystem::new(a0, delays, b, c, d).expect("generated system must be consistent")
}

/// The oscillatory benchmark: n = 10, m = 7 delays 0.1…0.6 and 0.8,
/// n_u = 2, n_y = 4, random stabilized matrices.
pub fn oscillatory_benchmark(seed: u64) -> DelaySystem {
    use rand::SeedableRng;
    let mut rng = StdRng::seed_from_u64(seed);
    random_stable_system(
        &mut rng,
        &SystemShape {
            n: 10,
            nu: 2,
            ny: 4,
            taus: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8],
            d_scale: 0.0,
            margin: 0.15,
            oscillatory: true,
        },
    )
}
