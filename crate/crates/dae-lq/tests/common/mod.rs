#![allow(dead_code)]

pub mod checks;

use dae_lq::dae_model::DaeLti;
use dae_lq::linalg_subspace::{Matrix, Vector};
use rand::{Rng, SeedableRng};
pub use rand_chacha::ChaCha8Rng;

pub const TOL: f64 = 1e-10;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(r: usize, c: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn vector(n: usize, rng: &mut ChaCha8Rng) -> Vector {
    Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
}

/// Random orthogonal matrix from the QR factor of a uniform matrix.
pub fn orthogonal(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    if n == 0 {
        return Matrix::zeros(0, 0);
    }
    uniform(n, n, rng).qr().q()
}

/// Random DAE with c, n, m ≤ 8 and E of random rank.
pub fn random_dae(seed: u64) -> DaeLti {
    let mut r = rng(seed);
    let c = r.gen_range(1..=8);
    let n = r.gen_range(1..=8);
    let m = r.gen_range(1..=8);
    let re = r.gen_range(0..=c.min(n));
    let e = uniform(c, re, &mut r) * uniform(re, n, &mut r);
    let a = uniform(c, n, &mut r);
    let b = uniform(c, m, &mut r);
    DaeLti::new(e, a, b).unwrap()
}

/// Reference example: two differential equations in three states and one input.
pub fn example1() -> DaeLti {
    DaeLti::new(
        Matrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
        Matrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 1.0]),
        Matrix::from_row_slice(2, 1, &[1.0, 0.0]),
    )
    .unwrap()
}
