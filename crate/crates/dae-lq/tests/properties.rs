mod common;

use common::{rng, uniform, vector};
use dae_lq::linalg_subspace::{
    default_tol, image, intersect, kernel, pinv, preimage, rank, sum, Matrix, Subspace, Vector,
};
use dae_lq::ode_geometry::{linspace, simulate, stabilizability_subspace, OdeLti};
use dae_lq::schur::{eigenvalues, lyapunov, real_schur, reorder, spectral_abscissa};
use proptest::prelude::*;

/// Random `r×c` matrix of rank at most `k`, so rank deficiency is common.
fn low_rank(seed: u64, r: usize, c: usize, k: usize) -> Matrix {
    let mut g = rng(seed);
    uniform(r, k, &mut g) * uniform(k, c, &mut g)
}

fn dims() -> impl Strategy<Value = (u64, usize, usize, usize)> {
    (any::<u64>(), 1usize..=8, 1usize..=8, 0usize..=8)
}

fn orthonormality_error(s: &Subspace) -> f64 {
    let b = s.basis();
    (b.transpose() * b - Matrix::identity(s.dim(), s.dim())).amax()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rank_is_transpose_invariant((seed, r, c, k) in dims()) {
        let m = low_rank(seed, r, c, k);
        prop_assert_eq!(rank(&m, default_tol(&m)), rank(&m.transpose(), default_tol(&m)));
        prop_assert!(rank(&m, default_tol(&m)) <= k.min(r).min(c));
    }

    #[test]
    fn pseudoinverse_satisfies_penrose((seed, r, c, k) in dims()) {
        let m = low_rank(seed, r, c, k);
        let p = pinv(&m, default_tol(&m));
        let scale = 1.0 + m.norm() * p.norm();
        prop_assert!((&m * &p * &m - &m).amax() <= 1e-9 * scale * (1.0 + m.norm()));
        prop_assert!((&p * &m * &p - &p).amax() <= 1e-9 * scale * (1.0 + p.norm()));
        let mp = &m * &p;
        let pm = &p * &m;
        prop_assert!((&mp - mp.transpose()).amax() <= 1e-9 * scale);
        prop_assert!((&pm - pm.transpose()).amax() <= 1e-9 * scale);
    }

    #[test]
    fn modular_law(seed in any::<u64>(), n in 1usize..=8, a in 0usize..=8, b in 0usize..=8) {
        let mut g = rng(seed);
        // Share a random common part so intersections are nontrivial.
        let common = uniform(n, 1, &mut g);
        let u = Subspace::span(&dae_lq::linalg_subspace::hcat(&common, &uniform(n, a.min(n), &mut g)), 1e-10);
        let w = Subspace::span(&dae_lq::linalg_subspace::hcat(&common, &uniform(n, b.min(n), &mut g)), 1e-10);
        let cap = intersect(&u, &w).unwrap();
        let cup = sum(&u, &w).unwrap();
        prop_assert_eq!(cap.dim() + cup.dim(), u.dim() + w.dim());
        prop_assert!(u.contains(&cap, 1e-8) && w.contains(&cap, 1e-8));
        prop_assert!(cup.contains(&u, 1e-8) && cup.contains(&w, 1e-8));
    }

    #[test]
    fn bases_are_orthonormal((seed, r, c, k) in dims()) {
        let m = low_rank(seed, r, c, k);
        let tol = default_tol(&m);
        let im = image(&m, tol);
        let ker = kernel(&m, tol);
        prop_assert!(orthonormality_error(&im) <= 1e-10);
        prop_assert!(orthonormality_error(&ker) <= 1e-10);
        prop_assert!(orthonormality_error(&im.complement()) <= 1e-10);
        prop_assert_eq!(im.dim() + ker.dim(), c);
        prop_assert!((&m * ker.basis()).amax() <= 1e-9 * (1.0 + m.norm()));
    }

    #[test]
    fn preimage_maps_into_target((seed, r, c, k) in dims(), wdim in 0usize..=8) {
        let m = low_rank(seed, r, c, k);
        let mut g = rng(seed ^ 0x5eed);
        let w = Subspace::span(&uniform(r, wdim.min(r), &mut g), 1e-10);
        let pre = preimage(&m, &w, 1e-10).unwrap();
        prop_assert!(orthonormality_error(&pre) <= 1e-10);
        let mapped = &m * pre.basis();
        for j in 0..mapped.ncols() {
            let col: Vector = mapped.column(j).into_owned();
            prop_assert!(w.distance(&col) <= 1e-8 * (1.0 + m.norm()));
        }
        // The kernel always maps to zero, which lies in every target.
        prop_assert!(pre.contains(&kernel(&m, default_tol(&m)), 1e-8));
    }

    #[test]
    fn lyapunov_residual_is_small(seed in any::<u64>(), n in 1usize..=8) {
        let mut g = rng(seed);
        let a0 = uniform(n, n, &mut g);
        // Shift to make a Hurwitz so the equation has a unique solution.
        let shift = spectral_abscissa(&a0) + 0.5;
        let a = a0 - Matrix::identity(n, n) * shift;
        let f = uniform(n, n, &mut g);
        let q = &f * f.transpose() + Matrix::identity(n, n);
        let x = lyapunov(&a, &q).expect("Hurwitz matrix");
        let res = a.transpose() * &x + &x * &a + &q;
        prop_assert!(res.amax() <= 1e-9 * (1.0 + x.norm() * a.norm()));
        // A Hurwitz a and positive q give a positive definite solution.
        prop_assert!(x.clone().symmetric_eigen().eigenvalues.min() > 0.0);
    }

    #[test]
    fn schur_reorder_puts_stable_block_first(seed in any::<u64>(), n in 1usize..=8) {
        let mut g = rng(seed);
        let a = uniform(n, n, &mut g) * 2.0;
        let mut s = real_schur(&a);
        let k = reorder(&mut s, |re, _| re < 0.0);
        prop_assert!((&s.q * &s.t * s.q.transpose() - &a).amax() <= 1e-10 * (1.0 + a.norm()));
        prop_assert!((s.q.transpose() * &s.q - Matrix::identity(n, n)).amax() <= 1e-12);
        let stable = eigenvalues(&a).iter().filter(|e| e.0 < 0.0).count();
        prop_assert_eq!(k, stable);
        let lead = s.t.view((0, 0), (k, k)).into_owned();
        prop_assert!(eigenvalues(&lead).iter().all(|e| e.0 < 0.0));
        if k > 0 && k < n {
            prop_assert!(s.t.view((k, 0), (n - k, k)).amax() <= 1e-12 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn stabilizability_subspace_is_invariant_and_holds_inputs(seed in any::<u64>(), n in 1usize..=8, m in 0usize..=3) {
        let mut g = rng(seed);
        let a = uniform(n, n, &mut g);
        let b = uniform(n, m, &mut g);
        let v = stabilizability_subspace(&a, &b, 1e-10);
        let av = &a * v.basis();
        for j in 0..av.ncols() {
            prop_assert!(v.distance(&av.column(j).into_owned()) <= 1e-8 * (1.0 + a.norm()));
        }
        for j in 0..m {
            prop_assert!(v.distance(&b.column(j).into_owned()) <= 1e-8 * (1.0 + b.norm()));
        }
    }
}

/// Halving the RK4 step shrinks the terminal error roughly sixteenfold.
#[test]
fn simulation_converges_at_fourth_order() {
    let mut g = rng(77);
    let n = 4;
    let a = uniform(n, n, &mut g);
    let b = uniform(n, 1, &mut g);
    let sys = OdeLti::new(a.clone(), b, Matrix::identity(n, n), Matrix::zeros(n, 1)).unwrap();
    let v0 = vector(n, &mut g);
    // With zero input the exact solution is the matrix exponential.
    let exact = (a * 1.0).exp() * &v0;
    let error = |steps: usize| {
        let grid = linspace(1.0, steps);
        let inputs = vec![Vector::zeros(1); grid.len()];
        let sim = simulate(&sys, &v0, &inputs, &grid).unwrap();
        (sim.states.last().unwrap() - &exact).norm()
    };
    let ratio = error(20) / error(40);
    assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn preimage_of_axis_under_projection_is_everything() {
    let m = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    let axis = Subspace::span(&Matrix::from_row_slice(2, 1, &[1.0, 0.0]), 1e-10);
    assert!(preimage(&m, &axis, 1e-10).unwrap().is_full());
}
