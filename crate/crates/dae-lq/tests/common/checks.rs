//! Population checks shared by the focused test files and the acceptance
//! runner. Each returns the list of failures, empty on success.

use super::*;
use dae_lq::associate::{
    associate, associate_with_bases, feedback_equivalence, lift_solution, project_solution, smooth_inputs,
    stabilizable_restriction, verify_associated, AssociatedOdeLti,
};
use dae_lq::dae_model::{
    behavior_residual, consistency_space, impulse_controllable, pencil_stabilizability_test, wong_limit, DaeLti,
};
use dae_lq::linalg_subspace::{blkdiag, hcat, image, vcat, Matrix, Vector};
use dae_lq::lq_solver::{
    finite_horizon, infinite_horizon, is_behaviorally_stabilizable, solve_are, solve_dre, trajectory_cost, LqWeights,
};
use dae_lq::ode_geometry::{linspace, simulate, stabilizability_subspace, weakly_unobservable};
use dae_lq::Error;
use nalgebra::SymmetricEigen;

/// A random consistent initial value `E C_s v`.
pub fn consistent_value(dae: &DaeLti, assoc: &AssociatedOdeLti, rng: &mut ChaCha8Rng) -> Vector {
    &dae.e * assoc.c_s() * vector(assoc.nhat(), rng)
}

/// Weights `Q = I`, `R = I`, `Q0 = I`.
pub fn unit_weights(dae: &DaeLti) -> LqWeights {
    LqWeights::new(
        Matrix::identity(dae.n(), dae.n()),
        Matrix::identity(dae.m(), dae.m()),
        Matrix::identity(dae.c(), dae.c()),
    )
    .unwrap()
}

fn rotated(dae: &DaeLti, seed: u64) -> AssociatedOdeLti {
    let base = associate(dae, TOL);
    let mut r = rng(seed ^ 0x5eed);
    let q_state = orthogonal(base.nhat(), &mut r);
    let q_input = orthogonal(base.k(), &mut r);
    associate_with_bases(dae, TOL, Some(&q_state), Some(&q_input))
}

/// Verification report, Wong cross-check, minimality, uniqueness up to
/// feedback equivalence and the project/lift round trip.
pub fn structure_failures(seeds: std::ops::Range<u64>) -> Vec<String> {
    let mut failures = Vec::new();
    for seed in seeds {
        let dae = random_dae(seed);
        let assoc = associate(&dae, TOL);
        let report = verify_associated(&dae, &assoc, TOL);
        if !report.all_ok() || report.max_behavior_residual > 1e-5 {
            failures.push(format!("seed {seed}: {report:?}"));
            continue;
        }
        let stacked = image(&hcat(&assoc.c_s(), &assoc.d_s()), TOL);
        let wong = wong_limit(&dae, TOL);
        if !stacked.equals(&wong) {
            failures.push(format!("seed {seed}: im[C_s D_s] dim {} vs Wong limit dim {}", stacked.dim(), wong.dim()));
        }
        if !weakly_unobservable(&assoc.as_ode(), TOL).is_zero() {
            failures.push(format!("seed {seed}: associated system not minimal"));
        }
        let other = rotated(&dae, seed);
        match feedback_equivalence(&assoc, &other, &dae, 1e-8) {
            Ok(eq) if eq.residual <= 1e-8 => {}
            Ok(eq) => failures.push(format!("seed {seed}: equivalence residual {:.3e}", eq.residual)),
            Err(e) => failures.push(format!("seed {seed}: {e}")),
        }
        if let Err(msg) = round_trip(&dae, &assoc, seed) {
            failures.push(format!("seed {seed}: {msg}"));
        }
    }
    failures
}

/// Lifts `(v0, g)`, projects back and compares.
pub fn round_trip(dae: &DaeLti, assoc: &AssociatedOdeLti, seed: u64) -> std::result::Result<(), String> {
    let mut r = rng(seed.wrapping_mul(31) + 7);
    let v0 = vector(assoc.nhat(), &mut r);
    let horizon = 1.0 / assoc.a_l.norm().max(assoc.b_l.norm()).max(1.0);
    let grid = linspace(horizon, 400);
    let g = smooth_inputs(assoc.k(), &grid, seed, 2.0);
    let traj = lift_solution(dae, assoc, &v0, &g, &grid).map_err(|e| e.to_string())?;
    let states = simulate(&assoc.as_ode(), &v0, &g, &grid).map_err(|e| e.to_string())?.states;
    let ex0 = &dae.e * &traj.x[0];
    let in_image = consistency_space(dae, assoc).distance(&ex0);
    if in_image > 1e-10 * (1.0 + ex0.norm()) {
        return Err(format!("Ex(0) off the consistency space by {in_image:.3e}"));
    }
    let (vs, gs) = project_solution(dae, assoc, &traj);
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        let scale = 1.0 + states[i].norm() + g[i].norm();
        worst = worst.max((&vs[i] - &states[i]).norm() / scale);
        if !assoc.zero_feedthrough() {
            worst = worst.max((&gs[i] - &g[i]).norm() / scale);
        }
    }
    if worst > 1e-8 {
        return Err(format!("project∘lift residual {worst:.3e}"));
    }
    Ok(())
}

/// Impulse controllability ⇔ consistency space = image(E).
pub fn impulse_chain_failures(seeds: std::ops::Range<u64>) -> Vec<String> {
    let mut failures = Vec::new();
    for seed in seeds {
        let dae = random_dae(seed);
        let assoc = associate(&dae, TOL);
        let ic = impulse_controllable(&dae, TOL);
        let equal = consistency_space(&dae, &assoc).equals(&image(&dae.e, TOL));
        if ic != equal {
            failures.push(format!("seed {seed}: impulse controllable {ic}, consistency = im E {equal}"));
        }
    }
    failures
}

fn min_eig(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Finite-horizon cost formula against quadrature, feedback form, behavior
/// residual and initial value on random DAEs.
pub fn finite_horizon_failures(seeds: std::ops::Range<u64>) -> Vec<String> {
    let mut failures = Vec::new();
    for seed in seeds {
        let dae = random_dae(seed);
        let assoc = associate(&dae, TOL);
        let mut r = rng(seed + 1000);
        let z = consistent_value(&dae, &assoc, &mut r);
        let w = unit_weights(&dae);
        let sol = match finite_horizon(&dae, &assoc, &w, &z, 1.0, 4000) {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        let quad = trajectory_cost(&w, &dae.e, &sol.traj, true).unwrap();
        let rel = (quad - sol.cost).abs() / sol.cost.abs().max(1e-12);
        if rel > 1e-5 && (quad - sol.cost).abs() > 1e-12 {
            failures.push(format!("seed {seed}: cost {} vs quadrature {} (rel {rel:.2e})", sol.cost, quad));
        }
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..sol.grid.len() {
            worst = worst.max((&sol.k_f_samples[i] * &sol.traj.x[i] - &sol.traj.u[i]).amax());
            scale = scale.max(sol.traj.x[i].amax());
        }
        if worst > 1e-8 * (1.0 + scale) {
            failures.push(format!("seed {seed}: u* − K_f x* = {worst:.3e}"));
        }
        let res = behavior_residual(&dae, &sol.traj).unwrap();
        if res > 1e-5 {
            failures.push(format!("seed {seed}: behavior residual {res:.3e}"));
        }
        let start = (&dae.e * &sol.traj.x[0] - &z).norm();
        if start > 1e-8 * (1.0 + z.norm()) {
            failures.push(format!("seed {seed}: ‖Ex(0) − z‖ = {start:.3e}"));
        }
        if sol.p_samples.iter().any(|p| min_eig(p) < -1e-9 * (1.0 + p.norm())) {
            failures.push(format!("seed {seed}: P not PSD"));
        }
    }
    failures
}

/// Scalar `ẋ = u`, `Q = R = 1`, `Q0 = 0`: `P(t) = tanh t`.
pub fn tanh_error() -> f64 {
    let dae = DaeLti::new(Matrix::identity(1, 1), Matrix::zeros(1, 1), Matrix::identity(1, 1)).unwrap();
    let assoc = associate(&dae, TOL);
    let w = LqWeights::new(Matrix::identity(1, 1), Matrix::identity(1, 1), Matrix::zeros(1, 1)).unwrap();
    let dre = solve_dre(&dae, &assoc, &w, 3.0, 3000).unwrap();
    // P is expressed in associated coordinates with x = C_s v.
    let cs2 = assoc.c_s()[(0, 0)].powi(2);
    dre.grid
        .iter()
        .zip(&dre.p)
        .map(|(t, p)| (p[(0, 0)] / cs2 - t.tanh()).abs())
        .fold(0.0, f64::max)
}

/// ARE residual, symmetry, definiteness and closed-loop stability on the
/// first `count` stabilizable members of the random population.
pub fn are_failures(count: usize) -> Vec<String> {
    let mut failures = Vec::new();
    let mut seen = 0;
    let mut seed = 0u64;
    while seen < count {
        let dae = random_dae(seed);
        let assoc = associate(&dae, TOL);
        seed += 1;
        if !pencil_stabilizability_test(&dae, &assoc, TOL) || assoc.nhat() == 0 {
            continue;
        }
        seen += 1;
        let restr = stabilizable_restriction(&assoc, TOL);
        let w = unit_weights(&dae);
        match solve_are(&restr, &w, 1e-8) {
            Ok(are) => {
                let p = &are.p;
                if are.residual > 1e-8 * (1.0 + p.norm()) {
                    failures.push(format!("seed {}: residual {:.3e}", seed - 1, are.residual));
                }
                if (p - p.transpose()).amax() > 1e-12 * (1.0 + p.amax()) {
                    failures.push(format!("seed {}: P not symmetric", seed - 1));
                }
                if min_eig(p) <= 0.0 {
                    failures.push(format!("seed {}: P not positive definite", seed - 1));
                }
                if !(are.closed_loop_abscissa < 0.0) {
                    failures.push(format!("seed {}: abscissa {}", seed - 1, are.closed_loop_abscissa));
                }
            }
            Err(e) => failures.push(format!("seed {}: {e}", seed - 1)),
        }
    }
    failures
}

/// Appends an uncontrollable unstable mode `ẋ = x` to a random DAE.
pub fn with_unstable_mode(dae: &DaeLti) -> DaeLti {
    let one = Matrix::identity(1, 1);
    DaeLti::new(
        blkdiag(&dae.e, &one),
        blkdiag(&dae.a, &one),
        vcat(&dae.b, &Matrix::zeros(1, dae.m())),
    )
    .unwrap()
}

/// Infinite-horizon solvability matches behavioral stabilizability on a
/// mixed population; returns failures and the number of unstabilizable
/// initial values seen.
pub fn solvability_failures(seeds: std::ops::Range<u64>) -> (Vec<String>, usize) {
    let mut failures = Vec::new();
    let mut negatives = 0;
    for seed in seeds {
        let base = random_dae(seed);
        let dae = if seed % 2 == 0 { with_unstable_mode(&base) } else { base };
        let assoc = associate(&dae, TOL);
        let w = unit_weights(&dae);
        let mut r = rng(seed + 5000);
        let vg = stabilizability_subspace(&assoc.a_l, &assoc.b_l, TOL);
        let inside = &dae.e * assoc.c_s() * (vg.basis() * vector(vg.dim(), &mut r));
        for (k, z) in [consistent_value(&dae, &assoc, &mut r), inside].into_iter().enumerate() {
            let stab = is_behaviorally_stabilizable(&dae, &assoc, &z).unwrap();
            if !stab {
                negatives += 1;
            }
            // A generic value excites the appended uncontrollable unstable mode.
            if seed % 2 == 0 && k == 0 && stab {
                failures.push(format!("seed {seed}: appended unstable mode judged stabilizable"));
            }
            if k == 1 && !stab {
                failures.push(format!("seed {seed}: value inside V_g judged unstabilizable"));
            }
            match infinite_horizon(&dae, &assoc, &w, &z, Some(2.0), Some(200)) {
                Err(Error::NotStabilizable) if !stab => {}
                Ok(_) if stab => {}
                Err(e) => failures.push(format!("seed {seed}: stabilizable {stab}, got error {e}")),
                Ok(_) => failures.push(format!("seed {seed}: solved although not stabilizable")),
            }
        }
    }
    (failures, negatives)
}
