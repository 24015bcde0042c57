//! Associated ODE realization of a descriptor system.
//!
//! Given `d(Ex)/dt = Ax + Bu`, the construction brings `E` to the form
//! `SET = [I_r 0; 0 0]` with an SVD, splits the transformed equations into a
//! differential part `ṗ = Ã p + G q` and an algebraic constraint
//! `0 = C̃ p + D̃ q`, and then keeps exactly the states and inputs that can
//! satisfy the constraint forever. The result is a quadruple
//! `(A_l, B_l, C_l, D_l)` whose outputs `(x, u)` are precisely the DAE
//! solutions, together with the state map `M` that recovers the state from
//! `Ex`.

use crate::dae_model::{behavior_residual, DaeLti, Trajectory};
use crate::error::{Error, Result};
use crate::linalg_subspace::{
    blkdiag, hcat, norm2, pinv, rank, singular_values, thin_svd, vcat, Matrix, Subspace, Vector,
};
use crate::ode_geometry::{
    linspace, output_nulling_friend, restrict_to_invariant, simulate, stabilizability_subspace,
    weakly_unobservable, OdeLti,
};

/// An associated ODE realization `(A_l, B_l, C_l, D_l)` with state map `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociatedOdeLti {
    pub a_l: Matrix,
    pub b_l: Matrix,
    pub c_l: Matrix,
    pub d_l: Matrix,
    /// Pseudoinverse of `E C_s`.
    pub m: Matrix,
    /// DAE state dimension.
    pub n: usize,
    pub tol: f64,
}

impl AssociatedOdeLti {
    /// Builds the record from the four matrices, deriving `M`.
    pub fn from_parts(dae: &DaeLti, a_l: Matrix, b_l: Matrix, c_l: Matrix, d_l: Matrix, tol: f64) -> Result<Self> {
        let n = dae.n();
        if c_l.nrows() != n + dae.m() || d_l.nrows() != n + dae.m() {
            return Err(Error::Shape("C_l and D_l must have n + m rows".into()));
        }
        OdeLti::new(a_l.clone(), b_l.clone(), c_l.clone(), d_l.clone())?;
        let c_s = c_l.rows(0, n).into_owned();
        let m = pinv(&(&dae.e * c_s), tol);
        Ok(Self { a_l, b_l, c_l, d_l, m, n, tol })
    }

    pub fn nhat(&self) -> usize {
        self.a_l.nrows()
    }

    pub fn k(&self) -> usize {
        self.b_l.ncols()
    }

    pub fn c_s(&self) -> Matrix {
        self.c_l.rows(0, self.n).into_owned()
    }

    pub fn d_s(&self) -> Matrix {
        self.d_l.rows(0, self.n).into_owned()
    }

    pub fn c_u(&self) -> Matrix {
        let m = self.c_l.nrows() - self.n;
        self.c_l.rows(self.n, m).into_owned()
    }

    pub fn d_u(&self) -> Matrix {
        let m = self.d_l.nrows() - self.n;
        self.d_l.rows(self.n, m).into_owned()
    }

    /// True when `D_l` is the zero column of the degenerate branch.
    pub fn zero_feedthrough(&self) -> bool {
        self.d_l.iter().all(|&v| v == 0.0)
    }

    pub fn as_ode(&self) -> OdeLti {
        OdeLti {
            a: self.a_l.clone(),
            g: self.b_l.clone(),
            c: self.c_l.clone(),
            d: self.d_l.clone(),
        }
    }

    /// State of the associated system for a consistent value `z = Ex(0)`.
    pub fn state_of(&self, z: &Vector) -> Vector {
        &self.m * z
    }
}

/// Pieces of the transformed descriptor system.
struct Split {
    t: Matrix,
    r: usize,
    sys: OdeLti,
}

/// Brings `E` to `SET = [I_r 0; 0 0]` with `S = diag(Σ_r⁻¹, I)·Uᵀ`, `T = V`
/// and returns `(Ã, G, C̃, D̃)` from the partitioned `SAT`, `SB`.
fn split(dae: &DaeLti, tol: f64) -> Split {
    let (c, n) = (dae.c(), dae.n());
    let (u, sigma, v) = thin_svd(&dae.e);
    let r = rank(&dae.e, tol);
    let u_r = u.columns(0, r).into_owned();
    let v_r = v.columns(0, r).into_owned();
    let u_perp = Subspace::from_orthonormal(u_r.clone(), tol).complement();
    let v_perp = Subspace::from_orthonormal(v_r.clone(), tol).complement();

    let mut s = Matrix::zeros(c, c);
    for j in 0..r {
        s.set_row(j, &(u_r.column(j).transpose() / sigma[j]));
    }
    s.rows_mut(r, c - r).copy_from(&u_perp.basis().transpose());
    let t = hcat(&v_r, v_perp.basis());

    let sat = &s * &dae.a * &t;
    let sb = &s * &dae.b;
    let g = hcat(
        &sat.view((0, r), (r, n - r)).into_owned(),
        &sb.rows(0, r).into_owned(),
    );
    let d_tilde = hcat(
        &sat.view((r, r), (c - r, n - r)).into_owned(),
        &sb.rows(r, c - r).into_owned(),
    );
    Split {
        t,
        r,
        sys: OdeLti {
            a: sat.view((0, 0), (r, r)).into_owned(),
            g,
            c: sat.view((r, 0), (c - r, r)).into_owned(),
            d: d_tilde,
        },
    }
}

/// Builds an associated ODE realization of `dae`.
pub fn associate(dae: &DaeLti, tol: f64) -> AssociatedOdeLti {
    associate_with_bases(dae, tol, None, None)
}

/// Same as [`associate`] but with the orthonormal bases of the weakly
/// unobservable subspace and of `im L` rotated by the given orthogonal
/// matrices. Any choice yields a valid realization.
pub fn associate_with_bases(
    dae: &DaeLti,
    tol: f64,
    state_rotation: Option<&Matrix>,
    input_rotation: Option<&Matrix>,
) -> AssociatedOdeLti {
    let m = dae.m();
    let sp = split(dae, tol);
    let r = sp.r;
    let v = weakly_unobservable(&sp.sys, tol);
    let (f, mut l) = output_nulling_friend(&sp.sys, &v, tol)
        .expect("the weakly unobservable subspace always admits a friend");
    let zero_l = l.iter().all(|&x| x == 0.0);
    if let (Some(q), false) = (input_rotation, zero_l) {
        l = &l * q;
    }
    let mut w = v.basis().clone();
    if let Some(q) = state_rotation {
        w = &w * q;
    }
    let k = l.ncols();
    let lift = blkdiag(&sp.t, &Matrix::identity(m, m));
    let c_bar = &lift * vcat(&Matrix::identity(r, r), &f);
    let d_bar = &lift * vcat(&Matrix::zeros(r, k), &l);
    let closed = &sp.sys.a + &sp.sys.g * &f;
    let a_l = w.transpose() * closed * &w;
    let b_l = w.transpose() * &sp.sys.g * &l;
    let c_l = c_bar * &w;
    AssociatedOdeLti::from_parts(dae, a_l, b_l, c_l, d_bar, tol)
        .expect("construction produces consistent shapes")
}

/// Outcome of [`feedback_equivalence`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    /// `D_l` has full column rank, or `B_l` and `D_l` vanish with `k = 1`.
    pub feedthrough: bool,
    /// `‖E D_s‖ ≤ tol`.
    pub ed_s_zero: bool,
    /// `rank(E C_s) = n̂`.
    pub ec_s_full_rank: bool,
    /// `M E C_s = I`.
    pub state_map: bool,
    /// `n̂ ≤ rank E`.
    pub dimension_bound: bool,
    /// Largest behavior residual over the random lifted simulations.
    pub max_behavior_residual: f64,
    pub behavior: bool,
}

impl VerificationReport {
    pub fn all_ok(&self) -> bool {
        self.feedthrough
            && self.ed_s_zero
            && self.ec_s_full_rank
            && self.state_map
            && self.dimension_bound
            && self.behavior
    }

    pub fn render(&self) -> String {
        format!(
            "feedthrough_rank: {}\nE_D_s_zero: {}\nE_C_s_full_rank: {}\nstate_map: {}\ndimension_bound: {}\nbehavior_residual: {:.3e} ({})\nall_ok: {}\n",
            self.feedthrough,
            self.ed_s_zero,
            self.ec_s_full_rank,
            self.state_map,
            self.dimension_bound,
            self.max_behavior_residual,
            self.behavior,
            self.all_ok()
        )
    }
}

/// Smooth input samples `g(t) = a + b sin(ω t) + c cos(2ω t)` for the
/// behavioral round trip.
pub fn smooth_inputs(k: usize, grid: &[f64], seed: u64, omega: f64) -> Vec<Vector> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let coeff: Vec<[f64; 3]> = (0..k)
        .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
        .collect();
    grid.iter()
        .map(|&t| {
            Vector::from_iterator(
                k,
                coeff
                    .iter()
                    .map(|c| c[0] + c[1] * (omega * t).sin() + c[2] * (2.0 * omega * t).cos()),
            )
        })
        .collect()
}

/// Checks the defining properties of an associated realization, including
/// 20 random lifted simulations that must solve the DAE.
pub fn verify_associated(dae: &DaeLti, sys: &AssociatedOdeLti, tol: f64) -> VerificationReport {
    let nhat = sys.nhat();
    let k = sys.k();
    let scale = 1.0 + norm2(&dae.e);
    let d_zero = sys.d_l.norm() == 0.0 && sys.b_l.norm() == 0.0 && k == 1;
    let feedthrough = d_zero || rank(&sys.d_l, tol) == k;
    let ec_s = &dae.e * sys.c_s();
    let ed_s_zero = (&dae.e * sys.d_s()).norm() <= tol * scale * 1e2;
    let ec_s_full_rank = rank(&ec_s, tol) == nhat && sys.c_l.ncols() == nhat;
    let m = pinv(&ec_s, tol);
    let state_map = m.shape() == sys.m.shape()
        && (&m * &ec_s - Matrix::identity(nhat, nhat)).norm() <= 1e-8
        && (&sys.m * &ec_s - Matrix::identity(nhat, nhat)).norm() <= 1e-8;
    let dimension_bound = nhat <= rank(&dae.e, tol) && nhat <= dae.n();

    let speed = norm2(&sys.a_l).max(norm2(&sys.b_l)).max(1.0);
    let horizon = 1.0 / speed;
    let grid = linspace(horizon, 1000);
    let mut worst: f64 = 0.0;
    if sys.c_l.ncols() == nhat {
        for trial in 0..20u64 {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1000 + trial);
            let v0 = Vector::from_fn(nhat, |_, _| rng.gen_range(-1.0..1.0));
            let g = smooth_inputs(k, &grid, 2000 + trial, 1.0 / horizon);
            match lift_solution(dae, sys, &v0, &g, &grid) {
                Ok(traj) => {
                    let r = behavior_residual(dae, &traj).unwrap_or(f64::INFINITY);
                    worst = worst.max(r);
                }
                Err(_) => worst = f64::INFINITY,
            }
        }
    } else {
        worst = f64::INFINITY;
    }
    VerificationReport {
        feedthrough,
        ed_s_zero,
        ec_s_full_rank,
        state_map,
        dimension_bound,
        max_behavior_residual: worst,
        behavior: worst <= 1e-5,
    }
}

/// Coordinates `(v, g)` of a DAE trajectory: `v = M E x` and
/// `g = D_l⁺((x, u) − C_l v)`.
pub fn project_solution(dae: &DaeLti, assoc: &AssociatedOdeLti, traj: &Trajectory) -> (Vec<Vector>, Vec<Vector>) {
    let d_pinv = pinv(&assoc.d_l, assoc.tol);
    let mut vs = Vec::with_capacity(traj.len());
    let mut gs = Vec::with_capacity(traj.len());
    for (x, u) in traj.x.iter().zip(&traj.u) {
        let v = &assoc.m * (&dae.e * x);
        let xu = Vector::from_iterator(x.len() + u.len(), x.iter().chain(u.iter()).copied());
        let g = &d_pinv * (xu - &assoc.c_l * &v);
        vs.push(v);
        gs.push(g);
    }
    (vs, gs)
}

/// Simulates the associated system from `v0` under `g` and splits the
/// output into the DAE trajectory `(x, u)`.
pub fn lift_solution(
    dae: &DaeLti,
    assoc: &AssociatedOdeLti,
    v0: &Vector,
    g: &[Vector],
    grid: &[f64],
) -> Result<Trajectory> {
    let sim = simulate(&assoc.as_ode(), v0, g, grid)?;
    Ok(split_outputs(dae.n(), sim.times, &sim.outputs))
}

/// Splits stacked outputs `(x, u)` into a trajectory.
pub fn split_outputs(n: usize, times: Vec<f64>, outputs: &[Vector]) -> Trajectory {
    let x = outputs.iter().map(|y| y.rows(0, n).into_owned()).collect();
    let u = outputs
        .iter()
        .map(|y| y.rows(n, y.len() - n).into_owned())
        .collect();
    Trajectory { times, x, u }
}

/// Feedback transformation `(T, K, U)` mapping one realization to another.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackEquivalence {
    pub t: Matrix,
    pub k: Matrix,
    pub u: Matrix,
    /// Largest relative residual of the four defining identities.
    pub residual: f64,
}

/// Applies `(T, K, U)` to `s`:
/// `(T(A+BK)T⁻¹, TBU, (C+DK)T⁻¹, DU)`.
pub fn apply_feedback(s: &AssociatedOdeLti, dae: &DaeLti, t: &Matrix, k: &Matrix, u: &Matrix) -> Result<AssociatedOdeLti> {
    let t_inv = t
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NotEquivalent("T is singular".into()))?;
    AssociatedOdeLti::from_parts(
        dae,
        t * (&s.a_l + &s.b_l * k) * &t_inv,
        t * &s.b_l * u,
        (&s.c_l + &s.d_l * k) * &t_inv,
        &s.d_l * u,
        s.tol,
    )
}

fn rel(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).norm() / (1.0 + a.norm().max(b.norm()))
}

/// Recovers the feedback transformation between two realizations of the
/// same DAE, if one exists.
pub fn feedback_equivalence(
    s1: &AssociatedOdeLti,
    s2: &AssociatedOdeLti,
    dae: &DaeLti,
    tol: f64,
) -> Result<FeedbackEquivalence> {
    if s1.nhat() != s2.nhat() {
        return Err(Error::NotEquivalent(format!(
            "state dimensions differ: {} vs {}",
            s1.nhat(),
            s2.nhat()
        )));
    }
    if s1.k() != s2.k() {
        return Err(Error::NotEquivalent("input dimensions differ".into()));
    }
    let nhat = s1.nhat();
    let t = &s2.m * &dae.e * s1.c_s();
    if nhat > 0 {
        let sv = singular_values(&t);
        let (smax, smin) = (sv[0], sv[sv.len() - 1]);
        if !(smin > 0.0) || smax / smin > 1e12 {
            return Err(Error::NotEquivalent("T is not invertible".into()));
        }
    }
    let both_zero = s1.zero_feedthrough() && s2.zero_feedthrough();
    let (k, u) = if both_zero {
        (Matrix::zeros(1, nhat), Matrix::identity(1, 1))
    } else {
        let d1p = pinv(&s1.d_l, tol);
        (&d1p * (&s2.c_l * &t - &s1.c_l), &d1p * &s2.d_l)
    };
    if !both_zero {
        let su = singular_values(&u);
        if su.last().is_none_or(|&s| s <= 0.0) || su[0] / su[su.len() - 1] > 1e12 {
            return Err(Error::NotEquivalent("U is not invertible".into()));
        }
    }
    let mapped = apply_feedback(s1, dae, &t, &k, &u)?;
    let residual = rel(&mapped.a_l, &s2.a_l)
        .max(rel(&mapped.b_l, &s2.b_l))
        .max(rel(&mapped.c_l, &s2.c_l))
        .max(rel(&mapped.d_l, &s2.d_l));
    if residual > tol {
        return Err(Error::NotEquivalent(format!("identity residual {residual:.3e}")));
    }
    Ok(FeedbackEquivalence { t, k, u, residual })
}

/// Restriction of an associated realization to its stabilizability
/// subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizableRestriction {
    pub sys_g: OdeLti,
    /// `Π M`, mapping consistent values to restricted states.
    pub m_g: Matrix,
    /// Orthogonal projection coordinates onto the subspace (l×n̂).
    pub pi: Matrix,
}

impl StabilizableRestriction {
    pub fn l(&self) -> usize {
        self.sys_g.state_dim()
    }
}

/// Restricts `(A_l, B_l, C_l, D_l)` to the stabilizability subspace of
/// `(A_l, B_l)`.
pub fn stabilizable_restriction(assoc: &AssociatedOdeLti, tol: f64) -> StabilizableRestriction {
    let vg = stabilizability_subspace(&assoc.a_l, &assoc.b_l, tol);
    let sys_g = restrict_to_invariant(&assoc.as_ode(), &vg, tol.max(1e-8))
        .expect("the stabilizability subspace is invariant and contains im B_l");
    let pi = vg.basis().transpose();
    let m_g = &pi * &assoc.m;
    StabilizableRestriction { sys_g, m_g, pi }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode_geometry::stabilizability_subspace;

    fn m(r: usize, c: usize, v: &[f64]) -> Matrix {
        Matrix::from_row_slice(r, c, v)
    }

    fn example1() -> DaeLti {
        DaeLti::new(
            m(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
            m(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 1.0]),
            m(2, 1, &[1.0, 0.0]),
        )
        .unwrap()
    }

    fn reference_quadruple(dae: &DaeLti) -> AssociatedOdeLti {
        AssociatedOdeLti::from_parts(
            dae,
            Matrix::identity(2, 2),
            m(2, 2, &[0.0, 1.0, 1.0, 0.0]),
            vcat(&Matrix::identity(2, 2), &Matrix::zeros(2, 2)),
            vcat(&Matrix::zeros(2, 2), &Matrix::identity(2, 2)),
            1e-10,
        )
        .unwrap()
    }

    #[test]
    fn example1_matches_reference_quadruple() {
        let dae = example1();
        let assoc = associate(&dae, 1e-10);
        assert_eq!((assoc.nhat(), assoc.k()), (2, 2));
        assert!(verify_associated(&dae, &assoc, 1e-10).all_ok());
        let reference = reference_quadruple(&dae);
        assert!(verify_associated(&dae, &reference, 1e-10).all_ok());
        let fe = feedback_equivalence(&assoc, &reference, &dae, 1e-8).unwrap();
        assert!(fe.residual <= 1e-8);
    }

    #[test]
    fn regular_case() {
        let a = m(2, 2, &[0.0, 1.0, -2.0, -3.0]);
        let b = m(2, 1, &[0.0, 1.0]);
        let dae = DaeLti::new(Matrix::identity(2, 2), a.clone(), b.clone()).unwrap();
        let assoc = associate(&dae, 1e-10);
        assert!(verify_associated(&dae, &assoc, 1e-10).all_ok());
        let reference = AssociatedOdeLti::from_parts(
            &dae,
            a,
            b,
            vcat(&Matrix::identity(2, 2), &Matrix::zeros(1, 2)),
            vcat(&Matrix::zeros(2, 1), &Matrix::identity(1, 1)),
            1e-10,
        )
        .unwrap();
        assert!((reference.m.clone() - Matrix::identity(2, 2)).norm() < 1e-14);
        assert!(feedback_equivalence(&assoc, &reference, &dae, 1e-8).is_ok());
        // The state map is orthogonal here; the constructed M equals the
        // basis change that T recovers.
        assert!((&assoc.m * assoc.m.transpose() - Matrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn pure_constraint_case() {
        let dae = DaeLti::new(m(1, 2, &[0.0, 0.0]), m(1, 2, &[1.0, 0.0]), m(1, 1, &[1.0])).unwrap();
        let assoc = associate(&dae, 1e-10);
        assert_eq!(assoc.nhat(), 0);
        assert_eq!(assoc.k(), 2);
        // Columns of D_l span ker [A B] = {x1 + u = 0}.
        let kernel_map = m(1, 3, &[1.0, 0.0, 1.0]);
        assert!((kernel_map * &assoc.d_l).norm() < 1e-12);
        assert_eq!(rank(&assoc.d_l, 1e-10), 2);
        assert!(verify_associated(&dae, &assoc, 1e-10).all_ok());
    }

    #[test]
    fn injected_violations_are_flagged() {
        let dae = example1();
        let assoc = associate(&dae, 1e-10);
        let mut bad = assoc.clone();
        bad.d_l[(0, 0)] += 1.0;
        let report = verify_associated(&dae, &bad, 1e-10);
        assert!(!report.ed_s_zero && !report.all_ok());

        let mut dropped = assoc.clone();
        dropped.c_l = dropped.c_l.columns(0, 1).into_owned();
        let report = verify_associated(&dae, &dropped, 1e-10);
        assert!(!report.ec_s_full_rank);
    }

    #[test]
    fn projection_and_lift() {
        let dae = example1();
        let assoc = associate(&dae, 1e-10);
        let grid = linspace(1.0, 1000);
        let zero = lift_solution(&dae, &assoc, &Vector::zeros(2), &vec![Vector::zeros(2); 1001], &grid).unwrap();
        assert!(zero.x.iter().all(|x| x.norm() == 0.0));
        let (v, g) = project_solution(&dae, &assoc, &zero);
        assert!(v.iter().chain(&g).all(|s| s.norm() == 0.0));

        // A pure exponential mode: v(0) chosen so that x1 = e^t.
        let v0 = &assoc.m * Vector::from_vec(vec![1.0, 0.0]);
        let g0 = vec![Vector::zeros(2); 1001];
        let traj = lift_solution(&dae, &assoc, &v0, &g0, &grid).unwrap();
        assert!(behavior_residual(&dae, &traj).unwrap() <= 1e-5);
        assert!((&dae.e * &traj.x[0] - Vector::from_vec(vec![1.0, 0.0])).norm() < 1e-12);
        let (vs, gs) = project_solution(&dae, &assoc, &traj);
        let sim = simulate(&assoc.as_ode(), &v0, &g0, &grid).unwrap();
        for (a, b) in vs.iter().zip(&sim.states) {
            assert!((a - b).norm() < 1e-8);
        }
        assert!(gs.iter().all(|g| g.norm() < 1e-8));
    }

    #[test]
    fn regular_projection_is_identity() {
        let a = m(2, 2, &[0.0, 1.0, -2.0, -3.0]);
        let dae = DaeLti::new(Matrix::identity(2, 2), a, m(2, 1, &[0.0, 1.0])).unwrap();
        let assoc = associate(&dae, 1e-10);
        let grid = linspace(1.0, 100);
        let x: Vec<Vector> = grid.iter().map(|&t| Vector::from_vec(vec![t.sin(), t.cos()])).collect();
        let u = vec![Vector::zeros(1); grid.len()];
        let traj = Trajectory::new(grid, x.clone(), u).unwrap();
        let (v, _) = project_solution(&dae, &assoc, &traj);
        for (vi, xi) in v.iter().zip(&x) {
            // M = C_s⁻¹ here, so C_s v recovers x.
            assert!((assoc.c_s() * vi - xi).norm() < 1e-12);
        }
    }

    #[test]
    fn self_equivalence_is_trivial() {
        let dae = example1();
        let assoc = associate(&dae, 1e-10);
        let fe = feedback_equivalence(&assoc, &assoc, &dae, 1e-8).unwrap();
        assert!((fe.t - Matrix::identity(2, 2)).norm() < 1e-12);
        assert!(fe.k.norm() < 1e-12);
        assert!((fe.u - Matrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn restriction_examples() {
        let dae = example1();
        let assoc = associate(&dae, 1e-10);
        let r = stabilizable_restriction(&assoc, 1e-10);
        assert_eq!(r.l(), 2);
        assert_eq!(r.sys_g.d, assoc.d_l);
        assert!(stabilizability_subspace(&r.sys_g.a, &r.sys_g.g, 1e-10).is_full());

        let scalar = DaeLti::new(m(1, 1, &[1.0]), m(1, 1, &[1.0]), m(1, 1, &[0.0])).unwrap();
        let assoc = associate(&scalar, 1e-10);
        assert!(assoc.b_l.norm() == 0.0);
        let r = stabilizable_restriction(&assoc, 1e-10);
        assert_eq!(r.l(), 0);
    }
}
