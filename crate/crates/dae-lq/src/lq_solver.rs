//! Finite- and infinite-horizon LQ control of descriptor systems, solved on
//! the associated realization.
//!
//! The cost is `∫ xᵀQx + uᵀRu dt` plus, for a finite horizon,
//! `x(t₁)ᵀEᵀQ₀Ex(t₁)`. On the associated system with output `y = (x, u)`
//! this becomes an output-weighted problem with weight `S = diag(Q, R)`.
//!
//! Finite horizon: the Riccati differential equation
//! `Ṗ = AᵀP + PA − Kᵀ(DᵀSD)K + CᵀSC`, `P(0) = (EC_s)ᵀQ₀(EC_s)`,
//! `K = (DᵀSD)⁻¹(BᵀP + DᵀSC)` is integrated forward in the time-to-go and
//! the optimal state runs `v̇ = (A − BK(t₁ − s))v` from `v(0) = Mz`.
//!
//! Infinite horizon: the same quantities on the stabilizable restriction,
//! with `P` the stabilizing solution of the algebraic equation, found by
//! Newton–Kleinman iteration after the feedback pre-transform that removes
//! the cross term.

use crate::associate::{split_outputs, stabilizable_restriction, AssociatedOdeLti, StabilizableRestriction};
use crate::dae_model::{consistency_distance, DaeLti, Trajectory};
use crate::error::{Error, Result};
use crate::linalg_subspace::{blkdiag, norm2, vcat, Matrix, Vector};
use crate::ode_geometry::{linspace, rk4, stabilizability_subspace, uniform_step};
use crate::schur::{lyapunov, spectral_abscissa};
use nalgebra::SymmetricEigen;

/// Cost weights: state `Q`, input `R`, terminal `Q0` on `Ex(t₁)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LqWeights {
    pub q: Matrix,
    pub r: Matrix,
    pub q0: Matrix,
}

fn min_eigenvalue(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn check_symmetric(m: &Matrix, name: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidWeights(format!("{name} is not square")));
    }
    if (m - m.transpose()).amax() > 1e-12 * (1.0 + m.amax()) {
        return Err(Error::InvalidWeights(format!("{name} is not symmetric")));
    }
    Ok(())
}

impl LqWeights {
    pub fn new(q: Matrix, r: Matrix, q0: Matrix) -> Result<Self> {
        check_symmetric(&q, "Q")?;
        check_symmetric(&r, "R")?;
        check_symmetric(&q0, "Q0")?;
        if min_eigenvalue(&q) <= 0.0 {
            return Err(Error::InvalidWeights("Q must be positive definite".into()));
        }
        if min_eigenvalue(&r) <= 0.0 {
            return Err(Error::InvalidWeights("R must be positive definite".into()));
        }
        if min_eigenvalue(&q0) < -1e-12 {
            return Err(Error::InvalidWeights("Q0 must be positive semidefinite".into()));
        }
        Ok(Self { q, r, q0 })
    }

    /// Identity `Q`, `R` and zero `Q0` sized for `dae`.
    pub fn identity_for(dae: &DaeLti) -> Self {
        Self {
            q: Matrix::identity(dae.n(), dae.n()),
            r: Matrix::identity(dae.m(), dae.m()),
            q0: Matrix::zeros(dae.c(), dae.c()),
        }
    }

    fn check_dims(&self, dae: &DaeLti) -> Result<()> {
        if self.q.nrows() != dae.n() || self.r.nrows() != dae.m() || self.q0.nrows() != dae.c() {
            return Err(Error::InvalidWeights(format!(
                "weights sized {}/{}/{} for n={}, m={}, c={}",
                self.q.nrows(),
                self.r.nrows(),
                self.q0.nrows(),
                dae.n(),
                dae.m(),
                dae.c()
            )));
        }
        Ok(())
    }

    /// `S = diag(Q, R)`.
    pub fn s(&self) -> Matrix {
        blkdiag(&self.q, &self.r)
    }
}

/// Default DRE step count `max(2000, ⌈1000·t₁⌉)`.
pub fn default_steps(t1: f64) -> usize {
    2000.max((1000.0 * t1).ceil() as usize)
}

fn symmetrize(p: &Matrix) -> Matrix {
    (p + p.transpose()) * 0.5
}

/// Output-weighted Riccati data `(A, B, CᵀSC, DᵀSC, DᵀSD)`.
struct RiccatiData {
    a: Matrix,
    b: Matrix,
    csc: Matrix,
    dsc: Matrix,
    /// `None` in the zero-feedthrough branch, where the gain vanishes.
    dsd_inv: Option<Matrix>,
    k_rows: usize,
}

impl RiccatiData {
    fn new(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix, s: &Matrix) -> Self {
        let zero = d.iter().all(|&v| v == 0.0);
        let dsd = d.transpose() * s * d;
        Self {
            a: a.clone(),
            b: b.clone(),
            csc: c.transpose() * s * c,
            dsc: d.transpose() * s * c,
            dsd_inv: if zero { None } else { dsd.try_inverse() },
            k_rows: if zero { 1 } else { d.ncols() },
        }
    }

    fn gain(&self, p: &Matrix) -> Matrix {
        match &self.dsd_inv {
            Some(inv) => inv * (self.b.transpose() * p + &self.dsc),
            None => Matrix::zeros(self.k_rows, p.nrows()),
        }
    }

    /// Right-hand side `AᵀP + PA − Kᵀ(DᵀSD)K + CᵀSC`.
    fn rhs(&self, p: &Matrix) -> Matrix {
        let mut out = self.a.transpose() * p + p * &self.a + &self.csc;
        if let Some(inv) = &self.dsd_inv {
            let h = self.b.transpose() * p + &self.dsc;
            out -= h.transpose() * inv * h;
        }
        out
    }
}

/// Riccati solution sampled on the time-to-go grid.
#[derive(Debug, Clone)]
pub struct DreSolution {
    pub grid: Vec<f64>,
    pub p: Vec<Matrix>,
    pub k: Vec<Matrix>,
}

impl DreSolution {
    /// Gain at time-to-go `tau`, linearly interpolated between nodes.
    pub fn gain_at(&self, tau: f64) -> Matrix {
        let n = self.grid.len();
        let h = self.grid[1] - self.grid[0];
        let s = (tau / h).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        let w = s - i as f64;
        &self.k[i] * (1.0 - w) + &self.k[i + 1] * w
    }
}

/// Integrates the Riccati differential equation on `[0, t1]` with RK4.
pub fn solve_dre(dae: &DaeLti, assoc: &AssociatedOdeLti, w: &LqWeights, t1: f64, steps: usize) -> Result<DreSolution> {
    w.check_dims(dae)?;
    if !(t1 > 0.0) || steps < 100 {
        return Err(Error::Shape("solve_dre needs t1 > 0 and at least 100 steps".into()));
    }
    let data = RiccatiData::new(&assoc.a_l, &assoc.b_l, &assoc.c_l, &assoc.d_l, &w.s());
    let ec = &dae.e * assoc.c_s();
    let p0 = symmetrize(&(ec.transpose() * &w.q0 * &ec));
    let grid = linspace(t1, steps);
    let h = t1 / steps as f64;
    let mut ps = Vec::with_capacity(steps + 1);
    let mut p = p0;
    ps.push(p.clone());
    for _ in 0..steps {
        let k1 = data.rhs(&p);
        let k2 = data.rhs(&(&p + &k1 * (0.5 * h)));
        let k3 = data.rhs(&(&p + &k2 * (0.5 * h)));
        let k4 = data.rhs(&(&p + &k3 * h));
        p = symmetrize(&(&p + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)));
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteP);
        }
        ps.push(p.clone());
    }
    let k = ps.iter().map(|p| data.gain(p)).collect();
    Ok(DreSolution { grid, p: ps, k })
}

/// How the optimal input is generated from the associated state.
#[derive(Debug, Clone)]
pub enum GainSchedule {
    /// Constant gain of the infinite-horizon problem.
    Constant(Matrix),
    /// Time-reversed Riccati gain `K(t₁ − s)`.
    Reversed { dre: DreSolution, t1: f64 },
}

/// Everything needed to regenerate the optimal closed loop: the realization
/// `(A, B, C, D)` it runs on, the state map and the gain schedule.
#[derive(Debug, Clone)]
pub struct FeedbackLaw {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d: Matrix,
    /// Maps a consistent value `z` to the initial state.
    pub state_map: Matrix,
    pub gains: GainSchedule,
    /// DAE state dimension.
    pub n: usize,
}

impl FeedbackLaw {
    pub fn gain(&self, s: f64) -> Matrix {
        match &self.gains {
            GainSchedule::Constant(k) => k.clone(),
            GainSchedule::Reversed { dre, t1 } => dre.gain_at(t1 - s),
        }
    }

    /// `K_f(s) = (C_u − D_u K(s)) M E`, so that `u = K_f x`.
    pub fn k_f(&self, dae: &DaeLti, s: f64) -> Matrix {
        let m = self.c.nrows() - self.n;
        let cu = self.c.rows(self.n, m).into_owned();
        let du = self.d.rows(self.n, m).into_owned();
        (cu - du * self.gain(s)) * &self.state_map * &dae.e
    }

    /// `K₁(s) = (C − D K(s)) M E − [I_n; 0]`.
    pub fn k1(&self, dae: &DaeLti, s: f64) -> Matrix {
        let mut out = (&self.c - &self.d * self.gain(s)) * &self.state_map * &dae.e;
        for i in 0..self.n {
            out[(i, i)] -= 1.0;
        }
        out
    }

    /// `K₂ = [0; −I_m]`.
    pub fn k2(&self) -> Matrix {
        let m = self.c.nrows() - self.n;
        vcat(&Matrix::zeros(self.n, m), &(-Matrix::identity(m, m)))
    }

    /// Closed-loop state and output on `grid`.
    pub fn run(&self, z: &Vector, grid: &[f64]) -> Result<(Vec<Vector>, Trajectory)> {
        let v0 = &self.state_map * z;
        let states = match &self.gains {
            GainSchedule::Constant(k) => {
                let acl = &self.a - &self.b * k;
                // Sub-step so that h·‖A_cl‖ stays well inside the RK4 region.
                let h = uniform_step(grid)?;
                let sub = ((h * norm2(&acl)) / 0.5).ceil().max(1.0) as usize;
                let fine: Vec<f64> = (0..(grid.len() - 1) * sub + 1)
                    .map(|i| grid[0] + h * i as f64 / sub as f64)
                    .collect();
                let states = rk4(|_, v| &acl * v, &v0, &fine)?;
                states.into_iter().step_by(sub).collect()
            }
            GainSchedule::Reversed { .. } => {
                rk4(|s, v| (&self.a - &self.b * self.gain(s)) * v, &v0, grid)?
            }
        };
        let outputs: Vec<Vector> = grid
            .iter()
            .zip(&states)
            .map(|(&s, v)| (&self.c - &self.d * self.gain(s)) * v)
            .collect();
        Ok((states, split_outputs(self.n, grid.to_vec(), &outputs)))
    }
}

/// Result of the finite-horizon problem.
#[derive(Debug, Clone)]
pub struct FiniteHorizonSolution {
    pub grid: Vec<f64>,
    /// `P` at time-to-go `t₁ − s` for each grid node `s`.
    pub p_samples: Vec<Matrix>,
    /// `K(t₁ − s)` for each grid node `s`.
    pub k_samples: Vec<Matrix>,
    pub traj: Trajectory,
    pub k_f_samples: Vec<Matrix>,
    pub k1_samples: Vec<Matrix>,
    pub k2: Matrix,
    pub cost: f64,
    pub law: FeedbackLaw,
}

fn require_consistent(dae: &DaeLti, assoc: &AssociatedOdeLti, z: &Vector) -> Result<()> {
    if z.len() != dae.c() {
        return Err(Error::Shape(format!("initial value has length {}, expected {}", z.len(), dae.c())));
    }
    let dist = consistency_distance(dae, assoc, z);
    if dist > 1e-8 * z.norm().max(1.0) {
        return Err(Error::InconsistentInitialState(dist));
    }
    Ok(())
}

/// Optimal finite-horizon control from the consistent value `z = Ex(0)`.
pub fn finite_horizon(
    dae: &DaeLti,
    assoc: &AssociatedOdeLti,
    w: &LqWeights,
    z: &Vector,
    t1: f64,
    steps: usize,
) -> Result<FiniteHorizonSolution> {
    require_consistent(dae, assoc, z)?;
    // The closed loop is integrated with RK4, whose half steps land on the
    // odd nodes of a twice finer Riccati grid. Sampling the gain there
    // instead of interpolating keeps the trajectory fourth order.
    let fine = solve_dre(dae, assoc, w, t1, 2 * steps)?;
    let dre = DreSolution {
        grid: fine.grid.iter().step_by(2).copied().collect(),
        p: fine.p.iter().step_by(2).cloned().collect(),
        k: fine.k.iter().step_by(2).cloned().collect(),
    };
    let grid = dre.grid.clone();
    let law = FeedbackLaw {
        a: assoc.a_l.clone(),
        b: assoc.b_l.clone(),
        c: assoc.c_l.clone(),
        d: assoc.d_l.clone(),
        state_map: assoc.m.clone(),
        gains: GainSchedule::Reversed { dre: fine, t1 },
        n: dae.n(),
    };
    let (_, traj) = law.run(z, &grid)?;
    let v0 = &assoc.m * z;
    let p_end = &dre.p[steps];
    let cost = v0.dot(&(p_end * &v0));
    let p_samples = (0..=steps).map(|i| dre.p[steps - i].clone()).collect();
    let k_samples = (0..=steps).map(|i| dre.k[steps - i].clone()).collect();
    let k_f_samples = grid.iter().map(|&s| law.k_f(dae, s)).collect();
    let k1_samples = grid.iter().map(|&s| law.k1(dae, s)).collect();
    Ok(FiniteHorizonSolution {
        grid,
        p_samples,
        k_samples,
        traj,
        k_f_samples,
        k1_samples,
        k2: law.k2(),
        cost,
        law,
    })
}

/// Stabilizing ARE solution and gain on the restricted system.
#[derive(Debug, Clone)]
pub struct AreSolution {
    pub p: Matrix,
    pub k: Matrix,
    pub residual: f64,
    pub closed_loop_abscissa: f64,
}

fn sym_inv_sqrt(m: &Matrix) -> Matrix {
    let eig = SymmetricEigen::new(m.clone());
    let d = Matrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// Riccati flow `Ṗ = AᵀP + PA − PBBᵀP + Q` from `P = 0` with step sizes
/// kept inside the RK4 stability region.
fn riccati_flow(a: &Matrix, b: &Matrix, q: &Matrix, t_end: f64) -> Result<Matrix> {
    let f = |p: &Matrix| a.transpose() * p + p * a - p * b * b.transpose() * p + q;
    let bb = b.norm_squared();
    let an = a.norm();
    // Linearization at the steady state is bounded by 2‖A‖ + 2‖B‖√‖Q‖.
    let settled = 2.0 * an + 2.0 * (bb * q.norm()).sqrt();
    let mut p = Matrix::zeros(a.nrows(), a.nrows());
    let mut t = 0.0;
    while t < t_end {
        let rate = settled + 2.0 * bb * p.norm() + 1e-3;
        let h = (0.5 / rate).min(t_end - t);
        let k1 = f(&p);
        let k2 = f(&(&p + &k1 * (0.5 * h)));
        let k3 = f(&(&p + &k2 * (0.5 * h)));
        let k4 = f(&(&p + &k3 * h));
        p = symmetrize(&(&p + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)));
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteP);
        }
        t += h;
    }
    Ok(p)
}

/// Stabilizing solution of `0 = PA + AᵀP − Kᵀ(DᵀSD)K + CᵀSC` on the
/// stabilizable restriction.
pub fn solve_are(restr: &StabilizableRestriction, w: &LqWeights, tol: f64) -> Result<AreSolution> {
    let sys = &restr.sys_g;
    let l = sys.state_dim();
    let s = w.s();
    let data = RiccatiData::new(&sys.a, &sys.g, &sys.c, &sys.d, &s);
    let residual_of = |p: &Matrix| data.rhs(p).norm();
    if l == 0 {
        return Ok(AreSolution {
            p: Matrix::zeros(0, 0),
            k: Matrix::zeros(data.k_rows, 0),
            residual: 0.0,
            closed_loop_abscissa: f64::NEG_INFINITY,
        });
    }
    let Some(dsd_inv) = data.dsd_inv.clone() else {
        // No input reaches the cost: P is the observability Gramian.
        let p = lyapunov(&sys.a, &data.csc).ok_or(Error::NoStabilizingStart)?;
        let residual = residual_of(&p);
        return Ok(AreSolution {
            k: Matrix::zeros(1, l),
            residual,
            closed_loop_abscissa: spectral_abscissa(&sys.a),
            p,
        });
    };
    // Pre-transform g = F̂v + U w removes the cross term.
    let dsd = dsd_inv.clone().try_inverse().ok_or(Error::NoStabilizingStart)?;
    let f_hat = -(&dsd_inv * &data.dsc);
    let u = sym_inv_sqrt(&dsd);
    let a_hat = &sys.a + &sys.g * &f_hat;
    let b_hat = &sys.g * &u;
    let c_hat = &sys.c + &sys.d * &f_hat;
    let q_hat = symmetrize(&(c_hat.transpose() * &s * &c_hat));

    // Initial stabilizing gain.
    let mut k_hat = Matrix::zeros(b_hat.ncols(), l);
    let abscissa = spectral_abscissa(&a_hat);
    if abscissa >= -crate::ode_geometry::STABILITY_MARGIN {
        let mut horizon = (50.0 / abscissa.abs().max(1e-12)).min(200.0);
        let mut found = false;
        for _ in 0..4 {
            let p = riccati_flow(&a_hat, &b_hat, &q_hat, horizon)?;
            let trial = b_hat.transpose() * &p;
            if spectral_abscissa(&(&a_hat - &b_hat * &trial)) < 0.0 {
                k_hat = trial;
                found = true;
                break;
            }
            horizon *= 2.0;
        }
        if !found {
            return Err(Error::NoStabilizingStart);
        }
    }

    // Newton–Kleinman.
    let mut p = Matrix::zeros(l, l);
    for _ in 0..100 {
        let acl = &a_hat - &b_hat * &k_hat;
        let rhs = &q_hat + k_hat.transpose() * &k_hat;
        let next = lyapunov(&acl, &rhs).ok_or(Error::NoStabilizingStart)?;
        let delta = (&next - &p).norm();
        p = next;
        k_hat = b_hat.transpose() * &p;
        if delta <= 1e-13 * (1.0 + p.norm()) {
            break;
        }
    }
    let k = &dsd_inv * (sys.g.transpose() * &p + &data.dsc);
    let residual = residual_of(&p);
    let closed_loop_abscissa = spectral_abscissa(&(&sys.a - &sys.g * &k));
    if residual > tol * (1.0 + p.norm()) || !(closed_loop_abscissa < 0.0) {
        return Err(Error::NoStabilizingStart);
    }
    Ok(AreSolution {
        p,
        k,
        residual,
        closed_loop_abscissa,
    })
}

/// Whether `Mz` lies in the stabilizability subspace of `(A_l, B_l)`.
pub fn is_behaviorally_stabilizable(dae: &DaeLti, assoc: &AssociatedOdeLti, z: &Vector) -> Result<bool> {
    require_consistent(dae, assoc, z)?;
    let vg = stabilizability_subspace(&assoc.a_l, &assoc.b_l, assoc.tol);
    let v = &assoc.m * z;
    Ok(vg.contains_vector(&v, 1e-8))
}

/// Result of the infinite-horizon problem.
#[derive(Debug, Clone)]
pub struct InfiniteHorizonSolution {
    pub p: Matrix,
    pub k: Matrix,
    pub k_f: Matrix,
    pub k1: Matrix,
    pub k2: Matrix,
    pub traj: Trajectory,
    pub cost: f64,
    pub closed_loop_abscissa: f64,
    pub are_residual: f64,
    pub restriction: StabilizableRestriction,
    pub law: FeedbackLaw,
}

/// Default simulation horizon `50/|abscissa|`, capped at `1e4`.
pub fn default_t_sim(abscissa: f64) -> f64 {
    if abscissa.is_finite() && abscissa < 0.0 {
        (50.0 / abscissa.abs()).min(1e4)
    } else {
        10.0
    }
}

/// Optimal infinite-horizon control from the consistent value `z`.
///
/// `t_sim` and `steps` set the simulation grid for the returned
/// trajectory; by default the horizon is `50/|abscissa|` with 2000 output
/// steps. The integrator sub-steps internally when the grid is coarse.
pub fn infinite_horizon(
    dae: &DaeLti,
    assoc: &AssociatedOdeLti,
    w: &LqWeights,
    z: &Vector,
    t_sim: Option<f64>,
    steps: Option<usize>,
) -> Result<InfiniteHorizonSolution> {
    w.check_dims(dae)?;
    if !is_behaviorally_stabilizable(dae, assoc, z)? {
        return Err(Error::NotStabilizable);
    }
    let restriction = stabilizable_restriction(assoc, assoc.tol);
    let are = solve_are(&restriction, w, 1e-8)?;
    let sys = &restriction.sys_g;
    let law = FeedbackLaw {
        a: sys.a.clone(),
        b: sys.g.clone(),
        c: sys.c.clone(),
        d: sys.d.clone(),
        state_map: restriction.m_g.clone(),
        gains: GainSchedule::Constant(are.k.clone()),
        n: dae.n(),
    };
    let horizon = t_sim.unwrap_or_else(|| default_t_sim(are.closed_loop_abscissa));
    let grid = linspace(horizon, steps.unwrap_or(2000));
    let (_, traj) = law.run(z, &grid)?;
    let v0 = &restriction.m_g * z;
    let cost = v0.dot(&(&are.p * &v0));
    Ok(InfiniteHorizonSolution {
        k_f: law.k_f(dae, 0.0),
        k1: law.k1(dae, 0.0),
        k2: law.k2(),
        p: are.p,
        k: are.k,
        traj,
        cost,
        closed_loop_abscissa: are.closed_loop_abscissa,
        are_residual: are.residual,
        restriction,
        law,
    })
}

/// Composite Simpson weights on a uniform grid; an odd number of
/// intervals ends with a 3/8-rule panel.
fn simpson_weights(len: usize, h: f64) -> Vec<f64> {
    let mut wts = vec![0.0; len];
    let intervals = len - 1;
    match intervals {
        0 => {}
        1 => {
            wts[0] = h / 2.0;
            wts[1] = h / 2.0;
        }
        _ => {
            let (simpson_end, tail) = if intervals.is_multiple_of(2) {
                (intervals, false)
            } else {
                (intervals - 3, true)
            };
            let mut i = 0;
            while i < simpson_end {
                wts[i] += h / 3.0;
                wts[i + 1] += 4.0 * h / 3.0;
                wts[i + 2] += h / 3.0;
                i += 2;
            }
            if tail {
                let s = simpson_end;
                for (j, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
                    wts[s + j] += 3.0 * h / 8.0 * c;
                }
            }
        }
    }
    wts
}

/// Composite Simpson quadrature of samples on a uniform grid.
pub fn simpson(values: &[f64], grid: &[f64]) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    let h = uniform_step(grid)?;
    Ok(simpson_weights(grid.len(), h)
        .iter()
        .zip(values)
        .map(|(w, v)| w * v)
        .sum())
}

fn running_cost(w: &LqWeights, traj: &Trajectory) -> Vec<f64> {
    traj.x
        .iter()
        .zip(&traj.u)
        .map(|(x, u)| x.dot(&(&w.q * x)) + u.dot(&(&w.r * u)))
        .collect()
}

/// `∫ xᵀQx + uᵀRu dt` by composite Simpson, plus `x(t₁)ᵀEᵀQ₀Ex(t₁)` when
/// `terminal` is set.
pub fn trajectory_cost(w: &LqWeights, e: &Matrix, traj: &Trajectory, terminal: bool) -> Result<f64> {
    if traj.len() < 2 {
        return Err(Error::GridTooShort { needed: 2, got: traj.len() });
    }
    let mut cost = simpson(&running_cost(w, traj), &traj.times)?;
    if terminal {
        let ex = e * traj.x.last().expect("non-empty");
        cost += ex.dot(&(&w.q0 * &ex));
    }
    Ok(cost)
}

/// Running integral of the cost along the trajectory, on every second node
/// (Simpson panels).
pub fn partial_costs(w: &LqWeights, traj: &Trajectory) -> Result<Vec<f64>> {
    let f = running_cost(w, traj);
    let h = uniform_step(&traj.times)?;
    let mut acc = 0.0;
    let mut out = vec![0.0];
    let mut i = 0;
    while i + 2 < f.len() {
        acc += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
        out.push(acc);
        i += 2;
    }
    Ok(out)
}

/// Regenerates the closed-loop solution of `K₁x + K₂u = 0` from `z` and
/// checks the constraint on every grid node.
pub fn closed_loop_replay(dae: &DaeLti, law: &FeedbackLaw, z: &Vector, grid: &[f64]) -> Result<Trajectory> {
    let (_, traj) = law.run(z, grid)?;
    let k2 = law.k2();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for ((&s, x), u) in grid.iter().zip(&traj.x).zip(&traj.u) {
        let r = law.k1(dae, s) * x + &k2 * u;
        worst = worst.max(r.amax());
        scale = scale.max(x.amax()).max(u.amax());
    }
    if worst > 1e-6 * (1.0 + scale) {
        return Err(Error::ConstraintViolated(worst));
    }
    Ok(traj)
}
