//! Heat-equation benchmark.
//!
//! The PDE `∂V/∂t = c² ∂²V/∂υ² + Σ_k u_k sin(kπυ)` on `υ ∈ [−1, 1]` with
//! homogeneous Dirichlet data is discretized two ways:
//!
//! * a spectral Galerkin model in the Legendre-difference basis
//!   `ψ_i = P_{i−1} − P_{i+1}` (each `ψ_i` vanishes at both ends), written
//!   as a descriptor system whose extra input `e` is the projection error;
//! * the exact eigenbasis `sin(kπυ)`, which is orthonormal on `[−1, 1]` and
//!   serves as the reference model.
//!
//! Running LQ control on each model, lifting the descriptor feedback back to
//! the PDE and comparing against the reference produces the cost table and
//! error curves written by `heat-demo`.

use crate::associate::associate;
use crate::dae_model::{DaeLti, Trajectory};
use crate::error::{Error, Result};
use crate::linalg_subspace::{fmt_f64, hcat, norm2, vcat, Matrix, Vector};
use crate::lq_solver::{infinite_horizon, simpson, LqWeights};
use crate::ode_geometry::{linspace, rk4};
use gauss_quad::legendre::GaussLegendre;
use std::f64::consts::PI;
use std::num::NonZeroUsize;

/// Source of the basis Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramSource {
    /// Inner products of the basis functions by Gauss–Legendre quadrature.
    Quadrature,
    /// The pentadiagonal tabulated formula, see [`closed_form_gram`].
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatConfig {
    /// Galerkin dimension.
    pub n: usize,
    /// Number of actuated sine modes.
    pub n_u: usize,
    /// Weight on the projection-error input.
    pub mu: f64,
    /// Diffusion coefficient.
    pub c: f64,
    /// Initial amplitude.
    pub lambda: f64,
    /// Initial eigenmode, 1-based.
    pub mode: usize,
    /// Simulation horizon.
    pub t: f64,
    /// Output step of all simulations.
    pub dt: f64,
    /// Gauss–Legendre nodes used for the model integrals.
    pub quad_order: usize,
    /// Stiffness diagonal `−2c²(2i+1)` when set, `−2c(2i+1)` otherwise.
    pub stiffness_uses_c_squared: bool,
    pub gram: GramSource,
}

impl Default for HeatConfig {
    fn default() -> Self {
        Self {
            n: 40,
            n_u: 35,
            mu: 0.01,
            c: 1.0 / 30.0,
            lambda: 10.0,
            mode: 34,
            t: 5.0,
            dt: 1e-3,
            quad_order: 42,
            stiffness_uses_c_squared: true,
            gram: GramSource::Quadrature,
        }
    }
}

impl HeatConfig {
    /// Defaults with the Galerkin dimension changed; the quadrature order
    /// follows as `n + 2`.
    pub fn with_n(n: usize) -> Self {
        Self {
            n,
            quad_order: n + 2,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Shape(format!("heat config: {msg}")));
        if self.n == 0 || self.n_u == 0 || self.n_u > self.n {
            return bad("need 1 <= Nu <= N");
        }
        if self.mode == 0 || self.mode > self.n {
            return bad("need 1 <= mode <= N");
        }
        if !(self.mu > 0.0) || !(self.c > 0.0) || !(self.t > 0.0) || !(self.dt > 0.0) {
            return bad("mu, c, T and dt must be positive");
        }
        if !self.lambda.is_finite() {
            return bad("lambda must be finite");
        }
        if self.quad_order < self.n + 2 {
            return bad("quad_order must be at least N + 2");
        }
        let steps = self.t / self.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return bad("T must be a whole number of steps dt");
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t / self.dt).round() as usize
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn gauss_legendre(order: usize) -> Self {
        let order = NonZeroUsize::new(order.max(1)).expect("positive");
        let rule = GaussLegendre::new(order);
        let (nodes, weights) = rule.as_node_weight_pairs().iter().copied().unzip();
        Self { nodes, weights }
    }

    /// `Σ_q w_q f(x_q) g(x_q)` for every pair of rows of two sample tables.
    fn cross(&self, f: &Matrix, g: &Matrix) -> Matrix {
        let mut fw = f.clone();
        for (j, w) in self.weights.iter().enumerate() {
            fw.column_mut(j).scale_mut(*w);
        }
        fw * g.transpose()
    }
}

/// `P_0(x), …, P_kmax(x)` by the three-term recurrence.
pub fn legendre_values(kmax: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(kmax + 1);
    p.push(1.0);
    if kmax >= 1 {
        p.push(x);
    }
    for k in 1..kmax {
        let kf = k as f64;
        p.push(((2.0 * kf + 1.0) * x * p[k] - kf * p[k - 1]) / (kf + 1.0));
    }
    p
}

/// Basis samples: row `i` holds `ψ_{i+1}` at every node.
fn basis_table(n: usize, quad: &Quadrature) -> Matrix {
    let mut out = Matrix::zeros(n, quad.nodes.len());
    for (j, &x) in quad.nodes.iter().enumerate() {
        let p = legendre_values(n + 1, x);
        for i in 0..n {
            out[(i, j)] = p[i] - p[i + 2];
        }
    }
    out
}

/// Sine samples: row `k` holds `sin((k+1)πυ)`.
fn sine_table(modes: usize, quad: &Quadrature) -> Matrix {
    Matrix::from_fn(modes, quad.nodes.len(), |k, j| ((k + 1) as f64 * PI * quad.nodes[j]).sin())
}

/// Gram matrix `⟨ψ_i, ψ_j⟩` by quadrature, exactly symmetric.
pub fn basis_gram(n: usize, quad: &Quadrature) -> Matrix {
    let phi = basis_table(n, quad);
    let g = quad.cross(&phi, &phi);
    (&g + g.transpose()) * 0.5
}

/// Cross-Gram `⟨ψ_i, sin(kπυ)⟩`, `i, k = 1..n` by rows and `1..modes` by columns.
pub fn sine_projection(n: usize, modes: usize, quad: &Quadrature) -> Matrix {
    quad.cross(&basis_table(n, quad), &sine_table(modes, quad))
}

/// Tabulated pentadiagonal Gram formula
/// `4(2i+1)²/((2i−1)(2i+3)) δ_ij − 2/(2i+3) δ_{i+2,j} − 2/(2i−1) δ_{i−2,j}`.
pub fn closed_form_gram(n: usize) -> Matrix {
    let mut g = Matrix::zeros(n, n);
    for a in 0..n {
        let i = (a + 1) as f64;
        g[(a, a)] = 4.0 * (2.0 * i + 1.0).powi(2) / ((2.0 * i - 1.0) * (2.0 * i + 3.0));
        if a + 2 < n {
            g[(a, a + 2)] = -2.0 / (2.0 * i + 3.0);
            g[(a + 2, a)] = -2.0 / (2.0 * i + 3.0);
        }
    }
    g
}

/// Diagonal stiffness `−2κ(2i+1)` with `κ = c²` or `c`.
pub fn stiffness(cfg: &HeatConfig) -> Matrix {
    let kappa = if cfg.stiffness_uses_c_squared { cfg.c * cfg.c } else { cfg.c };
    Matrix::from_diagonal(&Vector::from_fn(cfg.n, |a, _| -2.0 * kappa * (2.0 * (a + 1) as f64 + 1.0)))
}

/// Every matrix of the benchmark.
#[derive(Debug, Clone)]
pub struct HeatModels {
    pub cfg: HeatConfig,
    /// Basis Gram `M̂_N`.
    pub gram: Matrix,
    /// Scaled mass `M_N = Λ_N M̂_N`.
    pub mass: Matrix,
    /// Stiffness `A_N`.
    pub stiffness: Matrix,
    /// `Λ_N = diag((2i+1)/2)`.
    pub scale: Matrix,
    /// `⟨ψ_i, sin(kπυ)⟩` for `k = 1..N` with the model quadrature.
    pub sine_proj: Matrix,
    /// The same cross-Gram from a refined rule, used for error norms.
    pub sine_proj_fine: Matrix,
    /// `E = [M_N, 0]`, `A = [Λ_N A_N, Λ_N]`, `B = Λ_N P_N sin`.
    pub dae: DaeLti,
    pub weights: LqWeights,
    /// Eigenbasis model `A_e = diag(−c²k²π²)`.
    pub eig_a: Matrix,
    /// `B_e = [I_{N_u}; 0]`.
    pub eig_b: Matrix,
    /// Galerkin coordinates of the initial profile, `P_N V(0)`.
    pub initial_projection: Vector,
}

pub fn build_heat_models(cfg: &HeatConfig) -> Result<HeatModels> {
    cfg.validate()?;
    let n = cfg.n;
    let quad = Quadrature::gauss_legendre(cfg.quad_order);
    let gram = match cfg.gram {
        GramSource::Quadrature => basis_gram(n, &quad),
        GramSource::ClosedForm => closed_form_gram(n),
    };
    let scale = Matrix::from_diagonal(&Vector::from_fn(n, |a, _| (2.0 * (a + 1) as f64 + 1.0) / 2.0));
    let mass = &scale * &gram;
    let stiff = stiffness(cfg);
    let sine_proj = sine_projection(n, n, &quad);
    let fine = Quadrature::gauss_legendre(8 * n.max(16));
    let sine_proj_fine = sine_projection(n, n, &fine);
    let b_op = sine_proj.columns(0, cfg.n_u).into_owned();

    let e = hcat(&mass, &Matrix::zeros(n, n));
    let a = hcat(&(&scale * &stiff), &scale);
    let b = &scale * &b_op;
    let dae = DaeLti::new(e, a, b)?;
    let q = crate::linalg_subspace::blkdiag(&gram, &(Matrix::identity(n, n) * cfg.mu));
    let weights = LqWeights::new(q, Matrix::identity(cfg.n_u, cfg.n_u), Matrix::zeros(n, n))?;

    let eig_a = Matrix::from_diagonal(&Vector::from_fn(n, |k, _| {
        let kf = (k + 1) as f64;
        -cfg.c * cfg.c * kf * kf * PI * PI
    }));
    let eig_b = vcat(&Matrix::identity(cfg.n_u, cfg.n_u), &Matrix::zeros(n - cfg.n_u, cfg.n_u));
    let initial_projection = sine_proj.column(cfg.mode - 1) * cfg.lambda;
    Ok(HeatModels {
        cfg: cfg.clone(),
        gram,
        mass,
        stiffness: stiff,
        scale,
        sine_proj,
        sine_proj_fine,
        dae,
        weights,
        eig_a,
        eig_b,
        initial_projection,
    })
}

impl HeatModels {
    /// Initial eigenbasis state `λ e_mode`.
    pub fn initial_modes(&self) -> Vector {
        let mut z = Vector::zeros(self.cfg.n);
        z[self.cfg.mode - 1] = self.cfg.lambda;
        z
    }

    fn grid(&self) -> Vec<f64> {
        linspace(self.cfg.t, self.cfg.steps())
    }

    /// Named matrices for export.
    pub fn named_matrices(&self) -> Vec<(&'static str, &Matrix)> {
        vec![
            ("gram", &self.gram),
            ("mass", &self.mass),
            ("stiffness", &self.stiffness),
            ("E", &self.dae.e),
            ("A", &self.dae.a),
            ("B", &self.dae.b),
            ("eig_A", &self.eig_a),
            ("eig_B", &self.eig_b),
        ]
    }
}

/// Closed-loop LQ run on one model.
#[derive(Debug, Clone)]
pub struct LqRun {
    /// Optimal cost from the Riccati solution.
    pub cost: f64,
    /// State feedback `u = K x` in the model's own coordinates.
    pub gain: Matrix,
    /// State and input on `[0, T]`.
    pub traj: Trajectory,
}

/// Infinite-horizon LQ for a regular model `ẋ = Ax + Bu` through the
/// descriptor machinery with `E = I`.
fn regular_lq(a: &Matrix, b: &Matrix, q: Matrix, r: Matrix, x0: &Vector, grid_steps: usize, t: f64) -> Result<LqRun> {
    let n = a.nrows();
    let dae = DaeLti::new(Matrix::identity(n, n), a.clone(), b.clone())?;
    let assoc = associate(&dae, 1e-10);
    let w = LqWeights::new(q, r, Matrix::zeros(n, n))?;
    let sol = infinite_horizon(&dae, &assoc, &w, x0, Some(t), Some(grid_steps))?;
    Ok(LqRun {
        cost: sol.cost,
        gain: sol.k_f,
        traj: sol.traj,
    })
}

/// LQ on the eigenbasis model with `Q = I`, `R = I` from `λ e_mode`.
pub fn eigenbasis_reference(models: &HeatModels) -> Result<LqRun> {
    let cfg = &models.cfg;
    regular_lq(
        &models.eig_a,
        &models.eig_b,
        Matrix::identity(cfg.n, cfg.n),
        Matrix::identity(cfg.n_u, cfg.n_u),
        &models.initial_modes(),
        cfg.steps(),
        cfg.t,
    )
}

/// Descriptor-model LQ run; `traj.x` holds `(a, e)`.
#[derive(Debug, Clone)]
pub struct DaeRun {
    pub cost: f64,
    /// `u = K_f x` on the descriptor state.
    pub k_f: Matrix,
    pub traj: Trajectory,
    /// Galerkin coefficients `a_*(t)`.
    pub coeffs: Vec<Vector>,
}

/// Associated-system LQ on the descriptor model from `Ex(0) = Λ_N P_N V(0)`.
pub fn dae_lq_pipeline(models: &HeatModels) -> Result<DaeRun> {
    let cfg = &models.cfg;
    let assoc = associate(&models.dae, 1e-10);
    let z = &models.scale * &models.initial_projection;
    let sol = infinite_horizon(&models.dae, &assoc, &models.weights, &z, Some(cfg.t), Some(cfg.steps()))?;
    let coeffs = sol.traj.x.iter().map(|x| x.rows(0, cfg.n).into_owned()).collect();
    Ok(DaeRun {
        cost: sol.cost,
        k_f: sol.k_f,
        traj: sol.traj,
        coeffs,
    })
}

/// Feedback on the sine coefficients equivalent to `u = K_f x` with
/// `x = (M̂_N⁻¹ P_N V, 0)`.
pub fn lift_gain(models: &HeatModels, k_f: &Matrix) -> Result<Matrix> {
    let n = models.cfg.n;
    let coords = models
        .gram
        .clone()
        .lu()
        .solve(&models.sine_proj)
        .ok_or_else(|| Error::Shape("singular Gram matrix".into()))?;
    if k_f.ncols() == n {
        Ok(k_f * coords)
    } else {
        Ok(k_f * vcat(&coords, &Matrix::zeros(k_f.ncols() - n, n)))
    }
}

/// Eigenbasis closed loop under a lifted gain.
#[derive(Debug, Clone)]
pub struct LiftedRun {
    /// `∫₀ᵀ ‖z‖² + ‖u‖² dt`.
    pub cost: f64,
    pub gain: Matrix,
    pub traj: Trajectory,
}

/// Simulates `ż = (A_e + B_e K) z` from `λ e_mode` with RK4 (sub-stepped
/// when the output step is too coarse for the gain) and integrates the cost by Simpson's rule.
pub fn lift_and_simulate_closed_loop(models: &HeatModels, gain: &Matrix) -> Result<LiftedRun> {
    let acl = &models.eig_a + &models.eig_b * gain;
    let grid = models.grid();
    let sub = ((models.cfg.dt * norm2(&acl)) / 0.5).ceil().max(1.0) as usize;
    let fine = linspace(models.cfg.t, models.cfg.steps() * sub);
    let z: Vec<Vector> = rk4(|_, z| &acl * z, &models.initial_modes(), &fine)?
        .into_iter()
        .step_by(sub)
        .collect();
    let u: Vec<Vector> = z.iter().map(|z| gain * z).collect();
    let running: Vec<f64> = z.iter().zip(&u).map(|(z, u)| z.norm_squared() + u.norm_squared()).collect();
    let cost = simpson(&running, &grid)?;
    Ok(LiftedRun {
        cost,
        gain: gain.clone(),
        traj: Trajectory::new(grid, z, u)?,
    })
}

/// Naive Galerkin controller and its lifted replay.
#[derive(Debug, Clone)]
pub struct NaiveRun {
    /// `J_g` on the Galerkin model.
    pub lq: LqRun,
    /// Truncated cost of the lifted controller on the eigenbasis model.
    pub lifted: LiftedRun,
}

/// LQ on `ȧ = M̂_N⁻¹A_N a + M̂_N⁻¹ P_N sin u` (the descriptor model with the
/// projection error dropped), cost `∫ aᵀM̂_N a + uᵀu`, from `a(0) = P_N V(0)`.
pub fn naive_galerkin_baseline(models: &HeatModels) -> Result<NaiveRun> {
    let cfg = &models.cfg;
    let lu = models.gram.clone().lu();
    let singular = || Error::Shape("singular Gram matrix".into());
    let a = lu.solve(&models.stiffness).ok_or_else(singular)?;
    let b = lu.solve(&models.sine_proj.columns(0, cfg.n_u).into_owned()).ok_or_else(singular)?;
    let lq = regular_lq(
        &a,
        &b,
        models.gram.clone(),
        Matrix::identity(cfg.n_u, cfg.n_u),
        &models.initial_projection,
        cfg.steps(),
        cfg.t,
    )?;
    let lifted = lift_and_simulate_closed_loop(models, &lift_gain(models, &lq.gain)?)?;
    Ok(NaiveRun { lq, lifted })
}

/// Squared `L²(−1, 1)` errors against the reference, per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurves {
    pub t: Vec<f64>,
    /// Descriptor solution versus reference.
    pub e_sol: Vec<f64>,
    /// Lifted descriptor feedback versus reference.
    pub e_sim: Vec<f64>,
    /// Naive Galerkin solution versus reference.
    pub e_g: Vec<f64>,
    /// Lifted naive feedback versus reference.
    pub e_sim_g: Vec<f64>,
}

impl ErrorCurves {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,e_sol,e_sim,e_g,e_sim_g\n");
        for i in 0..self.t.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_f64(self.t[i]),
                fmt_f64(self.e_sol[i]),
                fmt_f64(self.e_sim[i]),
                fmt_f64(self.e_g[i]),
                fmt_f64(self.e_sim_g[i])
            ));
        }
        out
    }

    pub fn max_e_sim(&self) -> f64 {
        self.e_sim.iter().copied().fold(0.0, f64::max)
    }
}

/// `‖Σ a_i ψ_i − Σ z_k sin(kπυ)‖²`.
pub fn mixed_error(models: &HeatModels, a: &Vector, z: &Vector) -> f64 {
    let cross = a.dot(&(&models.sine_proj_fine * z));
    (a.dot(&(&models.gram * a)) - 2.0 * cross + z.norm_squared()).max(0.0)
}

/// `‖Σ (z₁ − z₂)_k sin(kπυ)‖²`.
pub fn sine_error(z1: &Vector, z2: &Vector) -> f64 {
    (z1 - z2).norm_squared()
}

pub fn error_curves(
    models: &HeatModels,
    reference: &Trajectory,
    dae: &DaeRun,
    lifted: &Trajectory,
    naive: &NaiveRun,
) -> Result<ErrorCurves> {
    let len = reference.len();
    let same = |t: &[f64]| t.len() == len && t.iter().zip(&reference.times).all(|(a, b)| (a - b).abs() <= 1e-12);
    if !same(&dae.traj.times) || !same(&lifted.times) || !same(&naive.lq.traj.times) || !same(&naive.lifted.traj.times) {
        return Err(Error::GridMismatch);
    }
    let z = &reference.x;
    Ok(ErrorCurves {
        t: reference.times.clone(),
        e_sol: (0..len).map(|i| mixed_error(models, &dae.coeffs[i], &z[i])).collect(),
        e_sim: (0..len).map(|i| sine_error(&lifted.x[i], &z[i])).collect(),
        e_g: (0..len).map(|i| mixed_error(models, &naive.lq.traj.x[i], &z[i])).collect(),
        e_sim_g: (0..len).map(|i| sine_error(&naive.lifted.traj.x[i], &z[i])).collect(),
    })
}

/// All benchmark outputs.
#[derive(Debug, Clone)]
pub struct HeatReport {
    pub j_e: f64,
    pub j_dae: f64,
    pub j_t: f64,
    pub j_g: f64,
    pub j_t_g: f64,
    pub curves: ErrorCurves,
    pub models: HeatModels,
}

impl HeatReport {
    /// Labeled cost table.
    pub fn costs_text(&self) -> String {
        format!(
            "J_e {}\nJ_dae {}\nJ_T {}\nJ_g {}\nJ_T_g {}\nmax_e_sim {}\n",
            fmt_f64(self.j_e),
            fmt_f64(self.j_dae),
            fmt_f64(self.j_t),
            fmt_f64(self.j_g),
            fmt_f64(self.j_t_g),
            fmt_f64(self.curves.max_e_sim())
        )
    }
}

/// Runs the four branches and the error curves.
pub fn run_heat_benchmark(cfg: &HeatConfig) -> Result<HeatReport> {
    let models = build_heat_models(cfg)?;
    let reference = eigenbasis_reference(&models)?;
    let dae = dae_lq_pipeline(&models)?;
    let lifted = lift_and_simulate_closed_loop(&models, &lift_gain(&models, &dae.k_f)?)?;
    let naive = naive_galerkin_baseline(&models)?;
    let curves = error_curves(&models, &reference.traj, &dae, &lifted.traj, &naive)?;
    Ok(HeatReport {
        j_e: reference.cost,
        j_dae: dae.cost,
        j_t: lifted.cost,
        j_g: naive.lq.cost,
        j_t_g: naive.lifted.cost,
        curves,
        models,
    })
}
