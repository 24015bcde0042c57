//! Command-line front end.
//!
//! Every subcommand except `heat-demo` reads a JSON problem file with
//! members `E`, `A`, `B` (arrays of rows) and optional `Q`, `R`, `Q0`,
//! `z`, `t1`. Matrices are printed in the `rows cols` text format and
//! trajectories are written as CSV.
//!
//! Exit codes: 0 success, 1 parse, shape or numerical error,
//! 2 not stabilizable, 3 inconsistent initial value.

use crate::associate::{associate, lift_solution, smooth_inputs, verify_associated};
use crate::dae_model::{
    behavior_residual, consistency_space, impulse_controllable, pencil_stabilizability_test, DaeLti, ProblemFile,
};
use crate::error::{Error, Result};
use crate::galerkin_heat::{run_heat_benchmark, HeatConfig};
use crate::linalg_subspace::{fmt_f64, write_matrix, Matrix, Vector};
use crate::lq_solver::{default_steps, finite_horizon, infinite_horizon, LqWeights};
use crate::ode_geometry::linspace;
use clap::{Args, Parser, Subcommand};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(
    name = "dae-lq",
    version,
    about = "Associated ODE realizations of linear DAEs and LQ control",
    long_about = "Associated ODE realizations of linear DAEs d(Ex)/dt = Ax + Bu and LQ control on top of them.\n\n\
Problem files are JSON: {\"E\": [[..],..], \"A\": [[..],..], \"B\": [[..],..]} with optional \"Q\", \"R\", \"Q0\" \
(weights, default identity/identity/zero), \"z\" (consistent initial value Ex(0)) and \"t1\" (horizon).\n\
Matrices are printed as a `rows cols` header followed by one line per row.\n\n\
Exit codes: 0 success, 1 parse/shape/numerical error, 2 not stabilizable, 3 inconsistent initial value."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Problem file (JSON)
    pub problem: PathBuf,
    /// Relative rank tolerance
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the associated system A_l, B_l, C_l, D_l, M and a verification report
    Associate {
        #[command(flatten)]
        common: Common,
    },
    /// Impulse controllability, stabilizability and dimension of the consistency space
    Check {
        #[command(flatten)]
        common: Common,
    },
    /// Finite-horizon LQ: P(t1), gains, cost and trajectory.csv
    LqFinite {
        #[command(flatten)]
        common: Common,
        /// Initial value Ex(0) as comma-separated decimals (overrides "z")
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
        /// Horizon (overrides "t1"; default 1)
        #[arg(long)]
        t1: Option<f64>,
        /// Riccati steps [default: max(2000, 1000·t1)]
        #[arg(long)]
        steps: Option<usize>,
        /// Directory for trajectory.csv and the matrix files
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Infinite-horizon LQ: P, gains, cost and trajectory.csv
    LqInfinite {
        #[command(flatten)]
        common: Common,
        /// Initial value Ex(0) as comma-separated decimals (overrides "z")
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
        /// Simulation horizon [default: 50/|closed-loop abscissa|, at most 1e4]
        #[arg(long)]
        horizon: Option<f64>,
        /// Output steps of the simulation
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        /// Directory for trajectory.csv and the matrix files
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Simulate a DAE solution through the associated system
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Initial value Ex(0) as comma-separated decimals (overrides "z")
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
        /// Simulation horizon
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        /// Steps of the simulation grid
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// Seed of smooth random free inputs; without it the free input is zero
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for trajectory.csv
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Heat-equation benchmark: writes costs.txt, errors.csv and model matrices
    HeatDemo(HeatArgs),
}

#[derive(Debug, Args)]
pub struct HeatArgs {
    /// Galerkin dimension
    #[arg(long = "N", default_value_t = 40)]
    pub n: usize,
    /// Actuated sine modes
    #[arg(long = "Nu", default_value_t = 35)]
    pub n_u: usize,
    /// Weight on the projection-error input
    #[arg(long, default_value_t = 0.01)]
    pub mu: f64,
    /// Diffusion coefficient
    #[arg(long, default_value_t = 1.0 / 30.0)]
    pub c: f64,
    /// Initial amplitude
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    pub lambda: f64,
    /// Initial eigenmode (1-based)
    #[arg(long, default_value_t = 34)]
    pub mode: usize,
    /// Simulation horizon
    #[arg(long = "T", default_value_t = 5.0)]
    pub t: f64,
    /// Gauss–Legendre nodes for the model integrals [default: N + 2]
    #[arg(long)]
    pub quad_order: Option<usize>,
    /// Use −2c(2i+1) instead of −2c²(2i+1) for the stiffness diagonal
    #[arg(long)]
    pub linear_c_stiffness: bool,
    /// Output directory
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

impl HeatArgs {
    pub fn config(&self) -> HeatConfig {
        HeatConfig {
            n: self.n,
            n_u: self.n_u,
            mu: self.mu,
            c: self.c,
            lambda: self.lambda,
            mode: self.mode,
            t: self.t,
            quad_order: self.quad_order.unwrap_or(self.n + 2),
            stiffness_uses_c_squared: !self.linear_c_stiffness,
            ..HeatConfig::default()
        }
    }
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NotStabilizable => 2,
        Error::InconsistentInitialState(_) => 3,
        _ => 1,
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Parse(format!("{}: {e}", path.display()))
}

fn load(path: &Path) -> Result<(ProblemFile, DaeLti)> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let file = ProblemFile::parse(&text)?;
    let dae = file.dae()?;
    Ok((file, dae))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| io_err(&path, e))
}

/// Parses `"1,2.5,-3"`; an empty string is the empty vector.
pub fn parse_vector(text: &str) -> Result<Vector> {
    let vals: Vec<f64> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad number {s:?} in vector"))))
        .collect::<Result<_>>()?;
    Ok(Vector::from_vec(vals))
}

fn initial_value(flag: &Option<String>, file: &ProblemFile, dae: &DaeLti) -> Result<Vector> {
    let z = match (flag, &file.z) {
        (Some(s), _) => parse_vector(s)?,
        (None, Some(z)) => Vector::from_vec(z.clone()),
        (None, None) => return Err(Error::Parse("initial value missing: pass --z or set \"z\"".into())),
    };
    if z.len() != dae.c() {
        return Err(Error::Shape(format!("z has length {}, expected {}", z.len(), dae.c())));
    }
    Ok(z)
}

fn weights(file: &ProblemFile, dae: &DaeLti) -> Result<LqWeights> {
    let d = LqWeights::identity_for(dae);
    LqWeights::new(
        file.weight("Q")?.unwrap_or(d.q),
        file.weight("R")?.unwrap_or(d.r),
        file.weight("Q0")?.unwrap_or(d.q0),
    )
}

fn labeled(out: &mut String, name: &str, m: &Matrix) {
    let _ = write!(out, "{name}\n{}", write_matrix(m));
}

/// Runs one command and returns what it prints on standard output.
pub fn run(cli: &Cli) -> Result<String> {
    let mut out = String::new();
    match &cli.command {
        Command::Associate { common } => {
            let (_, dae) = load(&common.problem)?;
            let assoc = associate(&dae, common.tol);
            for (name, m) in [
                ("A_l", &assoc.a_l),
                ("B_l", &assoc.b_l),
                ("C_l", &assoc.c_l),
                ("D_l", &assoc.d_l),
                ("M", &assoc.m),
            ] {
                labeled(&mut out, name, m);
            }
            out.push_str(&verify_associated(&dae, &assoc, common.tol).render());
        }
        Command::Check { common } => {
            let (_, dae) = load(&common.problem)?;
            let assoc = associate(&dae, common.tol);
            let _ = writeln!(
                out,
                "impulse_controllable: {}, stabilizable: {}, dim V(E,A,B): {}",
                impulse_controllable(&dae, common.tol),
                pencil_stabilizability_test(&dae, &assoc, common.tol),
                consistency_space(&dae, &assoc).dim()
            );
        }
        Command::LqFinite { common, z, t1, steps, out_dir } => {
            let (file, dae) = load(&common.problem)?;
            let assoc = associate(&dae, common.tol);
            let z = initial_value(z, &file, &dae)?;
            let w = weights(&file, &dae)?;
            let t1 = t1.or(file.t1).unwrap_or(1.0);
            let steps = steps.unwrap_or_else(|| default_steps(t1));
            let sol = finite_horizon(&dae, &assoc, &w, &z, t1, steps)?;
            let p = &sol.p_samples[0];
            labeled(&mut out, "P(t1)", p);
            labeled(&mut out, "K(t1)", &sol.k_samples[0]);
            labeled(&mut out, "K_f(0)", &sol.k_f_samples[0]);
            labeled(&mut out, "K1(0)", &sol.k1_samples[0]);
            labeled(&mut out, "K2", &sol.k2);
            let _ = writeln!(out, "cost {}", fmt_f64(sol.cost));
            write_file(out_dir, "P.txt", &write_matrix(p))?;
            write_file(out_dir, "K_f.txt", &write_matrix(&sol.k_f_samples[0]))?;
            write_file(out_dir, "trajectory.csv", &sol.traj.to_csv())?;
        }
        Command::LqInfinite { common, z, horizon, steps, out_dir } => {
            let (file, dae) = load(&common.problem)?;
            let assoc = associate(&dae, common.tol);
            let z = initial_value(z, &file, &dae)?;
            let w = weights(&file, &dae)?;
            let sol = infinite_horizon(&dae, &assoc, &w, &z, *horizon, Some(*steps))?;
            labeled(&mut out, "P", &sol.p);
            labeled(&mut out, "K", &sol.k);
            labeled(&mut out, "K_f", &sol.k_f);
            labeled(&mut out, "K1", &sol.k1);
            labeled(&mut out, "K2", &sol.k2);
            let _ = writeln!(out, "closed_loop_abscissa {}", fmt_f64(sol.closed_loop_abscissa));
            let _ = writeln!(out, "cost {}", fmt_f64(sol.cost));
            write_file(out_dir, "P.txt", &write_matrix(&sol.p))?;
            write_file(out_dir, "K_f.txt", &write_matrix(&sol.k_f))?;
            write_file(out_dir, "trajectory.csv", &sol.traj.to_csv())?;
        }
        Command::Simulate { common, z, horizon, steps, seed, out_dir } => {
            let (file, dae) = load(&common.problem)?;
            let assoc = associate(&dae, common.tol);
            let z = initial_value(z, &file, &dae)?;
            if !crate::dae_model::is_consistent(&dae, &assoc, &z) {
                return Err(Error::InconsistentInitialState(crate::dae_model::consistency_distance(
                    &dae, &assoc, &z,
                )));
            }
            if !(*horizon > 0.0) || *steps < 2 {
                return Err(Error::Shape("simulate needs a positive horizon and at least 2 steps".into()));
            }
            let grid = linspace(*horizon, *steps);
            let g = match seed {
                Some(s) => smooth_inputs(assoc.k(), &grid, *s, 1.0),
                None => vec![Vector::zeros(assoc.k()); grid.len()],
            };
            let traj = lift_solution(&dae, &assoc, &assoc.state_of(&z), &g, &grid)?;
            let _ = writeln!(out, "behavior_residual {}", fmt_f64(behavior_residual(&dae, &traj)?));
            write_file(out_dir, "trajectory.csv", &traj.to_csv())?;
        }
        Command::HeatDemo(args) => {
            let report = run_heat_benchmark(&args.config())?;
            let costs = report.costs_text();
            out.push_str(&costs);
            write_file(&args.out_dir, "costs.txt", &costs)?;
            write_file(&args.out_dir, "errors.csv", &report.curves.to_csv())?;
            for (name, m) in report.models.named_matrices() {
                write_file(&args.out_dir, &format!("{name}.txt"), &write_matrix(m))?;
            }
        }
    }
    Ok(out)
}
