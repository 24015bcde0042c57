//! Browser bindings for the static demo page in `www/`.
//!
//! Every export takes plain strings or numbers and returns a JSON string;
//! failures come back as `{"error": "..."}` so the page needs no exception
//! handling.

use dae_lq::associate::{associate, verify_associated};
use dae_lq::cli::parse_vector;
use dae_lq::dae_model::{consistency_space, impulse_controllable, pencil_stabilizability_test, ProblemFile};
use dae_lq::galerkin_heat::{run_heat_benchmark, HeatConfig};
use dae_lq::linalg_subspace::Matrix;
use dae_lq::lq_solver::{infinite_horizon, LqWeights};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const TOL: f64 = 1e-10;
/// Trajectory samples sent back for plotting.
const PLOT_POINTS: usize = 200;

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn finish(result: Result<Value, String>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

/// Heat benchmark costs for the given configuration.
#[wasm_bindgen]
pub fn heat_costs(n: usize, n_u: usize, mu: f64, c: f64, lambda: f64, mode: usize, t: f64) -> String {
    let cfg = HeatConfig {
        n_u,
        mu,
        c,
        lambda,
        mode,
        t,
        dt: 1e-2,
        ..HeatConfig::with_n(n)
    };
    finish(
        run_heat_benchmark(&cfg)
            .map(|r| {
                json!({
                    "J_e": r.j_e,
                    "J_dae": r.j_dae,
                    "J_T": r.j_t,
                    "J_g": r.j_g,
                    "J_T_g": r.j_t_g,
                    "max_e_sim": r.curves.max_e_sim(),
                    "t": r.curves.t,
                    "e_sim": r.curves.e_sim,
                    "e_sim_g": r.curves.e_sim_g,
                })
            })
            .map_err(|e| e.to_string()),
    )
}

/// Associated realization, verification report and structural checks for
/// a problem file.
#[wasm_bindgen]
pub fn associate_problem(problem: &str) -> String {
    let run = || -> Result<Value, String> {
        let dae = ProblemFile::parse(problem).and_then(|f| f.dae()).map_err(|e| e.to_string())?;
        let assoc = associate(&dae, TOL);
        let report = verify_associated(&dae, &assoc, TOL);
        Ok(json!({
            "A_l": rows(&assoc.a_l),
            "B_l": rows(&assoc.b_l),
            "C_l": rows(&assoc.c_l),
            "D_l": rows(&assoc.d_l),
            "M": rows(&assoc.m),
            "report": report.render(),
            "impulse_controllable": impulse_controllable(&dae, TOL),
            "stabilizable": pencil_stabilizability_test(&dae, &assoc, TOL),
            "consistency_dim": consistency_space(&dae, &assoc).dim(),
        }))
    };
    finish(run())
}

/// Infinite-horizon LQ from the initial value `z` (comma-separated);
/// weights come from the problem file or default to identity.
#[wasm_bindgen]
pub fn lq_infinite_problem(problem: &str, z: &str, horizon: f64) -> String {
    let run = || -> Result<Value, String> {
        let file = ProblemFile::parse(problem).map_err(|e| e.to_string())?;
        let dae = file.dae().map_err(|e| e.to_string())?;
        let z = parse_vector(z).map_err(|e| e.to_string())?;
        let d = LqWeights::identity_for(&dae);
        let weight = |name: &str, fallback: Matrix| -> Result<Matrix, String> {
            Ok(file.weight(name).map_err(|e| e.to_string())?.unwrap_or(fallback))
        };
        let w = LqWeights::new(weight("Q", d.q)?, weight("R", d.r)?, weight("Q0", d.q0)?).map_err(|e| e.to_string())?;
        let assoc = associate(&dae, TOL);
        let sol = infinite_horizon(&dae, &assoc, &w, &z, Some(horizon), Some(PLOT_POINTS)).map_err(|e| e.to_string())?;
        let x: Vec<Vec<f64>> = sol.traj.x.iter().map(|v| v.iter().copied().collect()).collect();
        let u: Vec<Vec<f64>> = sol.traj.u.iter().map(|v| v.iter().copied().collect()).collect();
        Ok(json!({
            "cost": sol.cost,
            "closed_loop_abscissa": sol.closed_loop_abscissa,
            "K_f": rows(&sol.k_f),
            "t": sol.traj.times,
            "x": x,
            "u": u,
        }))
    };
    finish(run())
}
