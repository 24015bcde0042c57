//! Rectangular descriptor systems `d(Ex)/dt = Ax + Bu`, sampled
//! trajectories, and the structural tests built on the associated
//! realization.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::associate::AssociatedOdeLti;
use crate::error::{Error, Result};
use crate::linalg_subspace::{
    check_finite, fmt_f64, from_rows, hcat, image, kernel, preimage, rank, sum, vcat, Matrix,
    Subspace, Vector,
};
use crate::ode_geometry::{stabilizability_subspace, uniform_step, STABILITY_MARGIN};
use crate::schur::eigenvalues;

/// The triple (E, A, B) with E, A of shape c×n and B of shape c×m.
#[derive(Debug, Clone, PartialEq)]
pub struct DaeLti {
    pub e: Matrix,
    pub a: Matrix,
    pub b: Matrix,
}

impl DaeLti {
    pub fn new(e: Matrix, a: Matrix, b: Matrix) -> Result<Self> {
        if e.shape() != a.shape() {
            return Err(Error::Shape(format!("E is {:?} but A is {:?}", e.shape(), a.shape())));
        }
        if b.nrows() != e.nrows() {
            return Err(Error::Shape(format!("B has {} rows, expected {}", b.nrows(), e.nrows())));
        }
        check_finite(&e)?;
        check_finite(&a)?;
        check_finite(&b)?;
        Ok(Self { e, a, b })
    }

    /// Number of equations.
    pub fn c(&self) -> usize {
        self.e.nrows()
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.e.ncols()
    }

    /// Input dimension.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }
}

/// Samples of a state/input pair on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub x: Vec<Vector>,
    pub u: Vec<Vector>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, x: Vec<Vector>, u: Vec<Vector>) -> Result<Self> {
        if x.len() != times.len() || u.len() != times.len() {
            return Err(Error::Shape("sample counts differ from grid length".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parse("time grid is not strictly increasing".into()));
        }
        Ok(Self { times, x, u })
    }

    /// All-zero trajectory on `times`.
    pub fn zeros(times: Vec<f64>, n: usize, m: usize) -> Self {
        let len = times.len();
        Self {
            times,
            x: vec![Vector::zeros(n); len],
            u: vec![Vector::zeros(m); len],
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV with header `t,x1,…,xn,u1,…,um` and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let n = self.x.first().map_or(0, |v| v.len());
        let m = self.u.first().map_or(0, |v| v.len());
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        header.extend((1..=m).map(|i| format!("u{i}")));
        let mut s = header.join(",");
        s.push('\n');
        for k in 0..self.len() {
            let mut row = vec![fmt_f64(self.times[k])];
            row.extend(self.x[k].iter().map(|&v| fmt_f64(v)));
            row.extend(self.u[k].iter().map(|&v| fmt_f64(v)));
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }
}

/// Limit of the augmented Wong sequence `V₀ = Rⁿ`, `V_{i+1} = A⁻¹(E V_i + im B)`.
pub fn wong_limit(dae: &DaeLti, tol: f64) -> Subspace {
    let n = dae.n();
    let im_b = image(&dae.b, tol);
    let mut v = Subspace::full(n, tol);
    for _ in 0..=n {
        let ev = image(&(&dae.e * v.basis()), tol);
        let target = sum(&ev, &im_b).expect("same ambient");
        let next = preimage(&dae.a, &target, tol).expect("shapes agree");
        let next = crate::linalg_subspace::intersect(&next, &v).expect("same ambient");
        let done = next.dim() == v.dim();
        v = next;
        if done {
            break;
        }
    }
    v
}

/// Set of consistent values `Ex(0)`, the image of `E C_s`.
pub fn consistency_space(dae: &DaeLti, assoc: &AssociatedOdeLti) -> Subspace {
    image(&(&dae.e * assoc.c_s()), assoc.tol)
}

/// Membership of `z` in the consistency space.
pub fn is_consistent(dae: &DaeLti, assoc: &AssociatedOdeLti, z: &Vector) -> bool {
    consistency_distance(dae, assoc, z) <= 1e-8 * z.norm().max(1.0)
}

/// Distance from `z` to the consistency space.
pub fn consistency_distance(dae: &DaeLti, assoc: &AssociatedOdeLti, z: &Vector) -> f64 {
    consistency_space(dae, assoc).distance(z)
}

/// Rank test `rank [E, A, B] = rank [E, AZ, B]` with `im Z = ker E`.
pub fn impulse_controllable(dae: &DaeLti, tol: f64) -> bool {
    let ker_e = kernel(&dae.e, tol);
    let z = if ker_e.is_zero() {
        Matrix::zeros(dae.n(), 1)
    } else {
        ker_e.basis().clone()
    };
    let full = hcat(&hcat(&dae.e, &dae.a), &dae.b);
    let reduced = hcat(&hcat(&dae.e, &(&dae.a * z)), &dae.b);
    rank(&full, tol) == rank(&reduced, tol)
}

/// Stabilizability of the DAE, decided through the associated pair
/// `(A_l, B_l)`.
pub fn pencil_stabilizability_test(_dae: &DaeLti, assoc: &AssociatedOdeLti, tol: f64) -> bool {
    stabilizability_subspace(&assoc.a_l, &assoc.b_l, tol).is_full()
}

/// Rank of the complex matrix `[λE − A, B]` via its real embedding.
pub fn pencil_rank(dae: &DaeLti, re: f64, im: f64, tol: f64) -> usize {
    let re_part = hcat(&(&dae.e * re - &dae.a), &dae.b);
    let im_part = hcat(&(&dae.e * im), &Matrix::zeros(dae.c(), dae.m()));
    let top = hcat(&re_part, &(-&im_part));
    let bottom = hcat(&im_part, &re_part);
    let r2 = rank(&vcat(&top, &bottom), tol);
    r2 / 2
}

/// Rank probe of `[λE − A, B]`: the normal rank is estimated at random
/// points and compared to the rank at every eigenvalue of `A_l` with
/// nonnegative real part.
pub fn pencil_rank_probe(dae: &DaeLti, assoc: &AssociatedOdeLti, tol: f64, seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nrank = (0..4)
        .map(|_| pencil_rank(dae, rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), tol))
        .max()
        .unwrap_or(0);
    eigenvalues(&assoc.a_l)
        .into_iter()
        .filter(|(re, _)| *re >= -STABILITY_MARGIN)
        .all(|(re, im)| pencil_rank(dae, re, im, 1e-9) == nrank)
}

/// Largest central-difference residual of `d(Ex)/dt − Ax − Bu` over
/// interior grid points, divided by `1 + max ‖(x, u)‖∞`.
///
/// On uniform grids the five-point stencil is used wherever it fits, the
/// three-point one next to the endpoints.
pub fn behavior_residual(dae: &DaeLti, traj: &Trajectory) -> Result<f64> {
    let len = traj.len();
    if len < 3 {
        return Err(Error::GridTooShort { needed: 3, got: len });
    }
    let ex: Vec<Vector> = traj.x.iter().map(|x| &dae.e * x).collect();
    let uniform = uniform_step(&traj.times).ok();
    let mut worst: f64 = 0.0;
    for i in 1..len - 1 {
        // Fourth-order stencils on uniform grids, shifted at the two ends.
        let deriv = match uniform {
            Some(h) if len >= 5 && i >= 2 && i + 2 < len => {
                (&ex[i - 2] - &ex[i + 2] + (&ex[i + 1] - &ex[i - 1]) * 8.0) / (12.0 * h)
            }
            Some(h) if len >= 5 && i == 1 => {
                (&ex[2] * 18.0 - &ex[0] * 3.0 - &ex[1] * 10.0 - &ex[3] * 6.0 + &ex[4]) / (12.0 * h)
            }
            Some(h) if len >= 5 => {
                let k = len - 1;
                (&ex[k] * 3.0 + &ex[k - 1] * 10.0 - &ex[k - 2] * 18.0 + &ex[k - 3] * 6.0 - &ex[k - 4]) / (12.0 * h)
            }
            _ => (&ex[i + 1] - &ex[i - 1]) / (traj.times[i + 1] - traj.times[i - 1]),
        };
        let r = deriv - &dae.a * &traj.x[i] - &dae.b * &traj.u[i];
        worst = worst.max(r.amax());
    }
    let scale = traj
        .x
        .iter()
        .zip(&traj.u)
        .map(|(x, u)| x.amax().max(u.amax()))
        .fold(0.0, f64::max);
    Ok(worst / (1.0 + scale))
}

/// Problem file: `E`, `A`, `B` as arrays of rows, plus optional weights,
/// initial value and horizon.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(rename = "E")]
    pub e: Vec<Vec<f64>>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<f64>>>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<Vec<f64>>>,
    #[serde(rename = "Q0", default, skip_serializing_if = "Option::is_none")]
    pub q0: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<f64>,
}

/// A matrix from JSON rows; an empty row list stands for a matrix with
/// `rows` rows and no columns.
fn json_matrix(rows: &[Vec<f64>], name: &str, expect_rows: Option<usize>) -> Result<Matrix> {
    if rows.is_empty() {
        return Ok(Matrix::zeros(expect_rows.unwrap_or(0), 0));
    }
    let m = from_rows(rows).map_err(|e| Error::Parse(format!("{name}: {e}")))?;
    if let Some(r) = expect_rows {
        if m.nrows() != r {
            return Err(Error::Shape(format!("{name} has {} rows, expected {r}", m.nrows())));
        }
    }
    Ok(m)
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn dae(&self) -> Result<DaeLti> {
        let e = json_matrix(&self.e, "E", None)?;
        let a = json_matrix(&self.a, "A", Some(e.nrows()))?;
        let mut b = json_matrix(&self.b, "B", Some(e.nrows()))?;
        if self.b.iter().all(|r| r.is_empty()) {
            b = Matrix::zeros(e.nrows(), 0);
        }
        DaeLti::new(e, a, b)
    }

    pub fn weight(&self, which: &str) -> Result<Option<Matrix>> {
        let rows = match which {
            "Q" => &self.q,
            "R" => &self.r,
            "Q0" => &self.q0,
            _ => return Err(Error::Parse(format!("unknown weight {which}"))),
        };
        rows.as_ref().map(|r| json_matrix(r, which, None)).transpose()
    }
}
