//! Classical state-space systems `ṗ = A p + G q`, `y = C p + D q`, their
//! simulation, and the geometric subspaces used to build associated
//! realizations.

use crate::error::{Error, Result};
use crate::linalg_subspace::{
    image, image_abs, intersect, kernel, norm2, pinv, preimage, sum, vcat, Matrix, Subspace, Vector,
};
use crate::schur::{real_schur, reorder};

/// Eigenvalues with real part above `-STABILITY_MARGIN` count as unstable.
pub const STABILITY_MARGIN: f64 = 1e-9;

/// Linear time-invariant state-space system.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeLti {
    pub a: Matrix,
    pub g: Matrix,
    pub c: Matrix,
    pub d: Matrix,
}

impl OdeLti {
    pub fn new(a: Matrix, g: Matrix, c: Matrix, d: Matrix) -> Result<Self> {
        let r = a.nrows();
        if !a.is_square() || g.nrows() != r || c.ncols() != r || d.nrows() != c.nrows() || d.ncols() != g.ncols() {
            return Err(Error::Shape(format!(
                "OdeLti shapes A {:?}, G {:?}, C {:?}, D {:?}",
                a.shape(),
                g.shape(),
                c.shape(),
                d.shape()
            )));
        }
        for m in [&a, &g, &c, &d] {
            crate::linalg_subspace::check_finite(m)?;
        }
        Ok(Self { a, g, c, d })
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.g.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn output(&self, state: &Vector, input: &Vector) -> Vector {
        &self.c * state + &self.d * input
    }
}

/// States and outputs sampled on a time grid.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
    pub outputs: Vec<Vector>,
}

/// Checks that `grid` is uniform and returns its step.
pub fn uniform_step(grid: &[f64]) -> Result<f64> {
    if grid.len() < 2 {
        return Err(Error::GridTooShort {
            needed: 2,
            got: grid.len(),
        });
    }
    let h = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
    if !(h > 0.0) {
        return Err(Error::NonUniformGrid);
    }
    for w in grid.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::NonUniformGrid);
        }
    }
    Ok(h)
}

/// Evenly spaced grid with `steps + 1` nodes on `[0, t1]`.
pub fn linspace(t1: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| t1 * i as f64 / steps as f64).collect()
}

/// Classical fourth-order Runge–Kutta for `ẋ = f(t, x)` on a uniform grid.
pub fn rk4<F>(f: F, x0: &Vector, grid: &[f64]) -> Result<Vec<Vector>>
where
    F: Fn(f64, &Vector) -> Vector,
{
    let h = uniform_step(grid)?;
    let mut out = Vec::with_capacity(grid.len());
    let mut x = x0.clone();
    out.push(x.clone());
    for &t in &grid[..grid.len() - 1] {
        let k1 = f(t, &x);
        let k2 = f(t + 0.5 * h, &(&x + &k1 * (0.5 * h)));
        let k3 = f(t + 0.5 * h, &(&x + &k2 * (0.5 * h)));
        let k4 = f(t + h, &(&x + &k3 * h));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        out.push(x.clone());
    }
    Ok(out)
}

/// RK4 simulation with inputs interpolated linearly between samples.
pub fn simulate(sys: &OdeLti, v0: &Vector, inputs: &[Vector], grid: &[f64]) -> Result<Simulation> {
    if inputs.len() != grid.len() {
        return Err(Error::Shape(format!(
            "{} input samples for {} grid points",
            inputs.len(),
            grid.len()
        )));
    }
    if v0.len() != sys.state_dim() || inputs.iter().any(|q| q.len() != sys.input_dim()) {
        return Err(Error::Shape("state or input length does not match system".into()));
    }
    let h = uniform_step(grid)?;
    let t0 = grid[0];
    let n = grid.len();
    let input_at = |t: f64| -> Vector {
        let s = ((t - t0) / h).max(0.0);
        let i = (s.floor() as usize).min(n - 2);
        let w = (s - i as f64).clamp(0.0, 1.0);
        &inputs[i] * (1.0 - w) + &inputs[i + 1] * w
    };
    let states = rk4(|t, v| &sys.a * v + &sys.g * input_at(t), v0, grid)?;
    let outputs = states
        .iter()
        .zip(inputs)
        .map(|(v, q)| sys.output(v, q))
        .collect();
    Ok(Simulation {
        times: grid.to_vec(),
        states,
        outputs,
    })
}

/// Largest subspace that can be kept invariant with zero output by some
/// state feedback.
pub fn weakly_unobservable(sys: &OdeLti, tol: f64) -> Subspace {
    let r = sys.state_dim();
    let p = sys.output_dim();
    let stacked_state = vcat(&sys.a, &sys.c);
    let stacked_input = vcat(&sys.g, &sys.d);
    let input_image = image(&stacked_input, tol);
    let mut v = Subspace::full(r, tol);
    for _ in 0..=r {
        let mut lifted = Matrix::zeros(r + p, v.dim());
        lifted.view_mut((0, 0), (r, v.dim())).copy_from(v.basis());
        let target = sum(&Subspace::from_orthonormal(lifted, tol), &input_image)
            .expect("ambient dimensions agree by construction");
        let next = preimage(&stacked_state, &target, tol).expect("shapes agree by construction");
        let next = intersect(&next, &v).expect("ambient dimensions agree");
        let done = next.dim() == v.dim();
        v = next;
        if done {
            break;
        }
    }
    v
}

/// Friend `F` and kernel matrix `L` for an output-nulling subspace `v`.
///
/// `F` is zero on the orthogonal complement of `v`. `L` has orthonormal
/// columns spanning `ker D ∩ G⁻¹(v)`, or is a single zero column when that
/// space is trivial.
pub fn output_nulling_friend(sys: &OdeLti, v: &Subspace, tol: f64) -> Result<(Matrix, Matrix)> {
    let r = sys.state_dim();
    let s = sys.input_dim();
    let d = v.dim();
    let w = v.basis();
    let mut f = Matrix::zeros(s, r);
    if d > 0 {
        // A w_i + G f_i ∈ V and C w_i + D f_i = 0, with V eliminated through
        // its orthogonal complement; the minimum-norm f_i is taken.
        let perp = v.complement();
        let lhs = vcat(&(perp.basis().transpose() * &sys.g), &sys.d);
        let rhs = -vcat(&(perp.basis().transpose() * &sys.a * w), &(&sys.c * w));
        let fw = pinv(&lhs, tol) * &rhs;
        let resid = (&lhs * &fw - &rhs).norm();
        let scale = 1.0 + norm2(&sys.a) + norm2(&sys.c);
        if resid > 1e3 * tol * scale {
            return Err(Error::ResidualTooLarge(resid));
        }
        f = fw * w.transpose();
    }
    let ker_d = kernel(&sys.d, tol);
    let g_pre = preimage(&sys.g, v, tol)?;
    let l_space = intersect(&ker_d, &g_pre)?;
    let l = if l_space.is_zero() {
        Matrix::zeros(s, 1)
    } else {
        l_space.basis().clone()
    };
    Ok((f, l))
}

/// Reachable subspace of `(a, b)`.
pub fn reachable_subspace(a: &Matrix, b: &Matrix, tol: f64) -> Subspace {
    let mut reach = image(b, tol);
    let scale = norm2(a).max(1.0);
    for _ in 0..a.nrows() {
        let pushed = image_abs(&(a * reach.basis()), tol * scale, tol);
        let next = sum(&reach, &pushed).expect("same ambient");
        if next.dim() == reach.dim() {
            break;
        }
        reach = next;
    }
    reach
}

/// Invariant subspace of `a` for eigenvalues with real part below
/// `-STABILITY_MARGIN`, from an ordered real Schur form.
pub fn stable_subspace(a: &Matrix, tol: f64) -> Subspace {
    let r = a.nrows();
    if r == 0 {
        return Subspace::zero(0, tol);
    }
    let mut s = real_schur(a);
    let k = reorder(&mut s, |re, _| re < -STABILITY_MARGIN);
    Subspace::from_orthonormal(s.q.columns(0, k).into_owned(), tol)
}

/// Reachable subspace plus the stable modal subspace of `a`.
pub fn stabilizability_subspace(a: &Matrix, b: &Matrix, tol: f64) -> Subspace {
    let reach = reachable_subspace(a, b, tol);
    let stable = stable_subspace(a, tol);
    sum(&reach, &stable).expect("same ambient")
}

/// Restriction of `sys` to an invariant subspace containing the input image.
pub fn restrict_to_invariant(sys: &OdeLti, v: &Subspace, tol: f64) -> Result<OdeLti> {
    let w = v.basis();
    let comp = v.complement();
    let leak_a = (comp.basis().transpose() * &sys.a * w).norm();
    let leak_g = (comp.basis().transpose() * &sys.g).norm();
    let scale = 1.0 + norm2(&sys.a) + norm2(&sys.g);
    let leak = leak_a.max(leak_g);
    if leak > tol * scale {
        return Err(Error::NotInvariant(leak));
    }
    OdeLti::new(
        w.transpose() * &sys.a * w,
        w.transpose() * &sys.g,
        &sys.c * w,
        sys.d.clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schur::eigenvalues;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Matrix {
        Matrix::from_fn(n, m, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn simulate_constant_and_decay() {
        let sys = OdeLti::new(Matrix::zeros(2, 2), Matrix::zeros(2, 1), Matrix::identity(2, 2), Matrix::zeros(2, 1)).unwrap();
        let grid = linspace(1.0, 10);
        let v = Vector::from_vec(vec![1.5, -2.0]);
        let sim = simulate(&sys, &v, &vec![Vector::zeros(1); 11], &grid).unwrap();
        assert!(sim.states.iter().all(|s| *s == v));

        let sys = OdeLti::new(Matrix::from_element(1, 1, -1.0), Matrix::zeros(1, 1), Matrix::identity(1, 1), Matrix::zeros(1, 1)).unwrap();
        let grid = linspace(1.0, 1000);
        let sim = simulate(&sys, &Vector::from_element(1, 1.0), &vec![Vector::zeros(1); 1001], &grid).unwrap();
        assert!((sim.states[1000][0] - (-1f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn simulate_rejects_non_uniform_grid() {
        let sys = OdeLti::new(Matrix::zeros(1, 1), Matrix::zeros(1, 1), Matrix::zeros(0, 1), Matrix::zeros(0, 1)).unwrap();
        let grid = [0.0, 0.1, 0.3];
        let r = simulate(&sys, &Vector::zeros(1), &vec![Vector::zeros(1); 3], &grid);
        assert_eq!(r.unwrap_err(), Error::NonUniformGrid);
    }

    #[test]
    fn weakly_unobservable_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random(3, 3, &mut rng);
        let g = random(3, 2, &mut rng);
        let observed = OdeLti::new(a.clone(), g.clone(), Matrix::identity(3, 3), Matrix::zeros(3, 2)).unwrap();
        assert!(weakly_unobservable(&observed, 1e-10).is_zero());
        let blind = OdeLti::new(a, g, Matrix::zeros(2, 3), random(2, 2, &mut rng)).unwrap();
        assert!(weakly_unobservable(&blind, 1e-10).is_full());
    }

    #[test]
    fn friend_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random(3, 3, &mut rng);
        let g = Matrix::from_row_slice(3, 2, &[1.0, 1.0, 0.0, 0.0, 1.0, 1.0]);
        let observed = OdeLti::new(a.clone(), g.clone(), Matrix::identity(3, 3), Matrix::zeros(3, 2)).unwrap();
        let v = weakly_unobservable(&observed, 1e-10);
        let (f, l) = output_nulling_friend(&observed, &v, 1e-10).unwrap();
        assert_eq!(f, Matrix::zeros(2, 3));
        assert!((&g * &l).norm() < 1e-12 && l.norm() > 0.5);

        let blind = OdeLti::new(a, g, Matrix::zeros(1, 3), Matrix::zeros(1, 2)).unwrap();
        let v = weakly_unobservable(&blind, 1e-10);
        let (f, l) = output_nulling_friend(&blind, &v, 1e-10).unwrap();
        assert!(f.norm() < 1e-12);
        assert!(((l.transpose() * &l) - Matrix::identity(2, 2)).norm() < 1e-12 && l.ncols() == 2);
    }

    #[test]
    fn friend_rejects_non_nulling_subspace() {
        let sys = OdeLti::new(Matrix::zeros(2, 2), Matrix::zeros(2, 1), Matrix::identity(2, 2), Matrix::zeros(2, 1)).unwrap();
        let r = output_nulling_friend(&sys, &Subspace::full(2, 1e-10), 1e-10);
        assert!(matches!(r, Err(Error::ResidualTooLarge(_))));
    }

    #[test]
    fn stabilizability_examples() {
        let stable = Matrix::from_row_slice(2, 2, &[-1.0, 3.0, 0.0, -2.0]);
        assert!(stabilizability_subspace(&stable, &Matrix::zeros(2, 1), 1e-10).is_full());
        assert!(stabilizability_subspace(&Matrix::from_element(1, 1, 1.0), &Matrix::zeros(1, 1), 1e-10).is_zero());
        let a = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let b = Matrix::from_row_slice(2, 1, &[0.0, 1.0]);
        assert!(stabilizability_subspace(&a, &b, 1e-10).is_full());
        // Marginal eigenvalue counts as unstable.
        assert!(stabilizability_subspace(&Matrix::zeros(1, 1), &Matrix::zeros(1, 1), 1e-10).is_zero());
        assert!(stabilizability_subspace(&Matrix::from_element(1, 1, -1e-10), &Matrix::zeros(1, 1), 1e-10).is_zero());
    }

    #[test]
    fn restriction_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random(3, 3, &mut rng);
        let sys = OdeLti::new(a.clone(), random(3, 1, &mut rng), random(2, 3, &mut rng), random(2, 1, &mut rng)).unwrap();
        let full = restrict_to_invariant(&sys, &Subspace::full(3, 1e-10), 1e-10).unwrap();
        assert_eq!(full.a, sys.a);
        let zero = restrict_to_invariant(&sys, &Subspace::zero(3, 1e-10), 1e-10);
        assert!(matches!(zero, Err(Error::NotInvariant(_))));
        let no_input = OdeLti::new(a, Matrix::zeros(3, 1), Matrix::zeros(2, 3), random(2, 1, &mut rng)).unwrap();
        let zero = restrict_to_invariant(&no_input, &Subspace::zero(3, 1e-10), 1e-10).unwrap();
        assert_eq!(zero.state_dim(), 0);
        assert_eq!(zero.d, no_input.d);

        // Block upper triangular: the first two coordinates are invariant.
        let mut bt = random(4, 4, &mut rng);
        bt.view_mut((2, 0), (2, 2)).fill(0.0);
        let q = crate::linalg_subspace::image(&random(4, 4, &mut rng), 1e-12).basis().clone();
        let a = &q * &bt * q.transpose();
        let sys = OdeLti::new(a, Matrix::zeros(4, 1), Matrix::zeros(1, 4), Matrix::zeros(1, 1)).unwrap();
        let v = Subspace::from_orthonormal(q.columns(0, 2).into_owned(), 1e-10);
        let restricted = restrict_to_invariant(&sys, &v, 1e-10).unwrap();
        let mut got: Vec<_> = eigenvalues(&restricted.a);
        let mut want: Vec<_> = eigenvalues(&bt.view((0, 0), (2, 2)).into_owned());
        got.sort_by(|x, y| x.partial_cmp(y).unwrap());
        want.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (g, w) in got.iter().zip(&want) {
            assert!((g.0 - w.0).abs() < 1e-10 && (g.1 - w.1).abs() < 1e-10);
        }
    }
}
