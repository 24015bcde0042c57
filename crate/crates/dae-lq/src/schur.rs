//! Real Schur forms with eigenvalue reordering, and Bartels–Stewart
//! solvers for Sylvester and Lyapunov equations.

use nalgebra::linalg::Schur;

use crate::linalg_subspace::{Matrix, Subspace};

/// Orthogonal `q` and quasi-upper-triangular `t` with `a = q t qᵀ`.
#[derive(Debug, Clone)]
pub struct RealSchur {
    pub q: Matrix,
    pub t: Matrix,
}

/// A diagonal block of a real Schur form: start index and size (1 or 2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub start: usize,
    pub size: usize,
}

fn subdiag_is_zero(t: &Matrix, i: usize) -> bool {
    let s = t[(i + 1, i)].abs();
    s == 0.0 || s <= f64::EPSILON * (t[(i, i)].abs() + t[(i + 1, i + 1)].abs())
}

/// Partition of the diagonal into 1×1 and 2×2 blocks.
pub fn blocks(t: &Matrix) -> Vec<Block> {
    let n = t.nrows();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n && !subdiag_is_zero(t, i) {
            out.push(Block { start: i, size: 2 });
            i += 2;
        } else {
            out.push(Block { start: i, size: 1 });
            i += 1;
        }
    }
    out
}

/// Eigenvalue (real, imaginary) representing a block; for a complex pair
/// the one with positive imaginary part.
pub fn block_eigenvalue(t: &Matrix, b: Block) -> (f64, f64) {
    let i = b.start;
    if b.size == 1 {
        return (t[(i, i)], 0.0);
    }
    let (a, bb, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
    let half_tr = 0.5 * (a + d);
    let disc = 0.25 * (a - d) * (a - d) + bb * c;
    if disc >= 0.0 {
        (half_tr + disc.sqrt(), 0.0)
    } else {
        (half_tr, (-disc).sqrt())
    }
}

/// `t ← gᵀ t g` on the window starting at `i`, `q ← q g`.
fn apply_similarity(t: &mut Matrix, q: &mut Matrix, i: usize, g: &Matrix) {
    let k = g.nrows();
    let n = t.nrows();
    let rows = t.view((i, 0), (k, n)).into_owned();
    t.view_mut((i, 0), (k, n)).copy_from(&(g.transpose() * rows));
    let cols = t.view((0, i), (n, k)).into_owned();
    t.view_mut((0, i), (n, k)).copy_from(&(cols * g));
    let qc = q.view((0, i), (n, k)).into_owned();
    q.view_mut((0, i), (n, k)).copy_from(&(qc * g));
}

/// Splits 2×2 blocks whose eigenvalues are real into two 1×1 blocks.
fn split_real_pairs(t: &mut Matrix, q: &mut Matrix) {
    let mut i = 0;
    while i + 1 < t.nrows() {
        if subdiag_is_zero(t, i) {
            t[(i + 1, i)] = 0.0;
            i += 1;
            continue;
        }
        let b = Block { start: i, size: 2 };
        let (lambda, im) = block_eigenvalue(t, b);
        if im == 0.0 {
            let (a, bb, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            // Eigenvector for lambda; choose the better conditioned formula.
            let (x0, x1) = if (lambda - a).abs() + bb.abs() >= (lambda - d).abs() + c.abs() {
                (bb, lambda - a)
            } else {
                (lambda - d, c)
            };
            let nrm = x0.hypot(x1);
            if nrm > 0.0 {
                let (cs, sn) = (x0 / nrm, x1 / nrm);
                let g = Matrix::from_row_slice(2, 2, &[cs, -sn, sn, cs]);
                apply_similarity(t, q, i, &g);
                t[(i + 1, i)] = 0.0;
            }
        }
        i += 2;
    }
}

/// Real Schur decomposition with real-eigenvalue 2×2 blocks split.
pub fn real_schur(a: &Matrix) -> RealSchur {
    assert!(a.is_square(), "real_schur needs a square matrix");
    let n = a.nrows();
    if n == 0 {
        return RealSchur {
            q: Matrix::zeros(0, 0),
            t: Matrix::zeros(0, 0),
        };
    }
    let (mut q, mut t) = Schur::new(a.clone()).unpack();
    split_real_pairs(&mut t, &mut q);
    for j in 0..n {
        for i in (j + 2)..n {
            t[(i, j)] = 0.0;
        }
    }
    RealSchur { q, t }
}

/// Solves the small dense equation `a x − x b = c` by Kronecker expansion.
fn small_sylvester_minus(a: &Matrix, b: &Matrix, c: &Matrix) -> Option<Matrix> {
    let (p, q) = c.shape();
    let mut k = Matrix::zeros(p * q, p * q);
    for j in 0..q {
        for i in 0..p {
            let row = j * p + i;
            for l in 0..p {
                k[(row, j * p + l)] += a[(i, l)];
            }
            for l in 0..q {
                k[(row, l * p + i)] -= b[(l, j)];
            }
        }
    }
    let rhs = nalgebra::DVector::from_iterator(p * q, c.iter().copied());
    let sol = k.lu().solve(&rhs)?;
    Some(Matrix::from_column_slice(p, q, sol.as_slice()))
}

/// Swaps the adjacent blocks `b1` (first) and `b2` in place.
fn swap_blocks(t: &mut Matrix, q: &mut Matrix, b1: Block, b2: Block) -> bool {
    let (i, p1, p2) = (b1.start, b1.size, b2.size);
    let a11 = t.view((i, i), (p1, p1)).into_owned();
    let a22 = t.view((i + p1, i + p1), (p2, p2)).into_owned();
    let a12 = t.view((i, i + p1), (p1, p2)).into_owned();
    let Some(x) = small_sylvester_minus(&a11, &a22, &a12) else {
        return false;
    };
    let k = p1 + p2;
    let mut basis = Matrix::zeros(k, p2);
    basis.view_mut((0, 0), (p1, p2)).copy_from(&(-x));
    basis.view_mut((p1, 0), (p2, p2)).fill_with_identity();
    let qr = basis.qr();
    let mut g = qr.q();
    // Complete to a full orthogonal basis of R^k.
    let full = Subspace::from_orthonormal(g.clone(), 1e-12).complement();
    g = crate::linalg_subspace::hcat(&g, full.basis());
    apply_similarity(t, q, i, &g);
    for r in (i + p2)..(i + k) {
        for c in i..(i + p2) {
            t[(r, c)] = 0.0;
        }
    }
    true
}

/// Reorders `s` so that blocks whose eigenvalue satisfies `select` come
/// first. Returns the number of leading rows/columns they occupy.
pub fn reorder(s: &mut RealSchur, select: impl Fn(f64, f64) -> bool) -> usize {
    let n = s.t.nrows();
    loop {
        let bl = blocks(&s.t);
        let mut swapped = false;
        for w in bl.windows(2) {
            let (b1, b2) = (w[0], w[1]);
            let e1 = block_eigenvalue(&s.t, b1);
            let e2 = block_eigenvalue(&s.t, b2);
            if !select(e1.0, e1.1) && select(e2.0, e2.1) && swap_blocks(&mut s.t, &mut s.q, b1, b2) {
                split_real_pairs(&mut s.t, &mut s.q);
                swapped = true;
                break;
            }
        }
        if !swapped {
            break;
        }
    }
    let mut k = 0;
    for b in blocks(&s.t) {
        let (re, im) = block_eigenvalue(&s.t, b);
        if !select(re, im) {
            break;
        }
        k += b.size;
    }
    debug_assert!(k <= n);
    k
}

/// Eigenvalues as (re, im) pairs, complex pairs listed twice.
pub fn eigenvalues(a: &Matrix) -> Vec<(f64, f64)> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let s = real_schur(a);
    let mut out = Vec::with_capacity(a.nrows());
    for b in blocks(&s.t) {
        let (re, im) = block_eigenvalue(&s.t, b);
        if b.size == 1 {
            out.push((re, 0.0));
        } else if im == 0.0 {
            let i = b.start;
            let other = s.t[(i, i)] + s.t[(i + 1, i + 1)] - re;
            out.push((re, 0.0));
            out.push((other, 0.0));
        } else {
            out.push((re, im));
            out.push((re, -im));
        }
    }
    out
}

/// Largest real part of the spectrum; −∞ for the empty matrix.
pub fn spectral_abscissa(a: &Matrix) -> f64 {
    eigenvalues(a)
        .into_iter()
        .map(|(re, _)| re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Solves `a x + x b = c` by Bartels–Stewart. Returns `None` when `a` and
/// `−b` share an eigenvalue numerically.
pub fn sylvester(a: &Matrix, b: &Matrix, c: &Matrix) -> Option<Matrix> {
    let (p, q) = c.shape();
    assert!(a.nrows() == p && b.nrows() == q);
    if p == 0 || q == 0 {
        return Some(Matrix::zeros(p, q));
    }
    let sa = real_schur(a);
    let sb = real_schur(b);
    let f = sa.q.transpose() * c * &sb.q;
    let ta = &sa.t;
    let tb = &sb.t;
    let ba = blocks(ta);
    let bb = blocks(tb);
    let mut y = Matrix::zeros(p, q);
    for kb in ba.iter().rev() {
        for lb in bb.iter() {
            let (k0, kp) = (kb.start, kb.size);
            let (l0, lq) = (lb.start, lb.size);
            let mut rhs = f.view((k0, l0), (kp, lq)).into_owned();
            let after = k0 + kp;
            if after < p {
                rhs -= ta.view((k0, after), (kp, p - after)) * y.view((after, l0), (p - after, lq));
            }
            if l0 > 0 {
                rhs -= y.view((k0, 0), (kp, l0)) * tb.view((0, l0), (l0, lq));
            }
            let akk = ta.view((k0, k0), (kp, kp)).into_owned();
            let bll = -tb.view((l0, l0), (lq, lq)).into_owned();
            let blk = small_sylvester_minus(&akk, &bll, &rhs)?;
            if blk.iter().any(|v| !v.is_finite()) {
                return None;
            }
            y.view_mut((k0, l0), (kp, lq)).copy_from(&blk);
        }
    }
    Some(&sa.q * y * sb.q.transpose())
}

/// Solves the continuous Lyapunov equation `aᵀx + x a + q = 0`.
pub fn lyapunov(a: &Matrix, q: &Matrix) -> Option<Matrix> {
    let x = sylvester(&a.transpose(), a, &(-q))?;
    Some((&x + x.transpose()) * 0.5)
}
