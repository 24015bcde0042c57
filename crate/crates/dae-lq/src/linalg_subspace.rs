//! Rank-revealing subspace algebra on dense real matrices.
//!
//! Every basis is produced from a singular value decomposition, so results
//! are orthonormal and deterministic. Tolerances passed to [`rank`],
//! [`pinv`], [`image`] and [`kernel`] are relative to the largest singular
//! value of the matrix at hand. The geometric operations ([`preimage`],
//! [`intersect`]) scale their tolerance by the norm of the unprojected data
//! so that exact-zero products do not get promoted to full rank.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Largest principal angle tolerated by [`Subspace::equals`].
pub const SUBSPACE_EQ_TOL: f64 = 1e-8;

/// Default relative rank tolerance `max(rows, cols) * eps`.
pub fn default_tol(m: &Matrix) -> f64 {
    m.nrows().max(m.ncols()).max(1) as f64 * f64::EPSILON
}

/// Rejects matrices holding NaN or infinite entries.
pub fn check_finite(m: &Matrix) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Builds a matrix from row vectors, checking shape and finiteness.
pub fn from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::Shape("ragged rows".into()));
    }
    let m = Matrix::from_fn(r, c, |i, j| rows[i][j]);
    check_finite(&m)?;
    Ok(m)
}

fn to_faer(m: &Matrix) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Indices that sort `sigma` in descending order.
fn descending(sigma: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..sigma.len()).collect();
    idx.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
    idx
}

/// Singular values in descending order together with the full orthogonal
/// right factor (n×n). Values beyond `min(p, n)` are exact zeros.
fn right_svd(m: &Matrix) -> (Vec<f64>, Matrix) {
    let (p, n) = m.shape();
    if n == 0 {
        return (Vec::new(), Matrix::zeros(0, 0));
    }
    if p == 0 {
        return (vec![0.0; n], Matrix::identity(n, n));
    }
    // faer's bidiagonal SVD stays accurate on clustered singular values,
    // where nalgebra's implicit-shift iteration can return a factorization
    // that does not reproduce the input.
    let svd = to_faer(m).svd().expect("SVD converges on finite input");
    let s = svd.S();
    let mut raw = vec![0.0; n];
    for (k, r) in raw.iter_mut().enumerate().take(p.min(n)) {
        *r = s[k];
    }
    let idx = descending(&raw);
    let v = svd.V();
    let sigma = idx.iter().map(|&i| raw[i]).collect();
    (sigma, Matrix::from_fn(n, n, |r, c| v[(r, idx[c])]))
}

/// Thin SVD `m = U diag(σ) Vᵀ` with columns sorted by descending
/// singular value.
pub fn thin_svd(m: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let (p, n) = m.shape();
    let k = p.min(n);
    if k == 0 {
        return (Matrix::zeros(p, 0), Vec::new(), Matrix::zeros(n, 0));
    }
    let svd = to_faer(m).thin_svd().expect("SVD converges on finite input");
    let raw: Vec<f64> = (0..k).map(|i| svd.S()[i]).collect();
    let idx = descending(&raw);
    let (u, v) = (svd.U(), svd.V());
    let sigma = idx.iter().map(|&i| raw[i]).collect();
    let us = Matrix::from_fn(p, k, |r, c| u[(r, idx[c])]);
    let vs = Matrix::from_fn(n, k, |r, c| v[(r, idx[c])]);
    (us, sigma, vs)
}

/// Singular values of `m` in descending order.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    thin_svd(m).1
}

/// Spectral norm.
pub fn norm2(m: &Matrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

fn count_above(sigma: &[f64], threshold: f64) -> usize {
    sigma.iter().filter(|&&s| s > threshold).count()
}

fn relative_threshold(sigma: &[f64], tol: f64) -> f64 {
    let smax = sigma.first().copied().unwrap_or(0.0);
    if smax > 0.0 {
        tol * smax
    } else {
        tol
    }
}

/// Numerical rank: singular values above `tol * sigma_max`.
pub fn rank(m: &Matrix, tol: f64) -> usize {
    let sigma = singular_values(m);
    count_above(&sigma, relative_threshold(&sigma, tol))
}

/// Numerical rank against an absolute singular value threshold.
pub fn rank_abs(m: &Matrix, threshold: f64) -> usize {
    count_above(&singular_values(m), threshold)
}

/// Moore–Penrose pseudoinverse with relative cutoff `tol`.
pub fn pinv(m: &Matrix, tol: f64) -> Matrix {
    let (u, sigma, v) = thin_svd(m);
    let thr = relative_threshold(&sigma, tol);
    let mut out = Matrix::zeros(m.ncols(), m.nrows());
    for (k, &s) in sigma.iter().enumerate() {
        if s > thr {
            out += v.column(k) * u.column(k).transpose() / s;
        }
    }
    out
}

/// Column space with a relative tolerance.
pub fn image(m: &Matrix, tol: f64) -> Subspace {
    let (u, sigma, _) = thin_svd(m);
    image_from(u, &sigma, relative_threshold(&sigma, tol), m.nrows(), tol)
}

/// Column space against an absolute singular value threshold.
pub fn image_abs(m: &Matrix, threshold: f64, tol: f64) -> Subspace {
    let (u, sigma, _) = thin_svd(m);
    image_from(u, &sigma, threshold, m.nrows(), tol)
}

fn image_from(u: Matrix, sigma: &[f64], thr: f64, ambient: usize, tol: f64) -> Subspace {
    let r = count_above(sigma, thr);
    Subspace {
        basis: u.columns(0, r).into_owned(),
        ambient,
        tol,
    }
}

/// Null space with a relative tolerance.
pub fn kernel(m: &Matrix, tol: f64) -> Subspace {
    let (sigma, v) = right_svd(m);
    let thr = relative_threshold(&sigma, tol);
    kernel_from(&sigma, v, thr, m.ncols(), tol)
}

/// Null space against an absolute singular value threshold.
pub fn kernel_abs(m: &Matrix, threshold: f64, tol: f64) -> Subspace {
    let (sigma, v) = right_svd(m);
    kernel_from(&sigma, v, threshold, m.ncols(), tol)
}

fn kernel_from(sigma: &[f64], v: Matrix, thr: f64, n: usize, tol: f64) -> Subspace {
    // Only the first min(p, n) singular values can be nonzero; right_svd
    // pads the rest with exact zeros.
    let r = count_above(sigma, thr);
    Subspace {
        basis: v.columns(r, n - r).into_owned(),
        ambient: n,
        tol,
    }
}

/// Linear subspace of R^n held as an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: Matrix,
    ambient: usize,
    tol: f64,
}

impl Subspace {
    /// The subspace {0} of R^n.
    pub fn zero(ambient: usize, tol: f64) -> Self {
        Self {
            basis: Matrix::zeros(ambient, 0),
            ambient,
            tol,
        }
    }

    /// All of R^n with the canonical basis.
    pub fn full(ambient: usize, tol: f64) -> Self {
        Self {
            basis: Matrix::identity(ambient, ambient),
            ambient,
            tol,
        }
    }

    /// Span of arbitrary columns, re-orthonormalized.
    pub fn span(columns: &Matrix, tol: f64) -> Self {
        image(columns, tol)
    }

    /// Wraps a basis that is already orthonormal.
    pub fn from_orthonormal(basis: Matrix, tol: f64) -> Self {
        let ambient = basis.nrows();
        Self {
            basis,
            ambient,
            tol,
        }
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    /// Orthogonal projector B·Bᵀ.
    pub fn projector(&self) -> Matrix {
        &self.basis * self.basis.transpose()
    }

    /// Orthonormal basis of the orthogonal complement.
    pub fn complement(&self) -> Subspace {
        if self.dim() == 0 {
            return Subspace::full(self.ambient, self.tol);
        }
        let (_, v) = right_svd(&self.basis.transpose());
        let d = self.dim();
        Subspace {
            basis: v.columns(d, self.ambient - d).into_owned(),
            ambient: self.ambient,
            tol: self.tol,
        }
    }

    /// Norm of the component of `w` orthogonal to the subspace.
    pub fn distance(&self, w: &Vector) -> f64 {
        let coeff = self.basis.transpose() * w;
        (w - &self.basis * coeff).norm()
    }

    /// Membership test `‖(I − BBᵀ)w‖ ≤ tol·max(1, ‖w‖)`.
    pub fn contains_vector(&self, w: &Vector, tol: f64) -> bool {
        self.distance(w) <= tol * w.norm().max(1.0)
    }

    /// Containment of another subspace, tested per basis vector.
    pub fn contains(&self, other: &Subspace, tol: f64) -> bool {
        other.ambient == self.ambient
            && other
                .basis
                .column_iter()
                .all(|c| self.distance(&c.into_owned()) <= tol)
    }

    /// Mutual containment within [`SUBSPACE_EQ_TOL`].
    pub fn equals(&self, other: &Subspace) -> bool {
        self.equals_within(other, SUBSPACE_EQ_TOL)
    }

    pub fn equals_within(&self, other: &Subspace, tol: f64) -> bool {
        self.dim() == other.dim() && self.contains(other, tol) && other.contains(self, tol)
    }

    /// Sine of the largest principal angle between equal-dimension subspaces.
    pub fn gap(&self, other: &Subspace) -> f64 {
        let a = other
            .basis
            .column_iter()
            .map(|c| self.distance(&c.into_owned()))
            .fold(0.0, f64::max);
        let b = self
            .basis
            .column_iter()
            .map(|c| other.distance(&c.into_owned()))
            .fold(0.0, f64::max);
        a.max(b)
    }
}

fn same_ambient(u: &Subspace, w: &Subspace) -> Result<()> {
    if u.ambient != w.ambient {
        return Err(Error::AmbientMismatch(u.ambient, w.ambient));
    }
    Ok(())
}

/// U + W.
pub fn sum(u: &Subspace, w: &Subspace) -> Result<Subspace> {
    same_ambient(u, w)?;
    let tol = u.tol.max(w.tol);
    if u.dim() + w.dim() == 0 {
        return Ok(Subspace::zero(u.ambient, tol));
    }
    let mut cat = Matrix::zeros(u.ambient, u.dim() + w.dim());
    cat.columns_mut(0, u.dim()).copy_from(&u.basis);
    cat.columns_mut(u.dim(), w.dim()).copy_from(&w.basis);
    Ok(image_abs(&cat, tol, tol))
}

/// U ∩ W, from the null space of `[B_U, −B_W]`.
pub fn intersect(u: &Subspace, w: &Subspace) -> Result<Subspace> {
    same_ambient(u, w)?;
    let tol = u.tol.max(w.tol);
    if u.dim() == 0 || w.dim() == 0 {
        return Ok(Subspace::zero(u.ambient, tol));
    }
    let mut cat = Matrix::zeros(u.ambient, u.dim() + w.dim());
    cat.columns_mut(0, u.dim()).copy_from(&u.basis);
    cat.columns_mut(u.dim(), w.dim()).copy_from(&(-&w.basis));
    let null = kernel_abs(&cat, tol, tol);
    let coeff = null.basis.rows(0, u.dim()).into_owned();
    // Each null vector has unit norm and splits evenly between the two
    // halves, so the U-part has norm about 1/sqrt(2).
    Ok(image_abs(&(&u.basis * coeff), tol, tol))
}

/// {x : Mx ∈ W}. The tolerance is taken relative to ‖M‖.
pub fn preimage(m: &Matrix, w: &Subspace, tol: f64) -> Result<Subspace> {
    if m.nrows() != w.ambient {
        return Err(Error::Shape(format!(
            "map has {} rows but subspace lives in R^{}",
            m.nrows(),
            w.ambient
        )));
    }
    let n = m.ncols();
    if w.is_full() {
        return Ok(Subspace::full(n, tol));
    }
    let perp = w.complement();
    let projected = perp.basis.transpose() * m;
    let scale = norm2(m).max(1.0);
    Ok(kernel_abs(&projected, tol * scale, tol))
}

/// Horizontal concatenation `[a, b]`.
pub fn hcat(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.nrows(), b.nrows(), "hcat row mismatch");
    let mut out = Matrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// Vertical concatenation `[a; b]`.
pub fn vcat(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.ncols(), b.ncols(), "vcat column mismatch");
    let mut out = Matrix::zeros(a.nrows() + b.nrows(), a.ncols());
    out.rows_mut(0, a.nrows()).copy_from(a);
    out.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    out
}

/// Block diagonal `diag(a, b)`.
pub fn blkdiag(a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}

/// Formats a decimal with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serializes to the text format: a `rows cols` header, then one
/// whitespace-separated line per row.
pub fn write_matrix(m: &Matrix) -> String {
    let mut s = format!("{} {}\n", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| fmt_f64(m[(i, j)])).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

/// Parses the text format written by [`write_matrix`].
pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("missing header".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header token {t:?}"))))
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Parse("header must be `rows cols`".into()));
    };
    let mut data = Vec::with_capacity(rows);
    for i in 0..rows {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing row {i}")))?;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad number {t:?}"))))
            .collect::<Result<_>>()?;
        if row.len() != cols {
            return Err(Error::Parse(format!(
                "row {i} has {} entries, expected {cols}",
                row.len()
            )));
        }
        data.push(row);
    }
    if lines.next().is_some() {
        return Err(Error::Parse("trailing rows".into()));
    }
    if rows == 0 {
        return Ok(Matrix::zeros(0, cols));
    }
    from_rows(&data)
}
