//! Dense complex linear-algebra helpers on top of `faer`.

use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

pub type CMat = Mat<Complex64>;

/// Relative singular-value threshold used for numerical rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Largest condition number accepted for the small per-slot and per-receiver solves.
pub const MAX_CONDITION: f64 = 1e12;

pub fn zeros(rows: usize, cols: usize) -> CMat {
    Mat::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Singular values in non-increasing order. Empty matrices have none.
pub fn singular_values(a: MatRef<'_, Complex64>) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    let mut sv = a
        .singular_values()
        .map_err(|e| Error::Numerical(format!("singular values: {e:?}")))?;
    sv.sort_by(|x, y| y.total_cmp(x));
    Ok(sv)
}

/// Count of singular values above `tol * sigma_max * max(rows, cols)`.
pub fn rank_from_singular_values(sv: &[f64], rows: usize, cols: usize, tol: f64) -> usize {
    let Some(&smax) = sv.first() else { return 0 };
    if smax == 0.0 {
        return 0;
    }
    let cutoff = tol * smax * rows.max(cols) as f64;
    sv.iter().filter(|&&s| s > cutoff).count()
}

pub fn numeric_rank(a: MatRef<'_, Complex64>, tol: f64) -> Result<usize> {
    let sv = singular_values(a)?;
    Ok(rank_from_singular_values(&sv, a.nrows(), a.ncols(), tol))
}

/// Ratio of largest to smallest singular value of a square matrix.
pub fn condition_number(a: MatRef<'_, Complex64>) -> Result<f64> {
    let sv = singular_values(a)?;
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => Ok(hi / lo),
        (Some(_), Some(_)) => Ok(f64::INFINITY),
        _ => Ok(1.0),
    }
}

/// Solves `a x = b` for square `a`, rejecting ill-conditioned systems.
pub fn solve(a: MatRef<'_, Complex64>, b: MatRef<'_, Complex64>, context: &str) -> Result<CMat> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() {
        return Err(Error::Shape(format!(
            "{context}: cannot solve {}x{} system with {} right-hand rows",
            a.nrows(),
            a.ncols(),
            b.nrows()
        )));
    }
    let cond = condition_number(a)?;
    if !(cond <= MAX_CONDITION) {
        return Err(Error::IllConditioned {
            context: context.to_string(),
            cond,
            limit: MAX_CONDITION,
        });
    }
    Ok(a.partial_piv_lu().solve(b))
}

pub fn hstack(blocks: &[MatRef<'_, Complex64>]) -> Result<CMat> {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    if blocks.iter().any(|b| b.nrows() != rows) {
        return Err(Error::Shape("hstack: row counts differ".into()));
    }
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut c0 = 0;
    for b in blocks {
        out.as_mut()
            .submatrix_mut(0, c0, rows, b.ncols())
            .copy_from(b);
        c0 += b.ncols();
    }
    Ok(out)
}

pub fn vstack(blocks: &[MatRef<'_, Complex64>]) -> Result<CMat> {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    if blocks.iter().any(|b| b.ncols() != cols) {
        return Err(Error::Shape("vstack: column counts differ".into()));
    }
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut r0 = 0;
    for b in blocks {
        out.as_mut()
            .submatrix_mut(r0, 0, b.nrows(), cols)
            .copy_from(b);
        r0 += b.nrows();
    }
    Ok(out)
}

/// Block-diagonal matrix with the given blocks on its diagonal.
pub fn block_diag(blocks: &[MatRef<'_, Complex64>]) -> CMat {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        out.as_mut()
            .submatrix_mut(r0, c0, b.nrows(), b.ncols())
            .copy_from(b);
        r0 += b.nrows();
        c0 += b.ncols();
    }
    out
}

pub fn frobenius(a: MatRef<'_, Complex64>) -> f64 {
    a.norm_l2()
}

pub fn column_norm(a: MatRef<'_, Complex64>, j: usize) -> f64 {
    a.col(j).norm_l2()
}

/// Scales every nonzero column to unit Euclidean norm.
pub fn normalize_columns(a: &mut CMat) {
    for j in 0..a.ncols() {
        let n = column_norm(a.as_ref(), j);
        if n > 0.0 {
            let inv = 1.0 / n;
            for i in 0..a.nrows() {
                a[(i, j)] *= inv;
            }
        }
    }
}

/// Orthonormal basis of the column space and the numerical rank.
pub fn column_space(a: MatRef<'_, Complex64>, tol: f64) -> Result<CMat> {
    if a.ncols() == 0 || a.nrows() == 0 {
        return Ok(zeros(a.nrows(), 0));
    }
    let svd = a
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("svd: {e:?}")))?;
    let sv = svd_values(svd.S().column_vector().iter().copied());
    let r = rank_from_singular_values(&sv, a.nrows(), a.ncols(), tol);
    Ok(svd.U().subcols(0, r).to_owned())
}

/// Orthonormal basis of the orthogonal complement of the column space of `a`.
///
/// Returns the basis together with the numerical rank of `a`.
pub fn complement_space(a: MatRef<'_, Complex64>, tol: f64) -> Result<(CMat, usize)> {
    let rows = a.nrows();
    if a.ncols() == 0 {
        return Ok((identity(rows), 0));
    }
    let svd = a
        .svd()
        .map_err(|e| Error::Numerical(format!("svd: {e:?}")))?;
    let sv = svd_values(svd.S().column_vector().iter().copied());
    let r = rank_from_singular_values(&sv, rows, a.ncols(), tol);
    Ok((svd.U().subcols(r, rows - r).to_owned(), r))
}

fn svd_values(it: impl Iterator<Item = Complex64>) -> Vec<f64> {
    it.map(|z| z.re).collect()
}

/// Moore-Penrose pseudo-inverse for a full-column-rank matrix.
pub fn pinv(a: MatRef<'_, Complex64>, tol: f64) -> Result<CMat> {
    let svd = a
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("svd: {e:?}")))?;
    let sv = svd_values(svd.S().column_vector().iter().copied());
    let r = rank_from_singular_values(&sv, a.nrows(), a.ncols(), tol);
    if r < a.ncols() {
        return Err(Error::RankDeficient(format!(
            "pseudo-inverse of {}x{} matrix with rank {r}",
            a.nrows(),
            a.ncols()
        )));
    }
    let v = svd.V();
    let u = svd.U();
    Ok(Mat::from_fn(a.ncols(), a.nrows(), |i, j| {
        (0..r)
            .map(|k| v[(i, k)] * u[(j, k)].conj() / sv[k])
            .sum::<Complex64>()
    }))
}

/// Sines of the principal angles between the column spaces of `a` and `b`.
///
/// Both inputs are reduced to orthonormal bases first; the result has one entry
/// per basis vector of `b`, sorted in non-increasing order.
pub fn principal_angle_sines(
    a: MatRef<'_, Complex64>,
    b: MatRef<'_, Complex64>,
    tol: f64,
) -> Result<Vec<f64>> {
    if a.nrows() != b.nrows() {
        return Err(Error::Shape("principal angles: row counts differ".into()));
    }
    let qa = column_space(a, tol)?;
    let qb = column_space(b, tol)?;
    let proj = &qa * (qa.adjoint() * &qb);
    let resid = &qb - &proj;
    singular_values(resid.as_ref())
}

/// True when `a` and `b` span the same subspace within `angle_tol`.
pub fn same_span(
    a: MatRef<'_, Complex64>,
    b: MatRef<'_, Complex64>,
    rank_tol: f64,
    angle_tol: f64,
) -> Result<bool> {
    let ra = numeric_rank(a, rank_tol)?;
    let rb = numeric_rank(b, rank_tol)?;
    if ra != rb {
        return Ok(false);
    }
    let sines = principal_angle_sines(a, b, rank_tol)?;
    Ok(sines.iter().all(|&s| s < angle_tol))
}

/// Draws a matrix with entries `r e^{i theta}`, `r` uniform in `[lo, hi]`.
pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, lo: f64, hi: f64) -> CMat {
    let mut m = zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = random_entry(rng, lo, hi);
        }
    }
    m
}

pub fn random_entry<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> Complex64 {
    let r = lo + (hi - lo) * rng.random::<f64>();
    let theta = std::f64::consts::TAU * rng.random::<f64>();
    Complex64::from_polar(r, theta)
}
