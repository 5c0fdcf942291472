//! Small dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;
pub type Vector = DVector<C64>;

/// Relative threshold for rank decisions on singular values.
pub const RANK_TOL: f64 = 1e-8;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn zeros(r: usize, c: usize) -> Mat {
    Mat::zeros(r, c)
}

pub fn eye(n: usize) -> Mat {
    Mat::identity(n, n)
}

/// Largest singular value; zero for empty matrices.
pub fn spectral_norm(m: &Mat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Singular values in decreasing order.
pub fn singular_values(m: &Mat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Orthonormal basis (as columns) of the column space of `m`, discarding
/// singular values below `thr`.
pub fn column_space_with(m: &Mat, thr: f64) -> Mat {
    let n = m.nrows();
    if n == 0 || m.ncols() == 0 {
        return zeros(n, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > thr)
        .collect();
    let mut out = zeros(n, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &u.column(i));
    }
    out
}

/// Column space with the default relative threshold.
pub fn column_space(m: &Mat) -> Mat {
    let s = spectral_norm(m);
    column_space_with(m, RANK_TOL * s)
}

/// Orthonormal basis of `{x : m x = 0}` where singular values `≤ thr` count
/// as zero.
pub fn null_space_with(m: &Mat, thr: f64) -> Mat {
    let n = m.ncols();
    if n == 0 {
        return zeros(0, 0);
    }
    if m.nrows() == 0 {
        return eye(n);
    }
    // Pad to at least n rows so that the SVD returns a full right basis.
    let padded = if m.nrows() < n {
        let mut p = zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= thr)
        .collect();
    let mut out = zeros(n, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        let row = vt.row(i).adjoint();
        out.set_column(j, &row);
    }
    out
}

/// Null space with the default relative threshold.
pub fn null_space(m: &Mat) -> Mat {
    let s = spectral_norm(m);
    null_space_with(m, RANK_TOL * s)
}

/// Orthonormal basis of the orthogonal complement of the column span of an
/// orthonormal `q` inside `C^n`.
pub fn complement(q: &Mat) -> Mat {
    let n = q.nrows();
    if q.ncols() == 0 {
        return eye(n);
    }
    null_space_with(&q.adjoint(), 0.5)
}

pub fn rank(m: &Mat) -> usize {
    let s = singular_values(m);
    let Some(&top) = s.first() else { return 0 };
    s.iter().filter(|&&x| x > RANK_TOL * top && x > 0.0).count()
}

pub fn hermitize(m: &Mat) -> Mat {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Eigenvalues of a Hermitian matrix in increasing order.
pub fn hermitian_eigenvalues(m: &Mat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut e: Vec<f64> = hermitize(m).symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(|a, b| a.total_cmp(b));
    e
}

/// Eigen-decomposition of a Hermitian matrix: eigenvalues increasing, with
/// eigenvectors as matching columns.
pub fn hermitian_eigen(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let eig = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Eigenvalues of a general complex square matrix via the Schur form.
pub fn eigenvalues(m: &Mat) -> Vec<C64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let t = nalgebra::linalg::Schur::new(m.clone()).unpack().1;
    (0..m.nrows()).map(|i| t[(i, i)]).collect()
}

/// `min eig(B) ≥ -tol·‖B‖`.
pub fn is_psd(b: &Mat, tol: f64) -> bool {
    if b.nrows() == 0 {
        return true;
    }
    let scale = spectral_norm(b);
    hermitian_eigenvalues(b)
        .first()
        .is_none_or(|&l| l >= -tol * scale)
}

/// Block-diagonal matrix from square or rectangular blocks.
pub fn block_diag(blocks: &[&Mat]) -> Mat {
    let r: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cc: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(r, cc);
    let (mut i, mut j) = (0, 0);
    for b in blocks {
        out.view_mut((i, j), (b.nrows(), b.ncols())).copy_from(b);
        i += b.nrows();
        j += b.ncols();
    }
    out
}

/// Stacks column vectors into a matrix with `n` rows.
pub fn columns(n: usize, vs: &[Vector]) -> Mat {
    let mut out = zeros(n, vs.len());
    for (j, v) in vs.iter().enumerate() {
        out.set_column(j, v);
    }
    out
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

/// Matrix with independent standard complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, r: usize, cols: usize) -> Mat {
    Mat::from_fn(r, cols, |_, _| random_complex(rng))
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| random_complex(rng))
}

/// Haar-like random unitary: QR of a Gaussian matrix with phases fixed.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Mat {
    if n == 0 {
        return zeros(0, 0);
    }
    let qr = random_matrix(rng, n, n).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            let col = q.column(j) * phase;
            q.set_column(j, &col);
        }
    }
    q
}

/// Maximum absolute entry difference; shapes must agree.
pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
