//! Dense complex helpers on top of nalgebra.
//!
//! Hermitian eigendecompositions and SVDs are delegated to faer: nalgebra's
//! complex QR iterations return wrong eigenvectors when the tridiagonal form
//! splits into blocks, which Gram matrices of discrete measures do routinely.
//!
//! Everything here returns results in a canonical order (descending
//! eigenvalues / singular values, fixed eigenvector phases) so that derived
//! bases are reproducible from run to run.

use faer::complex_native::c64;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> CMat {
    CMat::from_row_iterator(rows, cols, data.iter().map(|&x| c(x, 0.0)))
}

/// `(X + X*)/2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// `(X - X*)/(2i)`.
pub fn imaginary_part(m: &CMat) -> CMat {
    (m - m.adjoint()) * c(0.0, -0.5)
}

/// Sesquilinear pairing `(X h, g) = g* X h`.
pub fn form(m: &CMat, h: &CVec, g: &CVec) -> Complex64 {
    g.dotc(&(m * h))
}

fn to_faer(m: &CMat) -> faer::Mat<c64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| c64::from(m[(i, j)]))
}

fn from_faer(m: faer::MatRef<'_, c64>) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| Complex64::from(m.read(i, j)))
}

fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    to_faer(m).singular_values()
}

/// Largest singular value.
pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).iter().fold(0.0_f64, |a, &s| a.max(s))
}

/// 2-norm condition number; `inf` for singular input, `1` for the empty matrix.
pub fn condition_number(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let s = singular_values(m);
    let max = s.iter().fold(0.0_f64, |a, &x| a.max(x));
    let min = s.iter().fold(f64::INFINITY, |a, &x| a.min(x));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Rotates `v` so that its dominant entry is real and positive. Among entries
/// within a relative `1e-9` of the maximum modulus the lowest index wins.
pub fn normalize_phase(v: &mut CVec) {
    let max = v.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-9))
        .expect("nonempty");
    let phase = v[pivot].conj() / v[pivot].norm();
    v.apply(|z| *z *= phase);
}

/// Hermitian eigendecomposition with eigenvalues sorted in descending order
/// and phase-normalized eigenvector columns.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = to_faer(&hermitian_part(m)).selfadjoint_eigendecomposition(faer::Side::Lower);
    let raw: Vec<f64> = (0..n).map(|k| eig.s().column_vector().read(k).re).collect();
    let u = from_faer(eig.u());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        raw[b]
            .partial_cmp(&raw[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&k| raw[k]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col: CVec = u.column(src).into_owned();
        normalize_phase(&mut col);
        vectors.set_column(dst, &col);
    }
    (values, vectors)
}

/// Thin SVD with singular triplets in descending order.
pub struct SortedSvd {
    pub u: CMat,
    pub singular_values: Vec<f64>,
    pub v: CMat,
}

pub fn svd_sorted(m: &CMat) -> SortedSvd {
    let (r, c_) = m.shape();
    let k = r.min(c_);
    if k == 0 {
        return SortedSvd {
            u: CMat::zeros(r, 0),
            singular_values: Vec::new(),
            v: CMat::zeros(c_, 0),
        };
    }
    let svd = to_faer(m).thin_svd();
    let u = from_faer(svd.u());
    let v = from_faer(svd.v());
    let sigma: Vec<f64> = (0..k).map(|j| svd.s_diagonal().read(j).re).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        sigma[b]
            .partial_cmp(&sigma[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut su = CMat::zeros(r, k);
    let mut sv = CMat::zeros(c_, k);
    for (dst, &src) in order.iter().enumerate() {
        su.set_column(dst, &u.column(src));
        sv.set_column(dst, &v.column(src));
    }
    SortedSvd {
        u: su,
        singular_values: order.iter().map(|&k| sigma[k]).collect(),
        v: sv,
    }
}

/// Orthonormal basis of the column space, keeping singular values above
/// `rel_tol * sigma_max`.
pub fn range_basis(m: &CMat, rel_tol: f64) -> CMat {
    let svd = svd_sorted(m);
    let smax = svd.singular_values.first().copied().unwrap_or(0.0);
    let r = svd
        .singular_values
        .iter()
        .take_while(|&&s| smax > 0.0 && s > rel_tol * smax)
        .count();
    let mut basis = svd.u.columns(0, r).into_owned();
    for j in 0..r {
        let mut col: CVec = basis.column(j).into_owned();
        normalize_phase(&mut col);
        basis.set_column(j, &col);
    }
    basis
}

/// Orthonormal basis of the range of an orthogonal projector, from its
/// eigenvectors with eigenvalue above one half.
pub fn projector_basis(p: &CMat) -> CMat {
    let (vals, vecs) = hermitian_eigen(p);
    let r = vals.iter().take_while(|&&v| v > 0.5).count();
    vecs.columns(0, r).into_owned()
}

/// Moore-Penrose pseudo-inverse with an absolute singular value cutoff.
pub fn pinv_abs(m: &CMat, cutoff: f64) -> CMat {
    let svd = svd_sorted(m);
    let mut out = CMat::zeros(m.ncols(), m.nrows());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            let vk = svd.v.column(k);
            let uk = svd.u.column(k);
            out += (vk * uk.adjoint()).scale(1.0 / s);
        }
    }
    out
}

/// Solves `a x = b` with full pivoting after checking the 2-norm condition
/// number against `max_cond`.
pub fn solve_checked(a: &CMat, b: &CMat, what: &'static str, max_cond: f64) -> Result<CMat> {
    if a.nrows() == 0 {
        return Ok(CMat::zeros(0, b.ncols()));
    }
    let cond = condition_number(a);
    if !(cond < max_cond) {
        return Err(Error::Conditioning { what, cond });
    }
    a.clone()
        .full_piv_lu()
        .solve(b)
        .ok_or(Error::Conditioning { what, cond })
}

pub fn inverse_checked(a: &CMat, what: &'static str, max_cond: f64) -> Result<CMat> {
    solve_checked(a, &identity(a.nrows()), what, max_cond)
}

/// Smallest eigenvalue of the Hermitian part; `+inf` for the empty matrix.
pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigen(m).0.last().copied().unwrap_or(f64::INFINITY)
}

/// Largest entry modulus.
pub fn max_abs<R: nalgebra::Dim, C: nalgebra::Dim, S: nalgebra::RawStorage<Complex64, R, C>>(
    m: &nalgebra::Matrix<Complex64, R, C, S>,
) -> f64 {
    m.iter().fold(0.0_f64, |a, z| a.max(z.norm()))
}

/// Principal square root of a PSD Hermitian matrix (negative eigenvalues
/// clipped to zero).
pub fn psd_sqrt(m: &CMat) -> CMat {
    let (vals, vecs) = hermitian_eigen(m);
    let d = CVec::from_iterator(vals.len(), vals.iter().map(|&v| c(v.max(0.0).sqrt(), 0.0)));
    &vecs * CMat::from_diagonal(&d) * vecs.adjoint()
}
