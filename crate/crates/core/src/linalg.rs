//! Dense matrices over a generic scalar, orthonormalization, frame
//! completion, small linear solvers and a cyclic Jacobi eigensolver.
//!
//! Everything here is deliberately small and allocation-happy: the matrices
//! appearing in the bundle calculus are at most `n x n` with `n <= 8`, so
//! clarity and determinism win over throughput.  The kernels are generic over
//! a [`Scalar`] so that the same Gram–Schmidt code produces plain frames (over
//! `Complex64`) and frame jets (over [`crate::jet::Jet`]).

use crate::tol::DEGENERATE_TOL;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use std::ops::{Add, Div, Index, IndexMut, Mul, Neg, Sub};

pub type C64 = Complex64;

/// Scalar the dense kernels are generic over.
///
/// `value` exposes the underlying complex number (the jet center for jets);
/// pivoting and rank decisions are always taken on values so that the same
/// pivot sequence is chosen whether or not derivatives ride along.
pub trait Scalar:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_c64(c: C64) -> Self;
    /// Complex conjugate.  For jets this is the Wirtinger-aware conjugate
    /// that also swaps holomorphic and antiholomorphic derivative slots.
    fn conj(&self) -> Self;
    /// Principal square root (arguments are real-positive in practice).
    fn sqrt(&self) -> Self;
    /// Underlying complex value.
    fn value(&self) -> C64;

    fn from_re(x: f64) -> Self {
        Self::from_c64(C64::new(x, 0.0))
    }
}

impl Scalar for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn from_c64(c: C64) -> Self {
        c
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn sqrt(&self) -> Self {
        Complex64::sqrt(*self)
    }
    fn value(&self) -> C64 {
        *self
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_c64(c: C64) -> Self {
        c.re
    }
    fn conj(&self) -> Self {
        *self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn value(&self) -> C64 {
        C64::new(*self, 0.0)
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type CMat = Mat<C64>;
pub type RMat = Mat<f64>;

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn map<U: Scalar>(&self, mut f: impl FnMut(&T) -> U) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| f(x)).collect(),
        }
    }

    /// Complex values of every entry (jet centers for jets).
    pub fn values(&self) -> CMat {
        self.map(|x| x.value())
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn set_col(&mut self, j: usize, col: &[T]) {
        assert_eq!(col.len(), self.rows);
        for i in 0..self.rows {
            self[(i, j)] = col[i].clone();
        }
    }

    pub fn mul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out: Mat<T> = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)].clone();
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)].clone() + a.clone() * other[(k, j)].clone();
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn sub(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }

    pub fn neg(&self) -> Mat<T> {
        self.map(|x| -x.clone())
    }

    pub fn scale(&self, s: T) -> Mat<T> {
        self.map(|x| x.clone() * s.clone())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Mat<T> {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Mat<T> {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn conj_entries(&self) -> Mat<T> {
        self.map(|x| x.conj())
    }

    pub fn trace(&self) -> T {
        assert_eq!(self.rows, self.cols, "trace of non-square matrix");
        let mut t = T::zero();
        for i in 0..self.rows {
            t = t + self[(i, i)].clone();
        }
        t
    }

    /// Frobenius pairing `sum_ij self_ij * conj(other_ij)`, linear in `self`.
    pub fn frob_inner(&self, other: &Mat<T>) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut s = T::zero();
        for (a, b) in self.data.iter().zip(&other.data) {
            s = s + a.clone() * b.conj();
        }
        s
    }

    /// Squared Frobenius norm as a scalar (real-valued; a real-centered jet
    /// when `T` is a jet).
    pub fn norm_sq(&self) -> T {
        self.frob_inner(self)
    }

    /// Frobenius norm of the complex values.
    pub fn fnorm(&self) -> f64 {
        self.data.iter().map(|x| x.value().norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute value of any entry.
    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .map(|x| x.value().norm())
            .fold(0.0, f64::max)
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.rows, other.rows);
        Mat::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                other[(i, j - self.cols)].clone()
            }
        })
    }

    /// Columns `lo..hi` as a new matrix.
    pub fn col_block(&self, lo: usize, hi: usize) -> Mat<T> {
        assert!(lo <= hi && hi <= self.cols);
        Mat::from_fn(self.rows, hi - lo, |i, j| self[(i, lo + j)].clone())
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl CMat {
    /// Deviation from unitarity `|| A^H A - I ||_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let g = self.adjoint().mul(self);
        g.sub(&Mat::identity(self.cols)).fnorm()
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    // Hermitian inner product, linear in `a`, conjugate-linear in `b`.
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        s = s + x.clone() * y.conj();
    }
    s
}

/// Modified Gram–Schmidt orthonormalization of the columns, with a second
/// re-orthogonalization pass for stability.
///
/// The implied triangular factor has a positive real diagonal (columns are
/// normalized by their real residual norms and never re-phased), which makes
/// the result deterministic and smooth in the input wherever the input has
/// full column rank.  A residual column whose norm falls below
/// `DEGENERATE_TOL` times its original size signals rank deficiency.
pub fn orthonormalize<T: Scalar>(a: &Mat<T>) -> Result<Mat<T>> {
    let (n, k) = (a.rows(), a.cols());
    if k > n {
        return Err(Error::DimensionMismatch(format!(
            "cannot orthonormalize {k} columns in dimension {n}"
        )));
    }
    let mut q: Vec<Vec<T>> = Vec::with_capacity(k);
    for j in 0..k {
        let mut v = a.col(j);
        let orig = dot(&v, &v).value().re.sqrt();
        for _pass in 0..2 {
            for u in &q {
                let c = dot(&v, u);
                for i in 0..n {
                    v[i] = v[i].clone() - c.clone() * u[i].clone();
                }
            }
        }
        let nrm_sq = dot(&v, &v);
        let nrm_val = nrm_sq.value().re.sqrt();
        if nrm_val < DEGENERATE_TOL * orig.max(1.0) {
            return Err(Error::DegenerateFrame {
                col: j,
                norm: nrm_val,
            });
        }
        let nrm = nrm_sq.sqrt();
        for x in v.iter_mut() {
            *x = x.clone() / nrm.clone();
        }
        q.push(v);
    }
    let mut out = Mat::zeros(n, k);
    for (j, col) in q.iter().enumerate() {
        out.set_col(j, col);
    }
    Ok(out)
}

/// Completes an orthonormal `n x p` frame to a full unitary basis, returning
/// the `n x (n-p)` complement.
///
/// Candidates are the standard basis vectors; at each step the candidate with
/// the largest residual is orthonormalized in (first maximum wins on ties), so
/// the result is deterministic.  Use [`complete_frame_seeded`] when the
/// complement must vary smoothly under perturbations of the input.
pub fn complete_frame(fs: &CMat) -> Result<CMat> {
    let (n, p) = (fs.rows(), fs.cols());
    let q = n - p;
    let mut basis: Vec<Vec<C64>> = (0..p).map(|j| fs.col(j)).collect();
    let mut out = Mat::zeros(n, q);
    let mut used = vec![false; n];
    for slot in 0..q {
        let mut best: Option<(usize, f64, Vec<C64>)> = None;
        for cand in 0..n {
            if used[cand] {
                continue;
            }
            let mut v: Vec<C64> = (0..n)
                .map(|i| if i == cand { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
                .collect();
            for u in &basis {
                let c = dot(&v, u);
                for i in 0..n {
                    v[i] -= c * u[i];
                }
            }
            let nrm = dot(&v, &v).re.sqrt();
            if best.as_ref().map_or(true, |(_, b, _)| nrm > *b) {
                best = Some((cand, nrm, v));
            }
        }
        let (cand, nrm, mut v) = best.ok_or_else(|| Error::DegenerateFrame {
            col: slot,
            norm: 0.0,
        })?;
        if nrm < DEGENERATE_TOL {
            return Err(Error::DegenerateFrame { col: slot, norm: nrm });
        }
        // Second pass for orthogonality at machine precision.
        for u in &basis {
            let c = dot(&v, u);
            for i in 0..n {
                v[i] -= c * u[i];
            }
        }
        let nrm = dot(&v, &v).re.sqrt();
        for x in v.iter_mut() {
            *x /= nrm;
        }
        used[cand] = true;
        out.set_col(slot, &v);
        basis.push(v);
    }
    Ok(out)
}

/// Completes a frame using the columns of `seed` as ordered candidates.
///
/// `seed` must already be (numerically) a complement of the values of `fs`:
/// its columns are orthonormalized against `fs` in order without pivoting, so
/// the result depends smoothly on `fs` and reduces to `seed` when `fs` has
/// constant-coefficient columns orthogonal to it.
pub fn complete_frame_seeded<T: Scalar>(fs: &Mat<T>, seed: &CMat) -> Result<Mat<T>> {
    let n = fs.rows();
    assert_eq!(seed.rows(), n);
    let lifted = seed.map(|c| T::from_c64(*c));
    orthonormalize(&fs.hcat(&lifted)).map(|full| full.col_block(fs.cols(), fs.cols() + seed.cols()))
}

/// Solves `R X = B` for upper-triangular `R` by back substitution.
pub fn solve_upper_triangular<T: Scalar>(r: &Mat<T>, b: &Mat<T>) -> Result<Mat<T>> {
    let k = r.rows();
    assert_eq!(r.cols(), k);
    assert_eq!(b.rows(), k);
    let mut x = b.clone();
    for col in 0..b.cols() {
        for i in (0..k).rev() {
            let mut acc = x[(i, col)].clone();
            for j in i + 1..k {
                acc = acc - r[(i, j)].clone() * x[(j, col)].clone();
            }
            let piv = r[(i, i)].clone();
            if piv.value().norm() < 1e-14 {
                return Err(Error::SingularSystem(piv.value().norm()));
            }
            x[(i, col)] = acc / piv;
        }
    }
    Ok(x)
}

/// Solves the square system `A X = B` by Gaussian elimination with partial
/// pivoting.
pub fn solve_general(a: &CMat, b: &CMat) -> Result<CMat> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    assert_eq!(b.rows(), n);
    let mut m = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let (piv_row, piv_norm) = (col..n)
            .map(|r| (r, m[(r, col)].norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if piv_norm < 1e-13 {
            return Err(Error::SingularSystem(piv_norm));
        }
        if piv_row != col {
            for j in 0..n {
                let tmp = m[(col, j)];
                m[(col, j)] = m[(piv_row, j)];
                m[(piv_row, j)] = tmp;
            }
            for j in 0..x.cols() {
                let tmp = x[(col, j)];
                x[(col, j)] = x[(piv_row, j)];
                x[(piv_row, j)] = tmp;
            }
        }
        let piv = m[(col, col)];
        for r in col + 1..n {
            let f = m[(r, col)] / piv;
            if f.norm() == 0.0 {
                continue;
            }
            for j in col..n {
                let v = m[(col, j)];
                m[(r, j)] -= f * v;
            }
            for j in 0..x.cols() {
                let v = x[(col, j)];
                x[(r, j)] -= f * v;
            }
        }
    }
    // Back substitution.
    for col in 0..x.cols() {
        for i in (0..n).rev() {
            let mut acc = x[(i, col)];
            for j in i + 1..n {
                acc -= m[(i, j)] * x[(j, col)];
            }
            x[(i, col)] = acc / m[(i, i)];
        }
    }
    Ok(x)
}

/// Determinant of a square complex matrix (Gaussian elimination).
pub fn det(a: &CMat) -> C64 {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    let mut m = a.clone();
    let mut d = C64::new(1.0, 0.0);
    for col in 0..n {
        let (piv_row, piv_norm) = (col..n)
            .map(|r| (r, m[(r, col)].norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if piv_norm == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if piv_row != col {
            d = -d;
            for j in 0..n {
                let tmp = m[(col, j)];
                m[(col, j)] = m[(piv_row, j)];
                m[(piv_row, j)] = tmp;
            }
        }
        let piv = m[(col, col)];
        d *= piv;
        for r in col + 1..n {
            let f = m[(r, col)] / piv;
            for j in col..n {
                let v = m[(col, j)];
                m[(r, j)] -= f * v;
            }
        }
    }
    d
}

/// All eigenpairs of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order with the matching orthonormal
/// eigenvectors as columns.  Input asymmetry beyond `sym_tol` is rejected so
/// that silent convention errors (passing a non-symmetrized operator) surface
/// immediately.
pub fn jacobi_symmetric(a: &RMat, sym_tol: f64) -> Result<(Vec<f64>, RMat)> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    let mut asym: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            asym = asym.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if asym > sym_tol {
        return Err(Error::NotHermitian(asym));
    }
    let mut m = Mat::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut v: RMat = Mat::identity(n);
    let max_sweeps = 60;
    for sweep in 0..=max_sweeps {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if off < 1e-28 {
            break;
        }
        if sweep == max_sweeps {
            return Err(Error::NoConvergence(max_sweeps));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() < 1e-18 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let vals: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let vecs = Mat::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok((vals, vecs))
}

/// Largest eigenvalue and eigenvector of a real symmetric matrix.
///
/// The eigenvector phase is fixed by making its first component of
/// significant size positive, so repeated runs agree to the last bit.
pub fn max_symmetric_eigenpair(a: &RMat, sym_tol: f64) -> Result<(f64, Vec<f64>)> {
    let (vals, vecs) = jacobi_symmetric(a, sym_tol)?;
    let n = a.rows();
    let mut vec: Vec<f64> = (0..n).map(|i| vecs[(i, 0)]).collect();
    let lead = vec
        .iter()
        .find(|x| x.abs() > 1e-8)
        .copied()
        .unwrap_or(1.0);
    if lead < 0.0 {
        for x in vec.iter_mut() {
            *x = -*x;
        }
    }
    Ok((vals[0], vec))
}

/// Spectral (operator 2-)norm of a Hermitian complex matrix, via the
/// realification `[[Re, -Im], [Im, Re]]` which has the same spectrum twice.
pub fn hermitian_spectral_norm(a: &CMat) -> Result<f64> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    let mut herm_defect: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            herm_defect = herm_defect.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    if herm_defect > 1e-8 {
        return Err(Error::NotHermitian(herm_defect));
    }
    let r = Mat::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, ii) = (i / n, i % n);
        let (bj, jj) = (j / n, j % n);
        match (bi, bj) {
            (0, 0) | (1, 1) => a[(ii, jj)].re,
            (0, 1) => -a[(ii, jj)].im,
            _ => a[(ii, jj)].im,
        }
    });
    let (vals, _) = jacobi_symmetric(&r, 1e-8)?;
    Ok(vals
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max))
}

/// Matrix with independent standard complex Gaussian entries.
pub fn random_gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    // Box-Muller keeps us independent of rand_distr.
    let draw = |rng: &mut dyn rand::RngCore| -> f64 {
        let u1: f64 = rng.gen_range(1e-12..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    Mat::from_fn(rows, cols, |_, _| C64::new(draw(rng), draw(rng)) / 2f64.sqrt())
}

/// Haar-ish random unitary: Gram–Schmidt of a Gaussian matrix.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> CMat {
    loop {
        if let Ok(u) = orthonormalize(&random_gaussian(n, n, rng)) {
            return u;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn orthonormalize_identity_is_identity() {
        let a: CMat = Mat::identity(4).col_block(0, 2);
        let q = orthonormalize(&a).unwrap();
        assert!(q.sub(&a).fnorm() < 1e-15);
    }

    #[test]
    fn orthonormalize_single_column() {
        let a = CMat::from_rows(vec![
            vec![C64::new(3.0, 0.0)],
            vec![C64::new(4.0, 0.0)],
        ]);
        let q = orthonormalize(&a).unwrap();
        assert!((q[(0, 0)] - C64::new(0.6, 0.0)).norm() < 1e-15);
        assert!((q[(1, 0)] - C64::new(0.8, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn orthonormalize_random_is_unitary_and_idempotent() {
        let mut r = rng(7);
        for _ in 0..20 {
            let a = random_gaussian(4, 2, &mut r);
            let q = orthonormalize(&a).unwrap();
            assert!(q.unitarity_defect() < 1e-12);
            let q2 = orthonormalize(&q).unwrap();
            assert!(q2.sub(&q).fnorm() < 1e-12);
            // Column span is preserved: projector onto span(Q) fixes A.
            let proj = q.mul(&q.adjoint());
            assert!(proj.mul(&a).sub(&a).fnorm() < 1e-10);
        }
    }

    #[test]
    fn orthonormalize_rejects_rank_deficiency() {
        let mut a = CMat::zeros(3, 2);
        a[(0, 0)] = C64::new(1.0, 0.0);
        a[(0, 1)] = C64::new(2.0, 0.0); // second column parallel to the first
        match orthonormalize(&a) {
            Err(Error::DegenerateFrame { col: 1, .. }) => {}
            other => panic!("expected degenerate frame error, got {other:?}"),
        }
    }

    #[test]
    fn complete_frame_produces_unitary_basis() {
        let mut r = rng(11);
        for _ in 0..20 {
            let fs = orthonormalize(&random_gaussian(5, 2, &mut r)).unwrap();
            let fq = complete_frame(&fs).unwrap();
            assert_eq!(fq.cols(), 3);
            let full = fs.hcat(&fq);
            assert!(full.unitarity_defect() < 1e-12);
        }
    }

    #[test]
    fn complete_frame_seeded_reproduces_seed() {
        // When the input frame is exactly orthogonal to the seed, the seeded
        // completion must return the seed unchanged.
        let fs: CMat = Mat::identity(4).col_block(0, 2);
        let seed = Mat::identity(4).col_block(2, 4);
        let fq = complete_frame_seeded(&fs, &seed).unwrap();
        assert!(fq.sub(&seed).fnorm() < 1e-14);
    }

    #[test]
    fn solve_upper_triangular_roundtrip() {
        let mut r = rng(3);
        let q = orthonormalize(&random_gaussian(3, 3, &mut r)).unwrap();
        // Build an upper-triangular matrix with safe diagonal.
        let mut u = CMat::zeros(3, 3);
        for i in 0..3 {
            for j in i..3 {
                u[(i, j)] = C64::new(1.0 + (i + j) as f64, 0.3);
            }
        }
        let b = q.col_block(0, 2);
        let x = solve_upper_triangular(&u, &b).unwrap();
        assert!(u.mul(&x).sub(&b).fnorm() < 1e-12);
    }

    #[test]
    fn solve_general_roundtrip() {
        let mut r = rng(5);
        for _ in 0..10 {
            let a = random_gaussian(4, 4, &mut r);
            let b = random_gaussian(4, 2, &mut r);
            let x = solve_general(&a, &b).unwrap();
            assert!(a.mul(&x).sub(&b).fnorm() < 1e-10);
        }
    }

    #[test]
    fn det_of_unitary_has_unit_modulus() {
        let mut r = rng(9);
        let u = random_unitary(4, &mut r);
        assert!((det(&u).norm() - 1.0).abs() < 1e-12);
        assert!((det(&CMat::identity(5)) - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn jacobi_diagonal_matrix() {
        let a = RMat::from_rows(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 3.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ]);
        let (val, vec) = max_symmetric_eigenpair(&a, 1e-10).unwrap();
        assert!((val - 3.0).abs() < 1e-13);
        assert!((vec[1].abs() - 1.0).abs() < 1e-12);
        assert!(vec[1] > 0.0, "sign convention: leading component positive");
    }

    #[test]
    fn jacobi_exchange_matrix() {
        let a = RMat::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let (val, vec) = max_symmetric_eigenpair(&a, 1e-10).unwrap();
        assert!((val - 1.0).abs() < 1e-13);
        let inv = 1.0 / 2.0f64.sqrt();
        assert!((vec[0] - inv).abs() < 1e-12);
        assert!((vec[1] - inv).abs() < 1e-12);
    }

    #[test]
    fn jacobi_rejects_asymmetric_input() {
        let a = RMat::from_rows(vec![vec![0.0, 1.0], vec![-1.0, 0.0]]);
        assert!(matches!(
            jacobi_symmetric(&a, 1e-10),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn jacobi_matches_nalgebra_on_random_symmetric() {
        let mut r = rng(21);
        for _ in 0..10 {
            let g = random_gaussian(4, 4, &mut r);
            let s = Mat::from_fn(4, 4, |i, j| (g[(i, j)] + g[(j, i)]).re);
            let (vals, vecs) = jacobi_symmetric(&s, 1e-10).unwrap();
            let na = nalgebra::DMatrix::from_fn(4, 4, |i, j| s[(i, j)]);
            let eig = na.symmetric_eigen();
            let mut expect: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            expect.sort_by(|a, b| b.total_cmp(a));
            for (got, want) in vals.iter().zip(&expect) {
                assert!((got - want).abs() < 1e-10, "{got} vs {want}");
            }
            // Residual check A v = lambda v for every pair.
            for k in 0..4 {
                let v: Vec<f64> = (0..4).map(|i| vecs[(i, k)]).collect();
                for i in 0..4 {
                    let av: f64 = (0..4).map(|j| s[(i, j)] * v[j]).sum();
                    assert!((av - vals[k] * v[i]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn hermitian_spectral_norm_matches_eigenvalues() {
        let a = CMat::from_rows(vec![
            vec![C64::new(2.0, 0.0), C64::new(0.0, 1.0)],
            vec![C64::new(0.0, -1.0), C64::new(2.0, 0.0)],
        ]);
        // Eigenvalues of [[2, i], [-i, 2]] are 1 and 3.
        let nrm = hermitian_spectral_norm(&a).unwrap();
        assert!((nrm - 3.0).abs() < 1e-12);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut r = rng(2);
        for n in 2..6 {
            let u = random_unitary(n, &mut r);
            assert!(u.unitarity_defect() < 1e-12);
        }
    }
}
