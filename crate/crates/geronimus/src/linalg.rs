//! Small dense linear-algebra kernels.
//!
//! Everything here runs on matrices of order ≲ 40, so the kernels are the
//! textbook algorithms: LU with partial pivoting for solves, determinants and
//! inverses, unpivoted LDLᵀ for Gram matrices of quasi-definite forms, and
//! Cholesky with the positive-diagonal convention.

use crate::scalar::Scalar;

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<S> {
    nrows: usize,
    ncols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Mat {
            nrows,
            ncols,
            data: vec![S::zero(); nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged rows");
        Mat {
            nrows,
            ncols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "dimension mismatch");
        let mut out = Self::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self[(i, k)].clone();
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.ncols {
                    out[(i, j)] = out[(i, j)].clone() + a.clone() * &other[(k, j)];
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a = a.clone() - b;
        }
        out
    }

    pub fn max_abs(&self) -> S {
        let mut m = S::zero();
        for v in &self.data {
            let a = v.abs();
            if a > m {
                m = a;
            }
        }
        m
    }

    /// Largest |a_ij − a_ji|; zero for exactly symmetric matrices.
    pub fn asymmetry(&self) -> S {
        assert_eq!(self.nrows, self.ncols);
        let mut m = S::zero();
        for i in 0..self.nrows {
            for j in (i + 1)..self.ncols {
                let d = (self[(i, j)].clone() - &self[(j, i)]).abs();
                if d > m {
                    m = d;
                }
            }
        }
        m
    }

    pub fn to_f64(&self) -> Mat<f64> {
        Mat {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self.data.iter().map(Scalar::to_f64).collect(),
        }
    }
}

impl<S> std::ops::Index<(usize, usize)> for Mat<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        debug_assert!(i < self.nrows && j < self.ncols);
        &self.data[i * self.ncols + j]
    }
}

impl<S> std::ops::IndexMut<(usize, usize)> for Mat<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        debug_assert!(i < self.nrows && j < self.ncols);
        &mut self.data[i * self.ncols + j]
    }
}

/// LU factorization with partial pivoting of a square matrix.
///
/// Exactly singular inputs are recorded rather than rejected: `det` returns
/// zero and `solve`/`inverse` return `None`.
pub struct Lu<S> {
    lu: Mat<S>,
    perm: Vec<usize>,
    sign_flip: bool,
    singular_at: Option<usize>,
}

pub fn lu<S: Scalar>(a: &Mat<S>) -> Lu<S> {
    assert_eq!(a.nrows(), a.ncols(), "LU needs a square matrix");
    let n = a.nrows();
    let mut m = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign_flip = false;
    let mut singular_at = None;

    for k in 0..n {
        let mut piv = k;
        let mut best = m[(k, k)].abs();
        for i in (k + 1)..n {
            let cand = m[(i, k)].abs();
            if cand > best {
                best = cand;
                piv = i;
            }
        }
        if best.is_zero() {
            if singular_at.is_none() {
                singular_at = Some(k);
            }
            continue;
        }
        if piv != k {
            for j in 0..n {
                let tmp = m[(k, j)].clone();
                m[(k, j)] = m[(piv, j)].clone();
                m[(piv, j)] = tmp;
            }
            perm.swap(k, piv);
            sign_flip = !sign_flip;
        }
        let pivot = m[(k, k)].clone();
        for i in (k + 1)..n {
            let factor = m[(i, k)].clone() / &pivot;
            m[(i, k)] = factor.clone();
            for j in (k + 1)..n {
                m[(i, j)] = m[(i, j)].clone() - factor.clone() * &m[(k, j)];
            }
        }
    }

    Lu {
        lu: m,
        perm,
        sign_flip,
        singular_at,
    }
}

impl<S: Scalar> Lu<S> {
    pub fn is_singular(&self) -> bool {
        self.singular_at.is_some()
    }

    pub fn det(&self) -> S {
        if self.is_singular() {
            return S::zero();
        }
        let n = self.lu.nrows();
        let mut d = if self.sign_flip {
            -S::one()
        } else {
            S::one()
        };
        for k in 0..n {
            d = d * &self.lu[(k, k)];
        }
        d
    }

    pub fn solve(&self, rhs: &[S]) -> Option<Vec<S>> {
        if self.is_singular() {
            return None;
        }
        let n = self.lu.nrows();
        assert_eq!(rhs.len(), n);
        let mut x: Vec<S> = self.perm.iter().map(|&p| rhs[p].clone()).collect();
        for i in 1..n {
            for j in 0..i {
                x[i] = x[i].clone() - self.lu[(i, j)].clone() * &x[j];
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                x[i] = x[i].clone() - self.lu[(i, j)].clone() * &x[j];
            }
            x[i] = x[i].clone() / &self.lu[(i, i)];
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Mat<S>> {
        let n = self.lu.nrows();
        let mut inv = Mat::zeros(n, n);
        let mut e = vec![S::zero(); n];
        for j in 0..n {
            e[j] = S::one();
            let col = self.solve(&e)?;
            e[j] = S::zero();
            for i in 0..n {
                inv[(i, j)] = col[i].clone();
            }
        }
        Some(inv)
    }
}

/// Determinant together with its Hadamard bound ∏‖row_i‖₂.
///
/// `|det| ≤ bound` always; `|det| / bound` is the scale-free size used for
/// relative "≠ 0" tests on connection determinants.
pub fn det_with_scale<S: Scalar>(a: &Mat<S>) -> (S, S) {
    let n = a.nrows();
    if n == 0 {
        return (S::one(), S::one());
    }
    let det = lu(a).det();
    let mut bound = S::one();
    for i in 0..n {
        let mut s = S::zero();
        for j in 0..n {
            s = s + a[(i, j)].clone() * &a[(i, j)];
        }
        bound = bound * s.sqrt();
    }
    (det, bound)
}

/// Unpivoted LDLᵀ of a symmetric matrix: `A = L·diag(d)·Lᵀ` with unit lower
/// triangular `L`. No pivot checks are made here; callers inspect `d`.
///
/// Updates run through `Scalar::sum_products`: Gram matrices of graded bases
/// cancel heavily (`a_jj` and the subtracted sum agree to many digits), and
/// compensated accumulation keeps the pivots — the squared norms — accurate.
pub fn ldlt_unit_lower<S: Scalar>(a: &Mat<S>) -> (Mat<S>, Vec<S>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut l = Mat::<S>::identity(n);
    let mut d = vec![S::zero(); n];
    let one = S::one();
    for j in 0..n {
        let mut terms = Vec::with_capacity(j + 1);
        terms.push((a[(j, j)].clone(), one.clone(), one.clone()));
        for k in 0..j {
            terms.push((-l[(j, k)].clone(), l[(j, k)].clone(), d[k].clone()));
        }
        d[j] = S::sum_products(&terms);
        for i in (j + 1)..n {
            let mut terms = Vec::with_capacity(j + 1);
            terms.push((a[(i, j)].clone(), one.clone(), one.clone()));
            for k in 0..j {
                terms.push((-l[(i, k)].clone(), l[(j, k)].clone(), d[k].clone()));
            }
            let v = S::sum_products(&terms);
            if !d[j].is_zero() {
                l[(i, j)] = v / &d[j];
            }
        }
    }
    (l, d)
}

/// Inverse of a unit lower triangular matrix by forward substitution.
pub fn invert_unit_lower<S: Scalar>(l: &Mat<S>) -> Mat<S> {
    let n = l.nrows();
    let mut inv = Mat::<S>::identity(n);
    let one = S::one();
    for j in 0..n {
        for i in (j + 1)..n {
            let terms: Vec<_> = (j..i)
                .map(|k| (-l[(i, k)].clone(), inv[(k, j)].clone(), one.clone()))
                .collect();
            inv[(i, j)] = S::sum_products(&terms);
        }
    }
    inv
}

/// Cholesky factorization `A = G·Gᵀ` with positive diagonal.
///
/// Returns `Err(k)` at the first pivot that is not strictly positive, which is
/// how positive-definiteness is tested throughout the crate.
pub fn cholesky_lower<S: Scalar>(a: &Mat<S>) -> std::result::Result<Mat<S>, usize> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut g = Mat::<S>::zeros(n, n);
    let one = S::one();
    for j in 0..n {
        let mut terms = Vec::with_capacity(j + 1);
        terms.push((a[(j, j)].clone(), one.clone(), one.clone()));
        for k in 0..j {
            terms.push((-g[(j, k)].clone(), g[(j, k)].clone(), one.clone()));
        }
        let dj = S::sum_products(&terms);
        if !(dj > S::zero()) || !dj.is_finite() {
            return Err(j);
        }
        let root = dj.sqrt();
        g[(j, j)] = root.clone();
        for i in (j + 1)..n {
            let mut terms = Vec::with_capacity(j + 1);
            terms.push((a[(i, j)].clone(), one.clone(), one.clone()));
            for k in 0..j {
                terms.push((-g[(i, k)].clone(), g[(j, k)].clone(), one.clone()));
            }
            g[(i, j)] = S::sum_products(&terms) / &root;
        }
    }
    Ok(g)
}

/// 1-norm condition number ‖A‖₁‖A⁻¹‖₁, `f64::INFINITY` for singular input.
pub fn cond_1norm<S: Scalar>(a: &Mat<S>) -> f64 {
    fn norm1<S: Scalar>(m: &Mat<S>) -> f64 {
        let mut best = 0.0f64;
        for j in 0..m.ncols() {
            let mut s = 0.0;
            for i in 0..m.nrows() {
                s += m[(i, j)].abs().to_f64();
            }
            best = best.max(s);
        }
        best
    }
    match lu(a).inverse() {
        Some(inv) => norm1(a) * norm1(&inv),
        None => f64::INFINITY,
    }
}
