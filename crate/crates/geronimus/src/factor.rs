//! Band matrices and the factorization identities of the transformation.
//!
//! The transformed sequence satisfies `h(t)·P*_n = Σ_{|k−n|≤N} c_k^{[n]} P*_k`,
//! so multiplication by `h` acts as a `(2N+1)`-band matrix `J*`. Two banded
//! triangular factors connect the original and transformed recurrences:
//! `L` (unit lower, the connection rows) with `P* = L·P`, and `U` (upper,
//! the `h·P_n` projections) with `h·P = U·P*`, giving the factorization pair
//! `h(J) = U·L` and `J* = L·U`. In the positive-definite case the symmetric
//! normalization admits the explicit Cholesky factor `J*_orth = C·Cᵀ`.
//!
//! Everything here is a finite section of a semi-infinite matrix; identities
//! hold exactly only on a leading block, tracked by [`TruncationWindow`].

use crate::forms::BilinearForm;
use crate::linalg::Mat;
use crate::orthopoly::{JacobiMatrix, MonicOps};
use crate::poly::FactoredNodes;
use crate::scalar::Scalar;
use crate::transform::{Connection, DEFAULT_ZERO_TOL};
use crate::{Error, Result};

/// Banded square matrix stored by diagonals; entries outside the band are
/// exactly zero by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct BandMatrix<S> {
    m: usize,
    lower: usize,
    upper: usize,
    /// `diags[d]` is the diagonal at offset `d − lower` (column − row),
    /// indexed by `min(row, col)`.
    diags: Vec<Vec<S>>,
}

impl<S: Scalar> BandMatrix<S> {
    pub fn zeros(m: usize, lower: usize, upper: usize) -> Self {
        assert!(lower < m.max(1) && upper < m.max(1), "bands exceed order");
        let diags = (0..=(lower + upper))
            .map(|d| {
                let off = d as isize - lower as isize;
                vec![S::zero(); m - off.unsigned_abs()]
            })
            .collect();
        BandMatrix {
            m,
            lower,
            upper,
            diags,
        }
    }

    pub fn identity(m: usize) -> Self {
        let mut id = Self::zeros(m, 0, 0);
        for i in 0..m {
            id.set(i, i, S::one());
        }
        id
    }

    /// Truncation order.
    pub fn order(&self) -> usize {
        self.m
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.lower
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.upper
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        debug_assert!(i < self.m && j < self.m);
        let off = j as isize - i as isize;
        if off < -(self.lower as isize) || off > self.upper as isize {
            return S::zero();
        }
        self.diags[(off + self.lower as isize) as usize][i.min(j)].clone()
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        let off = j as isize - i as isize;
        assert!(
            off >= -(self.lower as isize) && off <= self.upper as isize,
            "({i},{j}) outside the ({},{}) band",
            self.lower,
            self.upper
        );
        self.diags[(off + self.lower as isize) as usize][i.min(j)] = v;
    }

    /// Banded product, truncated to the common order; bandwidths add.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.m, other.m, "order mismatch");
        let m = self.m;
        let lower = (self.lower + other.lower).min(m.saturating_sub(1));
        let upper = (self.upper + other.upper).min(m.saturating_sub(1));
        let mut out = Self::zeros(m, lower, upper);
        for i in 0..m {
            let jlo = i.saturating_sub(lower);
            let jhi = (i + upper).min(m - 1);
            for j in jlo..=jhi {
                let klo = i.saturating_sub(self.lower).max(j.saturating_sub(other.upper));
                let khi = (i + self.upper).min(j + other.lower).min(m - 1);
                if klo > khi {
                    continue;
                }
                let mut acc = S::zero();
                for k in klo..=khi {
                    acc = acc + self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    /// Leading `mblock×mblock` section, bands clamped to the new order.
    pub fn crop(&self, mblock: usize) -> Self {
        assert!(mblock <= self.m);
        let lower = self.lower.min(mblock.saturating_sub(1));
        let upper = self.upper.min(mblock.saturating_sub(1));
        let mut out = Self::zeros(mblock, lower, upper);
        for i in 0..mblock {
            for j in i.saturating_sub(lower)..=(i + upper).min(mblock - 1) {
                out.set(i, j, self.get(i, j));
            }
        }
        out
    }

    pub fn to_dense(&self) -> Mat<S> {
        let mut d = Mat::zeros(self.m, self.m);
        for i in 0..self.m {
            for j in i.saturating_sub(self.lower)..=(i + self.upper).min(self.m - 1) {
                d[(i, j)] = self.get(i, j);
            }
        }
        d
    }

    /// Largest `|self − other|` entry over the leading `upto×upto` block.
    pub fn max_abs_diff(&self, other: &Self, upto: usize) -> S {
        let upto = upto.min(self.m).min(other.m);
        let mut worst = S::zero();
        for i in 0..upto {
            for j in 0..upto {
                let d = (self.get(i, j) - other.get(i, j)).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Tridiagonal band matrix of a monic Jacobi recurrence (sub `C_k`,
    /// diagonal `D_k`, unit superdiagonal), at the recurrence's full order.
    pub fn from_jacobi(j: &JacobiMatrix<S>) -> Self {
        let m = j.order();
        let mut b = Self::zeros(m, 1, 1);
        for (k, d) in j.diag().iter().enumerate() {
            b.set(k, k, d.clone());
        }
        for (k, c) in j.sub().iter().enumerate() {
            b.set(k + 1, k, c.clone());
        }
        for k in 0..m.saturating_sub(1) {
            b.set(k, k + 1, S::one());
        }
        b
    }

    pub fn to_f64(&self) -> BandMatrix<f64> {
        BandMatrix {
            m: self.m,
            lower: self.lower,
            upper: self.upper,
            diags: self
                .diags
                .iter()
                .map(|d| d.iter().map(Scalar::to_f64).collect())
                .collect(),
        }
    }
}

/// Finite-section bookkeeping: identities for semi-infinite matrices hold on
/// the computed `M×M` section only away from the truncation boundary. Each
/// matrix product (or polynomial-in-matrix evaluation) eats a band's worth of
/// rows, so the valid block is `M − N·products`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationWindow {
    pub m: usize,
    pub m_valid: usize,
}

impl TruncationWindow {
    pub fn after_products(m: usize, band: usize, products: usize) -> Self {
        TruncationWindow {
            m,
            m_valid: m.saturating_sub(band * products),
        }
    }
}

/// Max-entry residual of a factorization identity on a valid window.
#[derive(Clone, Copy, Debug)]
pub struct ResidualReport {
    pub max_residual: f64,
    pub window: TruncationWindow,
}

/// Unit lower triangular band matrix of the connection rows: row `n` carries
/// `A^{[n]}_{n−k}` at column `n−k`. Satisfies `P* = L·P` as a polynomial
/// identity.
pub fn build_lmon<S: Scalar>(conn: &Connection<S>, m: usize) -> Result<BandMatrix<S>> {
    if conn.upto() + 1 < m {
        return Err(Error::Truncation {
            need: m,
            have: conn.upto() + 1,
        });
    }
    let band = conn.row(conn.upto()).len().max(1);
    let mut l = BandMatrix::zeros(m, band, 0);
    for n in 0..m {
        l.set(n, n, S::one());
        for (k, a) in conn.row(n).iter().enumerate() {
            l.set(n, n - 1 - k, a.clone());
        }
    }
    Ok(l)
}

/// Upper triangular band matrix of the `h·P_n` expansions: row `n` carries
/// `B_i^{[N+n]} = [h·P_n, P*_i]_h / (h*_i)²` at columns `n..n+N`, with the
/// `(n, n+N)` entry pinned to 1 by monicity. Satisfies `h·P = U·P*`.
///
/// Fails with a quasi-definiteness error when a diagonal entry `B_n^{[N+n]}`
/// vanishes relative to its row.
pub fn build_umon<S: Scalar>(
    base: &MonicOps<S>,
    star: &MonicOps<S>,
    form: &BilinearForm<S>,
    m: usize,
) -> Result<BandMatrix<S>> {
    let h = form
        .transform_nodes()
        .ok_or_else(|| Error::Invalid("a transformed form is required".into()))?;
    let big_n = h.n();
    let hp = h.expand();
    if star.len() < m + big_n {
        return Err(Error::Truncation {
            need: m + big_n,
            have: star.len(),
        });
    }
    if base.len() < m {
        return Err(Error::Truncation {
            need: m,
            have: base.len(),
        });
    }
    let mut u = BandMatrix::zeros(m, 0, big_n);
    for n in 0..m {
        let target = &hp * base.poly(n);
        let mut row = Vec::with_capacity(big_n + 1);
        for i in n..=(n + big_n) {
            if i + 1 == n + big_n + 1 {
                row.push(S::one());
            } else {
                row.push(form.inner(&target, star.poly(i))? / star.norm2(i));
            }
        }
        let scale = row.iter().fold(S::one(), |acc, v| {
            let a = v.abs();
            if a > acc {
                a
            } else {
                acc
            }
        });
        if row[0].abs() <= S::from_f64(DEFAULT_ZERO_TOL) * scale {
            return Err(Error::QuasiDefinite { degree: n });
        }
        for (k, v) in row.into_iter().enumerate() {
            if n + k < m {
                u.set(n, n + k, v);
            }
        }
    }
    Ok(u)
}

/// `h(J) = Σ b_k Jᵏ` by Horner on the padded truncation, cropped to `m`
/// where it is exact. Result has bandwidths `(N, N)`.
pub fn h_of_jacobi<S: Scalar>(
    j: &JacobiMatrix<S>,
    h: &FactoredNodes<S>,
    m: usize,
) -> Result<BandMatrix<S>> {
    let big_n = h.n();
    if j.order() < m + big_n {
        return Err(Error::Truncation {
            need: m + big_n,
            have: j.order(),
        });
    }
    let hp = h.expand();
    let full = BandMatrix::from_jacobi(j);
    let mbig = full.order();
    let mut acc = BandMatrix::<S>::identity(mbig);
    // Horner: acc = b_N·I, then acc = acc·J + b_k·I.
    for k in 0..mbig {
        acc.set(k, k, hp.coeff(big_n));
    }
    for deg in (0..big_n).rev() {
        let mut next = acc.mul(&full);
        let b = hp.coeff(deg);
        for k in 0..mbig {
            next.set(k, k, next.get(k, k) + &b);
        }
        acc = next;
    }
    Ok(acc.crop(m))
}

/// The `(2N+1)`-band recurrence matrix of the transformed sequence: row `n`
/// holds `c_k^{[n]} = [h·P*_n, P*_k]_h / (h*_k)²` for `|k−n| ≤ N`, with the
/// upper band edge pinned to 1 by monicity.
pub fn jstar_band<S: Scalar>(
    star: &MonicOps<S>,
    form: &BilinearForm<S>,
    m: usize,
) -> Result<BandMatrix<S>> {
    let h = form
        .transform_nodes()
        .ok_or_else(|| Error::Invalid("a transformed form is required".into()))?;
    let big_n = h.n();
    let hp = h.expand();
    if star.len() < m + big_n {
        return Err(Error::Truncation {
            need: m + big_n,
            have: star.len(),
        });
    }
    let mut js = BandMatrix::zeros(m, big_n, big_n);
    for n in 0..m {
        let target = &hp * star.poly(n);
        for k in n.saturating_sub(big_n)..=(n + big_n).min(m - 1) {
            let v = if k == n + big_n {
                S::one()
            } else {
                form.inner(&target, star.poly(k))? / star.norm2(k)
            };
            js.set(n, k, v);
        }
    }
    Ok(js)
}

/// Max-entry residual of `h(J) − U·L` on the valid window (two band products
/// worth of padding: one for `h(J)`, one for `U·L`).
pub fn verify_ul<S: Scalar>(
    h_of_j: &BandMatrix<S>,
    l: &BandMatrix<S>,
    u: &BandMatrix<S>,
) -> ResidualReport {
    let band = l.lower_bandwidth().max(u.upper_bandwidth());
    let window = TruncationWindow::after_products(h_of_j.order().min(l.order()), band, 2);
    let prod = u.mul(l);
    let max = h_of_j.max_abs_diff(&prod, window.m_valid).to_f64();
    ResidualReport {
        max_residual: max,
        window,
    }
}

/// Max-entry residual of `J* − L·U` on the valid window.
pub fn verify_lu<S: Scalar>(
    jstar: &BandMatrix<S>,
    l: &BandMatrix<S>,
    u: &BandMatrix<S>,
) -> ResidualReport {
    let band = l.lower_bandwidth().max(u.upper_bandwidth());
    let window = TruncationWindow::after_products(jstar.order().min(l.order()), band, 2);
    let prod = l.mul(u);
    let max = jstar.max_abs_diff(&prod, window.m_valid).to_f64();
    ResidualReport {
        max_residual: max,
        window,
    }
}

/// Explicit Cholesky factor of the symmetric transformed recurrence matrix:
/// row `n` carries `A^{[n]}_{n−k}·h_{n−k}/h*_n` at column `n−k` (so the
/// diagonal is `h_n/h*_n > 0`). Requires positive norms on both sequences.
pub fn cholesky_c<S: Scalar>(
    conn: &Connection<S>,
    base: &MonicOps<S>,
    star: &MonicOps<S>,
    m: usize,
) -> Result<BandMatrix<S>> {
    if conn.upto() + 1 < m || base.len() < m || star.len() < m {
        return Err(Error::Truncation {
            need: m,
            have: (conn.upto() + 1).min(base.len()).min(star.len()),
        });
    }
    let band = conn.row(conn.upto()).len().max(1);
    let mut c = BandMatrix::zeros(m, band, 0);
    let mut base_h = Vec::with_capacity(m);
    let mut star_h = Vec::with_capacity(m);
    for k in 0..m {
        if !(*base.norm2(k) > S::zero()) {
            return Err(Error::NotPositive { degree: k });
        }
        if !(*star.norm2(k) > S::zero()) {
            return Err(Error::NotPositive { degree: k });
        }
        base_h.push(base.norm2(k).sqrt());
        star_h.push(star.norm2(k).sqrt());
    }
    for n in 0..m {
        c.set(n, n, base_h[n].clone() / &star_h[n]);
        for (k, a) in conn.row(n).iter().enumerate() {
            let col = n - 1 - k;
            c.set(n, col, a.clone() * &base_h[col] / &star_h[n]);
        }
    }
    Ok(c)
}

/// The symmetric transformed recurrence matrix in the orthonormal
/// normalization: entries `(P*_n, P*_m)₀ / (h*_n·h*_m)`, band `(N, N)`.
pub fn jstar_orthonormal<S: Scalar>(
    star: &MonicOps<S>,
    base_form: &BilinearForm<S>,
    big_n: usize,
    m: usize,
) -> Result<BandMatrix<S>> {
    if star.len() < m + big_n {
        return Err(Error::Truncation {
            need: m + big_n,
            have: star.len(),
        });
    }
    let mut star_h = Vec::with_capacity(m + big_n);
    for k in 0..(m + big_n).min(star.len()) {
        if !(*star.norm2(k) > S::zero()) {
            return Err(Error::NotPositive { degree: k });
        }
        star_h.push(star.norm2(k).sqrt());
    }
    let mut js = BandMatrix::zeros(m, big_n, big_n);
    for n in 0..m {
        for k in n..=(n + big_n).min(m - 1) {
            let v = base_form.inner(star.poly(n), star.poly(k))?
                / (star_h[n].clone() * &star_h[k]);
            js.set(n, k, v.clone());
            if k > n {
                js.set(k, n, v);
            }
        }
    }
    Ok(js)
}

/// Max-entry residual of `J*_orth − C·Cᵀ` on the valid window.
pub fn verify_cholesky<S: Scalar>(
    jstar_orth: &BandMatrix<S>,
    c: &BandMatrix<S>,
) -> ResidualReport {
    let band = c.lower_bandwidth();
    let window = TruncationWindow::after_products(jstar_orth.order().min(c.order()), band, 2);
    let m = c.order();
    // C·Cᵀ without materializing the transpose.
    let mut prod = BandMatrix::zeros(m, band.min(m - 1).max(0), band.min(m - 1).max(0));
    for i in 0..m {
        for j in i.saturating_sub(band)..=(i + band).min(m - 1) {
            let lo = i.max(j).saturating_sub(band).max(0);
            let hi = i.min(j);
            let mut acc = S::zero();
            for k in lo..=hi {
                acc = acc + c.get(i, k) * c.get(j, k);
            }
            prod.set(i, j, acc);
        }
    }
    let max = jstar_orth.max_abs_diff(&prod, window.m_valid).to_f64();
    ResidualReport {
        max_residual: max,
        window,
    }
}
