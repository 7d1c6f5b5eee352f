//! Monic orthogonal polynomial sequences for quasi-definite bilinear forms,
//! their three-term recurrence data, and the Christoffel–Darboux reproducing
//! kernel with derivatives.

use crate::forms::BilinearForm;
use crate::linalg::{invert_unit_lower, ldlt_unit_lower};
use crate::poly::Polynomial;
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Relative pivot threshold below which an LDLᵀ pivot counts as a
/// quasi-definiteness failure.
pub const DEFAULT_PIVOT_TOL: f64 = 1e-12;

/// A finite monic orthogonal sequence `P_0, …, P_n` with squared norms
/// `h_k² = inner(P_k, P_k)` and a reference to the generating form.
#[derive(Clone, Debug)]
pub struct MonicOps<S> {
    polys: Vec<Polynomial<S>>,
    norms2: Vec<S>,
    form: BilinearForm<S>,
}

impl<S: Scalar> MonicOps<S> {
    /// Assembles a sequence from explicitly computed parts (used by the
    /// transform pipeline, whose polynomials come from connection formulas
    /// rather than a Gram factorization).
    pub fn from_parts(
        polys: Vec<Polynomial<S>>,
        norms2: Vec<S>,
        form: BilinearForm<S>,
    ) -> Self {
        assert_eq!(polys.len(), norms2.len());
        MonicOps {
            polys,
            norms2,
            form,
        }
    }

    /// Degrees covered: `0..len()`.
    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn poly(&self, k: usize) -> &Polynomial<S> {
        &self.polys[k]
    }

    pub fn polys(&self) -> &[Polynomial<S>] {
        &self.polys
    }

    /// `h_k² = inner(P_k, P_k)`.
    pub fn norm2(&self, k: usize) -> &S {
        &self.norms2[k]
    }

    pub fn norms2(&self) -> &[S] {
        &self.norms2
    }

    pub fn form(&self) -> &BilinearForm<S> {
        &self.form
    }

    /// Monic Jacobi matrix data of the three-term recurrence
    /// `t·P_k = P_{k+1} + D_k·P_k + C_k·P_{k−1}`.
    ///
    /// Only measure-backed (Hankel) forms admit one; other variants return
    /// [`Error::NonHankelSource`]. Coefficients cover `k = 0..len()−1`.
    pub fn jacobi(&self) -> Result<JacobiMatrix<S>> {
        if !self.form.is_measure() {
            return Err(Error::NonHankelSource);
        }
        let m = self.len().saturating_sub(1);
        let mut diag = Vec::with_capacity(m);
        let mut sub = Vec::with_capacity(m.saturating_sub(1));
        for k in 0..m {
            let tpk = self.polys[k].mul_monomial(1);
            let d = self.form.inner(&tpk, &self.polys[k])? / &self.norms2[k];
            diag.push(d);
            if k > 0 {
                sub.push(self.norms2[k].clone() / &self.norms2[k - 1]);
            }
        }
        Ok(JacobiMatrix { diag, sub })
    }

    /// Reproducing kernel `K_n(x,y) = Σ_{k≤n} P_k(x)P_k(y)/h_k²`.
    pub fn kernel(&self, n: usize, x: &S, y: &S) -> S {
        self.kernel_deriv(n, 0, 0, x, y)
    }

    /// Partial derivative `K_n^{(i,j)}(x,y)`, differentiating the sum
    /// termwise. Stable at arbitrary evaluation points, including spectrum
    /// points where the Christoffel–Darboux quotient degenerates.
    pub fn kernel_deriv(&self, n: usize, i: usize, j: usize, x: &S, y: &S) -> S {
        assert!(n < self.len(), "kernel degree beyond the sequence");
        let mut acc = S::zero();
        for k in 0..=n {
            let px = self.polys[k].derivative(i).eval(x);
            let py = self.polys[k].derivative(j).eval(y);
            acc = acc + px * py / &self.norms2[k];
        }
        acc
    }

    /// Christoffel–Darboux form of the kernel, valid for `x ≠ y` and
    /// `n + 1 < len()`:
    /// `(P_{n+1}(x)P_n(y) − P_n(x)P_{n+1}(y)) / ((x−y)·h_n²)`.
    pub fn kernel_cd(&self, n: usize, x: &S, y: &S) -> S {
        assert!(n + 1 < self.len());
        let num = self.polys[n + 1].eval(x) * self.polys[n].eval(y)
            - self.polys[n].eval(x) * self.polys[n + 1].eval(y);
        num / ((x.clone() - y) * &self.norms2[n])
    }

    /// `inner_x(K_n(x,y), q(x)) = Σ_k P_k(y)/h_k² · inner(P_k, q)`, evaluated
    /// termwise. Reproduces `q(y)` for `deg q ≤ n`. Expanding `K_n(·,y)` into
    /// monomial coefficients first would round them against moments of order
    /// `2n` and lose the cancellation; the termwise sum does not.
    pub fn kernel_apply(&self, n: usize, y: &S, q: &Polynomial<S>) -> Result<S> {
        assert!(n < self.len());
        let mut acc = S::zero();
        for k in 0..=n {
            let w = self.polys[k].eval(y) / &self.norms2[k];
            acc = acc + w * self.form.inner(&self.polys[k], q)?;
        }
        Ok(acc)
    }
}

/// Three-term recurrence data in the monic convention: diagonal `D_k` and
/// subdiagonal `C_k` (with unit superdiagonal).
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiMatrix<S> {
    diag: Vec<S>,
    sub: Vec<S>,
}

impl<S: Scalar> JacobiMatrix<S> {
    pub fn from_parts(diag: Vec<S>, sub: Vec<S>) -> Self {
        assert_eq!(sub.len() + 1, diag.len().max(1));
        JacobiMatrix { diag, sub }
    }

    /// Truncation order: the matrix is `order()×order()`.
    pub fn order(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[S] {
        &self.diag
    }

    /// `C_1, C_2, …` — nonzero for quasi-definite forms.
    pub fn sub(&self) -> &[S] {
        &self.sub
    }

    /// Off-diagonal entries `Ĉ_k` of the symmetric (orthonormal) convention;
    /// requires `C_k ≥ 0`, i.e. a positive-definite source.
    pub fn orthonormal_offdiag(&self) -> Result<Vec<S>> {
        let mut out = Vec::with_capacity(self.sub.len());
        for (k, c) in self.sub.iter().enumerate() {
            if *c < S::zero() {
                return Err(Error::NotPositive { degree: k + 1 });
            }
            out.push(c.sqrt());
        }
        Ok(out)
    }
}

/// Monic orthogonal sequence through degree `n` by LDLᵀ of the Gram matrix:
/// row `k` of `L⁻¹` carries the coefficients of `P_k`, and the pivot `D_kk`
/// is `h_k²`.
///
/// Fails with [`Error::QuasiDefinite`] at the first pivot that is numerically
/// zero relative to its Gram row.
pub fn monic_ops<S: Scalar>(form: &BilinearForm<S>, n: usize) -> Result<MonicOps<S>> {
    monic_ops_with_tol(form, n, DEFAULT_PIVOT_TOL)
}

pub fn monic_ops_with_tol<S: Scalar>(
    form: &BilinearForm<S>,
    n: usize,
    pivot_tol: f64,
) -> Result<MonicOps<S>> {
    let gram = form.gram(n)?;

    // Scale by exact powers of two near 1/√G_kk before factoring. This is
    // overflow protection for deep Hankel blocks (entries approach the f64
    // ceiling well before the sequence degenerates), not an accuracy device.
    let mut scales = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let g = gram[(k, k)].abs().to_f64();
        let m = if g > 0.0 && g.is_finite() {
            (-0.5 * g.log2()).round() as i32
        } else {
            0
        };
        scales.push(S::from_f64(2.0f64.powi(m)));
    }
    let mut scaled = gram.clone();
    for i in 0..=n {
        for j in 0..=n {
            scaled[(i, j)] = gram[(i, j)].clone() * &scales[i] * &scales[j];
        }
    }

    let (l_scaled, d_scaled) = ldlt_unit_lower(&scaled);
    // Row k of L⁻¹ (unscaled) carries the coefficients of P_k.
    let linv_scaled = invert_unit_lower(&l_scaled);
    let mut polys: Vec<Polynomial<S>> = (0..=n)
        .map(|k| {
            let coeffs = (0..=k)
                .map(|j| linv_scaled[(k, j)].clone() * &scales[j] / &scales[k])
                .collect();
            Polynomial::new(coeffs)
        })
        .collect();
    let mut norms2: Vec<S> = (0..=n)
        .map(|k| d_scaled[k].clone() / (scales[k].clone() * &scales[k]))
        .collect();

    // Re-orthogonalization sweeps, ascending. The factorization's forward
    // error grows with the Gram's condition number; any coefficient error of
    // the still-monic P_k is a combination of lower-degree P_j, which
    // projection passes with compensated inner products remove (given
    // already-refined predecessors). Each pass contracts the spurious
    // component by ~ε, and deep truncations of graded bases can start many
    // orders off, so two passes.
    //
    // The quasi-definiteness test runs on the refined norms against the
    // inner product's own noise floor ε·Σ|terms|: Gram pivots of healthy
    // graded bases decay far below any fixed fraction of G_kk, while a
    // degenerate pivot computes below the floor.
    let tol = S::from_f64(pivot_tol);
    let eps = S::epsilon();
    for k in 0..=n {
        let mut p = polys[k].clone();
        for _pass in 0..2 {
            for j in 0..k {
                let c = form.inner(&p, &polys[j])? / &norms2[j];
                p = &p - &polys[j].scale(&c);
            }
        }
        let h2 = form.inner(&p, &p)?;
        let floor = eps.clone() * form.inner_abs_bound(&p, &p)?;
        if h2.abs() <= tol.clone() * floor {
            return Err(Error::QuasiDefinite { degree: k });
        }
        norms2[k] = h2;
        polys[k] = p;
    }

    Ok(MonicOps {
        polys,
        norms2,
        form: form.clone(),
    })
}

/// Brute-force oracle: Gram–Schmidt on the monomial basis using only
/// `inner`, with one reorthogonalization pass (classical GS alone loses
/// orthogonality like κ²·ε). Deliberately independent of the LDLᵀ path.
pub fn gs_oracle<S: Scalar>(form: &BilinearForm<S>, n: usize) -> Result<MonicOps<S>> {
    let mut polys: Vec<Polynomial<S>> = Vec::with_capacity(n + 1);
    let mut norms2: Vec<S> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut p = Polynomial::monomial(k);
        for _pass in 0..2 {
            for j in 0..k {
                let c = form.inner(&p, &polys[j])? / &norms2[j];
                p = &p - &polys[j].scale(&c);
            }
        }
        let h2 = form.inner(&p, &p)?;
        if h2.is_zero() {
            return Err(Error::QuasiDefinite { degree: k });
        }
        polys.push(p);
        norms2.push(h2);
    }
    Ok(MonicOps {
        polys,
        norms2,
        form: form.clone(),
    })
}



#[cfg(test)]
mod deep_truncation {
    use super::*;
    use crate::forms::MomentFunctional;

    #[test]
    fn laguerre3_no_false_pivot_alarm_at_depth() {
        // Pivot ratios h_k²/G_kk decay like 4^{−k}; at degree 26 they sit
        // around 1e−19, far below any fixed fraction of the row scale. The
        // noise-floor test must keep accepting the (perfectly definite)
        // sequence. Binary64 loses the sequence itself beyond desk scale, so
        // the value checks run in the high-precision mode.
        let mu = MomentFunctional::laguerre_with_horizon(3.0, 170);
        let form = BilinearForm::measure(mu);
        assert!(monic_ops(&form, 26).is_ok());

        use crate::scalar::set_hp_precision;
        set_hp_precision(320);
        type R = rug::Float;
        let mu = MomentFunctional::<R>::laguerre_with_horizon(R::from_f64(3.0), 170);
        let ops = monic_ops(&BilinearForm::measure(mu), 26).unwrap();
        let j = ops.jacobi().unwrap();
        for k in [10usize, 20, 25] {
            let expect_d = 2.0 * k as f64 + 4.0;
            assert!(
                (j.diag()[k].to_f64() - expect_d).abs() <= 1e-10 * expect_d,
                "D_{k} = {} vs {expect_d}",
                j.diag()[k]
            );
            let kk = k as f64;
            let expect_c = kk * (kk + 3.0);
            assert!(
                (j.sub()[k - 1].to_f64() - expect_c).abs() <= 1e-10 * expect_c,
                "C_{k} = {} vs {expect_c}",
                j.sub()[k - 1]
            );
        }
    }

    #[test]
    fn laguerre3_recurrence_within_binary64_scale() {
        // Within desk scale the f64 path reproduces the classical data.
        let mu = MomentFunctional::laguerre(3.0);
        let ops = monic_ops(&BilinearForm::measure(mu), 12).unwrap();
        let j = ops.jacobi().unwrap();
        for k in 0..j.order().min(11) {
            let expect_d = 2.0 * k as f64 + 4.0;
            assert!(
                (j.diag()[k] - expect_d).abs() <= 1e-9 * expect_d,
                "D_{k} = {}",
                j.diag()[k]
            );
        }
    }

    #[test]
    fn degenerate_discrete_measure_flagged() {
        // A 3-point measure has no monic OP of degree 3: P_3 = node poly has
        // norm 0. The pivot check must flag exactly that degree.
        // Exactly representable nodes and weights, so the degeneracy is exact
        // rather than blurred by input rounding.
        let mu = MomentFunctional::quadrature(vec![0.0, 1.0, 2.0], vec![0.25, 0.5, 0.25]).unwrap();
        let form = BilinearForm::measure(mu);
        assert!(monic_ops(&form, 2).is_ok());
        assert_eq!(
            monic_ops(&form, 3).unwrap_err(),
            Error::QuasiDefinite { degree: 3 }
        );
    }
}
