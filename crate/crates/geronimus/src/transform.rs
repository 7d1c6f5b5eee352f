//! The multiple Geronimus transformation proper.
//!
//! Given the monic orthogonal sequence `{P_n}` of `(·,·)₀` (the measure form
//! of `μ₀ = h·μ`) and the transformed form `[·,·]_h`, the transformed monic
//! polynomials are finite combinations
//!
//! `P*_n = P_n + A^{[n]}_{n−1} P_{n−1} + … + A^{[n]}_{n−N} P_{n−N}`
//!
//! whose coefficient rows solve a linear system with entries `[P_j, tᵐ]_h`.
//! This module computes those rows and their determinants `d*_n`, builds the
//! `P*` sequence (three independent routes), classifies definiteness from the
//! `d*` sign pattern, solves the kernel-based existence system, and expands
//! `h·P*_n` in the orthogonal basis of `μ`.

use crate::forms::{BilinearForm, SobolevMass};
use crate::linalg::{det_with_scale, lu, Mat};
use crate::orthopoly::MonicOps;
use crate::poly::{jet, FactoredNodes, Jet, Polynomial};
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Relative threshold for treating a connection determinant as zero,
/// measured against its Hadamard bound.
pub const DEFAULT_ZERO_TOL: f64 = 1e-10;

/// Connection coefficients `A^{[n]}` and determinants `d*_n` for degrees
/// `0..=upto`.
///
/// Row `n` stores `(A^{[n]}_{n−1}, …, A^{[n]}_{n−q})` with `q = min(n, N)`;
/// `A^{[n]}_n = 1` and coefficients below index 0 are absent (the small-degree
/// regime uses exactly `n` terms). `dstar[0] = 1` by the empty-determinant
/// convention.
#[derive(Clone, Debug, PartialEq)]
pub struct Connection<S> {
    rows: Vec<Vec<S>>,
    dstar: Vec<S>,
}

impl<S: Scalar> Connection<S> {
    /// Highest degree covered.
    pub fn upto(&self) -> usize {
        self.rows.len() - 1
    }

    /// `(A^{[n]}_{n−1}, …, A^{[n]}_{n−q})`.
    pub fn row(&self, n: usize) -> &[S] {
        &self.rows[n]
    }

    /// `A^{[n]}_{n−k}`; `1` for `k = 0`, `0` below the row's reach.
    pub fn coeff(&self, n: usize, k: usize) -> S {
        if k == 0 {
            S::one()
        } else {
            self.rows[n].get(k - 1).cloned().unwrap_or_else(S::zero)
        }
    }

    pub fn dstar(&self, n: usize) -> &S {
        &self.dstar[n]
    }

    pub fn dstars(&self) -> &[S] {
        &self.dstar
    }
}

fn transform_degree<S: Scalar>(form: &BilinearForm<S>) -> Result<usize> {
    form.transform_nodes()
        .map(FactoredNodes::n)
        .ok_or_else(|| Error::Invalid("a transformed (Sobolev/Geronimus) form is required".into()))
}

/// System matrix of the connection problem at degree `n`: entry `(m, j)` is
/// `[P_{n−1−j}, tᵐ]_h`, of size `q×q` with `q = min(n, N)`.
fn connection_matrix<S: Scalar>(
    base: &MonicOps<S>,
    form: &BilinearForm<S>,
    n: usize,
) -> Result<Mat<S>> {
    let big_n = transform_degree(form)?;
    let q = n.min(big_n);
    let mut m = Mat::zeros(q, q);
    for j in 0..q {
        let p = base.poly(n - 1 - j);
        for row in 0..q {
            m[(row, j)] = form.inner(p, &Polynomial::monomial(row))?;
        }
    }
    Ok(m)
}

/// Determinant `d*_n` of the connection system; `d*_0 = 1`. A zero value is
/// a valid return — callers interpret it.
pub fn dstar<S: Scalar>(base: &MonicOps<S>, form: &BilinearForm<S>, n: usize) -> Result<S> {
    let m = connection_matrix(base, form, n)?;
    Ok(det_with_scale(&m).0)
}

/// Solves the connection system at degree `n`, returning the row
/// `(A^{[n]}_{n−1}, …, A^{[n]}_{n−q})` and `d*_n`.
///
/// A determinant that is zero relative to its Hadamard bound is a
/// quasi-definiteness failure at `n`.
pub fn connection_row<S: Scalar>(
    base: &MonicOps<S>,
    form: &BilinearForm<S>,
    n: usize,
) -> Result<(Vec<S>, S)> {
    connection_row_with_tol(base, form, n, DEFAULT_ZERO_TOL)
}

pub fn connection_row_with_tol<S: Scalar>(
    base: &MonicOps<S>,
    form: &BilinearForm<S>,
    n: usize,
    zero_tol: f64,
) -> Result<(Vec<S>, S)> {
    let m = connection_matrix(base, form, n)?;
    let q = m.nrows();
    if q == 0 {
        return Ok((Vec::new(), S::one()));
    }
    let (det, bound) = det_with_scale(&m);
    if det.abs() <= S::from_f64(zero_tol) * bound {
        return Err(Error::QuasiDefinite { degree: n });
    }
    let mut rhs = Vec::with_capacity(q);
    for row in 0..q {
        rhs.push(-form.inner(base.poly(n), &Polynomial::monomial(row))?);
    }
    let sol = lu(&m)
        .solve(&rhs)
        .ok_or(Error::QuasiDefinite { degree: n })?;
    Ok((sol, det))
}

/// Connection data for all degrees `0..=upto`.
pub fn connection<S: Scalar>(
    base: &MonicOps<S>,
    form: &BilinearForm<S>,
    upto: usize,
) -> Result<Connection<S>> {
    let mut rows = Vec::with_capacity(upto + 1);
    let mut dstars = Vec::with_capacity(upto + 1);
    for n in 0..=upto {
        let (row, det) = connection_row(base, form, n)?;
        rows.push(row);
        dstars.push(det);
    }
    Ok(Connection {
        rows,
        dstar: dstars,
    })
}

/// `P*_n = P_n + Σ_{k=1}^{min(n,N)} A^{[n]}_{n−k} P_{n−k}` — monic of exact
/// degree `n`.
pub fn pstar<S: Scalar>(base: &MonicOps<S>, conn: &Connection<S>, n: usize) -> Polynomial<S> {
    let mut p = base.poly(n).clone();
    for (k, a) in conn.row(n).iter().enumerate() {
        p = &p + &base.poly(n - 1 - k).scale(a);
    }
    p
}

/// Builds the full transformed sequence: connection data plus the `P*` family
/// as a [`MonicOps`] over the transformed form, with norms
/// `(h*_n)² = [P*_n, P*_n]_h`.
pub fn transform_ops<S: Scalar>(
    base: &MonicOps<S>,
    form: &BilinearForm<S>,
    upto: usize,
) -> Result<(Connection<S>, MonicOps<S>)> {
    if base.len() <= upto {
        return Err(Error::Truncation {
            need: upto + 1,
            have: base.len(),
        });
    }
    let conn = connection(base, form, upto)?;
    let polys: Vec<Polynomial<S>> = (0..=upto).map(|n| pstar(base, &conn, n)).collect();
    let mut norms2 = Vec::with_capacity(upto + 1);
    for p in &polys {
        norms2.push(form.inner(p, p)?);
    }
    let star = MonicOps::from_parts(polys, norms2, form.clone());
    Ok((conn, star))
}

/// Second route to `P*_n`: the bordered-determinant representation. The
/// `(q+1)×(q+1)` determinant with polynomial first column is expanded along
/// that column; the cofactors are `q×q` minors of inner-product entries.
pub fn pstar_determinant<S: Scalar>(
    base: &MonicOps<S>,
    form: &BilinearForm<S>,
    n: usize,
) -> Result<Polynomial<S>> {
    let big_n = transform_degree(form)?;
    let q = n.min(big_n);
    if q == 0 {
        return Ok(Polynomial::one());
    }
    // b[(i, m)] = [P_{n−i}, tᵐ]_h, one row per participating degree.
    let mut b = Mat::zeros(q + 1, q);
    for i in 0..=q {
        for m in 0..q {
            b[(i, m)] = form.inner(base.poly(n - i), &Polynomial::monomial(m))?;
        }
    }
    let minor = |skip: usize| -> Mat<S> {
        let rows: Vec<Vec<S>> = (0..=q)
            .filter(|&i| i != skip)
            .map(|i| (0..q).map(|m| b[(i, m)].clone()).collect())
            .collect();
        Mat::from_rows(rows)
    };
    let (d, bound) = det_with_scale(&minor(0));
    if d.abs() <= S::from_f64(DEFAULT_ZERO_TOL) * bound {
        return Err(Error::QuasiDefinite { degree: n });
    }
    let mut p = Polynomial::zero();
    let mut sign = S::one();
    for i in 0..=q {
        let cof = det_with_scale(&minor(i)).0;
        p = &p + &base.poly(n - i).scale(&(sign.clone() * cof / &d));
        sign = -sign;
    }
    Ok(p)
}

/// Definiteness classification of `[·,·]_h` from the `d*` sign pattern.
#[derive(Clone, Debug, PartialEq)]
pub enum Definiteness {
    /// All `d*_n ≠ 0` and every ratio satisfies its sign condition.
    PositiveDefinite,
    /// All `d*_n ≠ 0`, but some ratio violates its sign condition.
    QuasiDefinite,
    /// Some `d*_n` vanished (relative to scale): no monic orthogonal
    /// sequence through that degree.
    Indefinite { first_degenerate: usize },
}

/// Per-degree determinant data with the three sign regimes: for `n ≥ N` the
/// condition is `(−1)^N d*_{n+1}/d*_n > 0`; below `N` the ratio must be
/// positive for even `n` and negative for odd `n`.
#[derive(Clone, Debug)]
pub struct DefinitenessReport<S> {
    /// `d*_0, …, d*_{upto+1}`.
    pub dstar: Vec<S>,
    /// Ratios `d*_{n+1}/d*_n` for `n = 0..=upto`.
    pub ratios: Vec<S>,
    /// Whether the ratio at `n` satisfies its regime's sign condition.
    pub regime_ok: Vec<bool>,
    /// Whether the base form was positive definite (all base norms² > 0);
    /// the positive-definite verdict is only meaningful when it was.
    pub base_positive: bool,
    pub classification: Definiteness,
}

pub fn definiteness<S: Scalar>(
    base: &MonicOps<S>,
    form: &BilinearForm<S>,
    upto: usize,
) -> Result<DefinitenessReport<S>> {
    definiteness_with_tol(base, form, upto, DEFAULT_ZERO_TOL)
}

pub fn definiteness_with_tol<S: Scalar>(
    base: &MonicOps<S>,
    form: &BilinearForm<S>,
    upto: usize,
    zero_tol: f64,
) -> Result<DefinitenessReport<S>> {
    let big_n = transform_degree(form)?;
    let tol = S::from_f64(zero_tol);
    let mut dstars = Vec::with_capacity(upto + 2);
    let mut first_degenerate = None;
    for n in 0..=(upto + 1) {
        let m = connection_matrix(base, form, n)?;
        let (det, bound) = det_with_scale(&m);
        if first_degenerate.is_none() && det.abs() <= tol.clone() * bound {
            first_degenerate = Some(n);
        }
        dstars.push(det);
    }
    let mut ratios = Vec::with_capacity(upto + 1);
    let mut regime_ok = Vec::with_capacity(upto + 1);
    for n in 0..=upto {
        let ratio = dstars[n + 1].clone() / &dstars[n];
        let ok = if n >= big_n {
            if big_n % 2 == 0 {
                ratio > S::zero()
            } else {
                ratio < S::zero()
            }
        } else if n % 2 == 0 {
            ratio > S::zero()
        } else {
            ratio < S::zero()
        };
        ratios.push(ratio);
        regime_ok.push(ok);
    }
    let base_positive = base.norms2().iter().all(|v| *v > S::zero());
    let classification = match first_degenerate {
        Some(n) => Definiteness::Indefinite {
            first_degenerate: n,
        },
        None if base_positive && regime_ok.iter().all(|&b| b) => Definiteness::PositiveDefinite,
        None => Definiteness::QuasiDefinite,
    };
    Ok(DefinitenessReport {
        dstar: dstars,
        ratios,
        regime_ok,
        base_positive,
        classification,
    })
}

/// Both sides of the degree-raising identity
/// `[P*_n, tᵐ hᵏ]_h = (−1)^N (d*_{n+1}/d*_n) ∫ P²_{n−N} dμ₀` at
/// `n = m + Nk ≥ N` (with `m = n mod N`), each evaluated independently.
pub fn case1_pair<S: Scalar>(
    base: &MonicOps<S>,
    form: &BilinearForm<S>,
    star: &MonicOps<S>,
    n: usize,
) -> Result<(S, S)> {
    let big_n = transform_degree(form)?;
    assert!(n >= big_n, "the identity needs n ≥ N");
    let m = n % big_n;
    let k = (n - m) / big_n;
    let h = form.transform_nodes().unwrap().expand();
    let test = h.pow(k).mul_monomial(m);
    let lhs = form.inner(star.poly(n), &test)?;
    let ratio = dstar(base, form, n + 1)? / dstar(base, form, n)?;
    let sign = if big_n % 2 == 0 { S::one() } else { -S::one() };
    let rhs = sign * ratio * base.norm2(n - big_n);
    Ok((lhs, rhs))
}

/// Both sides of the small-degree identity `[P*_n, tⁿ]_h = ±d*_{n+1}/d*_n`
/// for `n < N` (`+` for even `n`, `−` for odd).
pub fn case2_pair<S: Scalar>(
    base: &MonicOps<S>,
    form: &BilinearForm<S>,
    star: &MonicOps<S>,
    n: usize,
) -> Result<(S, S)> {
    let big_n = transform_degree(form)?;
    assert!(n < big_n, "the small-degree identity needs n < N");
    let lhs = form.inner(star.poly(n), &Polynomial::monomial(n))?;
    let ratio = dstar(base, form, n + 1)? / dstar(base, form, n)?;
    let rhs = if n % 2 == 0 { ratio } else { -ratio };
    Ok((lhs, rhs))
}

/// Outcome of the kernel-based existence system at degree `n`.
#[derive(Clone, Debug)]
pub struct ExistenceSystem<S> {
    /// Whether the system was uniquely solvable — equivalently, whether
    /// `P*_n` exists. Non-solvability is data, not an error.
    pub solvable: bool,
    /// Jets of `P*_n` at the mass nodes (node order, derivatives ascending),
    /// present when solvable.
    pub jets: Option<Jet<S>>,
}

/// Assembles and solves the interpolation system tying the jets of `P*_n` to
/// the jets of `R_n` through kernel derivatives:
/// `jets(R_n) = 𝕍 · jets(P*_n)` with
/// `𝕍[(q,k),(l,i)] = δ + Σ_w Σ_j λ_{(l,i),(w,j)} K^{(j,k)}_{n−1}(α_w, α_q)`.
pub fn existence_system<S: Scalar>(
    r_ops: &MonicOps<S>,
    mass: &SobolevMass<S>,
    n: usize,
) -> Result<ExistenceSystem<S>> {
    let nodes = mass.nodes();
    let big_n = nodes.n();
    if r_ops.len() <= n {
        return Err(Error::Truncation {
            need: n + 1,
            have: r_ops.len(),
        });
    }
    let mut v = Mat::<S>::identity(big_n);
    if n > 0 {
        let mut row = 0;
        for (alpha_q, beta_q) in nodes.nodes() {
            for k in 0..*beta_q {
                let mut col = 0;
                for (l, (_, beta_l)) in nodes.nodes().iter().enumerate() {
                    for i in 0..*beta_l {
                        let mut acc = S::zero();
                        for (w, (alpha_w, beta_w)) in nodes.nodes().iter().enumerate() {
                            for j in 0..*beta_w {
                                let lam = mass.entry(l, i, w, j);
                                if lam.is_zero() {
                                    continue;
                                }
                                acc =
                                    acc + lam * r_ops.kernel_deriv(n - 1, j, k, alpha_w, alpha_q);
                            }
                        }
                        v[(row, col)] = v[(row, col)].clone() + acc;
                        col += 1;
                    }
                }
                row += 1;
            }
        }
    }
    let r_jets = jet(r_ops.poly(n), nodes);
    let (det, bound) = det_with_scale(&v);
    if det.abs() <= S::from_f64(DEFAULT_ZERO_TOL) * bound {
        return Ok(ExistenceSystem {
            solvable: false,
            jets: None,
        });
    }
    let sol = lu(&v).solve(&r_jets.values);
    Ok(match sol {
        Some(values) => ExistenceSystem {
            solvable: true,
            jets: Some(Jet { values }),
        },
        None => ExistenceSystem {
            solvable: false,
            jets: None,
        },
    })
}

/// Expansion of `h·P*_n` in the monic orthogonal basis `{R_k}` of `μ`,
/// together with the inner products `(P*_{n+N}, R_k)₀`, `k < n`, that vanish
/// in exact arithmetic.
#[derive(Clone, Debug)]
pub struct RConnection<S> {
    /// Projection coefficients `b_k = [h·P*_n, R_k]_μ / ‖R_k‖²_μ` for
    /// `k = 0..=n+N`. The leading one is 1 and everything below index `n−N`
    /// vanishes, up to rounding.
    pub coeffs: Vec<S>,
    /// `(P*_{n+N}, R_k)₀` for `k = 0..n`, unnormalized.
    pub rel_inner: Vec<S>,
}

/// Projects `h·P*_n` onto the `R` basis (projection is the authoritative
/// expansion route) and evaluates the companion orthogonality relations under
/// the `μ₀` measure form of `base_form`.
pub fn connect_to_r<S: Scalar>(
    r_ops: &MonicOps<S>,
    base_form: &BilinearForm<S>,
    star: &MonicOps<S>,
    h: &FactoredNodes<S>,
    n: usize,
) -> Result<RConnection<S>> {
    let big_n = h.n();
    if r_ops.len() <= n + big_n || star.len() <= n + big_n {
        return Err(Error::Truncation {
            need: n + big_n + 1,
            have: r_ops.len().min(star.len()),
        });
    }
    let hp = h.expand();
    let target = &hp * star.poly(n);
    let mu_form = r_ops.form();
    let mut coeffs = Vec::with_capacity(n + big_n + 1);
    for k in 0..=(n + big_n) {
        let b = mu_form.inner(&target, r_ops.poly(k))? / r_ops.norm2(k);
        coeffs.push(b);
    }
    let mut rel_inner = Vec::with_capacity(n);
    for k in 0..n {
        rel_inner.push(base_form.inner(star.poly(n + big_n), r_ops.poly(k))?);
    }
    Ok(RConnection { coeffs, rel_inner })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{lambda_to_shat, pushforward_moments, GeronimusParams, MomentFunctional};
    use crate::orthopoly::{gs_oracle, monic_ops};
    use crate::poly::{h_basis_decompose, s_slice};
    use rand::{Rng, SeedableRng};

    type P = Polynomial<f64>;

    /// Laguerre(α) + Geronimus form for given h and jet masses, plus the base
    /// sequence of μ₀ = h·μ covering degrees 0..=upto+N.
    fn setup(
        alpha: f64,
        h_nodes: &[(f64, usize)],
        lambda: Mat<f64>,
        upto: usize,
    ) -> (MonicOps<f64>, BilinearForm<f64>) {
        let mu = MomentFunctional::laguerre(alpha);
        let h = FactoredNodes::new(h_nodes.to_vec()).unwrap();
        let mass = SobolevMass::new(h.clone(), lambda).unwrap();
        let params = lambda_to_shat(&mu, &mass).unwrap();
        let form = BilinearForm::geronimus(mu.clone(), params).unwrap();
        let mu0 = pushforward_moments(&mu, &h, 4 * (upto + h.n()) + 4).unwrap();
        let base = monic_ops(&BilinearForm::measure(mu0), upto + h.n()).unwrap();
        (base, form)
    }

    fn diag(vals: &[f64]) -> Mat<f64> {
        let n = vals.len();
        let mut m = Mat::zeros(n, n);
        for (k, v) in vals.iter().enumerate() {
            m[(k, k)] = *v;
        }
        m
    }

    fn max_coeff_diff(a: &P, b: &P) -> f64 {
        let diff = a - b;
        diff.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    #[test]
    fn trivial_params_reduce_to_r_sequence() {
        // Ŝ = moment block ⇒ [·,·]_h is the μ form ⇒ P*_n = R_n.
        let mu = MomentFunctional::laguerre(0.0);
        let h = FactoredNodes::new(vec![(0.0, 1)]).unwrap();
        let params = GeronimusParams::trivial(h.clone(), &mu).unwrap();
        let form = BilinearForm::geronimus(mu.clone(), params).unwrap();
        let mu0 = pushforward_moments(&mu, &h, 60).unwrap();
        let base = monic_ops(&BilinearForm::measure(mu0), 13).unwrap();
        let r_ops = monic_ops(&BilinearForm::measure(mu), 12).unwrap();

        let (conn, star) = transform_ops(&base, &form, 12).unwrap();
        for n in 0..=12 {
            let scale = r_ops
                .poly(n)
                .coeffs()
                .iter()
                .fold(0.0f64, |m, c| m.max(c.abs()));
            assert!(
                max_coeff_diff(star.poly(n), r_ops.poly(n)) <= 1e-8 * scale,
                "P*_{n} ≠ R_{n}"
            );
        }
        assert_eq!(conn.row(0).len(), 0);
        assert_eq!(*conn.dstar(0), 1.0);
    }

    #[test]
    fn n1_connection_matches_closed_form() {
        // N=1: A^{[n]}_{n−1} = −[P_n,1]_h/[P_{n−1},1]_h and d*_n = [P_{n−1},1]_h.
        let (base, form) = setup(0.0, &[(0.0, 1)], diag(&[1.0]), 12);
        for n in 1..=10 {
            let (row, det) = connection_row(&base, &form, n).unwrap();
            let num = form.inner(base.poly(n), &P::one()).unwrap();
            let den = form.inner(base.poly(n - 1), &P::one()).unwrap();
            let expect = -num / den;
            assert!((row[0] - expect).abs() <= 1e-10 * expect.abs());
            assert!((det - den).abs() <= 1e-12 * den.abs());
        }
    }

    #[test]
    fn pstar_is_monic_and_orthogonal_to_lower_monomials() {
        let (base, form) = setup(1.0, &[(0.0, 2)], diag(&[0.5, 2.0]), 12);
        let (_, star) = transform_ops(&base, &form, 12).unwrap();
        for n in 0..=12 {
            let p = star.poly(n);
            assert_eq!(p.degree(), Some(n));
            assert!((p.coeff(n) - 1.0).abs() <= 1e-10);
            let hn = star.norm2(n).abs().sqrt();
            for m in 0..n {
                let v = form.inner(p, &P::monomial(m)).unwrap();
                let tm_norm = form
                    .inner(&P::monomial(m), &P::monomial(m))
                    .unwrap()
                    .abs()
                    .sqrt();
                assert!(
                    v.abs() <= 1e-8 * hn * tm_norm,
                    "degree {n} vs t^{m}: {v:e}"
                );
            }
        }
    }

    #[test]
    fn small_degree_rows_have_n_terms() {
        let (base, form) = setup(0.0, &[(0.0, 2), (1.0, 1)], diag(&[1.0, 1.0, 1.0]), 8);
        let (conn, _) = transform_ops(&base, &form, 8).unwrap();
        assert_eq!(conn.row(0).len(), 0);
        assert_eq!(conn.row(1).len(), 1);
        assert_eq!(conn.row(2).len(), 2);
        assert_eq!(conn.row(3).len(), 3);
        assert_eq!(conn.row(4).len(), 3);
    }

    #[test]
    fn dstar_conventions() {
        let (base, form) = setup(0.0, &[(0.0, 1)], diag(&[1.0]), 8);
        assert_eq!(dstar(&base, &form, 0).unwrap(), 1.0);
        // N=1: d*_n = [P_{n−1}, 1]_h.
        let d3 = dstar(&base, &form, 3).unwrap();
        let expect = form.inner(base.poly(2), &P::one()).unwrap();
        assert!((d3 - expect).abs() <= 1e-12 * expect.abs());
    }

    #[test]
    fn three_paths_agree() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let configs: Vec<(f64, Vec<(f64, usize)>)> = vec![
            (0.0, vec![(0.0, 1)]),
            (1.0, vec![(0.0, 2)]),
            (0.0, vec![(0.0, 1), (1.0, 1)]),
            (2.0, vec![(0.0, 1), (1.0, 2)]),
        ];
        for (alpha, nodes) in configs {
            let nn: usize = nodes.iter().map(|(_, b)| b).sum();
            let mut b = Mat::<f64>::zeros(nn, nn);
            for i in 0..nn {
                for j in 0..nn {
                    b[(i, j)] = rng.random_range(-1.0..1.0);
                }
            }
            let lambda = b.transpose().matmul(&b);
            let (base, form) = setup(alpha, &nodes, lambda, 10);
            let (_, star) = transform_ops(&base, &form, 10).unwrap();
            let oracle = gs_oracle(&form, 10).unwrap();
            for n in 0..=10 {
                let via_det = pstar_determinant(&base, &form, n).unwrap();
                let scale = star
                    .poly(n)
                    .coeffs()
                    .iter()
                    .fold(0.0f64, |m, c| m.max(c.abs()));
                assert!(
                    max_coeff_diff(star.poly(n), &via_det) <= 1e-7 * scale,
                    "determinant path at {n} (α={alpha})"
                );
                assert!(
                    max_coeff_diff(star.poly(n), oracle.poly(n)) <= 1e-7 * scale,
                    "gs path at {n} (α={alpha})"
                );
            }
        }
    }

    #[test]
    fn norm_identity() {
        // (h*_{n+N})² = A_n^{[n+N]}·h_n², on positive-definite setups (the
        // identity feeds the Cholesky factorization, which needs positivity).
        for (alpha, nodes, masses) in [
            (0.0, vec![(0.0, 1)], vec![1.0]),
            (1.0, vec![(0.0, 2)], vec![1.0, 1.0]),
        ] {
            let nn: usize = nodes.iter().map(|(_, b)| b).sum();
            let (base, form) = setup(alpha, &nodes, diag(&masses), 12);
            let (conn, star) = transform_ops(&base, &form, 12).unwrap();
            for n in 0..=(12 - nn) {
                let lhs = *star.norm2(n + nn);
                let a = conn.coeff(n + nn, nn);
                let rhs = a * base.norm2(n);
                assert!(
                    (lhs - rhs).abs() <= 1e-9 * lhs.abs().max(rhs.abs()),
                    "α={alpha}, n={n}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn series_oracle_for_entries() {
        // [P_j, t^q]_h = Σ_{m≥1} ∫ (S_{m,h}(P_j)/h)·t^q dμ₀ + Σ_k a_{0,k}·s_{k,q}.
        let (base, form) = setup(1.0, &[(0.0, 2)], diag(&[0.7, 0.2]), 9);
        let params = form.geronimus_params().unwrap().clone();
        let h = params.h().clone();
        let hp = h.expand();
        let mu0 = pushforward_moments(form.mu(), &h, 40).unwrap();
        for j in [1usize, 3, 6, 9] {
            for q in 0..h.n() {
                let direct = form.inner(base.poly(j), &P::monomial(q)).unwrap();
                let basis = h_basis_decompose(base.poly(j), &h);
                let mut series = 0.0;
                for m in 1..basis.levels() {
                    let slice = s_slice(base.poly(j), &h, m);
                    let (quot, _) = slice.div_rem(&hp);
                    series += mu0.integrate(&(&quot * &P::monomial(q))).unwrap();
                }
                for k in 0..h.n() {
                    series += basis.coeff(0, k) * params.shat()[(k, q)];
                }
                assert!(
                    (direct - series).abs() <= 1e-9 * direct.abs().max(1.0),
                    "entry ({j},{q}): {direct} vs {series}"
                );
            }
        }
    }

    #[test]
    fn definiteness_matches_gram_cholesky() {
        // Scan diagonal masses incl. sign flips; the sign-pattern verdict must
        // equal Cholesky success of the transformed Gram.
        let mu = MomentFunctional::laguerre(0.0);
        let h = FactoredNodes::new(vec![(0.0, 1)]).unwrap();
        let mu0 = pushforward_moments(&mu, &h, 80).unwrap();
        let base = monic_ops(&BilinearForm::measure(mu0), 17).unwrap();
        for lam in [-2.0, -0.5, -0.05, 0.0, 0.1, 1.0, 10.0] {
            let mass = SobolevMass::diagonal(h.clone(), vec![lam]).unwrap();
            let params = lambda_to_shat(&mu, &mass).unwrap();
            let form = BilinearForm::geronimus(mu.clone(), params).unwrap();
            let report = definiteness(&base, &form, 15).unwrap();
            let gram = form.gram(15).unwrap();
            let chol_ok = crate::linalg::cholesky_lower(&gram).is_ok();
            let verdict_positive = report.classification == Definiteness::PositiveDefinite;
            assert_eq!(
                verdict_positive, chol_ok,
                "λ={lam}: verdict {:?} vs cholesky {chol_ok}",
                report.classification
            );
        }
    }

    #[test]
    fn case1_identity_holds() {
        let (base, form) = setup(0.0, &[(0.0, 1), (1.0, 1)], diag(&[1.0, 1.0]), 12);
        let (_, star) = transform_ops(&base, &form, 12).unwrap();
        for n in 2..=10 {
            let (lhs, rhs) = case1_pair(&base, &form, &star, n).unwrap();
            assert!(
                (lhs - rhs).abs() <= 1e-7 * lhs.abs().max(rhs.abs()),
                "n={n}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn case2_identity_holds() {
        let (base, form) = setup(1.0, &[(0.0, 3)], diag(&[1.0, 0.5, 0.25]), 6);
        let (_, star) = transform_ops(&base, &form, 6).unwrap();
        for n in 0..3 {
            let (lhs, rhs) = case2_pair(&base, &form, &star, n).unwrap();
            assert!(
                (lhs - rhs).abs() <= 1e-8 * lhs.abs().max(rhs.abs()),
                "n={n}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn existence_trivial_masses() {
        // Λ = 0 ⇒ 𝕍 = I and the jets are those of R_n.
        let mu = MomentFunctional::laguerre(0.0);
        let h = FactoredNodes::new(vec![(0.0, 1), (1.0, 1)]).unwrap();
        let r_ops = monic_ops(&BilinearForm::measure(mu), 8).unwrap();
        let mass = SobolevMass::zero(h.clone());
        let out = existence_system(&r_ops, &mass, 5).unwrap();
        assert!(out.solvable);
        let expect = jet(r_ops.poly(5), &h);
        for (a, b) in out.jets.unwrap().values.iter().zip(&expect.values) {
            assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
        }
    }

    #[test]
    fn existence_jets_match_connection_path() {
        let mu = MomentFunctional::laguerre(0.0);
        let h = FactoredNodes::new(vec![(0.0, 2)]).unwrap();
        let lambda = diag(&[0.8, 0.3]);
        let mass = SobolevMass::new(h.clone(), lambda.clone()).unwrap();
        let r_ops = monic_ops(&BilinearForm::measure(mu.clone()), 12).unwrap();
        let (base, form) = setup(0.0, &[(0.0, 2)], lambda, 12);
        let (_, star) = transform_ops(&base, &form, 12).unwrap();
        for n in [1usize, 4, 8, 12] {
            let out = existence_system(&r_ops, &mass, n).unwrap();
            assert!(out.solvable, "n={n}");
            let direct = jet(star.poly(n), &h);
            let scale = direct.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for (a, b) in out.jets.unwrap().values.iter().zip(&direct.values) {
                assert!((a - b).abs() <= 1e-7 * scale, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn connect_to_r_structure() {
        let (base, form) = setup(0.0, &[(0.0, 1), (1.0, 1)], diag(&[1.0, 1.0]), 14);
        let (_, star) = transform_ops(&base, &form, 14).unwrap();
        let mu = form.mu().clone();
        let r_ops = monic_ops(&BilinearForm::measure(mu), 14).unwrap();
        let h = form.transform_nodes().unwrap().clone();
        let nn = h.n();
        for n in [2usize, 5, 9] {
            let rc = connect_to_r(&r_ops, base.form(), &star, &h, n).unwrap();
            // Unit leading coefficient.
            assert!((rc.coeffs[n + nn] - 1.0).abs() <= 1e-9);
            // Vanishing below n−N, relative to the projection scale
            // ‖h·P*_n‖/‖R_k‖.
            let target = &h.expand() * star.poly(n);
            let tnorm = r_ops.form().inner(&target, &target).unwrap().sqrt();
            for (k, c) in rc.coeffs.iter().enumerate().take(n.saturating_sub(nn)) {
                let scale = tnorm / r_ops.norm2(k).sqrt();
                assert!(c.abs() <= 1e-8 * scale, "b_{k} = {c} at n={n}");
            }
            // c^{[n]}_{n−N} ≠ 0 on positive setups.
            if n >= nn {
                assert!(rc.coeffs[n - nn].abs() > 1e-6, "c_(n−N) vanished");
            }
            // (P*_{n+N}, R_k)₀ = 0 for k < n.
            for (k, v) in rc.rel_inner.iter().enumerate() {
                let scale = (star.norm2(n + nn).abs() * r_ops.norm2(k)).sqrt();
                assert!(v.abs() <= 1e-8 * scale, "rel ({n},{k})");
            }
        }
    }

    #[test]
    fn h_pn_expansion_truncates_below_n() {
        // b_k^{[n]} = [h·P_n, R_k]_μ/‖R_k‖² = (P_n, R_k)₀/‖R_k‖² vanishes for
        // k < n: the h·P_n expansion in the R basis starts at R_n.
        let mu = MomentFunctional::laguerre(0.0);
        let h = FactoredNodes::new(vec![(0.0, 1)]).unwrap();
        let r_ops = monic_ops(&BilinearForm::measure(mu.clone()), 14).unwrap();
        let mu0 = pushforward_moments(&mu, &h, 60).unwrap();
        let base = monic_ops(&BilinearForm::measure(mu0), 13).unwrap();
        let hp = h.expand();
        for n in [3usize, 7, 11] {
            let target = &hp * base.poly(n);
            let tnorm = r_ops.form().inner(&target, &target).unwrap().sqrt();
            for k in 0..n {
                let b = r_ops.form().inner(&target, r_ops.poly(k)).unwrap() / r_ops.norm2(k);
                let scale = tnorm / r_ops.norm2(k).sqrt();
                assert!(b.abs() <= 1e-9 * scale, "b_{k} = {b} at n={n}");
            }
        }
    }
}

