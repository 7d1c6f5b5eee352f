//! Moment functionals and the bilinear forms they generate.
//!
//! Three forms appear in the pipeline:
//!
//! * the measure form `(f,g) = ∫ fg dμ₀`,
//! * the discrete Sobolev form `∫ fg dμ + jet(f)ᵀ Λ jet(g)`, and
//! * the Geronimus form `[·,·]_h`, parametrized by the free symmetric block
//!   `Ŝ = ([tⁱ,tʲ]_h)` and evaluated through the representation
//!   `[f,g]_h = ∫ fg dμ + Fᵀ 𝒜⁻ᵀ (Ŝ − M) 𝒜⁻¹ G` with `M` the moment block.
//!
//! The Sobolev and Geronimus parametrizations are equivalent; `lambda_to_shat`
//! and `shat_to_lambda` translate between the jet-basis masses `Λ` and `Ŝ`.

use crate::linalg::{cond_1norm, lu, Mat};
use crate::poly::{jet, FactoredNodes, Polynomial};
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Condition threshold above which assemblies warn (but do not fail).
pub const COND_WARN_THRESHOLD: f64 = 1e12;

/// Default moment horizon for Laguerre functionals in binary64 (Γ overflows
/// shortly above this).
pub const DEFAULT_LAGUERRE_HORIZON: usize = 160;

/// A positive (or at least real) moment sequence `moment(k) = ∫ tᵏ dμ`.
#[derive(Clone, Debug, PartialEq)]
pub enum MomentFunctional<S> {
    /// `dμ = t^α e^{−t} dt` on `[0,∞)`, `α > −1`; `moment(k) = Γ(α+k+1)`.
    Laguerre { alpha: S, horizon: usize },
    /// Explicit list of moments.
    Explicit { moments: Vec<S> },
    /// Discrete measure `Σ wᵢ δ(xᵢ)`.
    Quadrature { nodes: Vec<S>, weights: Vec<S> },
}

impl<S: Scalar> MomentFunctional<S> {
    pub fn laguerre(alpha: S) -> Self {
        MomentFunctional::Laguerre {
            alpha,
            horizon: DEFAULT_LAGUERRE_HORIZON,
        }
    }

    pub fn laguerre_with_horizon(alpha: S, horizon: usize) -> Self {
        MomentFunctional::Laguerre { alpha, horizon }
    }

    pub fn explicit(moments: Vec<S>) -> Self {
        MomentFunctional::Explicit { moments }
    }

    pub fn quadrature(nodes: Vec<S>, weights: Vec<S>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::Invalid(
                "quadrature nodes and weights must have equal length".into(),
            ));
        }
        Ok(MomentFunctional::Quadrature { nodes, weights })
    }

    pub fn horizon(&self) -> usize {
        match self {
            MomentFunctional::Laguerre { horizon, .. } => *horizon,
            MomentFunctional::Explicit { moments } => moments.len().saturating_sub(1),
            MomentFunctional::Quadrature { .. } => usize::MAX,
        }
    }

    /// `∫ tᵏ dμ`.
    pub fn moment(&self, k: usize) -> Result<S> {
        if k > self.horizon() {
            return Err(Error::MomentHorizon {
                needed: k,
                horizon: self.horizon(),
            });
        }
        match self {
            MomentFunctional::Laguerre { alpha, .. } => {
                // m₀ = Γ(α+1), m_{j+1} = (α+j+1)·m_j
                let mut m = (alpha.clone() + S::one()).gamma();
                for j in 0..k {
                    m = m * (alpha.clone() + S::from_usize(j + 1));
                }
                Ok(m)
            }
            MomentFunctional::Explicit { moments } => Ok(moments[k].clone()),
            MomentFunctional::Quadrature { nodes, weights } => {
                let mut acc = S::zero();
                for (x, w) in nodes.iter().zip(weights) {
                    let mut p = S::one();
                    for _ in 0..k {
                        p = p * x;
                    }
                    acc = acc + w.clone() * p;
                }
                Ok(acc)
            }
        }
    }

    /// `∫ p dμ`, summed in ascending coefficient order.
    pub fn integrate(&self, p: &Polynomial<S>) -> Result<S> {
        let mut acc = S::zero();
        for (k, c) in p.coeffs().iter().enumerate() {
            acc = acc + c.clone() * self.moment(k)?;
        }
        Ok(acc)
    }

    /// Hankel moment matrix `(m_{i+j})`, exactly symmetric by construction.
    pub fn hankel(&self, n: usize) -> Result<Mat<S>> {
        let mut g = Mat::zeros(n + 1, n + 1);
        for s in 0..=(2 * n) {
            let m = self.moment(s)?;
            for i in s.saturating_sub(n)..=s.min(n) {
                g[(i, s - i)] = m.clone();
            }
        }
        Ok(g)
    }
}

/// Moments of `dμ₀ = h dμ`: `m₀(k) = Σⱼ bⱼ·m(k+j)` with `bⱼ` the coefficients
/// of the expanded `h`.
pub fn pushforward_moments<S: Scalar>(
    mu: &MomentFunctional<S>,
    h: &FactoredNodes<S>,
    horizon: usize,
) -> Result<MomentFunctional<S>> {
    let hp = h.expand();
    let n = h.n();
    if mu.horizon() != usize::MAX && mu.horizon() < horizon + n {
        return Err(Error::MomentHorizon {
            needed: horizon + n,
            horizon: mu.horizon(),
        });
    }
    let mut moments = Vec::with_capacity(horizon + 1);
    for k in 0..=horizon {
        let mut acc = S::zero();
        for (j, b) in hp.coeffs().iter().enumerate() {
            acc = acc + b.clone() * mu.moment(k + j)?;
        }
        moments.push(acc);
    }
    Ok(MomentFunctional::Explicit { moments })
}

/// Symmetric jet-basis masses `Λ` of a discrete Sobolev inner product
/// `∫ fg dμ + Σ λ_{i,j,l,w} f⁽ⁱ⁾(α_l) g⁽ʲ⁾(α_w)`.
///
/// The table is stored as an `N×N` matrix in jet ordering (nodes in input
/// order, derivative order ascending within a node).
#[derive(Clone, Debug, PartialEq)]
pub struct SobolevMass<S> {
    nodes: FactoredNodes<S>,
    lambda: Mat<S>,
}

impl<S: Scalar> SobolevMass<S> {
    pub fn new(nodes: FactoredNodes<S>, lambda: Mat<S>) -> Result<Self> {
        let n = nodes.n();
        if lambda.nrows() != n || lambda.ncols() != n {
            return Err(Error::Invalid(format!(
                "mass table must be {n}×{n} for deg h = {n}"
            )));
        }
        if !lambda.asymmetry().is_zero() {
            return Err(Error::Invalid(
                "mass table must be symmetric (λ_{i,j,l,w} = λ_{j,i,w,l})".into(),
            ));
        }
        Ok(SobolevMass { nodes, lambda })
    }

    pub fn zero(nodes: FactoredNodes<S>) -> Self {
        let n = nodes.n();
        SobolevMass {
            nodes,
            lambda: Mat::zeros(n, n),
        }
    }

    /// Diagonal masses, one per jet position.
    pub fn diagonal(nodes: FactoredNodes<S>, masses: Vec<S>) -> Result<Self> {
        let n = nodes.n();
        if masses.len() != n {
            return Err(Error::Invalid(format!("expected {n} diagonal masses")));
        }
        let mut lambda = Mat::zeros(n, n);
        for (k, m) in masses.into_iter().enumerate() {
            lambda[(k, k)] = m;
        }
        Ok(SobolevMass { nodes, lambda })
    }

    pub fn nodes(&self) -> &FactoredNodes<S> {
        &self.nodes
    }

    pub fn lambda(&self) -> &Mat<S> {
        &self.lambda
    }

    /// `λ_{i,j,l,w}` = mass coupling derivative `i` at node `l` with
    /// derivative `j` at node `w`.
    pub fn entry(&self, l: usize, i: usize, w: usize, j: usize) -> S {
        let a = self.nodes.jet_index(l, i);
        let b = self.nodes.jet_index(w, j);
        self.lambda[(a, b)].clone()
    }
}

/// Free parameters of the Geronimus form: the transforming polynomial `h` and
/// the symmetric block `Ŝ` with entries `s_{i,j} = [tⁱ, tʲ]_h`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeronimusParams<S> {
    h: FactoredNodes<S>,
    shat: Mat<S>,
}

impl<S: Scalar> GeronimusParams<S> {
    pub fn new(h: FactoredNodes<S>, shat: Mat<S>) -> Result<Self> {
        let n = h.n();
        if shat.nrows() != n || shat.ncols() != n {
            return Err(Error::Invalid(format!("Ŝ must be {n}×{n} for deg h = {n}")));
        }
        if !shat.asymmetry().is_zero() {
            return Err(Error::Invalid("Ŝ must be symmetric".into()));
        }
        Ok(GeronimusParams { h, shat })
    }

    /// The trivial choice `Ŝ = (m_{i+j})`, which makes `[·,·]_h` collapse to
    /// the measure form of `μ`.
    pub fn trivial(h: FactoredNodes<S>, mu: &MomentFunctional<S>) -> Result<Self> {
        let n = h.n();
        let mut shat = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                shat[(i, j)] = mu.moment(i + j)?;
            }
        }
        Ok(GeronimusParams { h, shat })
    }

    pub fn h(&self) -> &FactoredNodes<S> {
        &self.h
    }

    pub fn shat(&self) -> &Mat<S> {
        &self.shat
    }
}

/// `Ŝ = 𝒜ᵀ Λ 𝒜 + (m_{i+j})`: the parameter block generating a given discrete
/// Sobolev inner product as a Geronimus form.
pub fn lambda_to_shat<S: Scalar>(
    mu: &MomentFunctional<S>,
    mass: &SobolevMass<S>,
) -> Result<GeronimusParams<S>> {
    let n = mass.nodes().n();
    let a = mass.nodes().confluent_matrix();
    let sandwich = a.transpose().matmul(mass.lambda()).matmul(&a);
    let mut shat = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = sandwich[(i, j)].clone() + mu.moment(i + j)?;
            shat[(i, j)] = v.clone();
            shat[(j, i)] = v;
        }
    }
    GeronimusParams::new(mass.nodes().clone(), shat)
}

/// Inverse of [`lambda_to_shat`]: recovers the jet-basis masses
/// `Λ = 𝒜⁻ᵀ (Ŝ − M) 𝒜⁻¹`.
pub fn shat_to_lambda<S: Scalar>(
    mu: &MomentFunctional<S>,
    params: &GeronimusParams<S>,
) -> Result<SobolevMass<S>> {
    let n = params.h().n();
    let a = params.h().confluent_matrix();
    let cond = cond_1norm(&a);
    if cond > COND_WARN_THRESHOLD {
        log::warn!("confluent matrix is ill-conditioned (cond ≈ {cond:.3e}); mass recovery may lose accuracy");
    }
    let a_inv = lu(&a)
        .inverse()
        .ok_or_else(|| Error::Invalid("confluent matrix is numerically singular".into()))?;
    let mut s = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] = params.shat()[(i, j)].clone() - mu.moment(i + j)?;
        }
    }
    let raw = a_inv.transpose().matmul(&s).matmul(&a_inv);
    // S is symmetric, so Λ is; mirror the upper triangle to keep it exact.
    let mut lambda = Mat::zeros(n, n);
    let half = S::from_f64(0.5);
    for i in 0..n {
        for j in i..n {
            let v = (raw[(i, j)].clone() + &raw[(j, i)]) * &half;
            lambda[(i, j)] = v.clone();
            lambda[(j, i)] = v;
        }
    }
    SobolevMass::new(params.h().clone(), lambda)
}

#[derive(Clone, Debug, PartialEq)]
enum FormKind<S> {
    Measure,
    Sobolev {
        mass: SobolevMass<S>,
    },
    Geronimus {
        params: GeronimusParams<S>,
        mass_eff: SobolevMass<S>,
    },
}

/// A symmetric bilinear form on polynomials with computable Gram matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct BilinearForm<S> {
    mu: MomentFunctional<S>,
    kind: FormKind<S>,
}

impl<S: Scalar> BilinearForm<S> {
    /// `(f,g) = ∫ fg dμ`.
    pub fn measure(mu: MomentFunctional<S>) -> Self {
        BilinearForm {
            mu,
            kind: FormKind::Measure,
        }
    }

    /// `⟨f,g⟩ = ∫ fg dμ + jet(f)ᵀ Λ jet(g)`.
    pub fn sobolev(mu: MomentFunctional<S>, mass: SobolevMass<S>) -> Self {
        BilinearForm {
            mu,
            kind: FormKind::Sobolev { mass },
        }
    }

    /// The multiple Geronimus transformation `[·,·]_h` of the measure form of
    /// `μ₀ = h·μ`, with free block `Ŝ`.
    pub fn geronimus(mu: MomentFunctional<S>, params: GeronimusParams<S>) -> Result<Self> {
        let cond = cond_1norm(&params.h().confluent_matrix());
        if cond > COND_WARN_THRESHOLD {
            log::warn!("confluent matrix is ill-conditioned (cond ≈ {cond:.3e})");
        }
        let mass_eff = shat_to_lambda(&mu, &params)?;
        Ok(BilinearForm {
            mu,
            kind: FormKind::Geronimus { params, mass_eff },
        })
    }

    pub fn mu(&self) -> &MomentFunctional<S> {
        &self.mu
    }

    /// Measure-backed forms have Hankel Gram matrices and a three-term
    /// recurrence.
    pub fn is_measure(&self) -> bool {
        matches!(self.kind, FormKind::Measure)
    }

    pub fn geronimus_params(&self) -> Option<&GeronimusParams<S>> {
        match &self.kind {
            FormKind::Geronimus { params, .. } => Some(params),
            _ => None,
        }
    }

    /// The jet-basis masses actually used in evaluation: `Λ` for the Sobolev
    /// variant, `𝒜⁻ᵀ(Ŝ−M)𝒜⁻¹` for the Geronimus variant.
    pub fn effective_mass(&self) -> Option<&SobolevMass<S>> {
        match &self.kind {
            FormKind::Measure => None,
            FormKind::Sobolev { mass } => Some(mass),
            FormKind::Geronimus { mass_eff, .. } => Some(mass_eff),
        }
    }

    /// The transforming polynomial: `h` for the Geronimus variant, the mass
    /// node set for the Sobolev variant (the two coincide under the
    /// Sobolev ↔ Geronimus correspondence).
    pub fn transform_nodes(&self) -> Option<&FactoredNodes<S>> {
        self.effective_mass().map(SobolevMass::nodes)
    }

    /// Evaluates the form. Operands are put in a canonical order first, so
    /// `inner(f,g)` and `inner(g,f)` run the identical computation and are
    /// bit-equal.
    pub fn inner(&self, f: &Polynomial<S>, g: &Polynomial<S>) -> Result<S> {
        let (f, g) = canonical_pair(f, g);
        let measure_part = measure_inner(&self.mu, f, g)?;
        match self.effective_mass() {
            None => Ok(measure_part),
            Some(mass) => {
                let fj = jet(f, mass.nodes());
                let gj = jet(g, mass.nodes());
                Ok(measure_part + mass_term(mass.lambda(), &fj.values, &gj.values))
            }
        }
    }

    /// Magnitude bound on the terms of `inner(f,g)`:
    /// `Σ |fᵢ||gⱼ||m_{i+j}| + Σ |Λ_ab||F_a||G_b|`.
    ///
    /// `|inner(f,g)| ≤` this bound always; `ε ×` this bound is the noise
    /// floor a plain binary64 evaluation of the same sum would carry, which
    /// is the natural scale for "numerically zero" tests on inner products.
    pub fn inner_abs_bound(&self, f: &Polynomial<S>, g: &Polynomial<S>) -> Result<S> {
        let mut acc = S::zero();
        for (i, a) in f.coeffs().iter().enumerate() {
            for (j, b) in g.coeffs().iter().enumerate() {
                acc = acc + a.abs() * b.abs() * self.mu.moment(i + j)?.abs();
            }
        }
        if let Some(mass) = self.effective_mass() {
            let fj = jet(f, mass.nodes());
            let gj = jet(g, mass.nodes());
            let n = mass.nodes().n();
            for a in 0..n {
                for b in 0..n {
                    acc = acc
                        + mass.lambda()[(a, b)].abs() * fj.values[a].abs() * gj.values[b].abs();
                }
            }
        }
        Ok(acc)
    }

    /// Gram matrix `(inner(tⁱ,tʲ))_{i,j=0}^n`; Hankel for measure forms,
    /// exactly symmetric for all variants.
    pub fn gram(&self, n: usize) -> Result<Mat<S>> {
        let hankel = self.mu.hankel(n)?;
        let g = match self.effective_mass() {
            None => hankel,
            Some(mass) => {
                let nn = mass.nodes().n();
                // Jet matrix of the monomials: column j holds jet(t^j).
                let mut v = Mat::zeros(nn, n + 1);
                for j in 0..=n {
                    let col = jet(&Polynomial::monomial(j), mass.nodes());
                    for a in 0..nn {
                        v[(a, j)] = col.values[a].clone();
                    }
                }
                let mut g = hankel;
                for i in 0..=n {
                    let ci: Vec<S> = (0..nn).map(|a| v[(a, i)].clone()).collect();
                    for j in i..=n {
                        let cj: Vec<S> = (0..nn).map(|a| v[(a, j)].clone()).collect();
                        let m = mass_term(mass.lambda(), &ci, &cj);
                        g[(i, j)] = g[(i, j)].clone() + &m;
                        if j > i {
                            g[(j, i)] = g[(j, i)].clone() + &m;
                        }
                    }
                }
                g
            }
        };
        let cond = cond_1norm(&g);
        if cond > COND_WARN_THRESHOLD {
            log::warn!("Gram block of order {} is ill-conditioned (cond ≈ {cond:.3e})", n + 1);
        }
        Ok(g)
    }
}

/// Deterministic operand ordering: the same pair always computes in the same
/// orientation, making `inner` exactly symmetric whatever the accumulation.
fn canonical_pair<'a, S: Scalar>(
    f: &'a Polynomial<S>,
    g: &'a Polynomial<S>,
) -> (&'a Polynomial<S>, &'a Polynomial<S>) {
    let swap = match f.coeffs().len().cmp(&g.coeffs().len()) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => f
            .coeffs()
            .iter()
            .zip(g.coeffs())
            .find_map(|(a, b)| {
                if a < b {
                    Some(true)
                } else if a > b {
                    Some(false)
                } else {
                    None
                }
            })
            .unwrap_or(false),
    };
    if swap {
        (g, f)
    } else {
        (f, g)
    }
}

/// `Σ_{i,j} fᵢ gⱼ m_{i+j}` with compensated accumulation.
fn measure_inner<S: Scalar>(
    mu: &MomentFunctional<S>,
    f: &Polynomial<S>,
    g: &Polynomial<S>,
) -> Result<S> {
    if f.is_zero() || g.is_zero() {
        return Ok(S::zero());
    }
    let df = f.coeffs().len();
    let dg = g.coeffs().len();
    let mut moments = Vec::with_capacity(df + dg - 1);
    for s in 0..(df + dg - 1) {
        moments.push(mu.moment(s)?);
    }
    let mut terms = Vec::with_capacity(df * dg);
    for (i, a) in f.coeffs().iter().enumerate() {
        for (j, b) in g.coeffs().iter().enumerate() {
            terms.push((a.clone(), b.clone(), moments[i + j].clone()));
        }
    }
    Ok(S::sum_products(&terms))
}

/// `Σ_{a,b} Λ_ab F_a G_b`, grouping the (a,b)/(b,a) pairs so the value is
/// exactly symmetric in F ↔ G.
fn mass_term<S: Scalar>(lambda: &Mat<S>, f: &[S], g: &[S]) -> S {
    let n = lambda.nrows();
    let mut acc = S::zero();
    for a in 0..n {
        if !lambda[(a, a)].is_zero() {
            acc = acc + lambda[(a, a)].clone() * &f[a] * &g[a];
        }
        for b in (a + 1)..n {
            if lambda[(a, b)].is_zero() {
                continue;
            }
            let cross = f[a].clone() * &g[b] + f[b].clone() * &g[a];
            acc = acc + lambda[(a, b)].clone() * cross;
        }
    }
    acc
}
