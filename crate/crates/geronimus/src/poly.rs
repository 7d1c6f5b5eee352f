//! Dense real polynomials, the transforming polynomial `h` in factored form,
//! and the `h`-adapted machinery: the basis `{tᵐ hᵏ, 0 ≤ m ≤ N−1}`, derivative
//! jets at the roots of `h`, and the confluent (Hermite-interpolation) matrix
//! mapping monomial coefficients to jets.

use crate::linalg::Mat;
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Dense polynomial with coefficients in ascending powers.
///
/// The zero polynomial is the empty coefficient list; otherwise the trailing
/// coefficient is nonzero, so `degree` is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> Polynomial<S> {
    pub fn new(mut coeffs: Vec<S>) -> Self {
        while coeffs.last().is_some_and(Scalar::is_zero) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(S::one())
    }

    pub fn constant(c: S) -> Self {
        Self::new(vec![c])
    }

    /// `t^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![S::zero(); k + 1];
        coeffs[k] = S::one();
        Polynomial { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Exact degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    /// Coefficient of `t^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> S {
        self.coeffs.get(k).cloned().unwrap_or_else(S::zero)
    }

    pub fn leading(&self) -> Option<&S> {
        self.coeffs.last()
    }

    /// Horner evaluation.
    pub fn eval(&self, t: &S) -> S {
        let mut acc = S::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn scale(&self, factor: &S) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * factor).collect())
    }

    /// Formal derivative of the given order; orders beyond the degree give zero.
    pub fn derivative(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        for _ in 0..order {
            if coeffs.len() <= 1 {
                return Self::zero();
            }
            coeffs = coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| S::from_usize(k) * c)
                .collect();
        }
        Self::new(coeffs)
    }

    /// Multiplication by `t^k`.
    pub fn mul_monomial(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![S::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Polynomial { coeffs }
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Euclidean division: `self = q·d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let dd = d.degree().unwrap();
        let lead = d.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        let mut quo = vec![S::zero(); self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd {
            let k = rem.len() - 1 - dd;
            let factor = rem.last().unwrap().clone() / &lead;
            quo[k] = factor.clone();
            for j in 0..dd {
                rem[k + j] = rem[k + j].clone() - factor.clone() * &d.coeffs[j];
            }
            rem.pop();
        }
        (Self::new(quo), Self::new(rem))
    }
}

impl<S: Scalar> std::ops::Add for &Polynomial<S> {
    type Output = Polynomial<S>;
    fn add(self, rhs: &Polynomial<S>) -> Polynomial<S> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect();
        Polynomial::new(coeffs)
    }
}

impl<S: Scalar> std::ops::Sub for &Polynomial<S> {
    type Output = Polynomial<S>;
    fn sub(self, rhs: &Polynomial<S>) -> Polynomial<S> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect();
        Polynomial::new(coeffs)
    }
}

impl<S: Scalar> std::ops::Mul for &Polynomial<S> {
    type Output = Polynomial<S>;
    fn mul(self, rhs: &Polynomial<S>) -> Polynomial<S> {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = vec![S::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b;
            }
        }
        Polynomial::new(coeffs)
    }
}

impl<S: Scalar> std::ops::Neg for &Polynomial<S> {
    type Output = Polynomial<S>;
    fn neg(self) -> Polynomial<S> {
        Polynomial::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

/// The transforming polynomial `h(t) = Π (t−αᵢ)^{βᵢ}` given by its roots and
/// multiplicities. `N = Σβᵢ` is its degree.
#[derive(Clone, Debug, PartialEq)]
pub struct FactoredNodes<S> {
    nodes: Vec<(S, usize)>,
}

impl<S: Scalar> FactoredNodes<S> {
    /// Validates: at least one node, pairwise-distinct roots, multiplicities ≥ 1.
    pub fn new(nodes: Vec<(S, usize)>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Invalid(
                "the transforming polynomial needs at least one root (deg h ≥ 1)".into(),
            ));
        }
        if nodes.iter().any(|(_, b)| *b == 0) {
            return Err(Error::Invalid("multiplicities must be ≥ 1".into()));
        }
        for i in 0..nodes.len() {
            for j in (i + 1)..nodes.len() {
                if nodes[i].0 == nodes[j].0 {
                    return Err(Error::Invalid(format!(
                        "repeated root {} in the node list",
                        nodes[i].0
                    )));
                }
            }
        }
        Ok(FactoredNodes { nodes })
    }

    /// Total multiplicity `N = deg h`.
    pub fn n(&self) -> usize {
        self.nodes.iter().map(|(_, b)| b).sum()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[(S, usize)] {
        &self.nodes
    }

    pub fn root(&self, i: usize) -> &S {
        &self.nodes[i].0
    }

    pub fn multiplicity(&self, i: usize) -> usize {
        self.nodes[i].1
    }

    /// Expanded monic polynomial `Π (t−αᵢ)^{βᵢ}`.
    pub fn expand(&self) -> Polynomial<S> {
        let mut acc = Polynomial::one();
        for (root, mult) in &self.nodes {
            let factor = Polynomial::new(vec![-root.clone(), S::one()]);
            for _ in 0..*mult {
                acc = &acc * &factor;
            }
        }
        acc
    }

    /// Flat jet position of (node `i`, derivative `j`): nodes in input order,
    /// derivatives ascending within each node.
    pub fn jet_index(&self, node: usize, deriv: usize) -> usize {
        debug_assert!(deriv < self.nodes[node].1);
        self.nodes[..node].iter().map(|(_, b)| b).sum::<usize>() + deriv
    }

    /// The confluent interpolation matrix `𝒜`: row (node i, derivative j) maps
    /// monomial coefficients `(a₀,…,a_{N−1})` to `f^{(j)}(αᵢ)`. For simple
    /// roots it is the Vandermonde matrix in the roots.
    pub fn confluent_matrix(&self) -> Mat<S> {
        let n = self.n();
        let mut a = Mat::zeros(n, n);
        let mut row = 0;
        for (root, mult) in &self.nodes {
            for j in 0..*mult {
                // d^j/dt^j t^m at α: m!/(m−j)!·α^{m−j}
                let mut falling = S::one();
                for f in 0..j {
                    falling = falling * S::from_usize(j - f);
                }
                let mut power = S::one();
                for m in j..n {
                    a[(row, m)] = falling.clone() * &power;
                    power = power.clone() * root;
                    // update falling factorial m!/(m−j)! → (m+1)!/(m+1−j)!
                    falling = falling * S::from_usize(m + 1) / S::from_usize(m + 1 - j);
                }
                row += 1;
            }
        }
        a
    }
}

/// Stacked derivative values `(f(αᵢ), f′(αᵢ), …, f^{(βᵢ−1)}(αᵢ))` over all
/// nodes, in jet order.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<S> {
    pub values: Vec<S>,
}

impl<S: Scalar> Jet<S> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Derivative jet of `f` at the roots of `h`.
pub fn jet<S: Scalar>(f: &Polynomial<S>, h: &FactoredNodes<S>) -> Jet<S> {
    let mut values = Vec::with_capacity(h.n());
    for (root, mult) in h.nodes() {
        let mut d = f.clone();
        for j in 0..*mult {
            if j > 0 {
                d = d.derivative(1);
            }
            values.push(d.eval(root));
        }
    }
    Jet { values }
}

/// Coefficients of `f` in the basis `{tᵐ hᵏ}`: `table[k][m] = a_{k,m}` with
/// `0 ≤ m ≤ N−1`.
#[derive(Clone, Debug, PartialEq)]
pub struct HBasis<S> {
    table: Vec<Vec<S>>,
    n: usize,
}

impl<S: Scalar> HBasis<S> {
    /// Number of `h`-powers present (rows of the table).
    pub fn levels(&self) -> usize {
        self.table.len()
    }

    pub fn coeff(&self, k: usize, m: usize) -> S {
        debug_assert!(m < self.n);
        self.table
            .get(k)
            .map(|row| row[m].clone())
            .unwrap_or_else(S::zero)
    }

    pub fn row(&self, k: usize) -> Option<&[S]> {
        self.table.get(k).map(Vec::as_slice)
    }
}

/// Decomposes `f = Σ a_{k,m} tᵐ hᵏ` by the remainder chain of repeated
/// division by `h`; exact up to rounding.
pub fn h_basis_decompose<S: Scalar>(f: &Polynomial<S>, h: &FactoredNodes<S>) -> HBasis<S> {
    let n = h.n();
    let hp = h.expand();
    let mut table = Vec::new();
    let mut current = f.clone();
    while !current.is_zero() {
        let (q, r) = current.div_rem(&hp);
        let mut row = vec![S::zero(); n];
        for (m, c) in r.coeffs().iter().enumerate() {
            row[m] = c.clone();
        }
        table.push(row);
        current = q;
    }
    HBasis { table, n }
}

/// The slice `S_{k,h}(f) = Σₘ a_{k,m} tᵐ hᵏ`; slices over all `k` sum to `f`.
pub fn s_slice<S: Scalar>(f: &Polynomial<S>, h: &FactoredNodes<S>, k: usize) -> Polynomial<S> {
    let basis = h_basis_decompose(f, h);
    match basis.row(k) {
        None => Polynomial::zero(),
        Some(row) => {
            let r = Polynomial::new(row.to_vec());
            &r * &h.expand().pow(k)
        }
    }
}

/// The unfolding `R_{k,h}(f)(y) = Σⱼ a_{j,k} yʲ`: fixes the monomial power
/// `k ∈ [0, N−1]`, collects the coefficients along increasing `h`-powers, and
/// substitutes `h(t) → y`. Satisfies `f(t) = Σₖ tᵏ R_{k,h}(f)(h(t))`.
pub fn r_unfold<S: Scalar>(f: &Polynomial<S>, h: &FactoredNodes<S>, k: usize) -> Polynomial<S> {
    assert!(k < h.n(), "monomial power must be below deg h");
    let basis = h_basis_decompose(f, h);
    let coeffs = (0..basis.levels()).map(|j| basis.coeff(j, k)).collect();
    Polynomial::new(coeffs)
}
