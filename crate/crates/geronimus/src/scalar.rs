//! Working-precision abstraction.
//!
//! Every numerical routine in this crate is generic over [`Scalar`], with two
//! implementations: plain `f64` and [`rug::Float`] (MPFR) for the optional
//! high-precision mode. High-precision values are created at the precision set
//! by [`set_hp_precision`]; arithmetic then propagates that precision.

use std::cell::Cell;
use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Real scalar used throughout the crate.
///
/// Constants enter through `from_f64`/`from_usize`; everything downstream is
/// ordinary field arithmetic plus `abs`, `sqrt` and `gamma` (the latter seeds
/// Laguerre moment recursions).
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + Debug
    + Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;

    fn from_usize(v: usize) -> Self {
        Self::from_f64(v as f64)
    }
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    /// Γ(x) for x > 0.
    fn gamma(&self) -> Self;
    fn is_finite(&self) -> bool;

    /// Machine epsilon of the representation (distance from 1 to the next
    /// representable value).
    fn epsilon() -> Self;

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    /// `Σᵢ aᵢ·bᵢ·cᵢ`, accumulated in the given order.
    ///
    /// Moment sums cancel catastrophically (individual terms reach ~10²²
    /// while the result sits near zero), so the `f64` implementation uses
    /// error-free transformations; high-precision floats just sum.
    fn sum_products(terms: &[(Self, Self, Self)]) -> Self {
        let mut acc = Self::zero();
        for (a, b, c) in terms {
            acc = acc + a.clone() * b * c;
        }
        acc
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn gamma(&self) -> Self {
        gamma_f64(*self)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn epsilon() -> Self {
        f64::EPSILON
    }

    fn sum_products(terms: &[(f64, f64, f64)]) -> f64 {
        // Double-double accumulator with renormalization after every add.
        // Each a·b·c splits into exact high/low parts (two_prod twice plus a
        // split of the cross term), so the only loss is the O(ε²·Σ|terms|)
        // floor of the 106-bit accumulator itself.
        let mut hi = 0.0f64;
        let mut lo = 0.0f64;
        let mut add = |x: f64, hi: &mut f64, lo: &mut f64| {
            let s = *hi + x;
            let bb = s - *hi;
            let e = (*hi - (s - bb)) + (x - bb);
            let lo2 = *lo + e;
            *hi = s + lo2;
            *lo = lo2 - (*hi - s);
        };
        for &(a, b, c) in terms {
            let p1 = a * b;
            let e1 = f64::mul_add(a, b, -p1);
            let p2 = p1 * c;
            let e2 = f64::mul_add(p1, c, -p2);
            let p3 = e1 * c;
            let e3 = f64::mul_add(e1, c, -p3);
            add(p2, &mut hi, &mut lo);
            add(e2, &mut hi, &mut lo);
            add(p3, &mut hi, &mut lo);
            add(e3, &mut hi, &mut lo);
        }
        hi + lo
    }
}

thread_local! {
    static HP_PRECISION: Cell<u32> = const { Cell::new(256) };
}

/// Sets the mantissa precision (in bits) for subsequently created
/// high-precision values on this thread.
pub fn set_hp_precision(bits: u32) {
    assert!(
        (8..=1 << 20).contains(&bits),
        "precision must be between 8 and 2^20 bits"
    );
    HP_PRECISION.with(|p| p.set(bits));
}

/// Current high-precision mantissa size in bits.
pub fn hp_precision() -> u32 {
    HP_PRECISION.with(|p| p.get())
}

impl Scalar for rug::Float {
    fn from_f64(v: f64) -> Self {
        rug::Float::with_val(hp_precision(), v)
    }
    fn to_f64(&self) -> f64 {
        rug::Float::to_f64(self)
    }
    fn abs(&self) -> Self {
        self.clone().abs()
    }
    fn sqrt(&self) -> Self {
        self.clone().sqrt()
    }
    fn gamma(&self) -> Self {
        self.clone().gamma()
    }
    fn is_finite(&self) -> bool {
        rug::Float::is_finite(self)
    }
    fn is_zero(&self) -> bool {
        rug::Float::is_zero(self)
    }
    fn epsilon() -> Self {
        let prec = hp_precision();
        rug::Float::with_val(prec, rug::Float::i_exp(1, 1 - prec as i32))
    }
}

/// Γ(x) for positive real x, Lanczos approximation (g = 7, 9 terms).
///
/// Nonnegative integer arguments up to 170 are computed as exact factorials so
/// that integer-parameter moment sequences stay exact in `f64`.
pub fn gamma_f64(x: f64) -> f64 {
    assert!(x > 0.0, "gamma_f64 requires a positive argument, got {x}");
    if x == x.floor() && x <= 171.0 {
        let mut acc = 1.0f64;
        let mut k = 2.0f64;
        while k < x {
            acc *= k;
            k += 1.0;
        }
        return acc;
    }

    const LANCZOS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];

    if x < 0.5 {
        // Reflection; unreachable for the crate's α > −1 + 1 arguments but
        // kept so the function is total on (0, ∞).
        return std::f64::consts::PI
            / ((std::f64::consts::PI * x).sin() * gamma_f64(1.0 - x));
    }
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + 7.5;
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_integers_exact() {
        assert_eq!(gamma_f64(1.0), 1.0);
        assert_eq!(gamma_f64(4.0), 6.0);
        assert_eq!(gamma_f64(11.0), 3_628_800.0);
    }

    #[test]
    fn gamma_half() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((gamma_f64(0.5) - sqrt_pi).abs() < 1e-13 * sqrt_pi);
        assert!((gamma_f64(2.5) - 1.5 * 0.5 * sqrt_pi).abs() < 1e-13);
    }

    #[test]
    fn hp_matches_f64_at_low_precision() {
        set_hp_precision(256);
        let x = <rug::Float as Scalar>::from_f64(0.5).gamma();
        assert!((x.to_f64() - gamma_f64(0.5)).abs() < 1e-12);
        let two = <rug::Float as Scalar>::from_f64(2.0);
        assert!((two.sqrt().to_f64() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn precision_is_settable() {
        set_hp_precision(128);
        let v = <rug::Float as Scalar>::from_f64(1.0);
        assert_eq!(v.prec(), 128);
        set_hp_precision(256);
    }

    #[test]
    fn compensated_sum_survives_cancellation() {
        let terms = [(1e16, 1.0, 1.0), (1.0, 1.0, 1.0), (-1e16, 1.0, 1.0)];
        assert_eq!(f64::sum_products(&terms), 1.0);
        // Product rounding is also recovered: (1+2⁻³⁰)² has an exact tail.
        let x = 1.0 + (0.5f64).powi(30);
        let terms = [(x, x, 1.0), (-1.0, 1.0, 1.0), (-2.0 * (0.5f64).powi(30), 1.0, 1.0)];
        let exact = (0.5f64).powi(60);
        let got = f64::sum_products(&terms);
        assert!((got - exact).abs() <= 1e-3 * exact, "{got} vs {exact}");
    }
}
