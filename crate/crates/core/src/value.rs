//! Numeric values used throughout the solver.
//!
//! Linear (packet) sources produce integer entropies, so every derived quantity
//! stays an exact rational. Joint-pmf sources produce floating entropies, which
//! are compared with a fixed absolute tolerance.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Exact rational used for linear sources.
pub type Rational = Ratio<i128>;

/// Absolute tolerance for comparisons between floating values.
pub const FLOAT_TOL: f64 = 1e-9;

/// Scalar field the algorithms are generic over.
pub trait Value:
    Num + Signed + Clone + PartialOrd + Debug + Display + Sum + Send + Sync + 'static
{
    /// `true` when comparisons are exact.
    const EXACT: bool;

    fn from_int(n: i64) -> Self;

    fn from_frac(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }

    /// Equality, up to [`FLOAT_TOL`] for floats.
    fn tol_eq(&self, other: &Self) -> bool;

    /// `self < other` by more than the tolerance.
    fn tol_lt(&self, other: &Self) -> bool;

    fn tol_le(&self, other: &Self) -> bool {
        !other.tol_lt(self)
    }

    fn tol_gt(&self, other: &Self) -> bool {
        other.tol_lt(self)
    }

    /// Whether the value is an integer (within tolerance for floats).
    fn is_integral(&self) -> bool;

    fn to_f64(&self) -> f64;

    /// Exact conversion to an arbitrary-precision rational.
    fn to_big(&self) -> BigRational;

    fn from_big(value: &BigRational) -> Self;

    /// Lossless textual form: `p/q` (or `p`) for rationals, shortest
    /// round-trip decimal for floats.
    fn encode(&self) -> String;

    fn decode(text: &str) -> Option<Self>;
}

impl Value for Rational {
    const EXACT: bool = true;

    fn from_int(n: i64) -> Self {
        Ratio::from_integer(n as i128)
    }

    fn from_frac(num: i64, den: i64) -> Self {
        Ratio::new(num as i128, den as i128)
    }

    fn tol_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn tol_lt(&self, other: &Self) -> bool {
        self < other
    }

    fn is_integral(&self) -> bool {
        self.is_integer()
    }

    fn to_f64(&self) -> f64 {
        self.numer().to_f64().unwrap_or(f64::NAN) / self.denom().to_f64().unwrap_or(f64::NAN)
    }

    fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
    }

    fn from_big(value: &BigRational) -> Self {
        let numer = value.numer().to_i128().expect("rational numerator overflows i128");
        let denom = value.denom().to_i128().expect("rational denominator overflows i128");
        Ratio::new(numer, denom)
    }

    fn encode(&self) -> String {
        self.to_string()
    }

    fn decode(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Ok(r) = text.parse::<Rational>() {
            return Some(r);
        }
        // Accept terminating decimals such as "0.25".
        let (int, frac) = text.split_once('.')?;
        let negative = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches('-'), frac);
        let numer: i128 = digits.parse().ok()?;
        let denom = 10i128.checked_pow(frac.len() as u32)?;
        let r = Ratio::new(numer, denom);
        Some(if negative { -r } else { r })
    }
}

impl Value for f64 {
    const EXACT: bool = false;

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn tol_eq(&self, other: &Self) -> bool {
        (self - other).abs() <= FLOAT_TOL
    }

    fn tol_lt(&self, other: &Self) -> bool {
        *self < *other - FLOAT_TOL
    }

    fn is_integral(&self) -> bool {
        (self - self.round()).abs() <= FLOAT_TOL
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_big(&self) -> BigRational {
        BigRational::from_f64(*self).unwrap_or_else(BigRational::zero)
    }

    fn from_big(value: &BigRational) -> Self {
        value.to_f64().unwrap_or(f64::NAN)
    }

    fn encode(&self) -> String {
        format!("{self:?}")
    }

    fn decode(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Some((n, d)) = text.split_once('/') {
            let n: f64 = n.trim().parse().ok()?;
            let d: f64 = d.trim().parse().ok()?;
            return Some(n / d);
        }
        text.parse().ok()
    }
}

/// Least common multiple of the denominators of `values`.
pub fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a Rational>) -> i128 {
    use num_integer::Integer;
    values
        .into_iter()
        .fold(1i128, |acc, v| acc.lcm(v.denom()))
}
