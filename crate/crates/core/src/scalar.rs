//! Arithmetic backends for cylinder weights.
//!
//! Everything measure-theoretic in this crate is generic over [`Scalar`],
//! with two implementations: exact arbitrary-precision rationals
//! ([`Rational`]) and `f64`. Exact arithmetic is the reference semantics —
//! identities that hold on the nose (invariance defects, telescoping
//! products, smoothing closed forms) are asserted with zero tolerance there.
//! The float backend exists for map-generated measures and trigonometric
//! pipelines, where tolerances are explicit at every call site.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar used by the `Rational` backend.
pub type Rational = BigRational;

/// Identifies which arithmetic backend a scalar type provides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Rational,
    Float,
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Backend::Rational => write!(f, "rational"),
            Backend::Float => write!(f, "float"),
        }
    }
}

/// Weight arithmetic: ordered field operations plus conversion and
/// serialization hooks. `Signed` supplies `abs`; comparisons come from
/// `PartialOrd` (total on the values we produce — no NaNs enter through
/// validated constructors).
pub trait Scalar:
    Clone
    + std::fmt::Debug
    + std::fmt::Display
    + PartialEq
    + PartialOrd
    + Signed
    + Send
    + Sync
    + 'static
{
    const BACKEND: Backend;

    fn from_ratio(num: i64, den: u64) -> Self;

    fn from_rational(r: &Rational) -> Self;

    fn to_f64(&self) -> f64;

    /// True when arithmetic is exact and zero-tolerance comparisons are meaningful.
    fn exact() -> bool {
        Self::BACKEND == Backend::Rational
    }

    /// Integer power by repeated multiplication (exponents stay desk-scale).
    fn powu(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc * self.clone();
        }
        acc
    }

    /// Sum a slice. The float implementation compensates rounding so that
    /// validation of unit total mass stays honest at large cell counts.
    fn sum_slice(xs: &[Self]) -> Self {
        let mut acc = Self::zero();
        for x in xs {
            acc = acc + x.clone();
        }
        acc
    }

    /// Parse a weight entry from its file form (`"4/27"`, `"0.25"`, `"3"`).
    fn parse_weight(s: &str) -> Result<Self>;

    /// Render a weight entry for the file form. Rationals print exactly;
    /// floats print with 17 significant digits so the value round-trips.
    fn format_weight(&self) -> String;
}

impl Scalar for Rational {
    const BACKEND: Backend = Backend::Rational;

    fn from_ratio(num: i64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // Falls back to a scaled division when the parts overflow f64.
            let num = self.numer();
            let den = self.denom();
            let shift = (den.bits() as i64 - 900).max(0) as u64;
            let num = num >> shift;
            let den = den >> shift;
            num.to_f64().unwrap_or(f64::INFINITY) / den.to_f64().unwrap_or(f64::INFINITY)
        })
    }

    fn parse_weight(s: &str) -> Result<Self> {
        parse_rational(s)
    }

    fn format_weight(&self) -> String {
        if self.denom() == &BigInt::from(1) {
            format!("{}", self.numer())
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

impl Scalar for f64 {
    const BACKEND: Backend = Backend::Float;

    fn from_ratio(num: i64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        num as f64 / den as f64
    }

    fn from_rational(r: &Rational) -> Self {
        Scalar::to_f64(r)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn sum_slice(xs: &[Self]) -> Self {
        kahan_sum(xs.iter().copied())
    }

    fn parse_weight(s: &str) -> Result<Self> {
        if let Some((n, d)) = s.split_once('/') {
            let r = parse_rational(&format!("{n}/{d}"))?;
            return Ok(Scalar::to_f64(&r));
        }
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::RationalParse(s.to_string()))
    }

    fn format_weight(&self) -> String {
        // 16 digits after the point in scientific form = 17 significant digits.
        format!("{self:.16e}")
    }
}

/// Compensated (Kahan–Neumaier) summation; deterministic for a fixed input
/// order, and robust when a term exceeds the running sum in magnitude.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in xs {
        let t = sum + x;
        comp += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + comp
}

/// Parse `"a/b"`, an integer, or a plain decimal (`"0.25"`) into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let err = || Error::RationalParse(s.to_string());
    if s.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = s.split_once('/') {
        let num: BigInt = n.trim().parse().map_err(|_| err())?;
        let den: BigInt = d.trim().parse().map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let negative = int_part.trim_start().starts_with('-');
        let int: BigInt = if int_part.is_empty() || int_part == "-" {
            BigInt::zero()
        } else {
            int_part.parse().map_err(|_| err())?
        };
        let frac: BigInt = frac_part.parse().map_err(|_| err())?;
        let den = BigInt::from(10u32).pow(frac_part.len() as u32);
        let frac = Rational::new(frac, den);
        let whole = Rational::from(int);
        return Ok(if negative { whole - frac } else { whole + frac });
    }
    let num: BigInt = s.parse().map_err(|_| err())?;
    Ok(Rational::from(num))
}
