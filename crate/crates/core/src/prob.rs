//! Probability scalars: exact rationals or log-domain reals.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use twofloat::consts::LN_2;
use twofloat::TwoFloat;

use crate::params::ratio_to_f64;

/// Two log-domain probabilities are treated as equal when their natural logs
/// differ by at most this much.
pub const LOG_TIE_TOLERANCE: f64 = 1e-9;

/// Which arithmetic a computation runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Arithmetic {
    #[default]
    Exact,
    Log,
}

/// A probability, either exact or as its natural logarithm.
///
/// `Log(f64::NEG_INFINITY)` is zero.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbValue {
    Exact(BigRational),
    Log(f64),
}

impl ProbValue {
    pub fn zero(arith: Arithmetic) -> Self {
        match arith {
            Arithmetic::Exact => ProbValue::Exact(BigRational::zero()),
            Arithmetic::Log => ProbValue::Log(f64::NEG_INFINITY),
        }
    }

    pub fn one(arith: Arithmetic) -> Self {
        match arith {
            Arithmetic::Exact => ProbValue::Exact(BigRational::one()),
            Arithmetic::Log => ProbValue::Log(0.0),
        }
    }

    pub fn arithmetic(&self) -> Arithmetic {
        match self {
            ProbValue::Exact(_) => Arithmetic::Exact,
            ProbValue::Log(_) => Arithmetic::Log,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ProbValue::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            ProbValue::Exact(x) => Some(x),
            ProbValue::Log(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ProbValue::Exact(x) => x.is_zero(),
            ProbValue::Log(l) => *l == f64::NEG_INFINITY,
        }
    }

    /// Natural logarithm of the value.
    pub fn ln(&self) -> f64 {
        match self {
            ProbValue::Exact(x) => exact_ln(x),
            ProbValue::Log(l) => *l,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ProbValue::Exact(x) => ratio_to_f64(x),
            ProbValue::Log(l) => l.exp(),
        }
    }

    /// Converts to the log domain (lossy for exact values).
    pub fn to_log(&self) -> ProbValue {
        ProbValue::Log(self.ln())
    }

    /// Sum. Stays exact when both sides are exact.
    pub fn add(&self, other: &ProbValue) -> ProbValue {
        match (self, other) {
            (ProbValue::Exact(a), ProbValue::Exact(b)) => ProbValue::Exact(a + b),
            _ => ProbValue::Log(log_add(self.ln(), other.ln())),
        }
    }

    /// Product. Stays exact when both sides are exact.
    pub fn mul(&self, other: &ProbValue) -> ProbValue {
        match (self, other) {
            (ProbValue::Exact(a), ProbValue::Exact(b)) => ProbValue::Exact(a * b),
            _ => {
                let (a, b) = (self.ln(), other.ln());
                if a == f64::NEG_INFINITY || b == f64::NEG_INFINITY {
                    ProbValue::Log(f64::NEG_INFINITY)
                } else {
                    ProbValue::Log(a + b)
                }
            }
        }
    }

    /// `1 - self`, clamped at zero in the log domain.
    pub fn complement(&self) -> ProbValue {
        match self {
            ProbValue::Exact(x) => ProbValue::Exact(BigRational::one() - x),
            ProbValue::Log(l) => {
                let v = -l.exp_m1();
                ProbValue::Log(if v > 0.0 { v.ln() } else { f64::NEG_INFINITY })
            }
        }
    }

    /// Exact ordering when both are exact, otherwise ordering of logs.
    pub fn compare(&self, other: &ProbValue) -> Ordering {
        match (self, other) {
            (ProbValue::Exact(a), ProbValue::Exact(b)) => a.cmp(b),
            _ => self.ln().total_cmp(&other.ln()),
        }
    }

    /// Equality: exact for two exact values, within [`LOG_TIE_TOLERANCE`]
    /// otherwise.
    pub fn tie_eq(&self, other: &ProbValue) -> bool {
        match (self, other) {
            (ProbValue::Exact(a), ProbValue::Exact(b)) => a == b,
            _ => {
                let (a, b) = (self.ln(), other.ln());
                a == b || (a - b).abs() <= LOG_TIE_TOLERANCE
            }
        }
    }

    /// Decimal rendering with 15 significant digits.
    pub fn decimal(&self) -> String {
        format_sig(self.to_f64(), 15)
    }
}

impl fmt::Display for ProbValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbValue::Exact(x) => write!(f, "{}/{}", x.numer(), x.denom()),
            ProbValue::Log(l) => write!(f, "exp({l})"),
        }
    }
}

/// Formats `x` with `digits` significant digits, no exponent for ordinary
/// magnitudes.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&magnitude) {
        return format!("{:.*e}", digits - 1, x);
    }
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln x` for a non-negative rational that may be far outside `f64` range.
pub(crate) fn exact_ln(x: &BigRational) -> f64 {
    if !x.is_positive() {
        return f64::NEG_INFINITY;
    }
    // A 128-bit quotient keeps about 2^-127 relative error before the log.
    let (num, den) = (x.numer(), x.denom());
    let shift = 128 + den.bits() as i64 - num.bits() as i64;
    let quotient = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        num / (den << (-shift) as u64)
    };
    let hi = quotient.to_f64().unwrap_or(f64::INFINITY);
    let lo = (&quotient - BigInt::from_f64(hi).unwrap_or_default())
        .to_f64()
        .unwrap_or(0.0);
    ln_scaled(hi, lo, -shift)
}

/// `ln((hi + lo) * 2^exp2)` for positive `hi` with `|lo| <= ulp(hi)`, rounded
/// from a double-word sum: error about half an ulp of the result.
pub(crate) fn ln_scaled(hi: f64, lo: f64, exp2: i64) -> f64 {
    if hi <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let bits = hi.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let (mantissa, e) = if biased == 0 {
        // Subnormal: renormalize first.
        let m = hi * 2f64.powi(64);
        let b = ((m.to_bits() >> 52) & 0x7ff) as i64;
        (f64::from_bits((m.to_bits() & !(0x7ff << 52)) | (1023 << 52)), b - 1023 - 64)
    } else {
        (f64::from_bits((bits & !(0x7ff << 52)) | (1023 << 52)), biased - 1023)
    };
    let sum = TwoFloat::from(mantissa.ln()) + lo / hi + LN_2 * (e + exp2) as f64;
    sum.hi()
}
#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> ProbValue {
        ProbValue::Exact(BigRational::new(n.into(), d.into()))
    }

    #[test]
    fn exact_ln_of_huge_denominator() {
        let x = BigRational::new(1.into(), num_traits::pow(BigInt::from(10), 5000));
        // 5000 ln 10 = 11512.925464970228420089957...
        assert!((exact_ln(&x) + 11_512.925_464_970_228).abs() <= 1e-12);
        let y = BigRational::new(3.into(), 7.into());
        assert_eq!(exact_ln(&y), (3.0f64 / 7.0).ln());
    }

    #[test]
    fn exact_arithmetic_stays_exact() {
        let a = q(1, 16);
        let b = q(5, 64);
        assert_eq!(a.add(&b), q(9, 64));
        assert_eq!(a.mul(&b), q(5, 1024));
        assert_eq!(a.complement(), q(15, 16));
        assert_eq!(a.compare(&b), Ordering::Less);
        assert!(q(2, 4).tie_eq(&q(1, 2)));
    }

    #[test]
    fn log_arithmetic() {
        let a = ProbValue::Log(0.25f64.ln());
        let b = ProbValue::Log(0.5f64.ln());
        assert!((a.add(&b).to_f64() - 0.75).abs() < 1e-15);
        assert!((a.mul(&b).to_f64() - 0.125).abs() < 1e-15);
        assert!((a.complement().to_f64() - 0.75).abs() < 1e-15);
        let zero = ProbValue::zero(Arithmetic::Log);
        assert!(zero.is_zero());
        assert_eq!(zero.add(&a), a);
        assert!(zero.mul(&a).is_zero());
    }

    #[test]
    fn tie_tolerance() {
        let a = ProbValue::Log(-3.0);
        assert!(a.tie_eq(&ProbValue::Log(-3.0 + 0.5e-9)));
        assert!(!a.tie_eq(&ProbValue::Log(-3.0 + 2e-9)));
        assert!(q(1, 3).tie_eq(&ProbValue::Log((1.0f64 / 3.0).ln())));
    }

    #[test]
    fn ln_of_tiny_rational() {
        let tiny = BigRational::new(BigInt::from(3), num_traits::pow(BigInt::from(10), 500));
        let expected = 3f64.ln() - 500.0 * 10f64.ln();
        assert!((exact_ln(&tiny) - expected).abs() < 1e-9);
        assert_eq!(exact_ln(&BigRational::zero()), f64::NEG_INFINITY);
    }

    #[test]
    fn display_forms() {
        assert_eq!(q(5, 64).to_string(), "5/64");
        assert_eq!(q(5, 64).decimal(), "0.078125");
        assert_eq!(format_sig(1.0 / 3.0, 15), "0.333333333333333");
        assert_eq!(format_sig(2.0, 15), "2");
    }
}
