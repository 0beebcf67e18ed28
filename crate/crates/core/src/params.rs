//! Validated distribution parameters.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Parameters `(k, r, p)` of the negative binomial distribution of order `k`, type I.
///
/// `p` is always held as an exact rational and `q = 1 - p` is derived exactly.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Params {
    k: u32,
    r: u32,
    p: BigRational,
    q: BigRational,
}

impl Params {
    pub fn new(k: u32, r: u32, p: BigRational) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidK(k as i64));
        }
        if r < 1 {
            return Err(Error::InvalidR(r as i64));
        }
        if !p.is_positive() || p >= BigRational::one() {
            return Err(Error::InvalidP(p.to_string()));
        }
        let q = BigRational::one() - &p;
        Ok(Params { k, r, p, q })
    }

    /// Convenience constructor for `p = num / den`.
    pub fn from_ratio(k: u32, r: u32, num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidP(format!("{num}/{den}")));
        }
        Self::new(
            k,
            r,
            BigRational::new(BigInt::from(num), BigInt::from(den)),
        )
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn p(&self) -> &BigRational {
        &self.p
    }

    pub fn q(&self) -> &BigRational {
        &self.q
    }

    /// Smallest point of the support, `k * r`.
    pub fn support_min(&self) -> u64 {
        self.k as u64 * self.r as u64
    }

    /// `p = a / b` in lowest terms, as unsigned integers.
    pub fn p_parts(&self) -> (BigUint, BigUint) {
        let a = self.p.numer().magnitude().clone();
        let b = self.p.denom().magnitude().clone();
        (a, b)
    }

    pub fn p_f64(&self) -> f64 {
        ratio_to_f64(&self.p)
    }

    pub fn q_f64(&self) -> f64 {
        ratio_to_f64(&self.q)
    }

    /// `q * r` compared with 1, exactly.
    pub fn qr_cmp_one(&self) -> std::cmp::Ordering {
        (&self.q * BigRational::from_integer(BigInt::from(self.r))).cmp(&BigRational::one())
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={}, r={}, p={}", self.k, self.r, self.p)
    }
}

pub(crate) fn ratio_to_f64(x: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (x.numer().to_f64(), x.denom().to_f64()) {
        if n.is_finite() && d.is_finite() {
            return n / d;
        }
    }
    // Huge numerator and denominator: shift both into range first.
    let bits = x.denom().bits().max(x.numer().bits()) as i64;
    let shift = (bits - 900).max(0) as usize;
    let n = (x.numer() >> shift).to_f64().unwrap_or(0.0);
    let d = (x.denom() >> shift).to_f64().unwrap_or(f64::INFINITY);
    n / d
}

/// Parses a probability literal: either a ratio `"a/b"` or a decimal such as
/// `"0.95"`, which becomes `95/100` reduced. Does not check `0 < p < 1`.
pub fn parse_probability(literal: &str) -> Result<BigRational> {
    let s = literal.trim();
    let bad = || Error::InvalidP(format!("cannot parse {literal:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_plain_int(num.trim()).ok_or_else(bad)?;
        let den = parse_plain_int(den.trim()).ok_or_else(bad)?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (negative, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let mantissa = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str(&mantissa).map_err(|_| bad())?;
    if negative {
        numer = -numer;
    }
    let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
    Ok(BigRational::new(numer, denom))
}

fn parse_plain_int(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    BigInt::from_str(s).ok()
}

/// Validates raw `(k, r, p)` input into [`Params`].
pub fn validate_params(k: i64, r: i64, p: &str) -> Result<Params> {
    if k < 1 || k > u32::MAX as i64 {
        return Err(Error::InvalidK(k));
    }
    if r < 1 || r > u32::MAX as i64 {
        return Err(Error::InvalidR(r));
    }
    let p = parse_probability(p)?;
    Params::new(k as u32, r as u32, p)
}
