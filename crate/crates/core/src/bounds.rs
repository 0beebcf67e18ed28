//! Closed-form bounds on the mode.
//!
//! All floors are taken on exact rationals; the lower bound locates the root
//! of the quadratic `f` by exact sign evaluation at integers, never by a
//! floating-point quadratic formula.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::Params;

fn int(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Floor of a rational as a `BigInt`.
pub fn floor(x: &BigRational) -> BigInt {
    x.numer().div_floor(x.denom())
}

/// `(r - 1) [1 - p^k (1 + k q)] / (q p^k)`, the excess of the upper bound over `kr`.
pub fn upper_excess(params: &Params) -> BigRational {
    let k = params.k() as usize;
    let (p, q) = (params.p(), params.q());
    let pk = num_traits::pow(p.clone(), k);
    let bracket = BigRational::one() - &pk * (BigRational::one() + int(k as u64) * q);
    int(params.r() as u64 - 1) * bracket / (q * pk)
}

/// `m̄ = kr + floor((r - 1)[1 - p^k (1 + kq)] / (q p^k))`, an upper bound on every
/// mode. Saturates at `u64::MAX` for parameters far beyond any table cap.
pub fn upper_bound(params: &Params) -> u64 {
    floor(&upper_excess(params))
        .to_u64()
        .and_then(|excess| excess.checked_add(params.support_min()))
        .unwrap_or(u64::MAX)
}

/// Coefficients of `f(v) = a v^2 + b v + c`, whose largest root drives the
/// lower bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticF {
    pub a: BigRational,
    pub b: BigRational,
    pub c: BigRational,
}

impl QuadraticF {
    pub fn eval(&self, v: &BigRational) -> BigRational {
        (&self.a * v + &self.b) * v + &self.c
    }

    pub fn eval_int(&self, v: u64) -> BigRational {
        self.eval(&int(v))
    }
}

/// Exact coefficients of `f`; defined for `k, r >= 2`.
pub fn f_coefficients(params: &Params) -> Result<QuadraticF> {
    if params.k() < 2 || params.r() < 2 {
        return Err(Error::NotApplicable(format!(
            "f(v) needs k >= 2 and r >= 2 (got k={}, r={})",
            params.k(),
            params.r()
        )));
    }
    let k = int(params.k() as u64);
    let r1 = int(params.r() as u64 - 1);
    let (p, q) = (params.p(), params.q());
    let one = BigRational::one();
    let pk = num_traits::pow(p.clone(), params.k() as usize);

    let a = -(q * &pk);
    let b = &pk * (q - (&k * q + q + &one) * &r1) + &r1;
    let c = &r1
        * (&r1 * (&one - &pk * (&one + &k * q)) + &pk * (&k + q) - (&one - &pk) / q);
    Ok(QuadraticF { a, b, c })
}

/// Which case of the lower bound produced the value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerBranch {
    /// `q r > 1` and the largest root of `f` exceeds `k`.
    QuadraticRoot,
    /// `q r > 1` and the largest root of `f` is at most `k`; `rho = k`.
    RootAtMostK,
    /// `q r = 1`: closed-form `rho = r (r-1) (r/(r-1))^k - (r-1)(k+r+1)`.
    Boundary,
}

impl LowerBranch {
    pub fn as_str(&self) -> &'static str {
        match self {
            LowerBranch::QuadraticRoot => "quadratic_root",
            LowerBranch::RootAtMostK => "root_at_most_k",
            LowerBranch::Boundary => "boundary_qr_1",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LowerBound {
    Applicable {
        /// `m̲ = kr + max(floor(rho), k)`.
        value: u64,
        /// `floor(rho)` as computed on the branch, before the `k` floor.
        rho_floor: BigInt,
        branch: LowerBranch,
    },
    /// No bound for these parameters; callers fall back to `kr`.
    NotApplicable(String),
}

impl LowerBound {
    pub fn value(&self) -> Option<u64> {
        match self {
            LowerBound::Applicable { value, .. } => Some(*value),
            LowerBound::NotApplicable(_) => None,
        }
    }

    /// The bound, or the support minimum when not applicable.
    pub fn value_or_support_min(&self, params: &Params) -> u64 {
        self.value().unwrap_or_else(|| params.support_min())
    }
}

/// Largest integer `t` in `[lo, hi]` with `f(t) >= 0`, given `f(lo) >= 0` and
/// `f` concave with `f(1) > 0`, so the non-negative set is an interval.
fn last_nonnegative(f: &QuadraticF, lo: u64, hi: u64) -> u64 {
    let (mut lo, mut hi) = (lo, hi);
    if !f.eval_int(hi).is_negative() {
        return hi;
    }
    // Invariant: f(lo) >= 0, f(hi) < 0.
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if f.eval_int(mid).is_negative() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

/// Lower bound `m̲` for `k, r >= 2` and `p <= (r-1)/r`.
pub fn lower_bound(params: &Params) -> LowerBound {
    let (k, r) = (params.k(), params.r());
    if k < 2 || r < 2 {
        return LowerBound::NotApplicable(format!("requires k >= 2 and r >= 2 (k={k}, r={r})"));
    }
    let support_min = params.support_min();
    let k64 = k as u64;
    match params.qr_cmp_one() {
        Ordering::Less => LowerBound::NotApplicable(format!(
            "requires p <= (r-1)/r = {}/{r}",
            r - 1
        )),
        Ordering::Equal => {
            let r_big = int(r as u64);
            let r1 = int(r as u64 - 1);
            let growth = num_traits::pow(&r_big / &r1, k as usize);
            let rho = &r_big * &r1 * growth - &r1 * int(k64 + r as u64 + 1);
            let rho_floor = floor(&rho);
            let excess = rho_floor.to_u64().unwrap_or(0).max(k64);
            LowerBound::Applicable {
                value: support_min.saturating_add(excess),
                rho_floor,
                branch: LowerBranch::Boundary,
            }
        }
        Ordering::Greater => {
            let f = f_coefficients(params).expect("k, r >= 2 checked above");
            if f.eval_int(k64).is_negative() {
                return LowerBound::Applicable {
                    value: support_min + k64,
                    rho_floor: BigInt::from(k64),
                    branch: LowerBranch::RootAtMostK,
                };
            }
            let ceiling = floor(&upper_excess(params))
                .to_u64()
                .unwrap_or(u64::MAX - 1)
                .saturating_add(1)
                .max(k64);
            let t = last_nonnegative(&f, k64, ceiling);
            // f(k) = 0: the root is exactly k, reported on the at-most-k branch.
            let branch = if t == k64 && f.eval_int(k64).is_zero() {
                LowerBranch::RootAtMostK
            } else {
                LowerBranch::QuadraticRoot
            };
            LowerBound::Applicable {
                value: support_min.saturating_add(t),
                rho_floor: BigInt::from(t),
                branch,
            }
        }
    }
}

/// Everything [`bounds`] knows about a parameter point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundsResult {
    pub upper: u64,
    pub lower: LowerBound,
    pub quadratic: Option<QuadraticF>,
    /// `q r = 1` exactly.
    pub special_branch: bool,
}

impl BoundsResult {
    pub fn rho_floor(&self) -> Option<&BigInt> {
        match &self.lower {
            LowerBound::Applicable { rho_floor, .. } => Some(rho_floor),
            LowerBound::NotApplicable(_) => None,
        }
    }
}

pub fn bounds(params: &Params) -> BoundsResult {
    BoundsResult {
        upper: upper_bound(params),
        lower: lower_bound(params),
        quadratic: f_coefficients(params).ok(),
        special_branch: params.qr_cmp_one() == Ordering::Equal,
    }
}

/// Limits of `m̄ - kr` and `m̲ - kr` as `r -> inf` with `r q -> lambda`:
/// `(floor(k(k+1)(lambda-1)/2) + 1` for `lambda > 1`, `floor(k(k+1) lambda / 2))`.
pub fn poisson_limit_bounds(k: u32, lambda: &BigRational) -> (Option<u64>, u64) {
    let tri = int(k as u64 * (k as u64 + 1)) / int(2);
    let to_u64 = |x: BigInt| x.to_u64().unwrap_or(u64::MAX);
    let upper = to_u64(floor(&(&tri * lambda)));
    let lower = if lambda > &BigRational::one() {
        Some(to_u64(floor(&(&tri * (lambda - BigRational::one())))).saturating_add(1))
    } else {
        None
    };
    (lower, upper)
}
