//! The recurrence in binary-scaled `f64` with an a-priori relative error bound.
//!
//! Every value is `mantissa * 2^exp2`. The live window shares one exponent and
//! is rescaled by exact powers of two, so rescaling adds no rounding error.
//! All terms of the recurrence are non-negative, which keeps the relative error
//! of each new entry below the worst inherited error plus a fixed per-step
//! amount; [`relative_error_bound`] is that sum, doubled.

use std::cmp::Ordering;
use std::collections::VecDeque;

use crate::params::Params;
use crate::prob::ln_scaled;

const RESCALE_HIGH: f64 = 1.157_920_892_373_162e77; // 2^256
const RESCALE_LOW: f64 = 8.636_168_555_094_445e-78; // 2^-256
/// Below this a window entry is close enough to the subnormal range that the
/// error bound no longer holds.
const PRECISION_FLOOR: f64 = 4.008_336_720_017_946e-292; // 2^-968

/// `mantissa * 2^exp2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    pub exp2: i64,
}

impl Scaled {
    pub const ZERO: Scaled = Scaled { mantissa: 0.0, exp2: 0 };

    pub fn ln(&self) -> f64 {
        if self.mantissa == 0.0 {
            f64::NEG_INFINITY
        } else {
            ln_scaled(self.mantissa, 0.0, self.exp2)
        }
    }

    /// `self / other` as an `f64`, saturating to `0` or `inf` when the
    /// exponent gap leaves the representable range.
    pub fn ratio(&self, other: &Scaled) -> f64 {
        if self.mantissa == 0.0 {
            return 0.0;
        }
        if other.mantissa == 0.0 {
            return f64::INFINITY;
        }
        let gap = self.exp2 - other.exp2;
        if gap > 900 {
            return f64::INFINITY;
        }
        if gap < -900 {
            return 0.0;
        }
        self.mantissa / other.mantissa * pow2(gap)
    }

    /// Ordering of the represented values (exact for the stored floats).
    pub fn cmp_value(&self, other: &Scaled) -> Ordering {
        match (self.mantissa == 0.0, other.mantissa == 0.0) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => {
                let gap = self.exp2 - other.exp2;
                if gap > 900 {
                    Ordering::Greater
                } else if gap < -900 {
                    Ordering::Less
                } else {
                    // Scaling by a power of two in range is exact.
                    (self.mantissa * pow2(gap)).total_cmp(&other.mantissa)
                }
            }
        }
    }
}

fn pow2(e: i64) -> f64 {
    debug_assert!((-1000..=1000).contains(&e));
    // Split so neither factor overflows or goes subnormal.
    let half = e / 2;
    2f64.powi(half as i32) * 2f64.powi((e - half) as i32)
}

const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// Upper bound on the relative error of the scaled value at `n`.
///
/// Per step: `p^(j-1)` carries at most `2(k-1)` roundings, the product with the
/// integer coefficient and the previous value two more, the `k`-term positive
/// sum `k - 1`, the factor `q` two (conversion and product) and the division by
/// `s` one, for `3k + 2` in total. `p^(kr)` carries `2kr`. The result is doubled
/// to absorb second-order terms and a non-correctly-rounded conversion of `p`.
pub fn relative_error_bound(params: &Params, n: u64) -> f64 {
    let kr = params.support_min() as f64;
    let k = params.k() as f64;
    let steps = n.saturating_sub(params.support_min()) as f64;
    2.0 * (2.0 * kr + steps * (3.0 * k + 4.0)) * UNIT_ROUNDOFF
}

/// Streams `(n, P_n)` in scaled floating point.
#[derive(Debug, Clone)]
pub struct ScaledRecurrence {
    k: u64,
    r_minus_1: u64,
    support_min: u64,
    next_n: u64,
    p: f64,
    q: f64,
    /// `p^(j-1)` for `j = 1..=k`.
    p_powers: Vec<f64>,
    window: VecDeque<f64>,
    scale: i64,
    precision_lost: bool,
}

impl ScaledRecurrence {
    pub fn new(params: &Params) -> Self {
        let k = params.k() as u64;
        let p = params.p_f64();
        let mut p_powers = Vec::with_capacity(k as usize);
        let mut acc = 1.0;
        for _ in 0..k {
            p_powers.push(acc);
            acc *= p;
        }
        ScaledRecurrence {
            k,
            r_minus_1: params.r() as u64 - 1,
            support_min: params.support_min(),
            next_n: params.support_min(),
            p,
            q: params.q_f64(),
            p_powers,
            window: VecDeque::with_capacity(k as usize + 1),
            scale: 0,
            precision_lost: false,
        }
    }

    /// True once some window entry came near the subnormal range; the
    /// error bound is void from then on.
    pub fn precision_lost(&self) -> bool {
        self.precision_lost
    }

    fn first_value(&mut self) -> f64 {
        let mut value = 1.0;
        for _ in 0..self.support_min {
            value *= self.p;
            if value < PRECISION_FLOOR {
                self.precision_lost = true;
            }
            if value < RESCALE_LOW {
                value *= RESCALE_HIGH;
                self.scale -= 256;
            }
        }
        value
    }

    fn rescale(&mut self, value: &mut f64) {
        let shift = value.log2().round() as i64;
        let factor = pow2(-shift);
        *value *= factor;
        for w in self.window.iter_mut() {
            *w *= factor;
            if *w != 0.0 && *w < PRECISION_FLOOR {
                self.precision_lost = true;
            }
        }
        self.scale += shift;
    }
}

impl Iterator for ScaledRecurrence {
    type Item = (u64, Scaled);

    fn next(&mut self) -> Option<Self::Item> {
        let n = self.next_n;
        let s = n - self.support_min;
        let mut value = if s == 0 {
            self.first_value()
        } else {
            let mut sum = 0.0;
            for (j, prev) in self.window.iter().enumerate() {
                let coeff = (s + (j as u64 + 1) * self.r_minus_1) as f64;
                sum += coeff * self.p_powers[j] * prev;
            }
            self.q * sum / s as f64
        };
        if value != 0.0 && !(RESCALE_LOW..=RESCALE_HIGH).contains(&value) {
            self.rescale(&mut value);
        }
        self.window.push_front(value);
        if self.window.len() > self.k as usize {
            self.window.pop_back();
        }
        self.next_n += 1;
        Some((
            n,
            Scaled {
                mantissa: value,
                exp2: self.scale,
            },
        ))
    }
}
