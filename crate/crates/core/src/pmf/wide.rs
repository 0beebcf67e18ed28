//! The recurrence in binary-scaled double-word arithmetic (about 106 bits).
//!
//! Same layout as [`super::scaled`], with each value a [`TwoFloat`]. Used to
//! separate near-ties that the `f64` bound cannot resolve.

use std::collections::VecDeque;

use num_traits::ToPrimitive;
use twofloat::TwoFloat;

use crate::params::Params;
use crate::prob::ln_scaled;

const RESCALE_HIGH: f64 = 1.157_920_892_373_162e77; // 2^256
const RESCALE_LOW: f64 = 8.636_168_555_094_445e-78; // 2^-256
/// Keeps the low word of every window entry clear of the subnormal range.
const PRECISION_FLOOR: f64 = 1.195_192_210_968_522_6e-271; // 2^-900

/// Per-operation relative error allowance, `16 u^2` with `u = 2^-53`.
pub const OP_ERROR: f64 = 16.0 * 1.232_595_164_407_831e-32; // 16 * 2^-106

/// `value * 2^exp2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wide {
    pub value: TwoFloat,
    pub exp2: i64,
}

impl Wide {
    /// Whether `self >= other * factor` for the stored values, or `None` when
    /// the exponent gap leaves the range. Avoids double-word division, whose
    /// `twofloat` implementation is only single-word accurate.
    pub fn at_least(&self, other: &Wide, factor: TwoFloat) -> Option<bool> {
        let gap = self.exp2 - other.exp2;
        if !(-900..=900).contains(&gap) {
            return None;
        }
        Some(self.value * pow2(gap) >= other.value * factor)
    }

    pub fn ln(&self) -> f64 {
        ln_scaled(self.value.hi(), self.value.lo(), self.exp2)
    }
}

fn pow2(e: i64) -> f64 {
    let half = e / 2;
    2f64.powi(half as i32) * 2f64.powi((e - half) as i32)
}

/// Upper bound on the relative error of the value at `n`; same operation
/// count as the `f64` bound, plus the conversions of `p` and `q`.
pub fn wide_error_bound(params: &Params, n: u64) -> f64 {
    let kr = params.support_min() as f64;
    let k = params.k() as f64;
    let steps = n.saturating_sub(params.support_min()) as f64;
    2.0 * (2.0 * kr + 2.0 + steps * (3.0 * k + 4.0)) * OP_ERROR
}

#[derive(Debug, Clone)]
pub struct WideRecurrence {
    k: u64,
    r_minus_1: u64,
    support_min: u64,
    next_n: u64,
    p: TwoFloat,
    q: TwoFloat,
    p_powers: Vec<TwoFloat>,
    window: VecDeque<TwoFloat>,
    scale: i64,
    precision_lost: bool,
}

const EXACT_LIMIT: u64 = 1 << 53;

impl WideRecurrence {
    /// `None` unless both parts of `p = a/b` are exact in an `f64`.
    pub fn new(params: &Params) -> Option<Self> {
        let (a, b) = params.p_parts();
        let (a, b) = (a.to_u64()?, b.to_u64()?);
        if b > EXACT_LIMIT {
            return None;
        }
        let p = TwoFloat::from(a as f64) / b as f64;
        let q = TwoFloat::from((b - a) as f64) / b as f64;
        let k = params.k() as u64;
        let mut p_powers = Vec::with_capacity(k as usize);
        let mut acc = TwoFloat::from(1.0);
        for _ in 0..k {
            p_powers.push(acc);
            acc *= p;
        }
        Some(WideRecurrence {
            k,
            r_minus_1: params.r() as u64 - 1,
            support_min: params.support_min(),
            next_n: params.support_min(),
            p,
            q,
            p_powers,
            window: VecDeque::with_capacity(k as usize + 1),
            scale: 0,
            precision_lost: false,
        })
    }

    pub fn precision_lost(&self) -> bool {
        self.precision_lost
    }

    fn first_value(&mut self) -> TwoFloat {
        let mut value = TwoFloat::from(1.0);
        for _ in 0..self.support_min {
            value *= self.p;
            if value.hi() < PRECISION_FLOOR {
                self.precision_lost = true;
            }
            if value.hi() < RESCALE_LOW {
                value *= RESCALE_HIGH;
                self.scale -= 256;
            }
        }
        value
    }

    fn rescale(&mut self, value: &mut TwoFloat) {
        let shift = value.hi().log2().round() as i64;
        let factor = pow2(-shift);
        *value *= factor;
        for w in self.window.iter_mut() {
            *w *= factor;
            if w.hi() != 0.0 && w.hi() < PRECISION_FLOOR {
                self.precision_lost = true;
            }
        }
        self.scale += shift;
    }
}

impl Iterator for WideRecurrence {
    type Item = (u64, Wide);

    fn next(&mut self) -> Option<Self::Item> {
        let n = self.next_n;
        let s = n - self.support_min;
        let mut value = if s == 0 {
            self.first_value()
        } else {
            let mut sum = TwoFloat::from(0.0);
            for (j, prev) in self.window.iter().enumerate() {
                let coeff = (s + (j as u64 + 1) * self.r_minus_1) as f64;
                sum += self.p_powers[j] * *prev * coeff;
            }
            self.q * sum / s as f64
        };
        let hi = value.hi();
        if hi != 0.0 && !(RESCALE_LOW..=RESCALE_HIGH).contains(&hi) {
            self.rescale(&mut value);
        }
        self.window.push_front(value);
        if self.window.len() > self.k as usize {
            self.window.pop_back();
        }
        self.next_n += 1;
        Some((
            n,
            Wide {
                value,
                exp2: self.scale,
            },
        ))
    }
}
