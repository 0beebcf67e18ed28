//! Exact recurrence on scaled integers.
//!
//! With `p = a / b` in lowest terms and `c = b - a`, the quantity
//! `U_n = b^n P_n` is a non-negative integer and satisfies
//!
//! ```text
//! s U_n = c * sum_{j=1..k} (s + j (r - 1)) a^(j-1) U_(n-j),   s = n - kr > 0
//! U_kr  = a^(kr)
//! ```
//!
//! The division by `s` is always exact, so no GCD work is needed per step.

use std::collections::VecDeque;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::params::Params;

/// Streams `(n, U_n)` for `n = kr, kr + 1, ...`.
#[derive(Debug, Clone)]
pub struct ExactRecurrence {
    k: u64,
    r_minus_1: u64,
    support_min: u64,
    next_n: u64,
    a: BigUint,
    c: BigUint,
    /// `a^(j-1)` for `j = 1..=k`.
    a_powers: Vec<BigUint>,
    /// Most recent first: `window[0] = U_(n-1)`.
    window: VecDeque<BigUint>,
}

impl ExactRecurrence {
    pub fn new(params: &Params) -> Self {
        let (a, b) = params.p_parts();
        let k = params.k() as u64;
        let mut a_powers = Vec::with_capacity(k as usize);
        let mut acc = BigUint::one();
        for _ in 0..k {
            a_powers.push(acc.clone());
            acc *= &a;
        }
        ExactRecurrence {
            k,
            r_minus_1: params.r() as u64 - 1,
            support_min: params.support_min(),
            next_n: params.support_min(),
            c: &b - &a,
            a,
            a_powers,
            window: VecDeque::with_capacity(k as usize + 1),
        }
    }

    fn first_value(&self) -> BigUint {
        num_traits::pow(self.a.clone(), self.support_min as usize)
    }
}

impl Iterator for ExactRecurrence {
    type Item = (u64, BigUint);

    fn next(&mut self) -> Option<Self::Item> {
        let n = self.next_n;
        let s = n - self.support_min;
        let value = if s == 0 {
            self.first_value()
        } else {
            let mut sum = BigUint::zero();
            for (j, prev) in self.window.iter().enumerate() {
                let j = j as u64 + 1;
                if prev.is_zero() {
                    continue;
                }
                let coeff = s + j * self.r_minus_1;
                let a_pow = &self.a_powers[(j - 1) as usize];
                if a_pow.is_one() {
                    sum += prev * coeff;
                } else {
                    sum += prev * a_pow * coeff;
                }
            }
            let total = if self.c.is_one() { sum } else { sum * &self.c };
            total / s
        };
        self.window.push_front(value.clone());
        if self.window.len() > self.k as usize {
            self.window.pop_back();
        }
        self.next_n += 1;
        Some((n, value))
    }
}
