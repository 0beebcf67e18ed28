//! Brute-force PMF from the multinomial closed form.
//!
//! `P_n = p^n * sum multinomial(N + r - 1; n_1, ..., n_k, r - 1) (q/p)^N` over all
//! `(n_1, ..., n_k) >= 0` with `sum j n_j = n - kr`, where `N = sum n_j`. This path
//! shares nothing with the recurrence engine and exists to certify it.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::params::Params;
use crate::prob::ProbValue;

/// Default cap on the number of tuples one oracle evaluation may enumerate.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// One solution `(n_1, ..., n_k)` of `n_1 + 2 n_2 + ... + k n_k = s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CompositionCounts {
    counts: Vec<u64>,
}

impl CompositionCounts {
    pub fn new(counts: Vec<u64>) -> Self {
        CompositionCounts { counts }
    }

    /// `counts()[j - 1] = n_j`.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn weighted_sum(&self) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (i as u64 + 1) * c)
            .sum()
    }

    pub fn plain_sum(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Iterator over all `(n_1, ..., n_k)` with `sum j n_j = s`.
///
/// Order: lexicographic on `(n_k, ..., n_1)`, largest first.
#[derive(Debug, Clone)]
pub struct Solutions {
    /// `current[j - 1] = n_j`.
    current: Vec<u64>,
    /// `remaining[i]` = budget left after fixing parts `k, ..., i + 2`; the
    /// budget left for part `i + 1` and below.
    remaining: Vec<u64>,
    done: bool,
    started: bool,
}

/// Enumerates every solution of `n_1 + 2 n_2 + ... + k n_k = s`.
pub fn enumerate_solutions(s: u64, k: u32) -> Solutions {
    assert!(k >= 1, "k must be positive");
    let k = k as usize;
    let mut sol = Solutions {
        current: vec![0; k],
        remaining: vec![0; k],
        done: false,
        started: false,
    };
    sol.fill_from(k - 1, s);
    sol
}

impl Solutions {
    /// Greedy fill of parts `idx + 1` down to 1 with `budget`.
    fn fill_from(&mut self, idx: usize, mut budget: u64) {
        for i in (0..=idx).rev() {
            let part = i as u64 + 1;
            self.remaining[i] = budget;
            let take = budget / part;
            self.current[i] = take;
            budget -= take * part;
        }
        // Part 1 always absorbs the rest, so `budget` is zero here.
        debug_assert_eq!(budget, 0);
    }

    fn advance(&mut self) -> bool {
        // Find the lowest part index >= 1 (part size >= 2) that can be decreased.
        for i in 1..self.current.len() {
            if self.current[i] > 0 {
                self.current[i] -= 1;
                let part = i as u64 + 1;
                let left = self.remaining[i] - self.current[i] * part;
                self.fill_from(i - 1, left);
                return true;
            }
        }
        false
    }
}

impl Iterator for Solutions {
    type Item = CompositionCounts;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        if self.started && !self.advance() {
            self.done = true;
            return None;
        }
        self.started = true;
        Some(CompositionCounts::new(self.current.clone()))
    }
}

/// Number of partitions of `s` into parts no larger than `k`, saturating.
pub fn partition_count(s: u64, k: u32) -> u128 {
    let s = s as usize;
    let mut ways = vec![0u128; s + 1];
    ways[0] = 1;
    for part in 1..=(k as usize).min(s.max(1)) {
        for total in part..=s {
            ways[total] = ways[total].saturating_add(ways[total - part]);
        }
    }
    ways[s]
}

/// Factorials `0!, 1!, ..., max!`.
#[derive(Debug, Clone)]
pub struct Factorials {
    table: Vec<BigUint>,
}

impl Factorials {
    pub fn up_to(max: u64) -> Self {
        let mut table = Vec::with_capacity(max as usize + 1);
        let mut acc = BigUint::one();
        table.push(acc.clone());
        for i in 1..=max {
            acc *= i;
            table.push(acc.clone());
        }
        Factorials { table }
    }

    pub fn get(&self, n: u64) -> &BigUint {
        &self.table[n as usize]
    }

    pub fn max(&self) -> u64 {
        self.table.len() as u64 - 1
    }
}

/// `(N + r - 1)! / (n_1! ... n_k! (r - 1)!)` with `N = sum n_j`.
pub fn multinomial_coeff(counts: &CompositionCounts, r: u32) -> BigUint {
    let top = counts.plain_sum() + r as u64 - 1;
    let facts = Factorials::up_to(top);
    multinomial_with(&facts, counts, r)
}

/// As [`multinomial_coeff`], reusing a factorial table.
pub fn multinomial_with(facts: &Factorials, counts: &CompositionCounts, r: u32) -> BigUint {
    let top = counts.plain_sum() + r as u64 - 1;
    let mut denom = facts.get(r as u64 - 1).clone();
    for &c in counts.counts() {
        if c > 1 {
            denom *= facts.get(c);
        }
    }
    facts.get(top) / denom
}

/// Exact `P_n` by the closed form with the default enumeration cap.
pub fn pmf_direct(params: &Params, n: u64) -> Result<ProbValue> {
    pmf_direct_with_cap(params, n, DEFAULT_ENUMERATION_CAP)
}

pub fn pmf_direct_with_cap(params: &Params, n: u64, cap: u128) -> Result<ProbValue> {
    let kr = params.support_min();
    if n < kr {
        return Ok(ProbValue::Exact(BigRational::zero()));
    }
    let s = n - kr;
    let count = partition_count(s, params.k());
    if count > cap {
        return Err(Error::InfeasibleEnumeration { count, cap });
    }
    let r = params.r();
    let ratio = params.q() / params.p();
    let facts = Factorials::up_to(s + r as u64 - 1);

    // Group terms by N so each power of q/p is formed once.
    let mut by_plain_sum: Vec<BigUint> = vec![BigUint::zero(); s as usize + 1];
    for sol in enumerate_solutions(s, params.k()) {
        by_plain_sum[sol.plain_sum() as usize] += multinomial_with(&facts, &sol, r);
    }
    let mut sum = BigRational::zero();
    let mut ratio_pow = BigRational::one();
    for coeff in &by_plain_sum {
        if !coeff.is_zero() {
            sum += BigRational::from_integer(BigInt::from(coeff.clone())) * &ratio_pow;
        }
        ratio_pow *= &ratio;
    }
    let p_pow = num_traits::pow(params.p().clone(), n as usize);
    Ok(ProbValue::Exact(p_pow * sum))
}
