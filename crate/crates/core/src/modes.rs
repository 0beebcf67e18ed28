//! Mode sets: certified search, closed forms, and the difference sequence.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use twofloat::TwoFloat;

use crate::bounds::{f_coefficients, floor, upper_bound};
use crate::error::{Error, Result};
use crate::params::Params;
use crate::pmf::{
    checked_len, pmf_table, relative_error_bound, wide::OP_ERROR, wide_error_bound,
    ExactRecurrence, Scaled, ScaledRecurrence, Wide, WideRecurrence, DEFAULT_TABLE_CAP,
};
use crate::prob::{Arithmetic, ProbValue, LOG_TIE_TOLERANCE};

/// Non-empty ascending set of support points.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct ModeSet(Vec<u64>);

impl ModeSet {
    pub fn new<I: IntoIterator<Item = u64>>(values: I) -> Self {
        let set: BTreeSet<u64> = values.into_iter().collect();
        assert!(!set.is_empty(), "a mode set is never empty");
        ModeSet(set.into_iter().collect())
    }

    pub fn single(n: u64) -> Self {
        ModeSet(vec![n])
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn min(&self) -> u64 {
        self.0[0]
    }

    pub fn max(&self) -> u64 {
        *self.0.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: u64) -> bool {
        self.0.binary_search(&n).is_ok()
    }

    /// Parses the `"6,7,8"` rendering.
    pub fn parse(s: &str) -> Option<ModeSet> {
        let values: Option<Vec<u64>> = s.split(',').map(|t| t.trim().parse().ok()).collect();
        let values = values?;
        if values.is_empty() {
            return None;
        }
        Some(ModeSet::new(values))
    }
}

impl fmt::Display for ModeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

/// Modes of the ordinary negative binomial (`k = 1`), counted in trials.
///
/// `floor((r-1)/p) + 1`, or both `(r-1)/p` and `(r-1)/p + 1` when `(r-1)/p` is an
/// integer. For `r = 1` the value `(r-1)/p = 0` is below the support, so the
/// result is `{1}`.
pub fn classic_nb_mode(r: u32, p: &BigRational) -> Result<ModeSet> {
    let params = Params::new(1, r, p.clone())?;
    let x = BigRational::from_integer(BigInt::from(r - 1)) / params.p();
    let base = floor(&x).to_u64().ok_or(Error::Overflow("classic mode"))?;
    if x.is_integer() && base > 0 {
        Ok(ModeSet::new([base, base + 1]))
    } else {
        Ok(ModeSet::single(base + 1))
    }
}

/// How a [`ModeResult`] was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    /// Decided in exact rational arithmetic; ties are genuine.
    Exact,
    /// A single maximizer proven by a rigorous floating-point error bound.
    Certified,
    /// Log-domain comparison within [`LOG_TIE_TOLERANCE`]; ties are near-ties.
    Tolerance,
}

impl Exactness {
    pub fn as_str(&self) -> &'static str {
        match self {
            Exactness::Exact => "exact",
            Exactness::Certified => "certified",
            Exactness::Tolerance => "tolerance",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeResult {
    pub modes: ModeSet,
    pub max_prob: ProbValue,
    pub search_ceiling: u64,
    pub exactness: Exactness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub cap: u64,
    /// Spans up to this many entries always run in exact arithmetic; longer
    /// ones try the certified floating-point path first.
    pub exact_span_limit: u64,
    pub arithmetic: Arithmetic,
}

pub const DEFAULT_EXACT_SPAN_LIMIT: u64 = 10_000;

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            cap: DEFAULT_TABLE_CAP,
            exact_span_limit: DEFAULT_EXACT_SPAN_LIMIT,
            arithmetic: Arithmetic::Exact,
        }
    }
}

impl SearchOptions {
    /// Exact arithmetic regardless of span.
    pub fn exact_only() -> Self {
        SearchOptions {
            exact_span_limit: u64::MAX,
            ..Self::default()
        }
    }
}

/// All maximizers of `P_n`, searched over `[kr, m̄]`.
pub fn mode_search(params: &Params) -> Result<ModeResult> {
    mode_search_with(params, SearchOptions::default())
}

pub fn mode_search_with(params: &Params, options: SearchOptions) -> Result<ModeResult> {
    mode_search_to(params, upper_bound(params), options)
}

/// Mode search over `[kr, ceiling]`.
pub fn mode_search_to(params: &Params, ceiling: u64, options: SearchOptions) -> Result<ModeResult> {
    let len = checked_len(params, ceiling, options.cap)?;
    match options.arithmetic {
        Arithmetic::Log => Ok(tolerance_search(params, ceiling, len)),
        Arithmetic::Exact if len <= options.exact_span_limit => {
            Ok(exact_search(params, ceiling, len, None))
        }
        Arithmetic::Exact => Ok(certified_search(params, ceiling, len)),
    }
}

/// Streams the integer recurrence and compares `P_n` against the running best
/// by cross-multiplication, keeping the best rescaled to the current `n`.
fn exact_search(
    params: &Params,
    ceiling: u64,
    len: u64,
    candidates: Option<&BTreeSet<u64>>,
) -> ModeResult {
    let (_, b) = params.p_parts();
    // (first maximizer, U at that maximizer, U_best * b^(n - m) at the current n)
    let mut best: Option<(u64, BigUint, BigUint)> = None;
    let mut modes: Vec<u64> = Vec::new();
    for (n, u) in ExactRecurrence::new(params).take(len as usize) {
        if let Some((_, _, scaled)) = best.as_mut() {
            *scaled *= &b;
        }
        if candidates.is_some_and(|c| !c.contains(&n)) {
            continue;
        }
        match best.as_mut() {
            None => {
                best = Some((n, u.clone(), u));
                modes.push(n);
            }
            Some((m, at_mode, scaled)) => match u.cmp(scaled) {
                std::cmp::Ordering::Greater => {
                    *m = n;
                    *at_mode = u.clone();
                    *scaled = u;
                    modes.clear();
                    modes.push(n);
                }
                std::cmp::Ordering::Equal => modes.push(n),
                std::cmp::Ordering::Less => {}
            },
        }
    }
    let (m, at_mode, _) = best.expect("search range is non-empty");
    let denom = num_traits::pow(BigInt::from(b), m as usize);
    ModeResult {
        modes: ModeSet::new(modes),
        max_prob: ProbValue::Exact(BigRational::new(BigInt::from(at_mode), denom)),
        search_ceiling: ceiling,
        exactness: Exactness::Exact,
    }
}

fn scaled_values(params: &Params, len: u64) -> (Vec<Scaled>, bool) {
    let mut rec = ScaledRecurrence::new(params);
    let values: Vec<Scaled> = rec.by_ref().take(len as usize).map(|(_, v)| v).collect();
    (values, rec.precision_lost())
}

fn argmax(values: &[Scaled]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if v.cmp_value(&values[best]).is_gt() {
            best = i;
        }
    }
    best
}

/// Largest relative error bound the certified path accepts.
const MAX_CERTIFIED_ERROR: f64 = 1e-6;

fn certified_search(params: &Params, ceiling: u64, len: u64) -> ModeResult {
    let err = relative_error_bound(params, ceiling);
    let (values, precision_lost) = scaled_values(params, len);
    if precision_lost || err > MAX_CERTIFIED_ERROR {
        return exact_search(params, ceiling, len, None);
    }
    let top = argmax(&values);
    // Anything whose upper error band stays below the top entry's lower band
    // is strictly smaller. The extra 8 ulps cover the ratio's own rounding.
    let threshold = (1.0 - err) / (1.0 + err) - 8.0 * f64::EPSILON;
    let offset = params.support_min();
    let candidates: BTreeSet<u64> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.ratio(&values[top]) >= threshold)
        .map(|(i, _)| offset + i as u64)
        .collect();
    let (candidates, top_ln) = if candidates.len() == 1 {
        (candidates, values[top].ln())
    } else {
        match refine(params, ceiling, len, &candidates) {
            Some(refined) => refined,
            None => (candidates, values[top].ln()),
        }
    };
    if candidates.len() == 1 {
        ModeResult {
            modes: ModeSet::new(candidates),
            max_prob: ProbValue::Log(top_ln),
            search_ceiling: ceiling,
            exactness: Exactness::Certified,
        }
    } else {
        exact_search(params, ceiling, len, Some(&candidates))
    }
}

/// Narrows `candidates` with the double-word recurrence. `None` when that
/// recurrence is unavailable or its bound is void.
fn refine(
    params: &Params,
    ceiling: u64,
    len: u64,
    candidates: &BTreeSet<u64>,
) -> Option<(BTreeSet<u64>, f64)> {
    let mut rec = WideRecurrence::new(params)?;
    let kept: Vec<(u64, Wide)> = rec
        .by_ref()
        .take(len as usize)
        .filter(|(n, _)| candidates.contains(n))
        .collect();
    if rec.precision_lost() {
        return None;
    }
    let err = wide_error_bound(params, ceiling);
    let one = TwoFloat::from(1.0);
    let mut top = 0;
    for (i, (_, w)) in kept.iter().enumerate() {
        if !kept[top].1.at_least(w, one)? {
            top = i;
        }
    }
    // Same test as the f64 stage; (1 - e)/(1 + e) >= 1 - 2e, and the extra
    // allowance covers the products in the comparison.
    let threshold = one - (2.0 * err + 4.0 * OP_ERROR);
    let mut refined = BTreeSet::new();
    for (n, w) in &kept {
        if w.at_least(&kept[top].1, threshold)? {
            refined.insert(*n);
        }
    }
    Some((refined, kept[top].1.ln()))
}

fn tolerance_search(params: &Params, ceiling: u64, len: u64) -> ModeResult {
    let (values, _) = scaled_values(params, len);
    let top = argmax(&values);
    let top_ln = values[top].ln();
    let offset = params.support_min();
    let modes = values
        .iter()
        .enumerate()
        .filter(|(_, v)| (top_ln - v.ln()) <= LOG_TIE_TOLERANCE)
        .map(|(i, _)| offset + i as u64);
    ModeResult {
        modes: ModeSet::new(modes),
        max_prob: ProbValue::Log(top_ln),
        search_ceiling: ceiling,
        exactness: Exactness::Tolerance,
    }
}

/// Closed-form mode set at `p = 1/2` for `k, r >= 2`:
/// `kr + (r-1)(2^(k+1) - k - 2) - 1`, and the triple `{6, 7, 8}` at `k = r = 2`.
pub fn half_p_mode_formula(k: u32, r: u32) -> Result<ModeSet> {
    if k < 2 || r < 2 {
        return Err(Error::NotApplicable(format!(
            "closed form needs k >= 2 and r >= 2 (k={k}, r={r})"
        )));
    }
    let overflow = || Error::Overflow("half-p mode formula");
    let (k, r) = (k as u64, r as u64);
    let pow = 1u64.checked_shl((k + 1) as u32).filter(|_| k < 63).ok_or_else(overflow)?;
    let m = (r - 1)
        .checked_mul(pow - k - 2)
        .and_then(|x| x.checked_add(k * r - 1))
        .ok_or_else(overflow)?;
    if (k, r) == (2, 2) {
        Ok(ModeSet::new([m - 1, m, m + 1]))
    } else {
        Ok(ModeSet::single(m))
    }
}

/// `Δ_v = P_(kr+v) - P_(kr+v-1)` for `v = 0 ..= v_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSequence {
    pub params: Params,
    pub deltas: Vec<BigRational>,
}

impl DeltaSequence {
    pub fn delta(&self, v: u64) -> &BigRational {
        &self.deltas[v as usize]
    }

    /// First `v` where the difference is not strictly positive.
    pub fn first_non_positive(&self) -> Option<u64> {
        self.deltas
            .iter()
            .position(|d| !d.is_positive())
            .map(|v| v as u64)
    }
}

/// Default diagnostic range, `m̄ - kr + k`.
pub fn default_delta_range(params: &Params) -> u64 {
    (upper_bound(params) - params.support_min()).saturating_add(params.k() as u64)
}

/// Exact differences, with both difference recurrences re-checked at every `v`.
pub fn delta_sequence(params: &Params, v_max: u64) -> Result<DeltaSequence> {
    let kr = params.support_min();
    let table = pmf_table(params, kr.checked_add(v_max).ok_or(Error::Overflow("v_max"))?)?;
    let prob = |v: i64| -> BigRational {
        if v < 0 {
            BigRational::zero()
        } else {
            table.exact(kr + v as u64)
        }
    };
    let deltas: Vec<BigRational> = (0..=v_max as i64).map(|v| prob(v) - prob(v - 1)).collect();
    let delta = |v: i64| -> BigRational {
        if v < 0 {
            BigRational::zero()
        } else {
            deltas[v as usize].clone()
        }
    };

    let k = params.k() as i64;
    let r1 = BigRational::from_integer(BigInt::from(params.r() - 1));
    let (p, q) = (params.p(), params.q());
    let ri = |x: i64| BigRational::from_integer(BigInt::from(x));
    let p_powers: Vec<BigRational> = (0..=k as usize)
        .map(|j| num_traits::pow(p.clone(), j))
        .collect();
    let quadratic = f_coefficients(params).ok();

    for v in 1..=v_max as i64 {
        // v Δ_v = (q(r-1) - p v) P_(kr+v-1) + q Σ_{j=2..k} (v + j(r-1)) p^(j-1) P_(kr+v-j)
        let mut rhs = (q * &r1 - p * ri(v)) * prob(v - 1);
        for j in 2..=k {
            rhs += q * (ri(v) + ri(j) * &r1) * &p_powers[(j - 1) as usize] * prob(v - j);
        }
        if ri(v) * delta(v) != rhs {
            return Err(Error::IdentityViolation {
                identity: "first-difference recurrence",
                v: v as u64,
            });
        }

        if v < 2 {
            continue;
        }
        let Some(f) = &quadratic else { continue };
        // v(v-1) Δ_v = f(v) P_(kr+v-1-k)
        //   + q(r-1) Σ_{j=1..k-1} [Σ_{i=1..j} (v - 1 + i(qr - 1)) p^(i-1)] Δ_(v-1-j)
        let qr1 = q * ri(params.r() as i64) - BigRational::one();
        let mut rhs = f.eval(&ri(v)) * prob(v - 1 - k);
        let mut inner = BigRational::zero();
        for j in 1..k {
            inner += (ri(v - 1) + ri(j) * &qr1) * &p_powers[(j - 1) as usize];
            rhs += q * &r1 * &inner * delta(v - 1 - j);
        }
        if ri(v * (v - 1)) * delta(v) != rhs {
            return Err(Error::IdentityViolation {
                identity: "quadratic difference recurrence",
                v: v as u64,
            });
        }
    }
    Ok(DeltaSequence {
        params: params.clone(),
        deltas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: u32, r: u32, n: i64, d: i64) -> Params {
        Params::from_ratio(k, r, n, d).unwrap()
    }

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn mode_set_rendering() {
        let m = ModeSet::new([8, 6, 7, 7]);
        assert_eq!(m.to_string(), "6,7,8");
        assert_eq!(ModeSet::parse("6,7,8"), Some(m));
        assert_eq!(ModeSet::parse(""), None);
        assert_eq!(ModeSet::parse("6,x"), None);
    }

    #[test]
    fn classic_modes() {
        assert_eq!(classic_nb_mode(3, &ratio(1, 2)).unwrap(), ModeSet::new([4, 5]));
        assert_eq!(classic_nb_mode(1, &ratio(3, 10)).unwrap(), ModeSet::single(1));
        assert_eq!(classic_nb_mode(4, &ratio(7, 10)).unwrap(), ModeSet::single(5));
        assert!(classic_nb_mode(0, &ratio(1, 2)).is_err());
        assert!(classic_nb_mode(2, &ratio(1, 1)).is_err());
    }

    #[test]
    fn classic_matches_brute_force_argmax() {
        for r in 1..=10u32 {
            for d in [2i64, 3, 4, 5, 10] {
                for n in 1..d {
                    let p = params(1, r, n, d);
                    let found = mode_search(&p).unwrap();
                    assert_eq!(found.modes, classic_nb_mode(r, p.p()).unwrap(), "r={r} p={n}/{d}");
                }
            }
        }
    }

    #[test]
    fn small_search_examples() {
        let res = mode_search(&params(2, 2, 1, 2)).unwrap();
        assert_eq!(res.modes, ModeSet::new([6, 7, 8]));
        assert_eq!(res.max_prob, ProbValue::Exact(ratio(5, 64)));
        assert_eq!(res.search_ceiling, 8);
        assert_eq!(res.exactness, Exactness::Exact);
        assert_eq!(mode_search(&params(3, 2, 1, 2)).unwrap().modes, ModeSet::single(16));
        assert_eq!(mode_search(&params(4, 1, 7, 10)).unwrap().modes, ModeSet::single(4));
        assert_eq!(mode_search(&params(3, 4, 9, 10)).unwrap().modes, ModeSet::single(12));
    }

    #[test]
    fn certified_path_agrees_with_exact() {
        let forced = SearchOptions {
            exact_span_limit: 0,
            ..SearchOptions::default()
        };
        let cases = [
            (3, 3, 1, 5),
            (4, 2, 3, 10),
            (2, 5, 1, 2),
            (5, 3, 3, 5),
            (2, 2, 1, 2),
            (1, 5, 1, 2),
            (4, 2, 1, 10),
        ];
        for (k, r, n, d) in cases {
            let p = params(k, r, n, d);
            let exact = mode_search_with(&p, SearchOptions::exact_only()).unwrap();
            let fast = mode_search_with(&p, forced).unwrap();
            assert_eq!(exact.modes, fast.modes, "{p}");
            assert!((exact.max_prob.ln() - fast.max_prob.ln()).abs() < 1e-9);
        }
        // The triple tie cannot be certified by floats and falls back to exact.
        let tie = mode_search_with(&params(2, 2, 1, 2), forced).unwrap();
        assert_eq!(tie.exactness, Exactness::Exact);
        assert_eq!(tie.max_prob, ProbValue::Exact(ratio(5, 64)));
    }

    #[test]
    fn tolerance_path_flags_near_ties() {
        let opts = SearchOptions {
            arithmetic: Arithmetic::Log,
            ..SearchOptions::default()
        };
        let res = mode_search_with(&params(2, 2, 1, 2), opts).unwrap();
        assert_eq!(res.modes, ModeSet::new([6, 7, 8]));
        assert_eq!(res.exactness, Exactness::Tolerance);
    }

    #[test]
    fn cap_propagates() {
        let opts = SearchOptions {
            cap: 3,
            ..SearchOptions::default()
        };
        assert!(matches!(
            mode_search_with(&params(2, 2, 1, 2), opts),
            Err(Error::TableTooLarge { requested: 5, cap: 3 })
        ));
    }

    #[test]
    fn half_formula() {
        assert_eq!(half_p_mode_formula(2, 2).unwrap(), ModeSet::new([6, 7, 8]));
        assert_eq!(half_p_mode_formula(4, 3).unwrap(), ModeSet::single(63));
        assert_eq!(half_p_mode_formula(5, 5).unwrap(), ModeSet::single(252));
        assert!(matches!(half_p_mode_formula(1, 3), Err(Error::NotApplicable(_))));
        assert!(matches!(half_p_mode_formula(70, 3), Err(Error::Overflow(_))));
    }

    #[test]
    fn deltas_at_two_two_half() {
        let d = delta_sequence(&params(2, 2, 1, 2), 4).unwrap();
        assert_eq!(d.delta(0), &ratio(1, 16));
        assert_eq!(d.delta(1), &ratio(0, 1));
        assert!(d.delta(3).is_zero());
        assert!(d.delta(4).is_zero());
    }

    #[test]
    fn deltas_positive_below_run_length() {
        let d = delta_sequence(&params(3, 2, 1, 3), 3).unwrap();
        assert_eq!(d.first_non_positive(), None);
    }

    #[test]
    fn identities_hold_over_default_range() {
        for (k, r, n, d) in [(2, 2, 1, 2), (3, 3, 1, 3), (4, 2, 2, 5), (2, 5, 7, 10), (1, 4, 1, 2), (3, 1, 3, 5)] {
            let p = params(k, r, n, d);
            let v_max = default_delta_range(&p);
            let seq = delta_sequence(&p, v_max).unwrap();
            assert_eq!(seq.deltas.len() as u64, v_max + 1);
        }
    }
}
