//! Recurrence-based PMF tables.

pub mod exact;
pub mod scaled;
pub mod wide;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::params::Params;
use crate::prob::{Arithmetic, ProbValue};

pub use exact::ExactRecurrence;
pub use scaled::{relative_error_bound, Scaled, ScaledRecurrence};
pub use wide::{wide_error_bound, Wide, WideRecurrence};

/// Default maximum number of entries in one table.
pub const DEFAULT_TABLE_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableOptions {
    pub cap: u64,
    pub arithmetic: Arithmetic,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            cap: DEFAULT_TABLE_CAP,
            arithmetic: Arithmetic::Exact,
        }
    }
}

/// `P_n` for `n = kr ..= n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PmfTable {
    params: Params,
    offset: u64,
    probs: Vec<ProbValue>,
}

impl PmfTable {
    pub fn params(&self) -> &Params {
        &self.params
    }

    /// First `n` in the table, always `kr`.
    pub fn offset(&self) -> u64 {
        self.offset
    }

    pub fn n_max(&self) -> u64 {
        self.offset + self.probs.len() as u64 - 1
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn arithmetic(&self) -> Arithmetic {
        self.probs[0].arithmetic()
    }

    pub fn probs(&self) -> &[ProbValue] {
        &self.probs
    }

    /// `P_n`; zero below the support, `None` past `n_max`.
    pub fn get(&self, n: u64) -> Option<ProbValue> {
        if n < self.offset {
            return Some(ProbValue::zero(self.arithmetic()));
        }
        self.probs.get((n - self.offset) as usize).cloned()
    }

    /// Exact `P_n`, zero below the support. Panics on a log-domain table.
    pub fn exact(&self, n: u64) -> BigRational {
        if n < self.offset {
            return BigRational::from_integer(BigInt::from(0));
        }
        self.probs[(n - self.offset) as usize]
            .as_exact()
            .expect("exact table")
            .clone()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &ProbValue)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, p)| (self.offset + i as u64, p))
    }
}

/// Checks `kr <= n_max` and the table-size cap; returns the entry count.
pub fn checked_len(params: &Params, n_max: u64, cap: u64) -> Result<u64> {
    let support_min = params.support_min();
    if n_max < support_min {
        return Err(Error::RangeTooSmall {
            n_max,
            support_min,
        });
    }
    let len = n_max - support_min + 1;
    if len > cap {
        return Err(Error::TableTooLarge {
            requested: len,
            cap,
        });
    }
    Ok(len)
}

/// Exact PMF table up to `n_max` with the default cap.
pub fn pmf_table(params: &Params, n_max: u64) -> Result<PmfTable> {
    pmf_table_with(params, n_max, TableOptions::default())
}

pub fn pmf_table_with(params: &Params, n_max: u64, options: TableOptions) -> Result<PmfTable> {
    let len = checked_len(params, n_max, options.cap)? as usize;
    let probs = match options.arithmetic {
        Arithmetic::Exact => {
            let (_, b) = params.p_parts();
            let b = BigInt::from(b);
            let mut denom = num_traits::pow(b.clone(), params.support_min() as usize);
            let mut probs = Vec::with_capacity(len);
            for (_, scaled) in ExactRecurrence::new(params).take(len) {
                probs.push(ProbValue::Exact(BigRational::new(
                    BigInt::from(scaled),
                    denom.clone(),
                )));
                denom *= &b;
            }
            probs
        }
        // Double-word when p fits, so the drift over long tables stays far
        // below the 1e-12 target.
        Arithmetic::Log => match WideRecurrence::new(params) {
            Some(rec) => rec.take(len).map(|(_, v)| ProbValue::Log(v.ln())).collect(),
            None => ScaledRecurrence::new(params)
                .take(len)
                .map(|(_, v)| ProbValue::Log(v.ln()))
                .collect(),
        },
    };
    Ok(PmfTable {
        params: params.clone(),
        offset: params.support_min(),
        probs,
    })
}

/// `1 - sum of the table`, the mass beyond `n_max`.
pub fn tail_mass(table: &PmfTable) -> ProbValue {
    let arith = table.arithmetic();
    let total = table
        .probs
        .iter()
        .fold(ProbValue::zero(arith), |acc, p| acc.add(p));
    total.complement()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn half22() -> Params {
        Params::from_ratio(2, 2, 1, 2).unwrap()
    }

    #[test]
    fn boundary_entries() {
        let t = pmf_table(&half22(), 5).unwrap();
        assert_eq!(t.offset(), 4);
        assert_eq!(t.exact(4), q(1, 16));
        assert_eq!(t.exact(5), q(1, 16));
        assert_eq!(t.exact(3), BigRational::zero());
        assert_eq!(t.get(6), None);
    }

    #[test]
    fn ties_of_five_sixty_fourths() {
        let t = pmf_table(&half22(), 8).unwrap();
        for n in 6..=8 {
            assert_eq!(t.exact(n), q(5, 64), "P_{n}");
        }
    }

    #[test]
    fn range_and_cap_errors() {
        let p = Params::from_ratio(3, 1, 1, 2).unwrap();
        assert_eq!(
            pmf_table(&p, 2),
            Err(Error::RangeTooSmall {
                n_max: 2,
                support_min: 3
            })
        );
        let opts = TableOptions {
            cap: 10,
            ..TableOptions::default()
        };
        assert_eq!(pmf_table_with(&p, 12, opts).unwrap().len(), 10);
        assert_eq!(
            pmf_table_with(&p, 13, opts),
            Err(Error::TableTooLarge {
                requested: 11,
                cap: 10
            })
        );
    }

    #[test]
    fn tail_mass_values() {
        let t = pmf_table(&half22(), 4).unwrap();
        assert_eq!(tail_mass(&t), ProbValue::Exact(q(15, 16)));
        let t = pmf_table(&half22(), 8).unwrap();
        assert_eq!(tail_mass(&t), ProbValue::Exact(q(41, 64)));
    }

    #[test]
    fn recurrence_identity_holds_exactly() {
        let params = Params::from_ratio(3, 2, 7, 10).unwrap();
        let t = pmf_table(&params, 40).unwrap();
        let kr = params.support_min();
        let (p, qq) = (params.p().clone(), params.q().clone());
        for n in kr + 1..=40 {
            let s = BigRational::from_integer((n - kr).into());
            let mut rhs = BigRational::zero();
            let mut p_pow = BigRational::one();
            for j in 1..=3u64 {
                let c = BigRational::from_integer((n - kr + j * (params.r() as u64 - 1)).into());
                rhs += c * &p_pow * t.exact(n - j);
                p_pow *= &p;
            }
            assert_eq!(s * t.exact(n), qq.clone() * rhs, "n = {n}");
        }
    }

    #[test]
    fn log_table_tracks_exact() {
        let params = Params::from_ratio(4, 3, 3, 5).unwrap();
        let exact = pmf_table(&params, 300).unwrap();
        let log = pmf_table_with(
            &params,
            300,
            TableOptions {
                arithmetic: Arithmetic::Log,
                ..TableOptions::default()
            },
        )
        .unwrap();
        for (e, l) in exact.probs().iter().zip(log.probs()) {
            let rel = (l.ln() - e.ln()).abs();
            assert!(rel < 1e-12, "{e} vs {l}");
        }
        let tail = tail_mass(&log).to_f64();
        assert!((tail - tail_mass(&exact).to_f64()).abs() < 1e-12);
    }
}
