//! Monte Carlo check of the exact PMF.
//!
//! A draw is the number of Bernoulli(p) trials needed to see `r` non-overlapping
//! runs of `k` consecutive successes: after each completed run the success
//! counter restarts at zero.
//!
//! Streams: the sample is cut into batches of [`BATCH_SIZE`] draws and batch `i`
//! uses `ChaCha8Rng::seed_from_u64(seed)` with stream `i`. Histograms are merged
//! by addition, so the result is identical for any thread count and for the
//! sequential build.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::par::{map_collect, Execution};
use crate::params::Params;
use crate::pmf::{pmf_table_with, TableOptions};
use crate::prob::Arithmetic;

/// Trials allowed for a single draw before giving up.
pub const MAX_TRIALS: u64 = 1_000_000_000;

pub const BATCH_SIZE: u64 = 1 << 16;

/// The generator for batch `batch` of a run seeded with `seed`.
pub fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

/// A Bernoulli(p) source. Exact integer comparison when `p = a/b` with `b`
/// fitting in 64 bits, otherwise a uniform `f64` threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trial {
    Ratio { num: u64, den: u64 },
    Float(f64),
}

impl Trial {
    pub fn new(params: &Params) -> Self {
        let (a, b) = params.p_parts();
        match (a.to_u64(), b.to_u64()) {
            (Some(num), Some(den)) => Trial::Ratio { num, den },
            _ => Trial::Float(params.p_f64()),
        }
    }

    #[inline]
    pub fn success<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        match *self {
            Trial::Ratio { num, den } => rng.random_range(0..den) < num,
            Trial::Float(p) => rng.random::<f64>() < p,
        }
    }
}

/// One waiting time, always at least `kr`.
pub fn sample_waiting_time<R: Rng + ?Sized>(params: &Params, rng: &mut R) -> Result<u64> {
    draw(Trial::new(params), params.k(), params.r(), MAX_TRIALS, rng)
}

fn draw<R: Rng + ?Sized>(trial: Trial, k: u32, r: u32, cap: u64, rng: &mut R) -> Result<u64> {
    let mut trials = 0u64;
    let mut streak = 0u32;
    let mut runs = 0u32;
    while runs < r {
        if trials >= cap {
            return Err(Error::SimulationCapExceeded { cap });
        }
        trials += 1;
        if trial.success(rng) {
            streak += 1;
            if streak == k {
                runs += 1;
                streak = 0;
            }
        } else {
            streak = 0;
        }
    }
    Ok(trials)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalDist {
    pub params: Params,
    pub sample_count: u64,
    pub histogram: BTreeMap<u64, u64>,
    pub seed: u64,
}

impl EmpiricalDist {
    pub fn frequency(&self, n: u64) -> f64 {
        self.histogram.get(&n).copied().unwrap_or(0) as f64 / self.sample_count as f64
    }

    /// Smallest `n` with the highest count.
    pub fn argmax(&self) -> u64 {
        let mut best = (0u64, 0u64);
        for (&n, &c) in &self.histogram {
            if c > best.1 {
                best = (n, c);
            }
        }
        best.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleReport {
    pub dist: EmpiricalDist,
    pub n_cap: u64,
    /// `1/2 sum |empirical - exact|` over `kr..=n_cap`, plus the lumped tail.
    pub tv_distance: f64,
}

pub fn empirical_pmf(params: &Params, sample_count: u64, seed: u64, n_cap: u64) -> Result<SampleReport> {
    empirical_pmf_with(params, sample_count, seed, n_cap, Execution::default())
}

pub fn empirical_pmf_with(
    params: &Params,
    sample_count: u64,
    seed: u64,
    n_cap: u64,
    execution: Execution,
) -> Result<SampleReport> {
    let dist = sample_histogram(params, sample_count, seed, execution)?;
    let tv_distance = total_variation(&dist, n_cap)?;
    Ok(SampleReport {
        dist,
        n_cap,
        tv_distance,
    })
}

/// Draws `sample_count` waiting times in deterministic batches.
pub fn sample_histogram(
    params: &Params,
    sample_count: u64,
    seed: u64,
    execution: Execution,
) -> Result<EmpiricalDist> {
    if sample_count == 0 {
        return Err(Error::NotApplicable("sample count must be at least 1".into()));
    }
    let trial = Trial::new(params);
    let (k, r) = (params.k(), params.r());
    let batches: Vec<u64> = (0..sample_count.div_ceil(BATCH_SIZE)).collect();
    let partials = map_collect(execution, batches, |batch| -> Result<BTreeMap<u64, u64>> {
        let mut rng = batch_rng(seed, batch);
        let size = BATCH_SIZE.min(sample_count - batch * BATCH_SIZE);
        let mut hist = BTreeMap::new();
        for _ in 0..size {
            *hist.entry(draw(trial, k, r, MAX_TRIALS, &mut rng)?).or_insert(0) += 1;
        }
        Ok(hist)
    });
    let mut histogram = BTreeMap::new();
    for partial in partials {
        for (n, c) in partial? {
            *histogram.entry(n).or_insert(0) += c;
        }
    }
    Ok(EmpiricalDist {
        params: params.clone(),
        sample_count,
        histogram,
        seed,
    })
}

/// Total variation distance to the exact law, bins above `n_cap` lumped.
pub fn total_variation(dist: &EmpiricalDist, n_cap: u64) -> Result<f64> {
    let table = pmf_table_with(
        &dist.params,
        n_cap,
        TableOptions {
            arithmetic: Arithmetic::Log,
            ..TableOptions::default()
        },
    )?;
    let mut covered = 0.0;
    let mut distance = 0.0;
    for (n, p) in table.iter() {
        let exact = p.to_f64();
        covered += exact;
        distance += (dist.frequency(n) - exact).abs();
    }
    let beyond: u64 = dist.histogram.range(n_cap + 1..).map(|(_, c)| c).sum();
    let tail_exact = (1.0 - covered).max(0.0);
    distance += (beyond as f64 / dist.sample_count as f64 - tail_exact).abs();
    Ok(distance / 2.0)
}
