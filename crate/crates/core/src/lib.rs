//! Negative binomial distribution of order `k`, type I.
//!
//! `X` counts Bernoulli(`p`) trials until the `r`-th non-overlapping run of `k`
//! consecutive successes; its support starts at `kr`. This crate computes the
//! PMF exactly by a linear recurrence, certifies it against a brute-force
//! multinomial sum, finds the complete mode set, and evaluates closed-form
//! upper and lower bounds on the mode.
//!
//! ```
//! use nbk::{mode_search, validate_params};
//!
//! let params = validate_params(2, 3, "0.5").unwrap();
//! assert_eq!(mode_search(&params).unwrap().modes.to_string(), "13");
//! ```

pub mod bounds;
pub mod cli;
pub mod error;
pub mod grid;
pub mod modes;
pub mod oracle;
pub mod par;
pub mod params;
pub mod pmf;
pub mod prob;
pub mod sampler;

pub use bounds::{
    bounds, f_coefficients, lower_bound, poisson_limit_bounds, upper_bound, BoundsResult,
    LowerBound, LowerBranch, QuadraticF,
};
pub use error::{Error, Result};
pub use grid::{mode_grid, GridCell, GridSpec, LabelledP};
pub use modes::{
    classic_nb_mode, delta_sequence, half_p_mode_formula, mode_search, mode_search_to,
    mode_search_with, DeltaSequence, Exactness, ModeResult, ModeSet, SearchOptions,
};
pub use oracle::{enumerate_solutions, multinomial_coeff, pmf_direct, CompositionCounts};
pub use par::Execution;
pub use params::{parse_probability, validate_params, Params};
pub use pmf::{pmf_table, pmf_table_with, tail_mass, PmfTable, TableOptions};
pub use prob::{Arithmetic, ProbValue};
pub use sampler::{empirical_pmf, sample_waiting_time, EmpiricalDist, SampleReport};
