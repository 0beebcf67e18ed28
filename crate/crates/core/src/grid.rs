//! Mode grids over `(k, r, p)`, one independent search per cell.

use num_rational::BigRational;

use crate::error::Result;
use crate::modes::{mode_search_with, ModeResult, SearchOptions};
use crate::par::{map_collect, Execution};
use crate::params::{parse_probability, Params};

/// Default `p` values of the `table` command.
pub const DEFAULT_P_LIST: [&str; 7] = ["0.5", "0.6", "0.7", "0.8", "0.9", "0.95", "0.99"];

/// A probability together with the literal it was parsed from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelledP {
    pub label: String,
    pub value: BigRational,
}

impl LabelledP {
    pub fn parse(label: &str) -> Result<Self> {
        Ok(LabelledP {
            label: label.trim().to_string(),
            value: parse_probability(label)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpec {
    pub ks: Vec<u32>,
    pub rs: Vec<u32>,
    pub ps: Vec<LabelledP>,
}

impl Default for GridSpec {
    /// `k, r = 2..=5` with [`DEFAULT_P_LIST`].
    fn default() -> Self {
        GridSpec {
            ks: (2..=5).collect(),
            rs: (2..=5).collect(),
            ps: DEFAULT_P_LIST
                .iter()
                .map(|p| LabelledP::parse(p).expect("default p list parses"))
                .collect(),
        }
    }
}

impl GridSpec {
    /// Every cell as validated parameters, sorted by `(k, r, p)`.
    pub fn cells(&self) -> Result<Vec<(Params, String)>> {
        let mut ps = self.ps.clone();
        ps.sort_by(|a, b| a.value.cmp(&b.value));
        ps.dedup_by(|a, b| a.value == b.value);
        let mut ks = self.ks.clone();
        ks.sort_unstable();
        ks.dedup();
        let mut rs = self.rs.clone();
        rs.sort_unstable();
        rs.dedup();
        let mut cells = Vec::with_capacity(ks.len() * rs.len() * ps.len());
        for &k in &ks {
            for &r in &rs {
                for p in &ps {
                    cells.push((Params::new(k, r, p.value.clone())?, p.label.clone()));
                }
            }
        }
        Ok(cells)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub params: Params,
    pub p_label: String,
    pub result: ModeResult,
}

/// Runs [`mode_search_with`] on every cell. Output order is `(k, r, p)`
/// regardless of scheduling.
pub fn mode_grid(spec: &GridSpec, options: SearchOptions, execution: Execution) -> Result<Vec<GridCell>> {
    let cells = spec.cells()?;
    map_collect(execution, cells, |(params, p_label)| {
        let result = mode_search_with(&params, options)?;
        Ok(GridCell {
            params,
            p_label,
            result,
        })
    })
    .into_iter()
    .collect()
}
