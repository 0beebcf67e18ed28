//! Text, CSV and JSON renderings. Machine formats carry rationals as
//! `"num/den"` strings; decimals appear only in text output.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bounds::{BoundsResult, LowerBound};
use crate::cli::Format;
use crate::grid::GridCell;
use crate::modes::{ModeResult, ModeSet};
use crate::params::Params;
use crate::pmf::PmfTable;
use crate::sampler::SampleReport;

fn rational(x: &num_rational::BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn json_string(value: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&value).expect("json");
    s.push('\n');
    s
}

pub(crate) fn pmf(table: &PmfTable, format: Format) -> String {
    match format {
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "# {}", table.params());
            for (n, p) in table.iter() {
                let _ = writeln!(s, "{n}\t{p}\t{}", p.decimal());
            }
            s
        }
        Format::Csv => csv_string(
            &["n", "p_n"],
            table.iter().map(|(n, p)| vec![n.to_string(), p.to_string()]),
        ),
        Format::Json => json_string(json!({
            "k": table.params().k(),
            "r": table.params().r(),
            "p": rational(table.params().p()),
            "rows": table.iter().map(|(n, p)| json!({"n": n, "p_n": p.to_string()})).collect::<Vec<_>>(),
        })),
    }
}

pub(crate) fn mode(params: &Params, result: &ModeResult, format: Format) -> String {
    match format {
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "modes: {}", result.modes);
            let _ = writeln!(s, "max_prob: {} ({})", result.max_prob, result.max_prob.decimal());
            let _ = writeln!(s, "search_ceiling: {}", result.search_ceiling);
            let _ = writeln!(s, "exactness: {}", result.exactness.as_str());
            s
        }
        Format::Csv => csv_string(
            &["k", "r", "p", "modes", "max_prob", "search_ceiling", "exactness"],
            [TableRow::from_result(params, result).csv_record()],
        ),
        Format::Json => json_string(serde_json::to_value(TableRow::from_result(params, result)).expect("json")),
    }
}

pub(crate) fn bounds(params: &Params, b: &BoundsResult, format: Format) -> String {
    let (lower, reason, rho, branch) = match &b.lower {
        LowerBound::Applicable {
            value,
            rho_floor,
            branch,
        } => (
            value.to_string(),
            String::new(),
            rho_floor.to_string(),
            branch.as_str().to_string(),
        ),
        LowerBound::NotApplicable(why) => ("n/a".into(), why.clone(), "n/a".into(), "n/a".into()),
    };
    let quad = b.quadratic.as_ref().map(|f| [rational(&f.a), rational(&f.b), rational(&f.c)]);
    match format {
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "upper: {}", b.upper);
            if reason.is_empty() {
                let _ = writeln!(s, "lower: {lower}");
            } else {
                let _ = writeln!(s, "lower: n/a ({reason})");
            }
            let _ = writeln!(s, "rho_floor: {rho}");
            let _ = writeln!(s, "branch: {branch}");
            let _ = writeln!(s, "qr_equals_one: {}", b.special_branch);
            if let Some([a, bb, c]) = &quad {
                let _ = writeln!(s, "f: a={a} b={bb} c={c}");
            }
            s
        }
        Format::Csv => csv_string(
            &["k", "r", "p", "upper", "lower", "rho_floor", "branch", "qr_equals_one", "reason"],
            [vec![
                params.k().to_string(),
                params.r().to_string(),
                rational(params.p()),
                b.upper.to_string(),
                lower,
                rho,
                branch,
                b.special_branch.to_string(),
                reason,
            ]],
        ),
        Format::Json => json_string(json!({
            "k": params.k(),
            "r": params.r(),
            "p": rational(params.p()),
            "upper": b.upper,
            "lower": b.lower.value(),
            "lower_reason": if reason.is_empty() { None } else { Some(reason) },
            "rho_floor": b.rho_floor().map(|x| x.to_string()),
            "branch": b.rho_floor().map(|_| branch),
            "qr_equals_one": b.special_branch,
            "quadratic": quad.map(|[a, bb, c]| json!({"a": a, "b": bb, "c": c})),
        })),
    }
}

/// One cell of a mode grid in machine-readable form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub k: u32,
    pub r: u32,
    /// `"num/den"`.
    pub p: String,
    pub modes: Vec<u64>,
    /// `"num/den"`, or `"exp(x)"` for a log-domain value.
    pub max_prob: String,
    pub search_ceiling: u64,
    pub exactness: String,
}

impl TableRow {
    pub fn from_result(params: &Params, result: &ModeResult) -> Self {
        TableRow {
            k: params.k(),
            r: params.r(),
            p: rational(params.p()),
            modes: result.modes.as_slice().to_vec(),
            max_prob: result.max_prob.to_string(),
            search_ceiling: result.search_ceiling,
            exactness: result.exactness.as_str().to_string(),
        }
    }

    pub fn from_cell(cell: &GridCell) -> Self {
        Self::from_result(&cell.params, &cell.result)
    }

    fn csv_record(&self) -> Vec<String> {
        vec![
            self.k.to_string(),
            self.r.to_string(),
            self.p.clone(),
            ModeSet::new(self.modes.iter().copied()).to_string(),
            self.max_prob.clone(),
            self.search_ceiling.to_string(),
            self.exactness.clone(),
        ]
    }
}

const TABLE_HEADER: [&str; 7] = ["k", "r", "p", "modes", "max_prob", "search_ceiling", "exactness"];

/// Parses CSV produced by `table --format csv`.
pub fn parse_table_csv(text: &str) -> Result<Vec<TableRow>, String> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().collect::<Vec<_>>() != TABLE_HEADER {
        return Err(format!("unexpected header {header:?}"));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| e.to_string())?;
        let field = |i: usize| record.get(i).unwrap_or_default().to_string();
        let int = |i: usize| field(i).parse::<u64>().map_err(|e| format!("column {i}: {e}"));
        rows.push(TableRow {
            k: int(0)? as u32,
            r: int(1)? as u32,
            p: field(2),
            modes: ModeSet::parse(&field(3))
                .ok_or_else(|| format!("bad mode set {:?}", field(3)))?
                .as_slice()
                .to_vec(),
            max_prob: field(4),
            search_ceiling: int(5)?,
            exactness: field(6),
        });
    }
    Ok(rows)
}

/// Parses JSON produced by `table --format json`.
pub fn parse_table_json(text: &str) -> Result<Vec<TableRow>, String> {
    #[derive(Deserialize)]
    struct Doc {
        cells: Vec<TableRow>,
    }
    serde_json::from_str::<Doc>(text)
        .map(|d| d.cells)
        .map_err(|e| e.to_string())
}

pub(crate) fn table(cells: &[GridCell], format: Format) -> String {
    match format {
        Format::Csv => csv_string(
            &TABLE_HEADER,
            cells.iter().map(|c| TableRow::from_cell(c).csv_record()),
        ),
        Format::Json => json_string(json!({
            "cells": cells.iter().map(TableRow::from_cell).collect::<Vec<_>>(),
        })),
        Format::Text => text_table(cells),
    }
}

/// One block per `p`: rows `k`, columns `r`, cells the mode set.
fn text_table(cells: &[GridCell]) -> String {
    let mut ps: Vec<(&num_rational::BigRational, &str)> = Vec::new();
    let mut ks: Vec<u32> = Vec::new();
    let mut rs: Vec<u32> = Vec::new();
    for c in cells {
        if !ps.iter().any(|(p, _)| *p == c.params.p()) {
            ps.push((c.params.p(), &c.p_label));
        }
        if !ks.contains(&c.params.k()) {
            ks.push(c.params.k());
        }
        if !rs.contains(&c.params.r()) {
            rs.push(c.params.r());
        }
    }
    ps.sort_by(|a, b| a.0.cmp(b.0));
    let lookup = |k: u32, r: u32, p: &num_rational::BigRational| {
        cells
            .iter()
            .find(|c| c.params.k() == k && c.params.r() == r && c.params.p() == p)
            .map(|c| {
                let mut s = c.result.modes.to_string();
                if c.result.exactness == crate::modes::Exactness::Tolerance {
                    s.push('~');
                }
                s
            })
            .unwrap_or_default()
    };

    let mut out = String::new();
    for (i, (p, label)) in ps.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let grid: Vec<Vec<String>> = ks
            .iter()
            .map(|&k| rs.iter().map(|&r| lookup(k, r, p)).collect())
            .collect();
        let width = grid
            .iter()
            .flatten()
            .map(String::len)
            .chain(rs.iter().map(|r| r.to_string().len()))
            .max()
            .unwrap_or(1);
        let label_width = ks
            .iter()
            .map(|k| k.to_string().len())
            .max()
            .unwrap_or(1)
            .max(3);
        let _ = writeln!(out, "m_k(r, {label})");
        let mut line = format!("{:<label_width$}", "k/r");
        for r in &rs {
            let _ = write!(line, "  {r:>width$}");
        }
        let _ = writeln!(out, "{line}");
        for (k, row) in ks.iter().zip(&grid) {
            let mut line = format!("{k:<label_width$}");
            for cell in row {
                let _ = write!(line, "  {cell:>width$}");
            }
            let _ = writeln!(out, "{line}");
        }
    }
    out
}

pub(crate) fn verify(params: &Params, checked: usize, mismatches: &[u64], format: Format) -> String {
    match format {
        Format::Text => {
            let mut s = format!("# {params}\nchecked: {checked}\nmismatches: {}\n", mismatches.len());
            if let Some(first) = mismatches.first() {
                let _ = writeln!(s, "first_mismatch: {first}");
            }
            s
        }
        Format::Csv => csv_string(
            &["k", "r", "p", "checked", "mismatches"],
            [vec![
                params.k().to_string(),
                params.r().to_string(),
                rational(params.p()),
                checked.to_string(),
                mismatches.len().to_string(),
            ]],
        ),
        Format::Json => json_string(json!({
            "k": params.k(),
            "r": params.r(),
            "p": rational(params.p()),
            "checked": checked,
            "mismatched_n": mismatches,
        })),
    }
}

pub(crate) fn sample(report: &SampleReport, format: Format) -> String {
    let dist = &report.dist;
    match format {
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "# {}", dist.params);
            let _ = writeln!(s, "samples: {}", dist.sample_count);
            let _ = writeln!(s, "seed: {}", dist.seed);
            let _ = writeln!(s, "n_cap: {}", report.n_cap);
            let _ = writeln!(s, "tv_distance: {}", crate::prob::format_sig(report.tv_distance, 6));
            let _ = writeln!(s, "empirical_argmax: {}", dist.argmax());
            for (n, c) in &dist.histogram {
                let _ = writeln!(s, "{n}\t{c}\t{}", crate::prob::format_sig(dist.frequency(*n), 6));
            }
            s
        }
        Format::Csv => csv_string(
            &["n", "count"],
            dist.histogram
                .iter()
                .map(|(n, c)| vec![n.to_string(), c.to_string()]),
        ),
        Format::Json => json_string(json!({
            "k": dist.params.k(),
            "r": dist.params.r(),
            "p": rational(dist.params.p()),
            "samples": dist.sample_count,
            "seed": dist.seed,
            "n_cap": report.n_cap,
            "tv_distance": report.tv_distance,
            "histogram": dist.histogram.iter().map(|(n, c)| json!({"n": n, "count": c})).collect::<Vec<_>>(),
        })),
    }
}
