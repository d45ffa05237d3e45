//! The table of published values that `ratcher check` verifies.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

pub const BUILTIN: &str = include_str!("../data/reference.csv");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feasibility {
    /// Expected to finish within the default budget.
    Feasible,
    /// Feasible with patience; only run on request.
    Stretch,
    /// Must be refused under the default budget.
    Refused,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Entry {
    #[serde(rename = "type")]
    pub type_label: String,
    pub e: u32,
    pub m1: u64,
    pub expected: Option<u128>,
    pub provenance: String,
    pub feasibility: Feasibility,
}

pub fn parse(text: &str) -> Result<Vec<Entry>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize().enumerate() {
        let e: Entry = row.with_context(|| format!("reference table row {}", i + 2))?;
        out.push(e);
    }
    Ok(out)
}

pub fn load(path: Option<&Path>) -> Result<Vec<Entry>> {
    match path {
        None => parse(BUILTIN),
        Some(p) => parse(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?),
    }
}
