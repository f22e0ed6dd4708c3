//! JSON measure files: an array of `{"x", "n", "w"}` (or `{"n", "r", "w"}`
//! for coset measures) with weights as `"num/den"` strings.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebra::{CosetKey, FieldContext, GroupElem, XiElem};
use crate::error::{Error, Result};
use crate::rational::{format_fraction, parse_rational};

use super::construct::PointMeasure;
use super::sparse::{CosetMeasure, SparseMeasure};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElemEntry {
    pub x: String,
    pub n: i64,
    pub w: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosetEntry {
    pub n: i64,
    pub r: String,
    pub w: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointEntry {
    pub x: String,
    pub w: String,
}

pub fn measure_to_entries(t: &SparseMeasure) -> Vec<ElemEntry> {
    t.iter()
        .map(|(g, w)| ElemEntry { x: g.x.to_string(), n: g.n, w: format_fraction(w) })
        .collect()
}

pub fn measure_from_entries(ctx: FieldContext, entries: &[ElemEntry]) -> Result<SparseMeasure> {
    let pairs = entries
        .iter()
        .map(|e| Ok((GroupElem::new(XiElem::parse(ctx, &e.x)?, e.n), parse_rational(&e.w)?)))
        .collect::<Result<Vec<_>>>()?;
    SparseMeasure::from_pairs(ctx, pairs)
}

pub fn coset_measure_to_entries(t: &CosetMeasure) -> Vec<CosetEntry> {
    t.iter()
        .map(|(k, w)| CosetEntry { n: k.n, r: k.r.to_string(), w: format_fraction(w) })
        .collect()
}

pub fn coset_measure_from_entries(ctx: FieldContext, entries: &[CosetEntry]) -> Result<CosetMeasure> {
    let pairs = entries
        .iter()
        .map(|e| {
            let r = XiElem::parse(ctx, &e.r)?;
            if r.residue_below(e.n) != r {
                return Err(Error::parse(format!("coset residue {} is not canonical at level {}", e.r, e.n)));
            }
            Ok((CosetKey::new(e.n, &r), parse_rational(&e.w)?))
        })
        .collect::<Result<Vec<_>>>()?;
    CosetMeasure::from_pairs(ctx, pairs)
}

pub fn point_measure_from_entries(ctx: FieldContext, entries: &[PointEntry]) -> Result<PointMeasure> {
    let mut out = PointMeasure::new();
    for e in entries {
        let w = parse_rational(&e.w)?;
        *out.entry(XiElem::parse(ctx, &e.x)?).or_default() += w;
    }
    Ok(out)
}

pub fn read_measure(ctx: FieldContext, path: &Path) -> Result<SparseMeasure> {
    let entries: Vec<ElemEntry> = serde_json::from_slice(&std::fs::read(path)?)?;
    measure_from_entries(ctx, &entries)
}

pub fn measure_to_json(t: &SparseMeasure) -> Result<String> {
    Ok(serde_json::to_string_pretty(&measure_to_entries(t))?)
}

pub fn coset_measure_to_json(t: &CosetMeasure) -> Result<String> {
    Ok(serde_json::to_string_pretty(&coset_measure_to_entries(t))?)
}
