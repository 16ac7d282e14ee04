//! Input streams: CSV decoding, CSV output, and random generation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::syntax::ast::TypeDecl;
use crate::types::Type;

use super::value::Value;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("unexpected column `{0}`")]
    UnknownColumn(String),
    #[error("row {row}: `{cell}` is not a value of type {ty}")]
    BadCell { row: usize, cell: String, ty: Type },
}

fn ctors_of(types: &[TypeDecl]) -> impl Fn(&str) -> Vec<String> + '_ {
    move |n| {
        types
            .iter()
            .find(|t| t.name == n)
            .map(|t| t.ctors.clone())
            .unwrap_or_default()
    }
}

/// Decode a CSV with a header naming each input once, in any order.
pub fn decode_inputs(
    text: &str,
    inputs: &[(String, Type)],
    types: &[TypeDecl],
) -> Result<Vec<Vec<Value>>, InputError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    for h in &header {
        if !inputs.iter().any(|(n, _)| n == h) {
            return Err(InputError::UnknownColumn(h.clone()));
        }
    }
    let mut cols = Vec::with_capacity(inputs.len());
    for (n, _) in inputs {
        let i = header
            .iter()
            .position(|h| h == n)
            .ok_or_else(|| InputError::MissingColumn(n.clone()))?;
        cols.push(i);
    }
    if header.len() != inputs.len() {
        return Err(InputError::UnknownColumn("duplicate column".into()));
    }
    let ctors = ctors_of(types);
    let mut rows = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let mut vals = Vec::with_capacity(inputs.len());
        for ((_, ty), &c) in inputs.iter().zip(&cols) {
            let cell = rec.get(c).unwrap_or("");
            let v = Value::parse(cell, ty, &ctors).ok_or_else(|| InputError::BadCell {
                row: row + 1,
                cell: cell.to_string(),
                ty: ty.clone(),
            })?;
            vals.push(v);
        }
        rows.push(vals);
    }
    Ok(rows)
}

/// CSV text with a header row.
pub fn encode_outputs(names: &[String], rows: &[Vec<Value>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record(names);
    for r in rows {
        let _ = w.write_record(r.iter().map(|v| v.to_string()));
    }
    String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
}

/// `len` random valuations: uniform booleans, integers in [-8, 8], reals
/// in [-8, 8] with one decimal, uniform constructors.
pub fn random_inputs(
    inputs: &[Type],
    types: &[TypeDecl],
    len: usize,
    seed: u64,
) -> Vec<Vec<Value>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ctors = ctors_of(types);
    (0..len)
        .map(|_| {
            inputs
                .iter()
                .map(|t| match t {
                    Type::Bool => Value::Bool(rng.random()),
                    Type::Int => Value::Int(rng.random_range(-8..=8)),
                    Type::Real => Value::Real(f64::from(rng.random_range(-80..=80)) / 10.0),
                    Type::Enum(n) => {
                        let cs = ctors(n);
                        Value::Enum(cs[rng.random_range(0..cs.len())].clone())
                    }
                    Type::Tuple(_) => unreachable!("inputs are scalar"),
                })
                .collect()
        })
        .collect()
}
