//! JSON ingestion for couplings and boundary fields.
//!
//! Couplings: `{"pattern": "homogeneous" | "bipartite" | "per_edge", "p": int,
//! "q": int, "values": ...}`. Rationals are strings `"num/den"` or integers.
//! Boundary fields map vertex addresses (`""` for the root, `"0.1.0"` for a
//! path) to arrays of `q - 1` rationals.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::padic::Prime;
use crate::tree::TreeVertex;

use super::{
    rational_to_padic, BoundaryField, CouplingField, CouplingPattern, FieldPattern, PadicVector,
};

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("{s:?} is not a rational of the form num/den"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::InvalidInput(format!("{s:?} has a zero denominator")));
    }
    Ok(BigRational::new(num, den))
}

fn rational_value(v: &Value, place: &str) -> Result<BigRational> {
    match v {
        Value::String(s) => {
            parse_rational(s).map_err(|e| Error::InvalidInput(format!("{place}: {e}")))
        }
        Value::Number(n) if n.is_i64() => Ok(BigRational::from_integer(BigInt::from(
            n.as_i64().expect("checked"),
        ))),
        other => Err(Error::InvalidInput(format!(
            "{place}: expected a rational string or integer, found {other}"
        ))),
    }
}

fn integer_field(doc: &Value, key: &str) -> Result<u64> {
    doc.get(key)
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::InvalidInput(format!("field {key:?}: expected a positive integer")))
}

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| {
        Error::InvalidInput(format!(
            "JSON error at line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })
}

pub fn parse_coupling_field(text: &str) -> Result<CouplingField> {
    let doc = parse_json(text)?;
    let prime = Prime::new(integer_field(&doc, "p")?)?;
    let q = integer_field(&doc, "q")?;
    let q = u32::try_from(q).map_err(|_| Error::InvalidInput(format!("q = {q} is too large")))?;
    let values = doc
        .get("values")
        .ok_or_else(|| Error::InvalidInput("field \"values\" is missing".into()))?;
    let pattern = match doc.get("pattern").and_then(Value::as_str) {
        Some("homogeneous") => CouplingPattern::Homogeneous(match values {
            Value::Array(items) if items.len() == 1 => rational_value(&items[0], "values[0]")?,
            v => rational_value(v, "values")?,
        }),
        Some("bipartite") => {
            let (even, odd) = match values {
                Value::Array(items) if items.len() == 2 => (&items[0], &items[1]),
                Value::Object(map) => (
                    map.get("even_to_odd").ok_or_else(|| {
                        Error::InvalidInput("values.even_to_odd is missing".into())
                    })?,
                    map.get("odd_to_even").ok_or_else(|| {
                        Error::InvalidInput("values.odd_to_even is missing".into())
                    })?,
                ),
                _ => {
                    return Err(Error::InvalidInput(
                        "values: bipartite couplings need [even_to_odd, odd_to_even]".into(),
                    ))
                }
            };
            CouplingPattern::BipartiteByParity {
                even_to_odd: rational_value(even, "values.even_to_odd")?,
                odd_to_even: rational_value(odd, "values.odd_to_even")?,
            }
        }
        Some("per_edge") => {
            let Value::Object(map) = values else {
                return Err(Error::InvalidInput(
                    "values: per_edge couplings need an object keyed by child address".into(),
                ));
            };
            let mut edges = BTreeMap::new();
            for (key, v) in map {
                let vertex: TreeVertex = key.parse()?;
                edges.insert(vertex, rational_value(v, &format!("values[{key:?}]"))?);
            }
            CouplingPattern::PerEdge(edges)
        }
        Some(other) => {
            return Err(Error::InvalidInput(format!(
                "pattern {other:?}: expected homogeneous, bipartite or per_edge"
            )))
        }
        None => return Err(Error::InvalidInput("field \"pattern\" is missing".into())),
    };
    CouplingField::new(prime, q, pattern)
}

pub fn parse_boundary_field(
    text: &str,
    prime: Prime,
    q: u32,
    precision: u32,
) -> Result<BoundaryField> {
    let doc = parse_json(text)?;
    let Value::Object(map) = doc else {
        return Err(Error::InvalidInput(
            "boundary field must be an object keyed by vertex address".into(),
        ));
    };
    let mut field = BTreeMap::new();
    for (key, v) in &map {
        let vertex: TreeVertex = key.parse()?;
        let Value::Array(items) = v else {
            return Err(Error::InvalidInput(format!("[{key:?}]: expected an array")));
        };
        if items.len() != q as usize - 1 {
            return Err(Error::InadmissibleField(format!(
                "[{key:?}]: {} components, need q - 1 = {}",
                items.len(),
                q - 1
            )));
        }
        let components = items
            .iter()
            .enumerate()
            .map(|(i, item)| {
                rational_value(item, &format!("[{key:?}][{i}]"))
                    .map(|r| rational_to_padic(&r, prime, precision))
            })
            .collect::<Result<Vec<_>>>()?;
        field.insert(vertex, PadicVector::new(components)?);
    }
    BoundaryField::new(prime, q, precision, FieldPattern::PerVertex(field))
}
