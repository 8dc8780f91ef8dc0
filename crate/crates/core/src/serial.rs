//! JSON wire formats: the matrix literal, absolute Jordan forms with
//! exact minimal-polynomial data plus decimal approximations, and
//! classification verdicts.
//!
//! Matrix literal: `{ "rows": [[...]] }` with entries as JSON integers
//! or strings `"p/q"`. Minimal-polynomial coefficients are emitted as
//! JSON integers when they fit in 64 bits and as decimal strings
//! otherwise, so nothing is lost to rounding.

use crate::algebraic::AlgebraicReal;
use crate::classify::ClassificationVerdict;
use crate::jordan::AbsoluteJordanForm;
use crate::matrix::RationalMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde_json::{json, Map, Value};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("matrix literal must be an object with a \"rows\" array")]
    MissingRows,
    #[error("matrix must be square and nonempty")]
    BadShape,
    #[error("bad entry: {0}")]
    BadEntry(String),
}

pub fn rational_to_string(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rational_from_str(s: &str) -> Result<BigRational, ParseError> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|e| ParseError::BadEntry(e.to_string()))?;
        let d = BigInt::from_str(den.trim()).map_err(|e| ParseError::BadEntry(e.to_string()))?;
        if d == BigInt::from(0) {
            return Err(ParseError::BadEntry("zero denominator".into()));
        }
        Ok(BigRational::new(n, d))
    } else {
        let n = BigInt::from_str(s).map_err(|e| ParseError::BadEntry(e.to_string()))?;
        Ok(BigRational::from(n))
    }
}

fn entry_from_value(v: &Value) -> Result<BigRational, ParseError> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigRational::from(BigInt::from(i)))
            } else if let Some(u) = n.as_u64() {
                Ok(BigRational::from(BigInt::from(u)))
            } else {
                Err(ParseError::BadEntry(format!(
                    "non-integer numeric entry {} (use \"p/q\" strings for rationals)",
                    n
                )))
            }
        }
        Value::String(s) => rational_from_str(s),
        other => Err(ParseError::BadEntry(format!("unexpected entry {}", other))),
    }
}

/// Parse the repo-wide matrix literal.
pub fn matrix_from_json(text: &str) -> Result<RationalMatrix, ParseError> {
    let v: Value = serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))?;
    let rows = v
        .get("rows")
        .and_then(|r| r.as_array())
        .ok_or(ParseError::MissingRows)?;
    let mut data = vec![];
    let n = rows.len();
    for row in rows {
        let row = row.as_array().ok_or(ParseError::BadShape)?;
        if row.len() != n {
            return Err(ParseError::BadShape);
        }
        for e in row {
            data.push(entry_from_value(e)?);
        }
    }
    RationalMatrix::new(n, data).map_err(|_| ParseError::BadShape)
}

pub fn matrix_to_json(m: &RationalMatrix) -> Value {
    let rows: Vec<Value> = (0..m.dim())
        .map(|i| {
            Value::Array(
                (0..m.dim())
                    .map(|j| {
                        let q = m.get(i, j);
                        if q.is_integer() {
                            match q.numer().to_i64() {
                                Some(v) => json!(v),
                                None => json!(rational_to_string(q)),
                            }
                        } else {
                            json!(rational_to_string(q))
                        }
                    })
                    .collect(),
            )
        })
        .collect();
    json!({ "rows": rows })
}

fn bigint_to_value(c: &BigInt) -> Value {
    match c.to_i64() {
        Some(v) => json!(v),
        None => json!(c.to_string()),
    }
}

pub fn algebraic_to_json(a: &AlgebraicReal, approx_digits: u32) -> Value {
    let (lo, hi) = a.interval();
    let mut obj = Map::new();
    obj.insert(
        "minpoly".into(),
        Value::Array(a.minpoly().coeffs().iter().map(bigint_to_value).collect()),
    );
    obj.insert(
        "interval".into(),
        json!([rational_to_string(&lo), rational_to_string(&hi)]),
    );
    obj.insert("approx".into(), json!(a.approx_decimal(approx_digits)));
    Value::Object(obj)
}

/// Canonical JSON for an absolute Jordan form: a list of blocks.
pub fn ajf_to_json(f: &AbsoluteJordanForm, approx_digits: u32) -> Value {
    Value::Array(
        f.blocks()
            .iter()
            .map(|b| {
                json!({
                    "size": b.size,
                    "modulus": algebraic_to_json(&b.modulus, approx_digits),
                })
            })
            .collect(),
    )
}

pub fn verdict_to_json(v: &ClassificationVerdict, approx_digits: u32) -> Value {
    json!({
        "equivalent": v.equivalent,
        "witness": v.witness.map(|w| json!([w.a, w.b])).unwrap_or(Value::Null),
        "certificate": v.certificate.as_str(),
        "ajf_m": ajf_to_json(&v.ajf_m, approx_digits),
        "ajf_n": ajf_to_json(&v.ajf_n, approx_digits),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify;
    use crate::jordan::absolute_jordan_form;

    #[test]
    fn matrix_roundtrip() {
        let text = r#"{ "rows": [[2, -1], ["1/2", 3]] }"#;
        let m = matrix_from_json(text).unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(*m.get(1, 0), BigRational::new(BigInt::from(1), BigInt::from(2)));
        let back = matrix_to_json(&m);
        let again = matrix_from_json(&back.to_string()).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn matrix_rejects_garbage() {
        assert!(matrix_from_json("not json").is_err());
        assert!(matrix_from_json(r#"{"rows": [[1,2],[3]]}"#).is_err());
        assert!(matrix_from_json(r#"{"rows": []}"#).is_err());
        assert!(matrix_from_json(r#"{"cols": [[1]]}"#).is_err());
        assert!(matrix_from_json(r#"{"rows": [[1.5]]}"#).is_err());
    }

    #[test]
    fn ajf_json_shape() {
        let m = RationalMatrix::from_i64_rows(&[&[0, -2], &[1, 0]]);
        let f = absolute_jordan_form(&m).unwrap();
        let v = ajf_to_json(&f, 8);
        let arr = v.as_array().unwrap();
        assert_eq!(arr.len(), 2);
        for b in arr {
            assert_eq!(b["size"], json!(1));
            // modulus sqrt2 has minpoly x^2 - 2
            assert_eq!(b["modulus"]["minpoly"], json!([-2, 0, 1]));
            assert_eq!(b["modulus"]["approx"], json!("1.41421356"));
        }
    }

    #[test]
    fn verdict_json_shape() {
        let a = RationalMatrix::from_i64_rows(&[&[2]]);
        let b = RationalMatrix::from_i64_rows(&[&[8]]);
        let v = classify(&a, &b).unwrap();
        let j = verdict_to_json(&v, 6);
        assert_eq!(j["equivalent"], json!(true));
        assert_eq!(j["witness"], json!([3, 1]));
        assert_eq!(j["certificate"], json!("MATCHED"));
        assert!(j["ajf_m"].is_array());
    }
}
