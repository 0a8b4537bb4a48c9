//! The arrangement document format.
//!
//! ```json
//! {"lines": [{"a": [re, im], "b": [re, im], "c": [re, im]}, ...]}
//! ```
//!
//! A bare number `n` stands for `[n, 0]`. An optional `"scale": [re, im]`
//! carries a constant factor of the defining polynomial; it is written only
//! when it differs from one. Numbers are written with 17 significant digits.

use serde_json::Value;

use crate::arrangement::{c64, Arrangement, ComplexScalar};
use crate::error::{Error, Result};

fn scalar(v: &Value, what: &str) -> Result<ComplexScalar> {
    let num = |x: &Value| {
        x.as_f64()
            .ok_or_else(|| Error::Malformed(format!("{what}: expected a number, got {x}")))
    };
    match v {
        Value::Number(_) => Ok(c64(num(v)?, 0.0)),
        Value::Array(parts) if parts.len() == 2 => Ok(c64(num(&parts[0])?, num(&parts[1])?)),
        _ => Err(Error::Malformed(format!("{what}: expected a number or [re, im], got {v}"))),
    }
}

/// Parses a JSON value holding an arrangement document.
pub fn arrangement_from_value(doc: &Value) -> Result<Arrangement> {
    let lines = doc
        .get("lines")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Malformed("missing \"lines\" array".into()))?;
    let mut triples = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        let field = |name: &str| {
            line.get(name)
                .ok_or_else(|| Error::Malformed(format!("line {i}: missing \"{name}\"")))
                .and_then(|v| scalar(v, &format!("line {i} coefficient {name}")))
        };
        triples.push([field("a")?, field("b")?, field("c")?]);
    }
    let scale = match doc.get("scale") {
        Some(v) => scalar(v, "scale")?,
        None => c64(1.0, 0.0),
    };
    Arrangement::with_scale(&triples, scale)
}

pub fn parse_arrangement(text: &str) -> Result<Arrangement> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    arrangement_from_value(&doc)
}

fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn fmt_complex(z: ComplexScalar) -> String {
    format!("[{}, {}]", fmt_num(z.re), fmt_num(z.im))
}

/// Lines array as written inside documents, e.g. deformation samples.
pub(crate) fn lines_json(arr: &Arrangement) -> String {
    let body: Vec<String> = arr
        .lines()
        .iter()
        .map(|l| format!("{{\"a\": {}, \"b\": {}, \"c\": {}}}", fmt_complex(l.a), fmt_complex(l.b), fmt_complex(l.c)))
        .collect();
    format!("[{}]", body.join(", "))
}

pub fn serialize_arrangement(arr: &Arrangement) -> String {
    let mut out = format!("{{\"lines\": {}", lines_json(arr));
    if arr.scale() != c64(1.0, 0.0) {
        out.push_str(&format!(", \"scale\": {}", fmt_complex(arr.scale())));
    }
    out.push('}');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::combinatorics;

    #[test]
    fn parses_axes() {
        let arr = parse_arrangement(r#"{"lines": [{"a": 0, "b": 1, "c": 0}, {"a": [1, 0], "b": 0, "c": 0}]}"#).unwrap();
        assert_eq!(arr.degree(), 2);
        assert_eq!(arr.lines()[0].b, c64(1.0, 0.0));
    }

    #[test]
    fn parses_ft_example() {
        let text = r#"{"lines": [
            {"a": 1, "b": 0, "c": 0},
            {"a": 0, "b": 1, "c": 0},
            {"a": 1, "b": 1, "c": -4},
            {"a": 1, "b": -2, "c": 0}]}"#;
        let arr = parse_arrangement(text).unwrap();
        assert_eq!(arr.degree(), 4);
        assert_eq!(combinatorics(&arr).class_sizes(), &[1, 1, 1, 1]);
        // x - 2y normalizes to -x/2 + y
        assert_eq!(arr.lines()[3].a, c64(-0.5, 0.0));
        assert_eq!(arr.scale(), c64(-2.0, 0.0));
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(
            parse_arrangement(r#"{"lines": [{"a": 0, "b": 0, "c": 1}]}"#),
            Err(Error::DegenerateLine { index: 0 })
        ));
        assert!(matches!(parse_arrangement(r#"{"lines": [{"a": 1, "b": 0}]}"#), Err(Error::Malformed(_))));
        assert!(matches!(parse_arrangement("[1, 2]"), Err(Error::Malformed(_))));
        assert!(matches!(parse_arrangement(r#"{"lines": [{"a": "x", "b": 0, "c": 0}]}"#), Err(Error::Malformed(_))));
        assert!(matches!(
            parse_arrangement(r#"{"lines": [{"a": 1, "b": 0, "c": 0}, {"a": 2, "b": 0, "c": 0}]}"#),
            Err(Error::DuplicateLine { .. })
        ));
        assert!(matches!(parse_arrangement(r#"{"lines": []}"#), Err(Error::Empty)));
    }

    #[test]
    fn serialization_uses_17_significant_digits() {
        let arr = Arrangement::from_real(&[[1.0, 0.0, 1.0 / 3.0]]).unwrap();
        let s = serialize_arrangement(&arr);
        assert!(s.contains("3.3333333333333331e-1"), "{s}");
        assert_eq!(parse_arrangement(&s).unwrap(), arr);
    }
}
