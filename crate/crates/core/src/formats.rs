//! Text and JSON readers for node lists, targets, fixed-point specs and exclusions.
//!
//! Text form: one record per line, fields separated by whitespace, `#` starts a comment.

use crate::error::{Error, Result};
use crate::geometry::{DiscPoint, Exclusion};
use crate::interpolation::{FixedPointSpec, FixedPointType};
use num_complex::Complex64;
use serde_json::Value;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn number(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("`{tok}` is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("`{tok}` is not finite")));
    }
    Ok(v)
}

/// Non-empty records as `(line number, fields)`.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let body = l.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

/// `re im` per line.
pub fn parse_point_list(text: &str) -> Result<Vec<Complex64>> {
    records(text)
        .map(|(line, f)| {
            if f.len() != 2 {
                return Err(parse_err(line, format!("expected `re im`, found {} fields", f.len())));
            }
            Ok(Complex64::new(number(f[0], line)?, number(f[1], line)?))
        })
        .collect()
}

fn json_number(v: &Value, line: usize) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| parse_err(line, format!("expected a finite number, found {v}")))
}

fn json_point(v: &Value, idx: usize) -> Result<Complex64> {
    let line = idx + 1;
    match v {
        Value::Array(a) if a.len() == 2 => Ok(Complex64::new(json_number(&a[0], line)?, json_number(&a[1], line)?)),
        Value::Object(o) => {
            let re = o.get("re").ok_or_else(|| parse_err(line, "missing `re`"))?;
            let im = o.get("im").map_or(Ok(0.0), |v| json_number(v, line))?;
            Ok(Complex64::new(json_number(re, line)?, im))
        }
        Value::Number(_) => Ok(Complex64::new(json_number(v, line)?, 0.0)),
        other => Err(parse_err(line, format!("expected [re, im] or {{\"re\", \"im\"}}, found {other}"))),
    }
}

/// `[[re, im], ...]`, `[{"re": .., "im": ..}, ...]` or bare real numbers.
/// Errors report the element index (1-based) as the line.
pub fn parse_points_json(text: &str) -> Result<Vec<Complex64>> {
    let v: Value = serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))?;
    let arr = v.as_array().ok_or_else(|| parse_err(1, "expected a JSON array"))?;
    arr.iter().enumerate().map(|(i, p)| json_point(p, i)).collect()
}

/// JSON when the first non-blank character is `[`, text otherwise.
pub fn read_points(text: &str) -> Result<Vec<Complex64>> {
    if text.trim_start().starts_with('[') {
        parse_points_json(text)
    } else {
        parse_point_list(text)
    }
}

/// Like [`read_points`], but every point must lie in the open disc.
pub fn read_disc_points(text: &str) -> Result<Vec<DiscPoint>> {
    read_points(text)?.into_iter().map(DiscPoint::new).collect()
}

/// `re im type` per line, or a JSON array of `{"re", "im", "type"}`.
pub fn parse_fixed_point_spec(text: &str) -> Result<FixedPointSpec> {
    let mut nodes = vec![];
    let mut types = vec![];
    if text.trim_start().starts_with('[') {
        let v: Value = serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))?;
        let arr = v.as_array().ok_or_else(|| parse_err(1, "expected a JSON array"))?;
        for (i, item) in arr.iter().enumerate() {
            nodes.push(json_point(item, i)?);
            let t = item
                .get("type")
                .and_then(Value::as_str)
                .ok_or_else(|| parse_err(i + 1, "missing string field `type`"))?;
            types.push(t.parse::<FixedPointType>()?);
        }
    } else {
        for (line, f) in records(text) {
            if f.len() != 3 {
                return Err(parse_err(line, format!("expected `re im type`, found {} fields", f.len())));
            }
            nodes.push(Complex64::new(number(f[0], line)?, number(f[1], line)?));
            types.push(f[2].parse::<FixedPointType>()?);
        }
    }
    FixedPointSpec::new(&nodes, &types)
}

/// `re im delta` per line; `delta` is the pseudo-hyperbolic radius.
pub fn parse_exclusions(text: &str) -> Result<Vec<Exclusion>> {
    records(text)
        .map(|(line, f)| {
            if f.len() != 3 {
                return Err(parse_err(line, format!("expected `re im delta`, found {} fields", f.len())));
            }
            let z = Complex64::new(number(f[0], line)?, number(f[1], line)?);
            Exclusion::new(z, number(f[2], line)?)
        })
        .collect()
}

/// Text form of a point list, readable by [`parse_point_list`].
pub fn write_point_list(points: &[Complex64]) -> String {
    points.iter().map(|z| format!("{:e} {:e}\n", z.re, z.im)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_points() {
        let p = parse_point_list("# nodes\n0.5 0\n\n  -0.3e0   0.25 # tail\n").unwrap();
        assert_eq!(p, vec![Complex64::new(0.5, 0.0), Complex64::new(-0.3, 0.25)]);
        assert!(parse_point_list("").unwrap().is_empty());
        assert!(matches!(parse_point_list("0.5\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_point_list("0 0\n1 x\n"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_point_list("nan 0").is_err());
        assert!(parse_point_list("inf 0").is_err());
    }

    #[test]
    fn json_points() {
        let p = read_points(r#"[[0.5, 0], {"re": 0.1, "im": -0.2}, 0.3]"#).unwrap();
        assert_eq!(p[1], Complex64::new(0.1, -0.2));
        assert_eq!(p[2], Complex64::new(0.3, 0.0));
        assert!(read_points("[[1, 2, 3]]").is_err());
        assert!(read_points("[").is_err());
        assert!(read_disc_points("1 0").is_err());
    }

    #[test]
    fn fixed_point_specs() {
        let s = parse_fixed_point_spec("0.5 0 neutral\n0 -0.5 attractive\n").unwrap();
        assert_eq!(s.types, vec![FixedPointType::Neutral, FixedPointType::Attractive]);
        let j = parse_fixed_point_spec(r#"[{"re": 0.5, "im": 0, "type": "repulsive"}]"#).unwrap();
        assert_eq!(j.types, vec![FixedPointType::Repulsive]);
        assert!(parse_fixed_point_spec("0.5 0 sideways").is_err());
        assert!(parse_fixed_point_spec("-0.5 0 neutral").is_err());
        assert!(parse_fixed_point_spec("").is_err());
    }

    #[test]
    fn exclusion_lists() {
        let e = parse_exclusions("0.5 0 0.1\n-0.5 0 0.1").unwrap();
        assert_eq!(e.len(), 2);
        assert!(parse_exclusions("0.5 0 1.5").is_err());
        assert!(parse_exclusions("0.5 0").is_err());
    }

    #[test]
    fn round_trip() {
        let pts = vec![Complex64::new(0.1, -0.7), Complex64::new(1e-300, 0.3333333333333333)];
        assert_eq!(parse_point_list(&write_point_list(&pts)).unwrap(), pts);
    }
}
