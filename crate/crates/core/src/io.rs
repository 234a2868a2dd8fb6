//! JSON input formats and report formatting.
//!
//! ```text
//! distribution  {"atoms": [{"value": "<scalar>", "prob": "p/q"}, …]}
//! channel       {"K": k, "entries": [["<scalar>" | integer | "generic", …], …]}
//! ifs           {"r": "p/q", "w": ["<scalar>", …], "probs": ["p/q", …]}
//! set           {"elements": ["<scalar>", …]}
//! ```

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::channel::{generic_name, ChannelMatrix};
use crate::error::{Error, Result};
use crate::parse::parse_scalar;
use crate::rational::Rational;
use crate::{Dist, ExactScalar, Ifs, ScalarSet};

fn scalar_from_value(v: &Value, generic: Option<(usize, usize)>) -> Result<ExactScalar> {
    match v {
        Value::String(s) if s.trim() == "generic" => match generic {
            Some((i, j)) => Ok(ExactScalar::var(&generic_name(i, j))),
            None => Err(Error::Parse {
                input: s.clone(),
                message: "\"generic\" is only allowed for channel entries".into(),
            }),
        },
        Value::String(s) => parse_scalar(s),
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(ExactScalar::from_integer(i)),
            None => Err(Error::Parse {
                input: n.to_string(),
                message: "non-integer numbers must be written as exact strings".into(),
            }),
        },
        other => Err(Error::Parse {
            input: other.to_string(),
            message: "expected a scalar string or integer".into(),
        }),
    }
}

pub fn parse_dist(json: &str) -> Result<Dist> {
    Ok(serde_json::from_str(json)?)
}

#[derive(Deserialize)]
struct ChannelRepr {
    #[serde(rename = "K")]
    k: usize,
    entries: Vec<Vec<Value>>,
}

pub fn parse_channel(json: &str) -> Result<ChannelMatrix> {
    let repr: ChannelRepr = serde_json::from_str(json)?;
    if repr.entries.len() != repr.k {
        return Err(Error::DimensionMismatch {
            expected: repr.k,
            found: repr.entries.len(),
        });
    }
    let rows = repr
        .entries
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, v)| scalar_from_value(v, Some((i, j))))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ChannelMatrix::new(rows)
}

impl Serialize for ChannelMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            #[serde(rename = "K")]
            k: usize,
            entries: &'a [Vec<ExactScalar>],
        }
        Repr {
            k: self.k(),
            entries: self.rows(),
        }
        .serialize(s)
    }
}

#[derive(Deserialize)]
struct IfsRepr {
    r: Rational,
    w: Vec<Value>,
    probs: Vec<Rational>,
}

pub fn parse_ifs(json: &str) -> Result<Ifs> {
    let repr: IfsRepr = serde_json::from_str(json)?;
    let w = repr
        .w
        .iter()
        .map(|v| scalar_from_value(v, None))
        .collect::<Result<Vec<_>>>()?;
    Ifs::new(repr.r, w, repr.probs)
}

#[derive(Deserialize)]
struct SetRepr {
    elements: Vec<Value>,
}

pub fn parse_set(json: &str) -> Result<ScalarSet> {
    let repr: SetRepr = serde_json::from_str(json)?;
    let elements = repr
        .elements
        .iter()
        .map(|v| scalar_from_value(v, None))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScalarSet::new(elements))
}

impl<V: crate::Support + Serialize> Serialize for crate::FiniteSet<V> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<V> {
            elements: Vec<V>,
        }
        Repr {
            elements: self.sorted(),
        }
        .serialize(s)
    }
}

/// Rounds `x` to `digits` significant decimal digits.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x)
}

/// Rounds every floating-point number in a JSON tree; integers are kept.
pub fn round_floats(v: &mut Value, digits: usize) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round_significant(n.as_f64().unwrap_or_default(), digits);
            if let Some(m) = serde_json::Number::from_f64(r) {
                *n = m;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|x| round_floats(x, digits)),
        Value::Object(map) => map.values_mut().for_each(|x| round_floats(x, digits)),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RationalDist;

    #[test]
    fn channel_round_trip() {
        let h = parse_channel(r#"{"K": 2, "entries": [["generic", 3], ["1/2*x_io", "generic"]]}"#).unwrap();
        assert_eq!(h.entry(0, 0), &ExactScalar::var("h_1_1"));
        assert_eq!(h.entry(0, 1), &ExactScalar::from_integer(3));
        assert_eq!(h.entry(1, 1), &ExactScalar::var("h_2_2"));
        let back = parse_channel(&serde_json::to_string(&h).unwrap()).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn channel_rejects_floats_and_shapes() {
        assert!(parse_channel(r#"{"K": 2, "entries": [[1.5, 1], [1, 1]]}"#).is_err());
        assert!(parse_channel(r#"{"K": 3, "entries": [[1, 1], [1, 1]]}"#).is_err());
        assert!(parse_channel(r#"{"K": 2, "entries": [[1, 1], [1]]}"#).is_err());
        assert!(parse_channel(r#"{"K": 2, "entries": [["pi(", 1], [1, 1]]}"#).is_err());
    }

    #[test]
    fn dist_round_trip() {
        let d = parse_dist(r#"{"atoms": [{"value": "0", "prob": "1/4"}, {"value": 2, "prob": "3/4"}]}"#).unwrap();
        assert_eq!(d.len(), 2);
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"atoms":[{"value":"0","prob":"1/4"},{"value":"2","prob":"3/4"}]}"#);
        assert_eq!(parse_dist(&s).unwrap(), d);
        let r: RationalDist = serde_json::from_str(&s).unwrap();
        assert_eq!(r.len(), 2);
        assert!(parse_dist(r#"{"atoms": [{"value": "0", "prob": "1/2"}]}"#).is_err());
    }

    #[test]
    fn ifs_and_sets() {
        let f = parse_ifs(r#"{"r": "1/3", "w": ["0", "2"], "probs": ["1/2", "1/2"]}"#).unwrap();
        assert_eq!(f.r, Rational::new(1, 3));
        assert!(parse_ifs(r#"{"r": "3/2", "w": ["0", "2"], "probs": ["1/2", "1/2"]}"#).is_err());
        let s = parse_set(r#"{"elements": [1, "2", "1"]}"#).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"{"elements":["1","2"]}"#);
    }

    #[test]
    fn significant_digits() {
        assert_eq!(round_significant(1.132575568463235, 12), 1.13257556846);
        assert_eq!(round_significant(-2.625, 12), -2.625);
        let mut v = serde_json::json!({"a": [0.1234567890123456, 3], "b": {"c": 2.0}});
        round_floats(&mut v, 3);
        assert_eq!(v, serde_json::json!({"a": [0.123, 3], "b": {"c": 2.0}}));
    }
}
