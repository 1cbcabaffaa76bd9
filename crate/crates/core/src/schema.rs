//! JSON encoding of specs. Integer site keys travel as strings, lattice
//! sites and bonds as JSON arrays rendered into key strings. Serialization
//! is canonical: sorted keys, 17-significant-digit floats.

use serde_json::Value;

use crate::error::{Error, Result};
use crate::operator::{Bond, LatticeSpec, LineKind, Perturbation, Site};
use crate::report::fmt_float;

/// A parsed spec of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum AnySpec {
    Chain(Perturbation),
    Lattice(LatticeSpec),
}

pub fn parse_spec(text: &str) -> Result<AnySpec> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| Error::Input(format!("malformed JSON at line {}, column {}: {e}", e.line(), e.column())))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Input("spec must be a JSON object".into()))?;
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Input("field `kind`: expected one of half_line, whole_line, lattice".into()))?;
    match kind {
        "half_line" => Ok(AnySpec::Chain(parse_chain(obj, LineKind::HalfLine)?)),
        "whole_line" => Ok(AnySpec::Chain(parse_chain(obj, LineKind::WholeLine)?)),
        "lattice" => Ok(AnySpec::Lattice(parse_lattice(obj)?)),
        other => Err(Error::Input(format!(
            "field `kind`: unknown value {other:?} (expected half_line, whole_line, lattice)"
        ))),
    }
}

fn parse_int_keyed_map(obj: &serde_json::Map<String, Value>, field: &str) -> Result<Vec<(i64, f64)>> {
    let Some(value) = obj.get(field) else {
        return Ok(Vec::new());
    };
    let map = value
        .as_object()
        .ok_or_else(|| Error::Input(format!("field `{field}`: expected an object")))?;
    let mut out = Vec::with_capacity(map.len());
    for (key, val) in map {
        let site: i64 = key.parse().map_err(|_| {
            Error::Input(format!("field `{field}`: key {key:?} is not an integer"))
        })?;
        let num = val.as_f64().ok_or_else(|| {
            Error::Input(format!("field `{field}`: value at key {key:?} is not a number"))
        })?;
        out.push((site, num));
    }
    Ok(out)
}

fn parse_chain(obj: &serde_json::Map<String, Value>, kind: LineKind) -> Result<Perturbation> {
    for stray in ["nu", "box", "V", "bonds"] {
        if obj.contains_key(stray) {
            return Err(Error::Input(format!(
                "field `{stray}` only applies to lattice specs"
            )));
        }
    }
    let a = parse_int_keyed_map(obj, "a")?;
    let b = parse_int_keyed_map(obj, "b")?;
    Perturbation::new(kind, a, b)
}

fn parse_site_key(field: &str, key: &str) -> Result<Site> {
    serde_json::from_str::<Vec<i64>>(key)
        .map_err(|_| Error::Input(format!("field `{field}`: key {key:?} is not a site array")))
}

fn parse_lattice(obj: &serde_json::Map<String, Value>) -> Result<LatticeSpec> {
    let nu = obj
        .get("nu")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Input("field `nu`: expected a positive integer".into()))?
        as usize;
    let box_val = obj
        .get("box")
        .ok_or_else(|| Error::Input("field `box`: required for lattice specs".into()))?;
    let ranges: Vec<(i64, i64)> = serde_json::from_value::<Vec<(i64, i64)>>(box_val.clone())
        .map_err(|_| Error::Input("field `box`: expected an array of [lo, hi] pairs".into()))?;

    let mut v = Vec::new();
    if let Some(value) = obj.get("V") {
        let map = value
            .as_object()
            .ok_or_else(|| Error::Input("field `V`: expected an object".into()))?;
        for (key, val) in map {
            let site = parse_site_key("V", key)?;
            let num = val.as_f64().ok_or_else(|| {
                Error::Input(format!("field `V`: value at key {key:?} is not a number"))
            })?;
            v.push((site, num));
        }
    }
    let mut bonds = Vec::new();
    if let Some(value) = obj.get("bonds") {
        let map = value
            .as_object()
            .ok_or_else(|| Error::Input("field `bonds`: expected an object".into()))?;
        for (key, val) in map {
            let pair: Vec<Site> = serde_json::from_str(key).map_err(|_| {
                Error::Input(format!("field `bonds`: key {key:?} is not a pair of sites"))
            })?;
            if pair.len() != 2 {
                return Err(Error::Input(format!(
                    "field `bonds`: key {key:?} must hold exactly two sites"
                )));
            }
            let bond = Bond::new(pair[0].clone(), pair[1].clone())?;
            let num = val.as_f64().ok_or_else(|| {
                Error::Input(format!("field `bonds`: value at key {key:?} is not a number"))
            })?;
            bonds.push((bond, num));
        }
    }
    LatticeSpec::new(nu, ranges, v, bonds)
}

fn push_int_keyed_map(out: &mut String, entries: impl Iterator<Item = (i64, f64)>) {
    out.push('{');
    let mut first = true;
    for (site, value) in entries {
        if !first {
            out.push(',');
        }
        first = false;
        out.push_str(&format!("\"{site}\":{}", fmt_float(value)));
    }
    out.push('}');
}

fn site_key(site: &Site) -> String {
    let coords: Vec<String> = site.iter().map(|c| c.to_string()).collect();
    format!("[{}]", coords.join(","))
}

/// Canonical JSON for a spec: fixed field order, sorted keys, 17-digit
/// floats. Parsing this back reproduces the spec bit for bit.
pub fn spec_to_json(spec: &AnySpec) -> String {
    let mut out = String::new();
    match spec {
        AnySpec::Chain(p) => {
            let kind = match p.kind() {
                LineKind::HalfLine => "half_line",
                LineKind::WholeLine => "whole_line",
            };
            out.push_str(&format!("{{\"kind\":\"{kind}\",\"a\":"));
            push_int_keyed_map(&mut out, p.a_entries());
            out.push_str(",\"b\":");
            push_int_keyed_map(&mut out, p.b_entries());
            out.push('}');
        }
        AnySpec::Lattice(spec) => {
            out.push_str(&format!("{{\"kind\":\"lattice\",\"nu\":{}", spec.nu()));
            out.push_str(",\"box\":[");
            for (i, (lo, hi)) in spec.box_ranges().iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&format!("[{lo},{hi}]"));
            }
            out.push_str("],\"V\":{");
            let mut first = true;
            for (site, value) in spec.v_entries() {
                if !first {
                    out.push(',');
                }
                first = false;
                out.push_str(&format!("\"{}\":{}", site_key(site), fmt_float(value)));
            }
            out.push_str("},\"bonds\":{");
            let mut first = true;
            for (bond, value) in spec.bond_entries() {
                if !first {
                    out.push(',');
                }
                first = false;
                out.push_str(&format!(
                    "\"[{},{}]\":{}",
                    site_key(&bond.0),
                    site_key(&bond.1),
                    fmt_float(value)
                ));
            }
            out.push_str("}}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_chain_spec() {
        let spec = parse_spec(r#"{"kind":"whole_line","a":{"0":2.0},"b":{"-3":1.5}}"#).unwrap();
        let AnySpec::Chain(p) = spec else {
            panic!("expected chain")
        };
        assert_eq!(p.kind(), LineKind::WholeLine);
        assert_eq!(p.a(0), 2.0);
        assert_eq!(p.b(-3), 1.5);
        assert_eq!(p.b(0), 0.0);
    }

    #[test]
    fn parse_lattice_spec() {
        let text = r#"{"kind":"lattice","nu":2,"box":[[-15,15],[-15,15]],"V":{"[0,0]":8.0},"bonds":{"[[0,0],[0,1]]":0.5}}"#;
        let AnySpec::Lattice(spec) = parse_spec(text).unwrap() else {
            panic!("expected lattice")
        };
        assert_eq!(spec.nu(), 2);
        assert_eq!(spec.v(&vec![0, 0]), 8.0);
        let bond = Bond::new(vec![0, 0], vec![0, 1]).unwrap();
        assert_eq!(spec.bond_weight(&bond), 0.5);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let err = parse_spec(r#"{"kind":"whole_line","a":{"x":2.0}}"#).unwrap_err();
        assert!(err.to_string().contains("`a`"), "{err}");
        let err = parse_spec(r#"{"kind":"dunno"}"#).unwrap_err();
        assert!(err.to_string().contains("kind"), "{err}");
        let err = parse_spec("{oops").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
        let err = parse_spec(r#"{"kind":"half_line","b":{"0":1.0}}"#).unwrap_err();
        assert!(err.to_string().contains("indexed from 1"), "{err}");
    }

    #[test]
    fn round_trip_is_identity() {
        let original = parse_spec(
            r#"{"kind":"half_line","a":{"2":0.5,"7":1.25},"b":{"1":-0.75,"4":3.0}}"#,
        )
        .unwrap();
        let text = spec_to_json(&original);
        let reparsed = parse_spec(&text).unwrap();
        assert_eq!(original, reparsed);
        assert_eq!(text, spec_to_json(&reparsed));

        let lattice = parse_spec(
            r#"{"kind":"lattice","nu":2,"box":[[-5,5],[-5,5]],"V":{"[1,-2]":0.5},"bonds":{"[[0,0],[1,0]]":2.0}}"#,
        )
        .unwrap();
        let text = spec_to_json(&lattice);
        assert_eq!(lattice, parse_spec(&text).unwrap());
    }
}
