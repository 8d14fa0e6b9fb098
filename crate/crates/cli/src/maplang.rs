//! Tiny map-expression grammar for the command line.
//!
//! `expr := term ('∘' term)*` with composition right to left, so
//! `hopf∘wrap(2)` first wraps, then applies the Hopf map. Terms:
//! `hopf`, `constant`, `wrap(d)`, `reflect`, or `@file.json` to load a
//! serialized expression tree. `*` works as an ASCII stand-in for `∘`.

use std::sync::Arc;

use kdilation::expr::MapExpr;

pub fn parse_map_spec(spec: &str) -> Result<MapExpr, String> {
    let parts: Vec<&str> = spec.split(['∘', '*']).map(str::trim).collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(format!("empty term in map spec `{spec}`"));
    }
    let mut exprs = Vec::new();
    for part in parts {
        exprs.push(parse_term(part)?);
    }
    let mut result = exprs.pop().expect("at least one term");
    while let Some(outer) = exprs.pop() {
        result = MapExpr::compose(Arc::new(outer), Arc::new(result))
            .map_err(|e| format!("composition mismatch: {e}"))?;
    }
    Ok(result)
}

fn parse_term(term: &str) -> Result<MapExpr, String> {
    if let Some(path) = term.strip_prefix('@') {
        let text = std::fs::read_to_string(path).map_err(|e| format!("read {path}: {e}"))?;
        return MapExpr::from_json_str(&text).map_err(|e| e.to_string());
    }
    match term {
        "hopf" => Ok(MapExpr::hopf()),
        "constant" => Ok(MapExpr::constant_basepoint(3, 2)),
        "reflect" => Ok(MapExpr::reflection(3)),
        _ => {
            if let Some(arg) = term.strip_prefix("wrap(").and_then(|s| s.strip_suffix(')')) {
                let d: i64 = arg
                    .trim()
                    .parse()
                    .map_err(|_| format!("wrap degree `{arg}` is not an integer"))?;
                Ok(MapExpr::wrap_s3(d))
            } else {
                Err(format!(
                    "unknown term `{term}` (expected hopf, constant, reflect, wrap(d), or @file.json)"
                ))
            }
        }
    }
}

/// Parse a rational like `1/2`, `3`, or `0.125` into an f64.
pub fn parse_rational(text: &str) -> Result<f64, String> {
    let t = text.trim();
    if let Some((num, den)) = t.split_once('/') {
        let n: f64 = num.trim().parse().map_err(|_| format!("bad numerator in `{t}`"))?;
        let d: f64 = den.trim().parse().map_err(|_| format!("bad denominator in `{t}`"))?;
        if d == 0.0 {
            return Err(format!("zero denominator in `{t}`"));
        }
        Ok(n / d)
    } else {
        t.parse().map_err(|_| format!("`{t}` is not a number"))
    }
}
