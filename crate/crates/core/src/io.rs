//! Serialization: JSON documents, PGM (P5) and CSV rasters.
//!
//! Numbers are written with 17 significant digits so that every `f64`
//! round-trips; infinities are the strings `"inf"` and `"-inf"`.

use std::io::{self, Write};

use num_complex::Complex64;
pub use serde_json::Value;
use serde_json::{json, Map, Number};

use crate::decomp::{ComponentDecomposition, DenominatorZeroSet, TilingRaster};
use crate::ext::ExtendedComplex;
use crate::ivpp2d::{GammaPoly, IvppBranch2D};
use crate::map::{OrbitTrace, PointD};

/// A real as a JSON value: a 17-digit number, `"inf"`, `"-inf"` or null.
pub fn real(x: f64) -> Value {
    if x.is_nan() {
        Value::Null
    } else if x.is_infinite() {
        Value::String(if x > 0.0 { "inf" } else { "-inf" }.into())
    } else {
        let x = if x == 0.0 { 0.0 } else { x };
        // arbitrary_precision keeps the digits exactly as formatted
        Value::Number(format!("{x:.16e}").parse::<Number>().expect("formatted float is a JSON number"))
    }
}

/// Reads back a value written by [`real`].
pub fn parse_real(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64().or_else(|| n.to_string().parse().ok()),
        Value::String(s) if s == "inf" => Some(f64::INFINITY),
        Value::String(s) if s == "-inf" => Some(f64::NEG_INFINITY),
        _ => None,
    }
}

/// A complex number: a plain number when real, else `{"re", "im"}`.
pub fn complex(z: Complex64) -> Value {
    if z.im == 0.0 {
        real(z.re)
    } else {
        json!({ "re": real(z.re), "im": real(z.im) })
    }
}

pub fn extended(z: ExtendedComplex) -> Value {
    match z {
        ExtendedComplex::Infinity => Value::String("inf".into()),
        ExtendedComplex::Finite(z) => complex(z),
    }
}

pub fn point(p: &PointD) -> Value {
    Value::Array(p.coords().iter().map(|&c| extended(c)).collect())
}

pub fn orbit_json(trace: &OrbitTrace) -> Value {
    json!({
        "points": trace.points.iter().map(point).collect::<Vec<_>>(),
        "closed": trace.closed,
        "minimal_period": trace.minimal_period,
    })
}

/// `{period, branch, level, convention, boundaries, sigma, components, cycles, tilings}`
/// with sigma and component indices 1-based.
pub fn decomposition_json(d: &ComponentDecomposition) -> Value {
    let components: Vec<Value> = d
        .components
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut m = Map::new();
            m.insert("index".into(), json!(i + 1));
            m.insert("lo".into(), real(p.lo));
            m.insert("hi".into(), real(p.hi));
            if let Some(s) = p.sheet {
                m.insert("sheet".into(), json!(if s > 0 { "+" } else { "-" }));
            }
            m.insert("next".into(), json!(d.sigma[i] + 1));
            Value::Object(m)
        })
        .collect();
    json!({
        "period": d.period,
        "branch": d.branch,
        "level": d.level.map_or(Value::Null, real),
        "convention": d.convention.name(),
        "boundaries": d.boundaries().into_iter().map(real).collect::<Vec<_>>(),
        "sigma": d.sigma.iter().map(|s| s + 1).collect::<Vec<_>>(),
        "cycles": d.sigma_cycles(),
        "tilings": d.tilings(),
        "components": components,
    })
}

/// Branch levels and the period polynomial for one period.
pub fn ivpp_json(poly: &GammaPoly, branches: &[IvppBranch2D]) -> Value {
    let integer = poly.integer.as_ref().map(|(k, c)| json!({ "scale": k, "coefficients": c }));
    json!({
        "period": poly.n,
        "gamma_monic": poly.monic.iter().map(|&c| real(c)).collect::<Vec<_>>(),
        "gamma_integer": integer,
        "branches": branches.iter().map(|b| json!({
            "m": b.m,
            "label": b.label(),
            "rho": real(b.rho),
            "multiplier": complex(b.multiplier()),
        })).collect::<Vec<_>>(),
    })
}

/// Pretty-printed JSON followed by a newline.
pub fn to_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Binary greymap with one byte per cell.
pub fn write_pgm_bytes<W: Write>(mut w: W, width: usize, height: usize, data: &[u8]) -> io::Result<()> {
    assert_eq!(data.len(), width * height);
    write!(w, "P5\n{width} {height}\n255\n")?;
    w.write_all(data)
}

/// Component index + 1 per cell, 0 where unclassified.
pub fn raster_bytes(raster: &TilingRaster) -> Vec<u8> {
    raster.cells.iter().map(|c| c.component.map_or(0, |k| (k + 1).min(255) as u8)).collect()
}

pub fn write_raster_pgm<W: Write>(w: W, raster: &TilingRaster) -> io::Result<()> {
    write_pgm_bytes(w, raster.width, raster.height, &raster_bytes(raster))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// `x,y,period,component` per cell (component 1-based, empty when
/// unclassified), plus `r` for sliced rasters.
pub fn write_raster_csv<W: Write>(mut w: W, raster: &TilingRaster) -> io::Result<()> {
    let with_r = raster.extra.is_some();
    writeln!(w, "x,y,period,component{}", if with_r { ",r" } else { "" })?;
    for (i, c) in raster.cells.iter().enumerate() {
        write!(w, "{:e},{:e},{},{}", c.x, c.y, opt(c.period), opt(c.component.map(|k| k + 1)))?;
        if let Some(extra) = &raster.extra {
            write!(w, ",{}", opt(extra[i].map(|r| format!("{r:e}"))))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Layer index per cell (0 = no pole up to `k_max`).
pub fn write_layers_pgm<W: Write>(w: W, set: &DenominatorZeroSet) -> io::Result<()> {
    write_pgm_bytes(w, set.width, set.height, &set.first)
}

/// `x,y,layer` for every cell on some layer.
pub fn write_layers_csv<W: Write>(mut w: W, set: &DenominatorZeroSet) -> io::Result<()> {
    writeln!(w, "x,y,layer")?;
    for row in 0..set.height {
        for col in 0..set.width {
            let k = set.layer_at(col, row);
            if k > 0 {
                let (x, y) = set.window.center(col, row, set.width, set.height);
                writeln!(w, "{x:e},{y:e},{k}")?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::{decompose, Method};

    #[test]
    fn reals_keep_seventeen_digits() {
        let v = real(0.1);
        assert_eq!(v.to_string(), "1.0000000000000001e-1");
        assert_eq!(parse_real(&v), Some(0.1));
        assert_eq!(real(f64::NEG_INFINITY), json!("-inf"));
        assert_eq!(parse_real(&json!("inf")), Some(f64::INFINITY));
        assert_eq!(parse_real(&real(-0.0)), Some(0.0));
        for x in [1.0 / 3.0, -2.0f64.sqrt(), 1e300, 5e-324] {
            assert_eq!(parse_real(&real(x)), Some(x));
        }
    }

    #[test]
    fn period_three_document() {
        let b = IvppBranch2D::new(3, 1).unwrap();
        let d = decompose(&b, Method::Analytic).unwrap();
        let v = decomposition_json(&d);
        let bounds: Vec<f64> = v["boundaries"].as_array().unwrap().iter().map(|x| parse_real(x).unwrap()).collect();
        assert_eq!(bounds.len(), 3);
        assert_eq!(bounds[0], f64::NEG_INFINITY);
        assert!((bounds[1] + 1.0).abs() < 1e-12 && (bounds[2] - 1.0).abs() < 1e-12);
        assert_eq!(v["sigma"], json!([2, 3, 1]));
        assert_eq!(v["convention"], json!("left-closed"));
        assert_eq!(v["tilings"], json!(1));
    }

    #[test]
    fn pgm_header() {
        let mut out = Vec::new();
        write_pgm_bytes(&mut out, 2, 1, &[0, 3]).unwrap();
        assert_eq!(out, b"P5\n2 1\n255\n\x00\x03");
    }
}
