//! The maps studied here, written in the map language.

use std::sync::OnceLock;

use crate::dsl::parse_map;
use crate::map::RationalMapSpec;

pub const F2D_SOURCE: &str = "dim 2;\nx' = x*(1-y)/(1-x);\ny' = y*(1-x)/(1-y);\ninv r = x*y;\n";

pub const F3D_SOURCE: &str = "dim 3;\n\
x' = x*(1-y+y*z)/(1-z+z*x);\n\
y' = y*(1-z+z*x)/(1-x+x*y);\n\
z' = z*(1-x+x*y)/(1-y+y*z);\n\
inv r = x*y*z;\n\
inv s = (1-x)*(1-y)*(1-z);\n";

pub const LV_RECURRENCE_SOURCE: &str = "dim 1;\nx' = -x/(1-x);\n";

fn cached(cell: &'static OnceLock<RationalMapSpec>, src: &str) -> RationalMapSpec {
    cell.get_or_init(|| parse_map(src).expect("built-in map source is valid")).clone()
}

/// `(x, y) ↦ (x(1−y)/(1−x), y(1−x)/(1−y))` with invariant `r = xy`.
pub fn f2d() -> RationalMapSpec {
    static CELL: OnceLock<RationalMapSpec> = OnceLock::new();
    cached(&CELL, F2D_SOURCE)
}

/// The three-dimensional Lotka–Volterra map with invariants
/// `r = xyz` and `s = (1−x)(1−y)(1−z)`.
pub fn f3d() -> RationalMapSpec {
    static CELL: OnceLock<RationalMapSpec> = OnceLock::new();
    cached(&CELL, F3D_SOURCE)
}

/// The plane map restricted to the level `xy = r`: `x ↦ (x − r)/(1 − x)`.
pub fn f2d_reduced(r: f64) -> RationalMapSpec {
    let src =
        format!("dim 1;\nx' = (x-({}))/(1-x);\n", crate::poly::format_rational(&crate::poly::rational_from_f64(r)));
    parse_map(&src).expect("reduced map source is valid")
}

/// The period-2 recurrence `x ↦ −x/(1 − x)`.
pub fn lv_recurrence() -> RationalMapSpec {
    static CELL: OnceLock<RationalMapSpec> = OnceLock::new();
    cached(&CELL, LV_RECURRENCE_SOURCE)
}

pub const NAMES: [&str; 4] = ["f2d", "f3d", "f2d-reduced", "lv-recurrence"];

/// Looks a built-in up by name; `f2d-reduced` takes the level `r`.
pub fn by_name(name: &str, r: Option<f64>) -> Option<RationalMapSpec> {
    match name {
        "f2d" => Some(f2d()),
        "f3d" => Some(f3d()),
        "f2d-reduced" => Some(f2d_reduced(r.unwrap_or(-3.0))),
        "lv-recurrence" => Some(lv_recurrence()),
        _ => None,
    }
}
