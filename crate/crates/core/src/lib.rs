//! Invariant varieties of periodic points (IVPPs) of rational maps.
//!
//! The crate evaluates rational maps projectively, parses user maps from a
//! small text language, carries the closed-form period conditions of the
//! plane map `(x, y) ↦ (x(1−y)/(1−x), y(1−x)/(1−y))` and of the
//! three-dimensional Lotka–Volterra map, reduces the plane map to a Möbius
//! transformation, and splits each variety into components that the map
//! permutes cyclically. Tiling rasters of the components are written as PGM
//! or CSV.

// `!(a < b)` is used on purpose so that NaN fails a check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod builtin;
pub mod decomp;
pub mod dsl;
pub mod exec;
pub mod expr;
pub mod ext;
pub mod io;
pub mod ivpp2d;
pub mod lv;
pub mod map;
pub mod mobius;
pub mod poly;
pub mod verify;

pub use ext::ExtendedComplex;
pub use map::{MapError, OrbitTrace, PointD, RationalMapSpec};
