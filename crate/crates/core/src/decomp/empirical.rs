//! Boundaries located as the points where some iterate of the parametrized
//! orbit passes through infinity.
//!
//! The real projective line is scanned through `x = tan θ`. Between samples
//! whose orbit sign patterns differ, the change is bisected; it is kept when
//! the coordinate that flipped was large on both sides (a pole) and dropped
//! when it was small (an ordinary zero).

use std::f64::consts::FRAC_PI_2;

use crate::ext::ExtendedComplex;
use crate::map::{PointD, RationalMapSpec};

use super::{normalize_boundaries, DecompError};

/// Which coordinates enter the orbit signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coords {
    First,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSpec {
    /// Number of angular samples over the projective line.
    pub samples: usize,
    pub coords: Coords,
    /// Boundaries closer than this are merged.
    pub tol: f64,
    /// Re-lift every iterate through the parametrization from its first
    /// coordinate. This iterates the induced map on a curve that is a graph
    /// over x and keeps the orbit on the variety; leave it off when the
    /// map moves points between sheets of the parametrization.
    pub reproject: bool,
}

impl Default for ScanSpec {
    fn default() -> Self {
        ScanSpec { samples: 2048, coords: Coords::First, tol: 1e-9, reproject: true }
    }
}

// irrational offset keeps samples off rational boundaries
const OFFSET: f64 = 0.381_966_011_250_105;
const CLOSURE_SAMPLES: usize = 16;
const CLOSURE_TOL: f64 = 1e-6;
// fractions of the remaining bracket tried when stepping over a gap
const GAP_STEPS: [f64; 6] = [1e-9, 1e-7, 1e-5, 1e-3, 1e-1, 0.5];

pub(crate) fn theta(i: usize, samples: usize) -> f64 {
    -FRAC_PI_2 + std::f64::consts::PI * (i as f64 + OFFSET) / samples as f64
}

/// Real values of the selected coordinates of `F^k(param(x))`, `k < n`, or
/// `None` if the orbit hits a pole, an indeterminate point or leaves the
/// reals.
fn orbit_values(
    map: &RationalMapSpec,
    param: &(dyn Fn(f64) -> PointD + Sync),
    n: u32,
    coords: Coords,
    reproject: bool,
    x: f64,
) -> Option<Vec<f64>> {
    let width = match coords {
        Coords::First => 1,
        Coords::All => map.dim(),
    };
    let mut out = Vec::with_capacity(n as usize * width);
    let mut p = param(x);
    for k in 0..n {
        if k > 0 {
            p = map.apply(&p).ok()?;
            if reproject {
                let x = p.coord(0).finite()?;
                if x.im.abs() > 1e-9 * x.re.abs().max(1.0) {
                    return None;
                }
                p = param(x.re);
            }
        }
        for c in &p.coords()[..width] {
            match c {
                ExtendedComplex::Finite(z) if z.im.abs() <= 1e-9 * z.re.abs().max(1.0) => out.push(z.re),
                _ => return None,
            }
        }
    }
    Some(out)
}

fn signature(v: &[f64]) -> Vec<bool> {
    v.iter().map(|&a| a > 0.0).collect()
}

/// Bisects a sign change between `lo` and `hi` (angles); returns the
/// bracket at convergence.
fn bisect(eval: &dyn Fn(f64) -> Option<Vec<f64>>, mut lo: f64, mut hi: f64, sig_lo: &[bool]) -> (f64, f64) {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match eval(mid) {
            Some(v) if signature(&v) == sig_lo => lo = mid,
            Some(_) => hi = mid,
            // landed exactly on a pole; it is a valid bracket end
            None => hi = mid,
        }
    }
    (lo, hi)
}

/// Whether the change at angle `t` is a pole of some entry, judged a short
/// distance away on both sides so that exact float poles do not interfere.
fn crosses_pole(eval: &dyn Fn(f64) -> Option<Vec<f64>>, t: f64) -> bool {
    for delta in [1e-10, 1e-8, 1e-6] {
        let (a, b) = (eval(t - delta), eval(t + delta));
        if a.is_some() && b.is_some() {
            return is_pole_crossing(a.as_ref(), b.as_ref());
        }
    }
    true
}

/// Whether some entry flips sign while large on both sides.
fn is_pole_crossing(a: Option<&Vec<f64>>, b: Option<&Vec<f64>>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => a.iter().zip(b).any(|(&u, &v)| (u > 0.0) != (v > 0.0) && u.abs().min(v.abs()) > 1.0),
        _ => true,
    }
}

/// Sign changes of the orbit signature on `(lo, hi)` in angle, assuming the
/// endpoint signatures are known.
fn changes_between(eval: &dyn Fn(f64) -> Option<Vec<f64>>, mut lo: f64, hi: f64, sig_hi: &[bool], out: &mut Vec<f64>) {
    let Some(mut v_lo) = eval(lo) else { return };
    for _ in 0..64 {
        let s_lo = signature(&v_lo);
        if s_lo == sig_hi {
            return;
        }
        let (a, b) = bisect(eval, lo, hi, &s_lo);
        let vb = eval(b);
        let pole = crosses_pole(eval, 0.5 * (a + b));
        if pole {
            out.push((0.5 * (a + b)).tan());
        }
        // continue just past this change
        lo = b;
        match vb {
            Some(v) => v_lo = v,
            None => {
                // step over a run of points where the orbit cannot be evaluated
                let next = GAP_STEPS
                    .iter()
                    .map(|f| b + (hi - b) * f)
                    .take_while(|&t| t < hi)
                    .find_map(|t| eval(t).map(|v| (t, v)));
                let Some((t, v)) = next else { return };
                // a pole hidden inside the gap
                if !pole && is_pole_crossing(eval(a).as_ref(), Some(&v)) {
                    out.push((0.5 * (a + t)).tan());
                }
                lo = t;
                v_lo = v;
            }
        }
    }
}

/// Boundaries of the components of `map` along the parametrized curve,
/// sorted, with the point at infinity last.
pub fn boundaries_empirical(
    map: &RationalMapSpec,
    param: &(dyn Fn(f64) -> PointD + Sync),
    n: u32,
    scan: &ScanSpec,
) -> Result<Vec<f64>, DecompError> {
    check_closure(map, param, n)?;
    let eval = |th: f64| orbit_values(map, param, n, scan.coords, scan.reproject, th.tan());
    let samples = scan.samples.max(8);
    let angles: Vec<f64> = (0..samples).map(|i| theta(i, samples)).collect();
    let values: Vec<Option<Vec<f64>>> = angles.iter().map(|&t| eval(t)).collect();
    let mut found = vec![f64::INFINITY];
    for i in 0..samples - 1 {
        let (Some(a), Some(b)) = (&values[i], &values[i + 1]) else {
            // a sample sat on a pole: bracket from its regular neighbours
            continue;
        };
        let sb = signature(b);
        if signature(a) != sb {
            changes_between(&eval, angles[i], angles[i + 1], &sb, &mut found);
        }
    }
    Ok(normalize_boundaries(found, scan.tol))
}

/// The orbit of sampled points returns after `n` steps.
fn check_closure(map: &RationalMapSpec, param: &(dyn Fn(f64) -> PointD + Sync), n: u32) -> Result<(), DecompError> {
    let mut sampled = 0;
    let mut closed = 0;
    for i in 0..CLOSURE_SAMPLES {
        let p = param(theta(i, CLOSURE_SAMPLES).tan());
        let mut q = p.clone();
        let mut ok = true;
        for _ in 0..n {
            match map.apply(&q) {
                Ok(next) => q = next,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        sampled += 1;
        if q.chordal(&p) < CLOSURE_TOL {
            closed += 1;
        }
    }
    if sampled == 0 || closed * 4 < sampled * 3 {
        return Err(DecompError::NoClosure { n, closed, sampled });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{f2d, lv_recurrence};
    use crate::decomp::boundaries_analytic;
    use crate::ivpp2d::{branches, IvppBranch2D};
    use approx::assert_abs_diff_eq;

    #[test]
    fn agrees_with_closed_form() {
        let map = f2d();
        for n in 3..=6 {
            for b in branches(n).unwrap() {
                let want = boundaries_analytic(&b).unwrap();
                let got = boundaries_empirical(&map, &|x| b.point_real(x), n, &ScanSpec::default()).unwrap();
                assert_eq!(got.len(), want.len(), "n={n} m={}: {got:?}", b.m);
                for (a, w) in got.iter().zip(&want) {
                    if w.is_finite() {
                        assert_abs_diff_eq!(*a, *w, epsilon = 1e-7);
                    } else {
                        assert!(a.is_infinite());
                    }
                }
            }
        }
    }

    #[test]
    fn recurrence_boundaries() {
        let map = lv_recurrence();
        let got = boundaries_empirical(&map, &|x| PointD::real(&[x]), 2, &ScanSpec::default()).unwrap();
        assert_eq!(got.len(), 2);
        assert_abs_diff_eq!(got[0], 1.0, epsilon = 1e-9);
        assert!(got[1].is_infinite());
    }

    #[test]
    fn wrong_period_is_reported() {
        let b = IvppBranch2D::new(4, 1).unwrap();
        let err = boundaries_empirical(&f2d(), &|x| b.point_real(x), 3, &ScanSpec::default());
        assert!(matches!(err, Err(DecompError::NoClosure { .. })));
    }
}
