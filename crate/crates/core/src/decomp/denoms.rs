//! Where iterates of a map first hit a pole.
//!
//! For each step `k` and coordinate `i` the denominator of component `i`,
//! evaluated at `F^{k−1}(p)`, vanishes exactly where `F^k` first sends that
//! coordinate to infinity. On a grid this shows up as a sign change between
//! cell corners; along a curve it is bisected to a point.

use crate::exec::Execution;
use crate::map::{PointD, RationalMapSpec};

use super::empirical::{theta, ScanSpec};
use super::normalize_boundaries;
use super::raster::Window;

/// Grid layers of the first-pole locus.
#[derive(Debug, Clone, PartialEq)]
pub struct DenominatorZeroSet {
    pub k_max: usize,
    pub window: Window,
    pub width: usize,
    pub height: usize,
    /// Fixed value of the third coordinate for three-dimensional maps.
    pub slice: Option<f64>,
    /// Per cell (row 0 at `y_max`), the first step whose denominator changes
    /// sign inside the cell, or 0.
    pub first: Vec<u8>,
    /// The same, restricted to one coordinate's denominator.
    pub by_coord: Vec<Vec<u8>>,
}

impl DenominatorZeroSet {
    pub fn layer_at(&self, col: usize, row: usize) -> u8 {
        self.first[row * self.width + col]
    }

    /// Cell containing the point `(x, y)`, if inside the window.
    pub fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        self.window.cell_of(x, y, self.width, self.height)
    }

    /// Number of cells in each layer `1..=k_max`.
    pub fn counts(&self) -> Vec<usize> {
        (1..=self.k_max).map(|k| self.first.iter().filter(|&&v| v as usize == k).count()).collect()
    }
}

/// Denominator values `D_{k,i}(p)` for `k = 1..=k_max`, flattened as
/// `(k − 1)·d + i`; `None` where the orbit is not finite and real.
fn denominator_profile(map: &RationalMapSpec, p: &PointD, k_max: usize) -> Vec<Option<f64>> {
    let d = map.dim();
    let mut out = vec![None; k_max * d];
    let mut q = p.clone();
    for k in 0..k_max {
        let Ok(z) = q.finite_coords() else { break };
        if z.iter().any(|c| c.im.abs() > 1e-12 * c.re.abs().max(1.0)) {
            break;
        }
        let re: Vec<f64> = z.iter().map(|c| c.re).collect();
        for (i, comp) in map.components().iter().enumerate() {
            out[k * d + i] = Some(comp.eval_denominator_real(&re));
        }
        match map.apply(&q) {
            Ok(next) => q = next,
            Err(_) => break,
        }
    }
    out
}

fn changes_sign(vals: &[Option<f64>]) -> bool {
    let mut pos = false;
    let mut neg = false;
    for v in vals {
        match v {
            Some(a) if *a > 0.0 => pos = true,
            Some(a) if *a < 0.0 => neg = true,
            Some(_) => return true,
            None => {}
        }
    }
    pos && neg
}

/// First-pole layers of `map` over a grid of the `(x, y)` plane; for
/// three-dimensional maps `z` is fixed at `slice` (default 0.5).
pub fn denominator_zero_curves(
    map: &RationalMapSpec,
    k_max: usize,
    window: Window,
    width: usize,
    height: usize,
    slice: Option<f64>,
    exec: Execution,
) -> DenominatorZeroSet {
    let k_max = k_max.clamp(1, 6);
    let d = map.dim();
    let slice = (d == 3).then(|| slice.unwrap_or(0.5));
    let point = |x: f64, y: f64| match d {
        1 => PointD::real(&[x]),
        2 => PointD::real(&[x, y]),
        _ => PointD::real(&[x, y, slice.unwrap_or(0.5)]),
    };
    let (cw, ch) = (width + 1, height + 1);
    let corners: Vec<Vec<Option<f64>>> = exec.map(cw * ch, |idx| {
        let (col, row) = (idx % cw, idx / cw);
        let (x, y) = window.corner(col, row, width, height);
        denominator_profile(map, &point(x, y), k_max)
    });
    let cells: Vec<(u8, Vec<u8>)> = exec.map(width * height, |idx| {
        let (col, row) = (idx % width, idx / width);
        let quad = [
            &corners[row * cw + col],
            &corners[row * cw + col + 1],
            &corners[(row + 1) * cw + col],
            &corners[(row + 1) * cw + col + 1],
        ];
        let mut per = vec![0u8; d];
        for k in 0..k_max {
            let mut hit = false;
            for (i, slot) in per.iter_mut().enumerate() {
                let vals: Vec<Option<f64>> = quad.iter().map(|c| c[k * d + i]).collect();
                if changes_sign(&vals) {
                    *slot = k as u8 + 1;
                    hit = true;
                }
            }
            if hit {
                return (k as u8 + 1, per);
            }
        }
        (0, per)
    });
    let mut first = Vec::with_capacity(cells.len());
    let mut by_coord = vec![Vec::with_capacity(cells.len()); d];
    for (f, per) in cells {
        first.push(f);
        for (i, v) in per.into_iter().enumerate() {
            by_coord[i].push(v);
        }
    }
    DenominatorZeroSet { k_max, window, width, height, slice, first, by_coord }
}

/// Points of a parametrized curve where a selected denominator of some
/// iterate `k <= k_max` vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleCrossings {
    /// Finite crossings in increasing order.
    pub points: Vec<f64>,
    /// Whether a selected denominator changes sign through the point at
    /// infinity of the parameter.
    pub at_infinity: bool,
}

impl PoleCrossings {
    pub fn distance_to(&self, x: f64) -> f64 {
        if x.is_infinite() {
            return if self.at_infinity { 0.0 } else { f64::INFINITY };
        }
        self.points.iter().map(|p| (p - x).abs()).fold(f64::INFINITY, f64::min)
    }
}

pub fn pole_crossings(
    map: &RationalMapSpec,
    param: &(dyn Fn(f64) -> PointD + Sync),
    k_max: usize,
    coords: &[usize],
    scan: &ScanSpec,
) -> PoleCrossings {
    let d = map.dim();
    let entries: Vec<usize> = (0..k_max).flat_map(|k| coords.iter().map(move |&i| k * d + i)).collect();
    let eval = |th: f64| -> Vec<Option<f64>> {
        let full = denominator_profile(map, &param(th.tan()), k_max);
        entries.iter().map(|&e| full[e]).collect()
    };
    let samples = scan.samples.max(8);
    let angles: Vec<f64> = (0..samples).map(|i| theta(i, samples)).collect();
    let values: Vec<Vec<Option<f64>>> = angles.iter().map(|&t| eval(t)).collect();
    let mut points = Vec::new();
    for i in 0..samples - 1 {
        for (e, (&a, &b)) in values[i].iter().zip(&values[i + 1]).enumerate() {
            let (Some(a), Some(b)) = (a, b) else { continue };
            if (a > 0.0) == (b > 0.0) {
                continue;
            }
            let (mut lo, mut hi, mut va) = (angles[i], angles[i + 1], a);
            let mut vb = b;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                match eval(mid)[e] {
                    Some(v) if (v > 0.0) == (va > 0.0) => {
                        lo = mid;
                        va = v;
                    }
                    Some(v) => {
                        hi = mid;
                        vb = v;
                    }
                    None => break,
                }
            }
            // a denominator that flips through infinity comes from an
            // earlier pole, not a zero of its own
            if va.abs().min(vb.abs()) < 1e-6 {
                points.push((0.5 * (lo + hi)).tan());
            }
        }
    }
    let first = &values[0];
    let last = &values[samples - 1];
    let at_infinity = first.iter().zip(last).any(|(a, b)| match (a, b) {
        (Some(a), Some(b)) => (*a > 0.0) != (*b > 0.0) && a.abs().min(b.abs()) < 1.0,
        _ => false,
    });
    let mut points = normalize_boundaries(points, scan.tol);
    points.retain(|x| x.is_finite());
    PoleCrossings { points, at_infinity }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{f2d, f3d};
    use crate::decomp::boundaries_analytic;
    use crate::ivpp2d::{branches, IvppBranch2D};

    fn window4() -> Window {
        Window { x_min: -4.0, x_max: 4.0, y_min: -4.0, y_max: 4.0 }
    }

    #[test]
    fn first_layer_contains_unit_lines() {
        let set = denominator_zero_curves(&f2d(), 3, window4(), 81, 81, None, Execution::Sequential);
        for t in [-3.3, -1.7, 0.2, 2.9] {
            let (c, r) = set.cell_of(1.0, t).unwrap();
            assert_eq!(set.layer_at(c, r), 1, "x = 1, y = {t}");
            let (c, r) = set.cell_of(t, 1.0).unwrap();
            assert_eq!(set.layer_at(c, r), 1, "y = 1, x = {t}");
        }
        assert!(set.counts().iter().all(|&c| c > 0));
    }

    #[test]
    fn three_dimensional_slice() {
        // z = 0.5: 1 - z + z x = 0 at x = -1
        let set = denominator_zero_curves(&f3d(), 1, window4(), 80, 80, Some(0.5), Execution::Sequential);
        let (c, r) = set.cell_of(-1.0, 0.3).unwrap();
        assert_eq!(set.by_coord[0][r * set.width + c], 1);
    }

    #[test]
    fn period_three_boundaries_on_pole_curves() {
        let b = IvppBranch2D::new(3, 1).unwrap();
        let pc = pole_crossings(&f2d(), &|x| b.point_real(x), 3, &[0], &ScanSpec::default());
        assert_eq!(pc.points.len(), 2, "{:?}", pc.points);
        assert!((pc.points[0] + 1.0).abs() < 1e-9 && (pc.points[1] - 1.0).abs() < 1e-9);
        assert!(pc.at_infinity);
    }

    #[test]
    fn every_closed_form_boundary_is_a_pole_crossing() {
        for n in 3..=6u32 {
            for b in branches(n).unwrap() {
                let pc = pole_crossings(&f2d(), &|x| b.point_real(x), n as usize, &[0], &ScanSpec::default());
                for c in boundaries_analytic(&b).unwrap() {
                    assert!(pc.distance_to(c) < 1e-6, "n={n} m={} c={c}", b.m);
                }
            }
        }
    }
}
