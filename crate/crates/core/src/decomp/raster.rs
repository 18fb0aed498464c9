//! Tiling rasters: every cell of a plane window is assigned a period class
//! and, where the variety passes through it, a component index.
//!
//! Varieties are thin curves in the plane, so a cell is tested against each
//! target curve by the signs of the curve's level function at its corners.
//! When the curve crosses, the cell centre is projected onto it by Newton
//! steps and that point is classified. Other cells get the period of their
//! centre, if any.

use crate::decomp::ComponentDecomposition;
use crate::exec::Execution;
use crate::ivpp2d::IvppBranch2D;
use crate::map::{PointD, RationalMapSpec};

/// `[x_min, x_max] × [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Window {
    pub fn square(half: f64) -> Self {
        Window { x_min: -half, x_max: half, y_min: -half, y_max: half }
    }

    pub fn is_valid(&self) -> bool {
        self.x_min.is_finite()
            && self.x_max.is_finite()
            && self.y_min.is_finite()
            && self.y_max.is_finite()
            && self.x_min < self.x_max
            && self.y_min < self.y_max
    }

    /// Corner `(col, row)` of a `width × height` grid; row 0 is the top edge.
    pub fn corner(&self, col: usize, row: usize, width: usize, height: usize) -> (f64, f64) {
        let x = self.x_min + (self.x_max - self.x_min) * col as f64 / width as f64;
        let y = self.y_max - (self.y_max - self.y_min) * row as f64 / height as f64;
        (x, y)
    }

    pub fn center(&self, col: usize, row: usize, width: usize, height: usize) -> (f64, f64) {
        let x = self.x_min + (self.x_max - self.x_min) * (col as f64 + 0.5) / width as f64;
        let y = self.y_max - (self.y_max - self.y_min) * (row as f64 + 0.5) / height as f64;
        (x, y)
    }

    pub fn cell_of(&self, x: f64, y: f64, width: usize, height: usize) -> Option<(usize, usize)> {
        let u = (x - self.x_min) / (self.x_max - self.x_min);
        let v = (self.y_max - y) / (self.y_max - self.y_min);
        if !(0.0..1.0).contains(&u) || !(0.0..1.0).contains(&v) {
            return None;
        }
        Some(((u * width as f64) as usize, (v * height as f64) as usize))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasterSpec {
    pub window: Window,
    pub width: usize,
    pub height: usize,
    pub n_max: usize,
    /// Chordal tolerance for period detection.
    pub tol: f64,
    pub exec: Execution,
}

impl RasterSpec {
    pub const MAX_SIDE: usize = 4096;

    pub fn new(window: Window, width: usize, height: usize) -> Self {
        RasterSpec { window, width, height, n_max: 8, tol: 1e-6, exec: Execution::default() }
    }
}

/// One cell: its period class, component and the point it was judged by.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellRecord {
    pub period: Option<u32>,
    pub component: Option<usize>,
    /// Index of the target curve that classified the cell.
    pub target: Option<usize>,
    pub x: f64,
    pub y: f64,
}

/// A curve `level(x, y) = 0` in the plane on which points have a known
/// period and can be assigned a component.
pub trait LevelTarget: Sync {
    fn period(&self) -> u32;
    fn level(&self, x: f64, y: f64) -> f64;
    fn gradient(&self, x: f64, y: f64) -> (f64, f64);
    /// The phase-space point over a plane point of the curve.
    fn lift(&self, x: f64, y: f64) -> Option<PointD>;
    /// Component of a phase-space point on the curve.
    fn component(&self, p: &PointD) -> Option<usize>;
    /// Component that the map sends `component` into.
    fn successor(&self, component: usize) -> usize;
    /// Optional extra per-cell value (the level `r` for sliced maps).
    fn extra(&self, _p: &PointD) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TilingRaster {
    pub window: Window,
    pub width: usize,
    pub height: usize,
    /// Row-major, row 0 at `y_max`.
    pub cells: Vec<CellRecord>,
    /// Per-cell extra column, present for sliced maps.
    pub extra: Option<Vec<Option<f64>>>,
    pub component_count: usize,
}

impl TilingRaster {
    pub fn cell(&self, col: usize, row: usize) -> &CellRecord {
        &self.cells[row * self.width + col]
    }

    /// Distinct component indices present.
    pub fn component_classes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.cells.iter().filter_map(|c| c.component).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn classified(&self) -> usize {
        self.cells.iter().filter(|c| c.component.is_some()).count()
    }
}

/// Outcome of checking `component(F(p)) = sigma(component(p))` on cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessorReport {
    pub checked: usize,
    pub agreeing: usize,
    /// Cells skipped because the image is at a pole.
    pub poles: usize,
}

impl SuccessorReport {
    pub fn fraction(&self) -> f64 {
        if self.checked == 0 {
            0.0
        } else {
            self.agreeing as f64 / self.checked as f64
        }
    }
}

fn newton_project(t: &dyn LevelTarget, mut x: f64, mut y: f64) -> Option<(f64, f64)> {
    for _ in 0..30 {
        let g = t.level(x, y);
        let (gx, gy) = t.gradient(x, y);
        let n2 = gx * gx + gy * gy;
        if !(n2 > 0.0) || !g.is_finite() {
            return None;
        }
        let step = g / n2;
        x -= step * gx;
        y -= step * gy;
        if (step * step * n2).sqrt() < 1e-15 * (1.0 + x.abs() + y.abs()) {
            break;
        }
    }
    (x.is_finite() && y.is_finite()).then_some((x, y))
}

fn corner_sign_change(t: &dyn LevelTarget, x0: f64, x1: f64, y0: f64, y1: f64) -> bool {
    let v = [t.level(x0, y0), t.level(x1, y0), t.level(x0, y1), t.level(x1, y1)];
    if v.iter().any(|a| !a.is_finite()) {
        return false;
    }
    v.contains(&0.0) || (v.iter().any(|&a| a > 0.0) && v.iter().any(|&a| a < 0.0))
}

/// Renders the tiling of `map` for the given target curves; cells off every
/// curve are lifted by `generic` and tested for any period up to `n_max`.
pub fn render(
    map: &RationalMapSpec,
    targets: &[&dyn LevelTarget],
    spec: &RasterSpec,
    generic: &(dyn Fn(f64, f64) -> Option<PointD> + Sync),
) -> TilingRaster {
    let width = spec.width.clamp(1, RasterSpec::MAX_SIDE);
    let height = spec.height.clamp(1, RasterSpec::MAX_SIDE);
    let w = spec.window;
    let dx = (w.x_max - w.x_min) / width as f64;
    let dy = (w.y_max - w.y_min) / height as f64;
    let results: Vec<(CellRecord, Option<f64>)> = spec.exec.map(width * height, |idx| {
        let (col, row) = (idx % width, idx / width);
        let (cx, cy) = w.center(col, row, width, height);
        let (x0, x1) = (cx - 0.5 * dx, cx + 0.5 * dx);
        let (y0, y1) = (cy - 0.5 * dy, cy + 0.5 * dy);
        let slack = 1e-9 * (dx + dy);
        for (ti, t) in targets.iter().enumerate() {
            if !corner_sign_change(*t, x0, x1, y0, y1) {
                continue;
            }
            let Some((px, py)) = newton_project(*t, cx, cy) else { continue };
            if px < x0 - slack || px > x1 + slack || py < y0 - slack || py > y1 + slack {
                continue;
            }
            let Some(p) = t.lift(px, py) else { continue };
            match map.detect_period(&p, spec.n_max, spec.tol) {
                Ok(Some(k)) if k as u32 == t.period() => {
                    let rec = CellRecord {
                        period: Some(k as u32),
                        component: t.component(&p),
                        target: Some(ti),
                        x: px,
                        y: py,
                    };
                    return (rec, t.extra(&p));
                }
                // too close to a pole to trust
                Err(_) => return (CellRecord { period: None, component: None, target: None, x: px, y: py }, None),
                _ => {}
            }
        }
        let period =
            generic(cx, cy).and_then(|p| map.detect_period(&p, spec.n_max, spec.tol).ok().flatten()).map(|k| k as u32);
        (CellRecord { period, component: None, target: None, x: cx, y: cy }, None)
    });
    let has_extra = results.iter().any(|(_, e)| e.is_some());
    let (cells, extra): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    TilingRaster { window: w, width, height, cells, extra: has_extra.then_some(extra), component_count: 0 }
}

/// Checks the successor property on every classified cell.
pub fn successor_check(map: &RationalMapSpec, raster: &TilingRaster, targets: &[&dyn LevelTarget]) -> SuccessorReport {
    let mut rep = SuccessorReport { checked: 0, agreeing: 0, poles: 0 };
    for c in &raster.cells {
        let (Some(comp), Some(ti)) = (c.component, c.target) else { continue };
        let t = targets[ti];
        let Some(p) = t.lift(c.x, c.y) else { continue };
        let q = match map.apply(&p) {
            Ok(q) if q.is_finite() => q,
            _ => {
                rep.poles += 1;
                continue;
            }
        };
        rep.checked += 1;
        if t.component(&q) == Some(t.successor(comp)) {
            rep.agreeing += 1;
        }
    }
    rep
}

/// The curve `xy = ρ` of one branch of the plane map with its decomposition;
/// component indices are shifted by `offset` so several branches can share
/// a raster.
#[derive(Debug, Clone)]
pub struct Branch2DTarget {
    pub branch: IvppBranch2D,
    pub decomp: ComponentDecomposition,
    pub offset: usize,
}

impl LevelTarget for Branch2DTarget {
    fn period(&self) -> u32 {
        self.branch.n
    }

    fn level(&self, x: f64, y: f64) -> f64 {
        x * y - self.branch.rho
    }

    fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        (y, x)
    }

    fn lift(&self, x: f64, y: f64) -> Option<PointD> {
        let p = self.branch.point_real(x);
        let yy = p.coord(1).finite()?.re;
        ((yy - y).abs() <= 1e-6 * (1.0 + y.abs())).then_some(p)
    }

    fn component(&self, p: &PointD) -> Option<usize> {
        Some(self.offset + self.decomp.classify(p.coord(0).re()))
    }

    fn successor(&self, component: usize) -> usize {
        self.offset + self.decomp.sigma[component - self.offset]
    }
}

/// Tiling raster of the plane map for the given decomposed branches.
pub fn tiling_2d(
    map: &RationalMapSpec,
    decomps: &[(IvppBranch2D, ComponentDecomposition)],
    spec: &RasterSpec,
) -> (TilingRaster, SuccessorReport) {
    let mut offset = 0;
    let targets: Vec<Branch2DTarget> = decomps
        .iter()
        .map(|(b, d)| {
            let t = Branch2DTarget { branch: *b, decomp: d.clone(), offset };
            offset += d.components.len();
            t
        })
        .collect();
    let refs: Vec<&dyn LevelTarget> = targets.iter().map(|t| t as &dyn LevelTarget).collect();
    let mut raster = render(map, &refs, spec, &|x, y| Some(PointD::real(&[x, y])));
    raster.component_count = offset;
    let report = successor_check(map, &raster, &refs);
    (raster, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::f2d;
    use crate::decomp::{decompose, Method};

    fn period3(width: usize, exec: Execution) -> (TilingRaster, SuccessorReport) {
        let b = IvppBranch2D::new(3, 1).unwrap();
        let d = decompose(&b, Method::Analytic).unwrap();
        let mut spec = RasterSpec::new(Window::square(4.0), width, width);
        spec.exec = exec;
        tiling_2d(&f2d(), &[(b, d)], &spec)
    }

    #[test]
    fn three_classes_and_successors() {
        let (r, rep) = period3(120, Execution::Parallel);
        assert_eq!(r.component_classes(), vec![0, 1, 2]);
        assert!(rep.checked > 100);
        assert!(rep.fraction() >= 0.999, "{rep:?}");
    }

    #[test]
    fn deterministic_across_schedules() {
        let (a, _) = period3(60, Execution::Sequential);
        let (b, _) = period3(60, Execution::Parallel);
        assert_eq!(a, b);
    }

    #[test]
    fn generic_cells_are_not_periodic() {
        let (r, _) = period3(60, Execution::Sequential);
        let c = r.cell(7, 3);
        assert_eq!((c.period, c.component), (None, None));
    }

    #[test]
    fn window_geometry() {
        let w = Window::square(4.0);
        assert_eq!(w.corner(0, 0, 8, 8), (-4.0, 4.0));
        assert_eq!(w.center(0, 0, 8, 8), (-3.5, 3.5));
        assert_eq!(w.cell_of(-3.5, 3.5, 8, 8), Some((0, 0)));
        assert_eq!(w.cell_of(4.5, 0.0, 8, 8), None);
    }
}
