//! The three-dimensional Lotka–Volterra map
//! `(x, y, z) ↦ (x(1−y+yz)/(1−z+zx), y(1−z+zx)/(1−x+xy), z(1−x+xy)/(1−y+yz))`
//! with invariants `r = xyz` and `s = (1−x)(1−y)(1−z)`.
//!
//! Period 2 is the surface `s = −1`, on which `r` stays free. Along `x` the
//! map acts as `x ↦ x/(x − 1)` whatever `r` is, and the two roots `a±` of a
//! quadratic in `(x, r)` give the two sheets over each `x`.

use num_complex::Complex64;
use thiserror::Error;

use crate::builtin::{f3d, lv_recurrence as recurrence_map};
use crate::decomp::{
    boundaries_empirical, classify_cuts, successor_check, ComponentDecomposition, Convention, Coords, DecompError,
    LevelTarget, Piece, RasterSpec, ScanSpec, SuccessorReport, TilingRaster,
};
use crate::ext::{principal_sqrt, ExtendedComplex};
use crate::map::PointD;
use crate::mobius::MobiusMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LvError {
    #[error("no period condition for n = {0} (supported: 2, 3, 4)")]
    UnsupportedPeriod(u32),
    #[error("x = {0} is degenerate for the period-2 parametrization")]
    DegenerateX(f64),
    #[error("the level r = {0} lies in the indeterminacy locus of the map")]
    IndeterminateLevel(f64),
    #[error("{0}")]
    Decomp(#[from] DecompError),
}

/// On `r = −1` every numerator and denominator of the map vanishes along the
/// whole period-2 curve, so the level carries no dynamics.
pub fn is_indeterminate_level(r: f64) -> bool {
    (r + 1.0).abs() < 1e-9
}

/// The period conditions `γ^(n)(r, s)` for `n = 2, 3, 4`.
pub fn lv_gamma(n: u32, r: Complex64, s: Complex64) -> Result<Complex64, LvError> {
    let one = Complex64::new(1.0, 0.0);
    match n {
        2 => Ok(s + one),
        3 => Ok((s - r).powu(2) + (r + one) * (s + one)),
        4 => Ok((s - r).powu(3) + s * (r + one).powu(3)),
        _ => Err(LvError::UnsupportedPeriod(n)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// `r² − 2r²x + 2rx² + r²x² − 2rx³ + 4x² − 4x³ + x⁴`.
pub fn discriminant(x: f64, r: f64) -> f64 {
    let (x2, x3, x4, r2) = (x * x, x * x * x, x * x * x * x, r * r);
    r2 - 2.0 * r2 * x + 2.0 * r * x2 + r2 * x2 - 2.0 * r * x3 + 4.0 * x2 - 4.0 * x3 + x4
}

/// `a± = (x² − 2x + rx − r ± √Δ)/(2x)`, the roots of
/// `x a² − (x² − 2x + rx − r) a + r(x − 1)² = 0`.
///
/// The root without cancellation is computed directly and the other from
/// the product `a₊a₋ = r(x − 1)²/x`.
pub fn a_pm(x: Complex64, r: Complex64) -> (Complex64, Complex64) {
    let (x, r) = (snap_real(x), snap_real(r));
    let one = Complex64::new(1.0, 0.0);
    let b = x * x - 2.0 * x + r * x - r;
    let product = r * (x - one).powu(2) / x;
    let disc = snap_real(b * b - 4.0 * x * r * (x - one).powu(2));
    let q = principal_sqrt(disc);
    let plus_is_stable = (b * q.conj()).re >= 0.0;
    if plus_is_stable {
        let ap = (b + q) / (2.0 * x);
        let am = if ap.norm() > 0.0 { product / ap } else { (b - q) / (2.0 * x) };
        (ap, am)
    } else {
        let am = (b - q) / (2.0 * x);
        let ap = if am.norm() > 0.0 { product / am } else { (b + q) / (2.0 * x) };
        (ap, am)
    }
}

/// Drops an imaginary part that is only rounding noise, so that the square
/// root branch is decided by the real value.
fn snap_real(z: Complex64) -> Complex64 {
    if z.im.abs() <= 1e-12 * z.re.abs().max(1.0) {
        Complex64::new(z.re, 0.0)
    } else {
        z
    }
}

/// A point of the period-2 surface.
#[derive(Debug, Clone, PartialEq)]
pub struct LvPoint {
    pub point: PointD,
    /// The discriminant is negative, so `y` and `z` are complex.
    pub complex_branch: bool,
}

/// `(x, a±/(x−1), a∓/(x−1))` on the level `xyz = r`.
pub fn lv_period2_param(x: f64, r: f64, sign: Sign) -> Result<LvPoint, LvError> {
    if x == 0.0 || x == 1.0 || !x.is_finite() {
        return Err(LvError::DegenerateX(x));
    }
    let (ap, am) = a_pm(Complex64::new(x, 0.0), Complex64::new(r, 0.0));
    let (first, second) = match sign {
        Sign::Plus => (ap, am),
        Sign::Minus => (am, ap),
    };
    let d = Complex64::new(x - 1.0, 0.0);
    let point = PointD::new(vec![ExtendedComplex::real(x), (first / d).into(), (second / d).into()]);
    Ok(LvPoint { point, complex_branch: discriminant(x, r) < 0.0 })
}

/// Sheet of a point of the surface: the root `a±` that `y(x − 1)` matches.
pub fn sheet_of(p: &PointD) -> Option<Sign> {
    let z = p.finite_coords().ok()?;
    let (x, y) = (z[0], z[1]);
    let r = z[0] * z[1] * z[2];
    if x.norm() == 0.0 {
        return None;
    }
    let (ap, am) = a_pm(x, r);
    let w = y * (x - 1.0);
    Some(if (w - ap).norm() <= (w - am).norm() { Sign::Plus } else { Sign::Minus })
}

/// The reduced period-2 map `x ↦ −x/(1 − x)`.
pub fn lv_recurrence(x: ExtendedComplex) -> ExtendedComplex {
    recurrence_matrix().apply(x)
}

fn recurrence_matrix() -> MobiusMatrix {
    let c = |v: f64| Complex64::new(v, 0.0);
    MobiusMatrix { a: c(-1.0), b: c(0.0), c: c(-1.0), d: c(1.0) }
}

/// `w = x/(x − 2)`, which sends the fixed points `0, 2` to `0, ∞` and turns
/// the recurrence into `w ↦ −w`.
pub fn lv_diagonal_coordinate(x: ExtendedComplex) -> ExtendedComplex {
    let c = |v: f64| Complex64::new(v, 0.0);
    MobiusMatrix { a: c(1.0), b: c(0.0), c: c(1.0), d: c(-2.0) }.apply(x)
}

/// Inverse of [`lv_diagonal_coordinate`]: `x = 2w/(w − 1)`.
pub fn lv_from_diagonal(w: ExtendedComplex) -> ExtendedComplex {
    let c = |v: f64| Complex64::new(v, 0.0);
    MobiusMatrix { a: c(2.0), b: c(0.0), c: c(1.0), d: c(-1.0) }.apply(w)
}

/// Merge distance for scanned boundaries on the period-2 surface.
pub const LV_SCAN_TOL: f64 = 1e-6;

/// Finite x-boundaries of the period-2 components.
pub const LV_CUTS: [f64; 2] = [0.0, 1.0];

/// Component of a real point of the surface: `(−∞, 0]`, `(0, 1]`, and
/// `(1, ∞]` split by sheet.
pub fn lv_component(p: &PointD) -> Option<usize> {
    let x = p.coord(0);
    let xr = match x {
        ExtendedComplex::Infinity => f64::INFINITY,
        ExtendedComplex::Finite(z) => z.re,
    };
    match classify_cuts(&LV_CUTS, Convention::RightClosed, xr) {
        2 => match sheet_of(p)? {
            Sign::Plus => Some(2),
            Sign::Minus => Some(3),
        },
        i => Some(i),
    }
}

/// Decomposition of the period-2 surface on the level `r`; `sign` picks the
/// sheet used for the two unsplit intervals.
pub fn lv_decompose_period2(r: f64, sign: Sign) -> Result<ComponentDecomposition, LvError> {
    if is_indeterminate_level(r) {
        return Err(LvError::IndeterminateLevel(r));
    }
    let pieces = vec![
        Piece { lo: f64::NEG_INFINITY, hi: 0.0, sheet: None },
        Piece { lo: 0.0, hi: 1.0, sheet: None },
        Piece { lo: 1.0, hi: f64::INFINITY, sheet: Some(1) },
        Piece { lo: 1.0, hi: f64::INFINITY, sheet: Some(-1) },
    ];
    let map = f3d();
    let mut sigma = Vec::with_capacity(pieces.len());
    for piece in &pieces {
        // x = 2 is fixed by the recurrence; stay away from it
        let probes: &[f64] = match (piece.lo.is_finite(), piece.hi.is_finite()) {
            (false, _) => &[-1.0, -2.5, -0.3],
            (true, true) => &[0.5, 0.3, 0.7],
            (true, false) => &[3.0, 5.0, 1.5],
        };
        let s = match piece.sheet {
            Some(-1) => Sign::Minus,
            Some(_) => Sign::Plus,
            None => sign,
        };
        let mut last_err = DecompError::PoleHit { step: 1 };
        let mut image = None;
        for &x in probes {
            let p = lv_period2_param(x, r, s)?.point;
            match map.apply(&p) {
                Ok(q) => match lv_component(&q) {
                    Some(j) => {
                        image = Some(j);
                        break;
                    }
                    None => last_err = DecompError::PoleHit { step: 1 },
                },
                Err(e) => last_err = e.into(),
            }
        }
        sigma.push(image.ok_or(last_err)?);
    }
    let d = ComponentDecomposition {
        period: 2,
        branch: format!("a{}", sign.symbol()),
        level: Some(r),
        convention: Convention::RightClosed,
        cuts: LV_CUTS.to_vec(),
        components: pieces,
        sigma,
    };
    d.validate()?;
    Ok(d)
}

/// Boundaries found by scanning the surface on the level `r` with the
/// orbit-signature method over all three coordinates.
///
/// The map loses about half the working precision near `x = 0`, where `y`
/// and `z` are of order `1/x`, so boundaries are merged at `1e-6`.
pub fn lv_boundaries_empirical(r: f64, sign: Sign, samples: usize) -> Result<Vec<f64>, LvError> {
    if is_indeterminate_level(r) {
        return Err(LvError::IndeterminateLevel(r));
    }
    let map = f3d();
    let param = move |x: f64| match lv_period2_param(x, r, sign) {
        Ok(p) => p.point,
        Err(_) => PointD::new(vec![ExtendedComplex::real(x), ExtendedComplex::Infinity, ExtendedComplex::Infinity]),
    };
    let scan = ScanSpec { samples, coords: Coords::All, tol: LV_SCAN_TOL, reproject: false };
    let b = boundaries_empirical(&map, &param, 2, &scan)?;
    Ok(b)
}

/// Boundaries of the recurrence `x ↦ −x/(1 − x)` found by scanning.
pub fn lv_recurrence_boundaries(samples: usize) -> Result<Vec<f64>, LvError> {
    let scan = ScanSpec { samples, ..ScanSpec::default() };
    Ok(boundaries_empirical(&recurrence_map(), &|x| PointD::real(&[x]), 2, &scan)?)
}

/// `z` such that `(x, y, z)` lies on `s = −1`.
pub fn surface_z(x: f64, y: f64) -> f64 {
    1.0 + 1.0 / ((1.0 - x) * (1.0 - y))
}

/// Level `r = xyz` of the surface point over `(x, y)`.
pub fn surface_r(x: f64, y: f64) -> f64 {
    x * y * surface_z(x, y)
}

/// The curve `r = level` on the period-2 surface, seen from above.
#[derive(Debug, Clone)]
pub struct StripeTarget {
    pub level: f64,
    pub decomp: ComponentDecomposition,
}

impl LevelTarget for StripeTarget {
    fn period(&self) -> u32 {
        2
    }

    fn level(&self, x: f64, y: f64) -> f64 {
        // cleared of the (1-x)(1-y) denominator to stay finite on the poles
        (1.0 - x) * (1.0 - y) * (x * y - self.level) + x * y
    }

    fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        let r = self.level;
        let gx = -(1.0 - y) * (x * y - r) + (1.0 - x) * (1.0 - y) * y + y;
        let gy = -(1.0 - x) * (x * y - r) + (1.0 - x) * (1.0 - y) * x + x;
        (gx, gy)
    }

    fn lift(&self, x: f64, y: f64) -> Option<PointD> {
        let z = surface_z(x, y);
        z.is_finite().then(|| PointD::real(&[x, y, z]))
    }

    fn component(&self, p: &PointD) -> Option<usize> {
        lv_component(p)
    }

    fn successor(&self, component: usize) -> usize {
        self.decomp.sigma[component]
    }

    fn extra(&self, p: &PointD) -> Option<f64> {
        let z = p.finite_coords().ok()?;
        Some((z[0] * z[1] * z[2]).re)
    }
}

/// `r = 0` splits into coordinate planes and `r = −1` is indeterminate;
/// neither carries a stripe of its own.
pub fn is_degenerate_level(r: f64) -> bool {
    r.abs() < 1e-12 || is_indeterminate_level(r)
}

/// Striped tiling of the period-2 surface: one stripe per level in
/// `levels`, every other cell marked with its period only. Degenerate
/// levels are skipped.
pub fn lv_stripe_raster(levels: &[f64], spec: &RasterSpec) -> Result<(TilingRaster, SuccessorReport), LvError> {
    let map = f3d();
    let targets: Vec<StripeTarget> = levels
        .iter()
        .filter(|r| !is_degenerate_level(**r))
        .map(|&r| Ok(StripeTarget { level: r, decomp: lv_decompose_period2(r, Sign::Plus)? }))
        .collect::<Result<_, LvError>>()?;
    let refs: Vec<&dyn LevelTarget> = targets.iter().map(|t| t as &dyn LevelTarget).collect();
    let mut raster = crate::decomp::render(&map, &refs, spec, &|x, y| {
        let z = surface_z(x, y);
        z.is_finite().then(|| PointD::real(&[x, y, z]))
    });
    raster.component_count = 4;
    let report = successor_check(&map, &raster, &refs);
    Ok((raster, report))
}

/// Integer levels `lo..=hi`, the default striping.
pub fn integer_levels(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(f64::from).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::Window;
    use crate::exec::Execution;
    use approx::assert_abs_diff_eq;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn gamma_values() {
        assert_eq!(lv_gamma(2, c(7.0), c(-1.0)).unwrap(), c(0.0));
        assert_eq!(lv_gamma(3, c(-1.0), c(-1.0)).unwrap(), c(0.0));
        assert_eq!(lv_gamma(4, c(0.0), c(0.0)).unwrap(), c(0.0));
        assert_eq!(lv_gamma(5, c(0.0), c(0.0)), Err(LvError::UnsupportedPeriod(5)));
    }

    #[test]
    fn parametrized_points_lie_on_the_surface() {
        let f = f3d();
        for i in 0..50 {
            let x = -3.0 + 0.13 * i as f64;
            let r = -4.0 + 0.17 * i as f64;
            if x == 0.0 || (x - 1.0).abs() < 1e-9 {
                continue;
            }
            for sign in [Sign::Plus, Sign::Minus] {
                let p = lv_period2_param(x, r, sign).unwrap().point;
                let v = f.invariant_values(&p).unwrap();
                assert!((v[0] - r).norm() < 1e-9 * r.abs().max(1.0), "r at x={x} r={r}");
                assert!((v[1] + 1.0).norm() < 1e-9, "s at x={x} r={r}");
                assert!(lv_gamma(2, v[0], v[1]).unwrap().norm() < 1e-9);
            }
        }
        let (ap, am) = a_pm(c(2.5), c(-1.5));
        assert!((ap * am - c(-1.5 * 1.5 * 1.5 / 2.5)).norm() < 1e-12);
    }

    #[test]
    fn flow_closes_in_two_steps() {
        let f = f3d();
        for sign in [Sign::Plus, Sign::Minus] {
            let p = lv_period2_param(2.0, 3.0, sign).unwrap();
            assert!(p.complex_branch);
            assert_eq!(f.detect_period(&p.point, 4, 1e-9).unwrap(), Some(2));
            let t = f.iterate(&p.point, 2).unwrap();
            assert!(t.closed && t.minimal_period == Some(2));
        }
    }

    #[test]
    fn image_is_the_other_sheet() {
        let f = f3d();
        for (x, r) in [(-1.0, 2.0), (0.5, -3.0), (3.0, 1.0), (-2.5, -0.5)] {
            for sign in [Sign::Plus, Sign::Minus] {
                let q = f.apply(&lv_period2_param(x, r, sign).unwrap().point).unwrap();
                let want = lv_period2_param(x / (x - 1.0), r, sign.flip()).unwrap().point;
                assert!(q.chordal(&want) < 1e-9, "x={x} r={r} {sign:?}");
            }
        }
        // at the fixed point x = 2 this reads as a swap of the last two coordinates
        let p = lv_period2_param(2.0, 0.5, Sign::Plus).unwrap().point;
        let q = f.apply(&p).unwrap();
        assert!(q.coord(1).chordal(&p.coord(2)) < 1e-9 && q.coord(2).chordal(&p.coord(1)) < 1e-9);
    }

    #[test]
    fn degenerate_x() {
        assert_eq!(lv_period2_param(0.0, 1.0, Sign::Plus), Err(LvError::DegenerateX(0.0)));
        assert_eq!(lv_period2_param(1.0, 1.0, Sign::Minus), Err(LvError::DegenerateX(1.0)));
    }

    #[test]
    fn recurrence_is_an_involution() {
        let x = |v: f64| ExtendedComplex::real(v);
        assert!(lv_recurrence(x(3.0)).chordal(&x(1.5)) < 1e-15);
        assert!(lv_recurrence(x(1.5)).chordal(&x(3.0)) < 1e-15);
        assert_eq!(lv_recurrence(x(0.0)), x(0.0));
        assert!(lv_recurrence(x(2.0)).chordal(&x(2.0)) < 1e-15);
        assert_eq!(lv_recurrence(x(1.0)), ExtendedComplex::Infinity);
        assert!(lv_recurrence(ExtendedComplex::Infinity).chordal(&x(1.0)) < 1e-15);
        for i in 0..200 {
            let v = ExtendedComplex::complex(-5.0 + 0.05 * i as f64, 0.3 * (i % 7) as f64 - 1.0);
            assert!(lv_recurrence(lv_recurrence(v)).chordal(&v) < 1e-10);
            let w = lv_diagonal_coordinate(v);
            let lhs = lv_diagonal_coordinate(lv_recurrence(v));
            let rhs = match w {
                ExtendedComplex::Finite(z) => ExtendedComplex::from(-z),
                ExtendedComplex::Infinity => ExtendedComplex::Infinity,
            };
            assert!(lhs.chordal(&rhs) < 1e-10);
            assert!(lv_from_diagonal(w).chordal(&v) < 1e-10);
        }
    }

    #[test]
    fn decomposition_pairs_components() {
        for r in [-2.0, 0.5, 3.0] {
            for sign in [Sign::Plus, Sign::Minus] {
                let d = lv_decompose_period2(r, sign).unwrap();
                assert_eq!(d.sigma, vec![1, 0, 3, 2]);
                assert_eq!(d.tilings(), 2);
                assert_eq!(d.boundaries(), vec![0.0, 1.0, f64::INFINITY]);
            }
        }
        // x = 1/2 goes to x = -1
        let d = lv_decompose_period2(1.0, Sign::Plus).unwrap();
        assert_eq!(d.classify(0.5), 1);
        assert_eq!(d.classify(0.5 / (0.5 - 1.0)), 0);
    }

    #[test]
    fn boundaries_do_not_depend_on_level() {
        for r in [-5, -3, -2, 1, 2, 5] {
            let b = lv_boundaries_empirical(r as f64, Sign::Plus, 2048).unwrap();
            assert_eq!(b.len(), 3, "r={r}: {b:?}");
            assert_abs_diff_eq!(b[0], 0.0, epsilon = 1e-6);
            assert_abs_diff_eq!(b[1], 1.0, epsilon = 1e-6);
            assert!(b[2].is_infinite());
        }
        let b = lv_recurrence_boundaries(2048).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(lv_boundaries_empirical(-1.0, Sign::Plus, 64), Err(LvError::IndeterminateLevel(-1.0)));
        // on r = 0 the x = 0 cut is not a pole of any coordinate
        assert_eq!(lv_boundaries_empirical(0.0, Sign::Plus, 2048).unwrap().len(), 2);
        assert_eq!(lv_decompose_period2(-1.0, Sign::Minus), Err(LvError::IndeterminateLevel(-1.0)));
    }

    #[test]
    fn stripes_respect_the_pairing() {
        let mut spec = RasterSpec::new(Window::square(4.0), 100, 100);
        spec.exec = Execution::Sequential;
        let (raster, rep) = lv_stripe_raster(&integer_levels(-3, 3), &spec).unwrap();
        assert!(raster.component_classes().len() >= 3);
        assert!(rep.checked > 50);
        assert!(rep.fraction() >= 0.999, "{rep:?}");
        assert!(raster.extra.is_some());
    }
}
