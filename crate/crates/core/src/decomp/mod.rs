//! Splitting a period-`n` variety into components that the map permutes.
//!
//! The variety is cut along the x-direction into half-open intervals of the
//! real projective line. Boundaries come either from the closed-form values
//! `c_m` or from an orbit-signature scan that works for any map; the cycle
//! permutation is read off by pushing one interior point of each interval
//! forward once.

mod denoms;
mod empirical;
mod raster;

pub use denoms::{denominator_zero_curves, pole_crossings, DenominatorZeroSet, PoleCrossings};
pub use empirical::{boundaries_empirical, Coords, ScanSpec};
pub use raster::{
    render, successor_check, tiling_2d, Branch2DTarget, CellRecord, LevelTarget, RasterSpec, SuccessorReport,
    TilingRaster, Window,
};

use std::fmt;

use thiserror::Error;

use crate::builtin::f2d;
use crate::ext::ExtendedComplex;
use crate::ivpp2d::{IvppBranch2D, IvppError};
use crate::map::{MapError, OrbitTrace, PointD, RationalMapSpec, TOL_EQ};
use crate::mobius::boundary_c;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecompError {
    #[error("orbit reaches a pole at step {step}")]
    PoleHit { step: usize },
    #[error("boundary c_{m} = {value} is not real")]
    NonRealBoundary { m: u32, value: String },
    #[error("only {closed} of {sampled} sampled points return after {n} steps; wrong branch or period")]
    NoClosure { n: u32, closed: usize, sampled: usize },
    #[error("sigma {sigma:?} is not a single {n}-cycle")]
    NotACycle { n: u32, sigma: Vec<usize> },
    #[error("{0}")]
    Ivpp(#[from] IvppError),
    #[error("{0}")]
    Map(#[from] MapError),
}

/// Which end of each interval is closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// `[a, b)`; the point at infinity joins the piece that starts at −∞.
    LeftClosed,
    /// `(a, b]`; the point at infinity joins the piece that ends at +∞.
    RightClosed,
}

impl Convention {
    pub fn name(self) -> &'static str {
        match self {
            Convention::LeftClosed => "left-closed",
            Convention::RightClosed => "right-closed",
        }
    }
}

/// One component: an x-interval, optionally restricted to one sheet of a
/// two-valued parametrization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub sheet: Option<i8>,
}

impl Piece {
    /// A point strictly inside the interval.
    pub fn interior_point(&self) -> f64 {
        self.probe(0.5)
    }

    /// A point strictly inside the interval, `t ∈ (0, 1)` of the way along
    /// (unbounded pieces use a unit-length stretch next to their end).
    pub fn probe(&self, t: f64) -> f64 {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => self.lo + t * (self.hi - self.lo),
            (false, true) => self.hi - 2.0 * t,
            (true, false) => self.lo + 2.0 * t,
            (false, false) => 4.0 * t - 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentDecomposition {
    pub period: u32,
    pub branch: String,
    /// Invariant level of the branch, when it is a single number.
    pub level: Option<f64>,
    pub convention: Convention,
    /// Finite boundaries in increasing order; the point at infinity is
    /// always a boundary as well.
    pub cuts: Vec<f64>,
    pub components: Vec<Piece>,
    /// `sigma[i]` is the index of the component containing `F(C_i)`.
    pub sigma: Vec<usize>,
}

impl ComponentDecomposition {
    /// Boundaries as extended reals with the point at infinity placed at the
    /// open end of the convention.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut out = self.cuts.clone();
        match self.convention {
            Convention::LeftClosed => out.insert(0, f64::NEG_INFINITY),
            Convention::RightClosed => out.push(f64::INFINITY),
        }
        out
    }

    /// The intervals between consecutive cuts, ignoring sheets.
    pub fn intervals(&self) -> Vec<(f64, f64)> {
        intervals_from_cuts(&self.cuts)
    }

    /// Index of the interval containing `x`; ±∞ both denote the point at
    /// infinity.
    pub fn classify(&self, x: f64) -> usize {
        classify_cuts(&self.cuts, self.convention, x)
    }

    /// Number of distinct tilings, i.e. cycles of `sigma`.
    pub fn tilings(&self) -> usize {
        cycles(&self.sigma).len()
    }

    /// Checks that sigma is a permutation whose cycles all have length `period`.
    pub fn validate(&self) -> Result<(), DecompError> {
        let bad = || DecompError::NotACycle { n: self.period, sigma: self.sigma.clone() };
        if self.sigma.len() != self.components.len() || !is_permutation(&self.sigma) {
            return Err(bad());
        }
        if cycles(&self.sigma).iter().any(|c| c.len() != self.period as usize) {
            return Err(bad());
        }
        Ok(())
    }

    /// `sigma` as 1-based cycles, e.g. `(1 3 5 2 4)`.
    pub fn sigma_cycles(&self) -> String {
        cycles(&self.sigma)
            .iter()
            .map(|c| format!("({})", c.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ")))
            .collect()
    }
}

impl fmt::Display for ComponentDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "period {} branch {} ({})", self.period, self.branch, self.convention.name())?;
        for (i, p) in self.components.iter().enumerate() {
            let (open, close) = match self.convention {
                Convention::LeftClosed => ('[', ')'),
                Convention::RightClosed => ('(', ']'),
            };
            let open = if p.lo.is_infinite() { '(' } else { open };
            let close = if p.hi.is_infinite() { ')' } else { close };
            let sheet = match p.sheet {
                Some(s) if s > 0 => " sheet +",
                Some(_) => " sheet -",
                None => "",
            };
            writeln!(f, "  C{} = {open}{}, {}{close}{sheet} -> C{}", i + 1, p.lo, p.hi, self.sigma[i] + 1)?;
        }
        write!(f, "  sigma = {}", self.sigma_cycles())
    }
}

pub(crate) fn intervals_from_cuts(cuts: &[f64]) -> Vec<(f64, f64)> {
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend_from_slice(cuts);
    edges.push(f64::INFINITY);
    edges.windows(2).map(|w| (w[0], w[1])).collect()
}

const CUT_TOL: f64 = 1e-12;

pub fn classify_cuts(cuts: &[f64], convention: Convention, x: f64) -> usize {
    if x.is_infinite() {
        return match convention {
            Convention::LeftClosed => 0,
            Convention::RightClosed => cuts.len(),
        };
    }
    // points within rounding of a cut belong to its closed side
    let eps = CUT_TOL * x.abs().max(1.0);
    match convention {
        Convention::LeftClosed => cuts.partition_point(|&c| c <= x + eps),
        Convention::RightClosed => cuts.partition_point(|&c| c < x - eps),
    }
}

fn is_permutation(sigma: &[usize]) -> bool {
    let mut seen = vec![false; sigma.len()];
    for &j in sigma {
        if j >= sigma.len() || seen[j] {
            return false;
        }
        seen[j] = true;
    }
    true
}

/// Cycles of a permutation, each starting at its smallest element.
pub fn cycles(sigma: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; sigma.len()];
    let mut out = Vec::new();
    for start in 0..sigma.len() {
        if seen[start] {
            continue;
        }
        let mut c = Vec::new();
        let mut i = start;
        while i < sigma.len() && !seen[i] {
            seen[i] = true;
            c.push(i);
            i = sigma[i];
        }
        out.push(c);
    }
    out
}

/// Real part of a point on the projective line, `None` if it is not real
/// within `tol` (relative to its size).
fn real_value(v: ExtendedComplex, tol: f64) -> Option<f64> {
    match v {
        ExtendedComplex::Infinity => Some(f64::INFINITY),
        ExtendedComplex::Finite(z) => (z.im.abs() <= tol * z.re.abs().max(1.0)).then_some(z.re),
    }
}

/// Sorts, replaces runs of values closer than `tol` by their mean, and puts
/// the point at infinity last.
pub(crate) fn normalize_boundaries(mut xs: Vec<f64>, tol: f64) -> Vec<f64> {
    let has_inf = xs.iter().any(|x| x.is_infinite());
    xs.retain(|x| x.is_finite());
    xs.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(xs.len() + 1);
    let mut run: Vec<f64> = Vec::new();
    for x in xs {
        if let Some(&l) = run.last() {
            if x - l > tol {
                out.push(run.iter().sum::<f64>() / run.len() as f64);
                run.clear();
            }
        }
        run.push(x);
    }
    if !run.is_empty() {
        out.push(run.iter().sum::<f64>() / run.len() as f64);
    }
    if has_inf {
        out.push(f64::INFINITY);
    }
    out
}

/// The `n`-step orbit of `(x0, ρ/x0)` under the plane map.
pub fn trace_flow(branch: &IvppBranch2D, x0: f64, n: usize) -> Result<OrbitTrace, DecompError> {
    let map = f2d();
    let mut points = vec![branch.point_real(x0)];
    if !points[0].is_finite() {
        return Err(DecompError::PoleHit { step: 0 });
    }
    for step in 1..=n {
        let next = map.apply(&points[step - 1]).map_err(|_| DecompError::PoleHit { step })?;
        if !next.is_finite() {
            return Err(DecompError::PoleHit { step });
        }
        points.push(next);
    }
    Ok(OrbitTrace::from_points(points, TOL_EQ))
}

/// The closed-form boundaries `c_m`, `m = 0..n`, for the branch's root of
/// unity, sorted with the point at infinity last.
pub fn boundaries_analytic(branch: &IvppBranch2D) -> Result<Vec<f64>, DecompError> {
    let mut xs = Vec::with_capacity(branch.n as usize);
    for m in 0..branch.n {
        let c = boundary_c(branch.n, m, branch.m);
        let x = real_value(c, 1e-9).ok_or_else(|| DecompError::NonRealBoundary { m, value: c.to_string() })?;
        xs.push(x);
    }
    Ok(normalize_boundaries(xs, 1e-12))
}

/// How boundaries are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Analytic,
    Empirical(ScanSpec),
}

const PROBES: [f64; 4] = [0.5, 0.381_966, 0.618_034, 0.25];

/// Builds the decomposition of `map` from its finite cuts and computes sigma
/// from one interior point per interval.
pub fn decompose_with(
    map: &RationalMapSpec,
    param: &(dyn Fn(f64) -> PointD + Sync),
    period: u32,
    branch: String,
    level: Option<f64>,
    convention: Convention,
    cuts: Vec<f64>,
) -> Result<ComponentDecomposition, DecompError> {
    let components: Vec<Piece> =
        intervals_from_cuts(&cuts).into_iter().map(|(lo, hi)| Piece { lo, hi, sheet: None }).collect();
    let mut sigma = Vec::with_capacity(components.len());
    for piece in &components {
        // the midpoint can be a special point of the map (x = 0 on xy = ρ),
        // so fall back to off-centre probes
        let mut image = Err(MapError::ZeroSteps);
        for t in PROBES {
            image = map.apply(&param(piece.probe(t)));
            if image.as_ref().is_ok_and(|q| q.coord(0).finite().is_some()) {
                break;
            }
        }
        sigma.push(classify_cuts(&cuts, convention, image?.coord(0).re()));
    }
    let d = ComponentDecomposition { period, branch, level, convention, cuts, components, sigma };
    d.validate()?;
    Ok(d)
}

/// Decomposition of one branch of the plane map.
pub fn decompose(branch: &IvppBranch2D, method: Method) -> Result<ComponentDecomposition, DecompError> {
    let map = f2d();
    let bounds = match method {
        Method::Analytic => boundaries_analytic(branch)?,
        Method::Empirical(scan) => {
            let b = *branch;
            boundaries_empirical(&map, &move |x| b.point_real(x), branch.n, &scan)?
        }
    };
    let cuts: Vec<f64> = bounds.into_iter().filter(|x| x.is_finite()).collect();
    let b = *branch;
    let d = decompose_with(
        &map,
        &move |x| b.point_real(x),
        branch.n,
        branch.label(),
        Some(branch.rho),
        Convention::LeftClosed,
        cuts,
    )?;
    if d.components.len() != branch.n as usize {
        return Err(DecompError::NotACycle { n: branch.n, sigma: d.sigma });
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ivpp2d::branches;
    use approx::assert_abs_diff_eq;

    fn branch(n: u32, m: u32) -> IvppBranch2D {
        IvppBranch2D::new(n, m).unwrap()
    }

    fn assert_cuts(got: &[f64], want: &[f64]) {
        assert_eq!(got.len(), want.len(), "{got:?} vs {want:?}");
        for (a, b) in got.iter().zip(want) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-9);
        }
    }

    #[test]
    fn flows_close() {
        let t = trace_flow(&branch(3, 1), 2.0, 3).unwrap();
        let want = [[2.0, -1.5], [-5.0, 0.6], [-1.0 / 3.0, 9.0], [2.0, -1.5]];
        for (p, w) in t.points.iter().zip(want) {
            assert!(p.chordal(&PointD::real(&w)) < 1e-12);
        }
        assert!(t.closed);
        let t = trace_flow(&branch(4, 1), 2.0, 4).unwrap();
        assert_eq!(t.minimal_period, Some(4));
        assert!(t.points[1].chordal(&PointD::real(&[-3.0, 1.0 / 3.0])) < 1e-12);
        assert_eq!(trace_flow(&branch(3, 1), 1.0, 3), Err(DecompError::PoleHit { step: 1 }));
    }

    #[test]
    fn analytic_boundaries() {
        let b = |n, m| boundaries_analytic(&branch(n, m)).unwrap();
        let s5 = 5f64.sqrt();
        assert_cuts(&b(3, 1)[..2], &[-1.0, 1.0]);
        assert!(b(3, 1)[2].is_infinite());
        assert_cuts(&b(4, 1)[..3], &[-1.0, 0.0, 1.0]);
        assert_cuts(&b(5, 1)[..4], &[-1.0, 2.0 - s5, s5 - 2.0, 1.0]);
        assert_cuts(&b(5, 2)[..4], &[-2.0 - s5, -1.0, 1.0, 2.0 + s5]);
        assert_cuts(&b(6, 1)[..5], &[-1.0, -1.0 / 3.0, 0.0, 1.0 / 3.0, 1.0]);
    }

    #[test]
    fn cycle_permutations() {
        let sigma = |n, m| decompose(&branch(n, m), Method::Analytic).unwrap().sigma;
        assert_eq!(sigma(3, 1), vec![1, 2, 0]);
        assert_eq!(sigma(4, 1), vec![1, 2, 3, 0]);
        assert_eq!(sigma(6, 1), vec![1, 2, 3, 4, 5, 0]);
        let d = decompose(&branch(5, 2), Method::Analytic).unwrap();
        assert_eq!(d.sigma_cycles(), "(1 3 5 2 4)");
        assert_eq!(d.tilings(), 1);
    }

    #[test]
    fn classification_conventions() {
        let d = decompose(&branch(3, 1), Method::Analytic).unwrap();
        assert_eq!(d.classify(-1.0), 1);
        assert_eq!(d.classify(0.999), 1);
        assert_eq!(d.classify(1.0), 2);
        assert_eq!(d.classify(f64::INFINITY), 0);
        assert_eq!(d.classify(-7.0), 0);
        let d4 = decompose(&branch(4, 1), Method::Analytic).unwrap();
        assert_eq!(d4.classify(1.0), 3);
        assert_eq!(classify_cuts(&[0.0, 1.0], Convention::RightClosed, 1.0), 1);
        assert_eq!(classify_cuts(&[0.0, 1.0], Convention::RightClosed, f64::INFINITY), 2);
    }

    #[test]
    fn orbit_respects_sigma() {
        let map = f2d();
        for n in 3..=6 {
            for b in branches(n).unwrap() {
                let d = decompose(&b, Method::Analytic).unwrap();
                for k in 0..100 {
                    let x = -6.0 + 12.0 * (k as f64 + 0.5) / 100.0;
                    let p = b.point_real(x);
                    let Ok(q) = map.apply(&p) else { continue };
                    assert_eq!(d.classify(q.coord(0).re()), d.sigma[d.classify(x)], "n={n} x={x}");
                }
            }
        }
    }

    #[test]
    fn rejects_non_cycles() {
        let map = f2d();
        let b = branch(4, 1);
        let err = decompose_with(&map, &|x| b.point_real(x), 4, "m=1".into(), None, Convention::LeftClosed, vec![0.5]);
        assert!(matches!(err, Err(DecompError::NotACycle { .. })));
    }
}
