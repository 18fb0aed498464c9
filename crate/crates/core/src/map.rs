//! Rational maps on (ℂP¹)^d: evaluation, iteration, invariants and periods.

use std::fmt;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::Expr;
use crate::ext::ExtendedComplex;
use crate::poly::{eval_ratio, CompiledPoly, Poly, MAX_VARS, VAR_NAMES};

/// Default tolerance for point comparisons (chordal metric).
pub const TOL_EQ: f64 = 1e-9;
/// Default relative tolerance for invariant conservation.
pub const TOL_INV: f64 = 1e-10;

const INVARIANCE_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("point has dimension {got}, map expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("indeterminate value (0/0) in coordinate {coord} at step {step}")]
    Indeterminate { step: usize, coord: usize },
    #[error("coordinate {0} is at infinity")]
    InfiniteCoordinate(usize),
    #[error("map of dimension {dim} needs {dim} components, got {got}")]
    ComponentCount { dim: usize, got: usize },
    #[error("dimension must be 1, 2 or 3, got {0}")]
    BadDimension(usize),
    #[error("component {component} references variable {var} outside dimension {dim}")]
    UndeclaredVariable { component: String, var: &'static str, dim: usize },
    #[error("invariant `{name}` is not conserved: |I(F(p)) - I(p)| = {error:e} at p = {point}")]
    NotInvariant { name: String, error: f64, point: String },
    #[error("invariant `{0}` must be a polynomial")]
    NonPolynomialInvariant(String),
    #[error("could not find enough regular sample points to check invariants")]
    NoSamplePoints,
    #[error("iteration count must be at least 1")]
    ZeroSteps,
}

/// A point of (ℂP¹)^d; each coordinate is compactified separately.
#[derive(Debug, Clone, PartialEq)]
pub struct PointD(Vec<ExtendedComplex>);

impl PointD {
    pub fn new(coords: Vec<ExtendedComplex>) -> Self {
        assert!((1..=MAX_VARS).contains(&coords.len()), "points have 1 to {MAX_VARS} coordinates");
        PointD(coords)
    }

    pub fn real(coords: &[f64]) -> Self {
        Self::new(coords.iter().map(|&x| ExtendedComplex::real(x)).collect())
    }

    pub fn complex(coords: &[Complex64]) -> Self {
        Self::new(coords.iter().map(|&z| ExtendedComplex::from(z)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[ExtendedComplex] {
        &self.0
    }

    pub fn coord(&self, i: usize) -> ExtendedComplex {
        self.0[i]
    }

    /// Finite coordinates, or the index of the first one at ∞.
    pub fn finite_coords(&self) -> Result<Vec<Complex64>, MapError> {
        self.0.iter().enumerate().map(|(i, c)| c.finite().ok_or(MapError::InfiniteCoordinate(i))).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| !c.is_infinite())
    }

    /// Largest coordinate-wise chordal distance.
    pub fn chordal(&self, other: &PointD) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.chordal(b)).fold(0.0, f64::max)
    }
}

impl fmt::Display for PointD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// One coordinate function `numerator / denominator` of a map.
#[derive(Debug, Clone)]
pub struct Component {
    numerator: Expr,
    denominator: Option<Expr>,
    num_poly: Poly,
    den_poly: Poly,
    num: CompiledPoly,
    den: CompiledPoly,
}

impl Component {
    /// Builds a component from an arbitrary expression, clearing nested
    /// fractions.
    pub fn from_expr(e: &Expr) -> Self {
        let (n, d) = e.clear_fractions();
        Self::from_parts(n, d)
    }

    pub fn from_parts(numerator: Expr, denominator: Option<Expr>) -> Self {
        let num_poly = numerator.to_poly();
        let den_poly = denominator.as_ref().map_or_else(Poly::one, Expr::to_poly);
        Component { num: num_poly.compile(), den: den_poly.compile(), numerator, denominator, num_poly, den_poly }
    }

    pub fn numerator(&self) -> &Expr {
        &self.numerator
    }

    pub fn denominator(&self) -> Option<&Expr> {
        self.denominator.as_ref()
    }

    pub fn numerator_poly(&self) -> &Poly {
        &self.num_poly
    }

    pub fn denominator_poly(&self) -> &Poly {
        &self.den_poly
    }

    pub fn eval(&self, p: &[ExtendedComplex]) -> Option<ExtendedComplex> {
        eval_ratio(&self.num, &self.den, p)
    }

    /// The denominator at a finite point.
    pub fn eval_denominator(&self, p: &[Complex64]) -> Complex64 {
        self.den.eval(p)
    }

    pub fn eval_denominator_real(&self, p: &[f64]) -> f64 {
        self.den.eval_real(p)
    }

    fn vars_used(&self) -> usize {
        self.num_poly.vars_used().max(self.den_poly.vars_used())
    }

    /// Numerator and denominator scaled so the denominator's leading
    /// coefficient is 1.
    pub fn canonical(&self) -> (Poly, Poly) {
        let lc = self.den_poly.leading_coefficient().cloned().unwrap_or_else(BigRational::one);
        let inv = lc.recip();
        (self.num_poly.scale(&inv), self.den_poly.scale(&inv))
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.denominator {
            None => write!(f, "{}", self.numerator),
            Some(d) => {
                if matches!(self.numerator, Expr::Add(..) | Expr::Sub(..)) {
                    write!(f, "({})", self.numerator)?;
                } else {
                    write!(f, "{}", self.numerator)?;
                }
                match d {
                    Expr::Num(_) | Expr::Var(_) | Expr::Pow(..) => write!(f, "/{d}"),
                    _ => write!(f, "/({d})"),
                }
            }
        }
    }
}

/// A polynomial function conserved by the map.
#[derive(Debug, Clone)]
pub struct Invariant {
    name: String,
    expr: Expr,
    poly: Poly,
    compiled: CompiledPoly,
}

impl Invariant {
    pub fn new(name: impl Into<String>, expr: Expr) -> Result<Self, MapError> {
        let name = name.into();
        let (n, d) = expr.clear_fractions();
        let poly = match d {
            None => n.to_poly(),
            Some(d) => match d.to_poly().as_constant() {
                Some(c) if c != BigRational::from_integer(0.into()) => n.to_poly().scale(&c.recip()),
                _ => return Err(MapError::NonPolynomialInvariant(name)),
            },
        };
        Ok(Invariant { compiled: poly.compile(), name, expr, poly })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn eval(&self, p: &[Complex64]) -> Complex64 {
        self.compiled.eval(p)
    }
}

/// A d-dimensional rational map with declared invariants.
///
/// Construction checks every invariant numerically at random regular points.
#[derive(Debug, Clone)]
pub struct RationalMapSpec {
    dim: usize,
    components: Vec<Component>,
    invariants: Vec<Invariant>,
}

impl RationalMapSpec {
    pub fn new(dim: usize, components: Vec<Component>, invariants: Vec<Invariant>) -> Result<Self, MapError> {
        if !(1..=MAX_VARS).contains(&dim) {
            return Err(MapError::BadDimension(dim));
        }
        if components.len() != dim {
            return Err(MapError::ComponentCount { dim, got: components.len() });
        }
        for (i, c) in components.iter().enumerate() {
            if c.vars_used() > dim {
                return Err(MapError::UndeclaredVariable {
                    component: format!("{}'", VAR_NAMES[i]),
                    var: VAR_NAMES[c.vars_used() - 1],
                    dim,
                });
            }
        }
        for inv in &invariants {
            if inv.poly.vars_used() > dim {
                return Err(MapError::UndeclaredVariable {
                    component: inv.name.clone(),
                    var: VAR_NAMES[inv.poly.vars_used() - 1],
                    dim,
                });
            }
        }
        let spec = RationalMapSpec { dim, components, invariants };
        spec.check_invariants(INVARIANCE_SAMPLES, TOL_INV)?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn invariants(&self) -> &[Invariant] {
        &self.invariants
    }

    /// Applies the map once.
    pub fn apply(&self, p: &PointD) -> Result<PointD, MapError> {
        self.apply_step(p, 1)
    }

    fn apply_step(&self, p: &PointD, step: usize) -> Result<PointD, MapError> {
        if p.dim() != self.dim {
            return Err(MapError::DimensionMismatch { expected: self.dim, got: p.dim() });
        }
        let coords = self
            .components
            .iter()
            .enumerate()
            .map(|(coord, c)| c.eval(p.coords()).ok_or(MapError::Indeterminate { step, coord }))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PointD(coords))
    }

    /// The orbit `p, F(p), …, F^k(p)`.
    pub fn iterate(&self, p: &PointD, k: usize) -> Result<OrbitTrace, MapError> {
        if k == 0 {
            return Err(MapError::ZeroSteps);
        }
        let mut points = Vec::with_capacity(k + 1);
        points.push(p.clone());
        for step in 1..=k {
            let next = self.apply_step(&points[step - 1], step)?;
            points.push(next);
        }
        Ok(OrbitTrace::from_points(points, TOL_EQ))
    }

    /// Values of the declared invariants at a finite point.
    pub fn invariant_values(&self, p: &PointD) -> Result<Vec<Complex64>, MapError> {
        if p.dim() != self.dim {
            return Err(MapError::DimensionMismatch { expected: self.dim, got: p.dim() });
        }
        let z = p.finite_coords()?;
        Ok(self.invariants.iter().map(|inv| inv.eval(&z)).collect())
    }

    /// Smallest `n <= n_max` with `F^n(p)` within `tol` of `p` in the
    /// coordinate-wise chordal metric.
    pub fn detect_period(&self, p: &PointD, n_max: usize, tol: f64) -> Result<Option<usize>, MapError> {
        let mut q = p.clone();
        for n in 1..=n_max {
            q = self.apply_step(&q, n)?;
            if q.chordal(p) < tol {
                return Ok(Some(n));
            }
        }
        Ok(None)
    }

    /// Checks conservation of every invariant at `samples` seeded random
    /// points, skipping points near a pole.
    pub fn check_invariants(&self, samples: usize, tol: f64) -> Result<(), MapError> {
        if self.invariants.is_empty() {
            return Ok(());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x1e55_0f1a);
        let mut checked = 0;
        let mut attempts = 0;
        while checked < samples {
            attempts += 1;
            if attempts > samples * 100 {
                return Err(MapError::NoSamplePoints);
            }
            let z: Vec<Complex64> = (0..self.dim)
                .map(|_| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
                .collect();
            if self.components.iter().any(|c| c.eval_denominator(&z).norm() < 1e-2) {
                continue;
            }
            let p = PointD::complex(&z);
            let Ok(q) = self.apply(&p) else { continue };
            let Ok(w) = q.finite_coords() else { continue };
            if w.iter().any(|c| c.norm() > 1e6) {
                continue;
            }
            for inv in &self.invariants {
                let a = inv.eval(&z);
                let b = inv.eval(&w);
                let scale = a.norm().max(b.norm()).max(1.0);
                let err = (a - b).norm() / scale;
                if !(err <= tol) {
                    return Err(MapError::NotInvariant { name: inv.name.clone(), error: err, point: p.to_string() });
                }
            }
            checked += 1;
        }
        Ok(())
    }
}

impl PartialEq for RationalMapSpec {
    /// Equal when the normalized polynomials agree; expression shape and
    /// overall scale of a numerator/denominator pair are ignored.
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.components.len() == other.components.len()
            && self.components.iter().zip(&other.components).all(|(a, b)| a.canonical() == b.canonical())
            && self.invariants.len() == other.invariants.len()
            && self.invariants.iter().zip(&other.invariants).all(|(a, b)| a.name == b.name && a.poly == b.poly)
    }
}

/// A finite orbit segment.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitTrace {
    pub points: Vec<PointD>,
    /// The last point returns to the first within tolerance.
    pub closed: bool,
    /// First return time to the starting point, if any.
    pub minimal_period: Option<usize>,
}

impl OrbitTrace {
    pub fn from_points(points: Vec<PointD>, tol: f64) -> Self {
        let first = &points[0];
        let minimal_period = points.iter().enumerate().skip(1).find(|(_, q)| q.chordal(first) < tol).map(|(i, _)| i);
        let closed = points.len() > 1 && points[points.len() - 1].chordal(first) < tol;
        OrbitTrace { points, closed, minimal_period }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;

    fn close(a: &PointD, b: &PointD) -> bool {
        a.chordal(b) < 1e-12
    }

    #[test]
    fn fixed_line_of_the_plane_map() {
        let f = builtin::f2d();
        let p = PointD::real(&[0.3, 0.3]);
        assert!(close(&f.apply(&p).unwrap(), &p));
        let trace = f.iterate(&p, 5).unwrap();
        assert!(trace.points.iter().all(|q| close(q, &p)));
        assert_eq!(trace.minimal_period, Some(1));
        assert!(trace.closed);
    }

    #[test]
    fn direct_evaluation() {
        let f = builtin::f2d();
        let q = f.apply(&PointD::real(&[2.0, -1.5])).unwrap();
        assert!(close(&q, &PointD::real(&[-5.0, 0.6])));
    }

    #[test]
    fn pole_is_handled() {
        let f = builtin::f2d();
        let q = f.apply(&PointD::real(&[1.0, 2.0])).unwrap();
        assert!(q.coord(0).is_infinite());
        assert!(close(&q, &PointD::new(vec![ExtendedComplex::Infinity, ExtendedComplex::ZERO])));
    }

    #[test]
    fn period_three_orbit_closes() {
        let f = builtin::f2d();
        let trace = f.iterate(&PointD::real(&[2.0, -1.5]), 3).unwrap();
        let expected = [[2.0, -1.5], [-5.0, 0.6], [-1.0 / 3.0, 9.0], [2.0, -1.5]];
        for (q, e) in trace.points.iter().zip(expected) {
            assert!(q.chordal(&PointD::real(&e)) < 1e-12, "{q}");
        }
        assert!(trace.closed);
        assert_eq!(trace.minimal_period, Some(3));
    }

    #[test]
    fn invariant_values_examples() {
        let f = builtin::f2d();
        let v = f.invariant_values(&PointD::real(&[2.0, -1.5])).unwrap();
        assert!((v[0] - Complex64::new(-3.0, 0.0)).norm() < 1e-15);
        let g = builtin::f3d();
        let v = g.invariant_values(&PointD::real(&[1.0, 1.0, 1.0])).unwrap();
        assert_eq!(v, vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        assert_eq!(
            f.invariant_values(&PointD::new(vec![ExtendedComplex::Infinity, ExtendedComplex::ONE])),
            Err(MapError::InfiniteCoordinate(0))
        );
    }

    #[test]
    fn detect_period_examples() {
        let f = builtin::f2d();
        assert_eq!(f.detect_period(&PointD::real(&[2.0, -1.5]), 10, 1e-9), Ok(Some(3)));
        assert_eq!(f.detect_period(&PointD::real(&[0.7, 0.7]), 10, 1e-9), Ok(Some(1)));
        assert_eq!(f.detect_period(&PointD::real(&[0.37, -1.0 / 0.37]), 10, 1e-9), Ok(Some(4)));
    }

    #[test]
    fn indeterminate_step_is_reported() {
        let f = builtin::f2d();
        // (1, 1) is 0/0 in both coordinates
        assert_eq!(f.apply(&PointD::real(&[1.0, 1.0])), Err(MapError::Indeterminate { step: 1, coord: 0 }));
        // the pole (inf, 0) reached from (1, -3) is indeterminate one step later
        let err = f.iterate(&PointD::real(&[1.0, -3.0]), 3).unwrap_err();
        assert!(matches!(err, MapError::Indeterminate { step: 2, .. }), "{err:?}");
    }

    #[test]
    fn dimension_is_checked() {
        let f = builtin::f2d();
        assert_eq!(f.apply(&PointD::real(&[1.0, 2.0, 3.0])), Err(MapError::DimensionMismatch { expected: 2, got: 3 }));
        assert_eq!(f.iterate(&PointD::real(&[0.5, 0.5]), 0), Err(MapError::ZeroSteps));
    }
}
