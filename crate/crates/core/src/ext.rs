//! Points of the complex projective line.

use std::fmt;

use num_complex::Complex64;

/// A value on ℂ ∪ {∞}.
///
/// Finite values never carry NaN components; constructors reject them so that
/// an indeterminate evaluation can only surface as an error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedComplex {
    Finite(Complex64),
    Infinity,
}

pub use ExtendedComplex::Infinity;

impl ExtendedComplex {
    pub const ZERO: Self = ExtendedComplex::Finite(Complex64::new(0.0, 0.0));
    pub const ONE: Self = ExtendedComplex::Finite(Complex64::new(1.0, 0.0));

    /// Builds a value from a complex number. Components that overflowed to
    /// ±inf collapse onto the point at infinity; NaN yields `None`.
    pub fn new(z: Complex64) -> Option<Self> {
        if z.re.is_nan() || z.im.is_nan() {
            None
        } else if z.re.is_infinite() || z.im.is_infinite() {
            Some(Infinity)
        } else {
            Some(ExtendedComplex::Finite(z))
        }
    }

    pub fn real(x: f64) -> Self {
        if x.is_infinite() {
            Infinity
        } else {
            assert!(!x.is_nan(), "NaN is not a point of the projective line");
            ExtendedComplex::Finite(Complex64::new(x, 0.0))
        }
    }

    pub fn complex(re: f64, im: f64) -> Self {
        Self::new(Complex64::new(re, im)).expect("NaN is not a point of the projective line")
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Infinity)
    }

    pub fn finite(&self) -> Option<Complex64> {
        match *self {
            ExtendedComplex::Finite(z) => Some(z),
            Infinity => None,
        }
    }

    /// Real part as an extended real; ∞ maps to `f64::INFINITY`.
    pub fn re(&self) -> f64 {
        match *self {
            ExtendedComplex::Finite(z) => z.re,
            Infinity => f64::INFINITY,
        }
    }

    /// Chordal distance on the Riemann sphere (diameter 2).
    pub fn chordal(&self, other: &Self) -> f64 {
        match (*self, *other) {
            (Infinity, Infinity) => 0.0,
            (ExtendedComplex::Finite(z), Infinity) | (Infinity, ExtendedComplex::Finite(z)) => 2.0 / sphere_radius(z),
            (ExtendedComplex::Finite(z), ExtendedComplex::Finite(w)) => {
                let d = (z - w).norm();
                if d == 0.0 {
                    return 0.0;
                }
                (2.0 * d / sphere_radius(z) / sphere_radius(w)).min(2.0)
            }
        }
    }

    /// Ratio `num / den` on the projective line.
    ///
    /// Returns `None` for 0/0 and ∞/∞, which have no well-defined value.
    pub fn ratio(num: Self, den: Self) -> Option<Self> {
        match (num, den) {
            (Infinity, Infinity) => None,
            (Infinity, ExtendedComplex::Finite(_)) => Some(Infinity),
            (ExtendedComplex::Finite(_), Infinity) => Some(Self::ZERO),
            (ExtendedComplex::Finite(n), ExtendedComplex::Finite(d)) => {
                if d == Complex64::new(0.0, 0.0) {
                    if n == Complex64::new(0.0, 0.0) {
                        None
                    } else {
                        Some(Infinity)
                    }
                } else {
                    Self::new(n / d)
                }
            }
        }
    }
}

impl From<Complex64> for ExtendedComplex {
    fn from(z: Complex64) -> Self {
        Self::new(z).expect("NaN is not a point of the projective line")
    }
}

impl From<f64> for ExtendedComplex {
    fn from(x: f64) -> Self {
        Self::real(x)
    }
}

impl fmt::Display for ExtendedComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Infinity => write!(f, "inf"),
            ExtendedComplex::Finite(z) if z.im == 0.0 => write!(f, "{}", z.re),
            ExtendedComplex::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
        }
    }
}

// sqrt(1 + |z|^2) without overflow for huge moduli
fn sphere_radius(z: Complex64) -> f64 {
    let n = z.norm();
    if n <= 1.0 {
        (1.0 + n * n).sqrt()
    } else {
        n * (1.0 + 1.0 / (n * n)).sqrt()
    }
}

/// Principal square root with the sign convention √(−a) = +i√a for a > 0,
/// including negative reals that carry a signed-zero imaginary part.
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    let z = if z.im == 0.0 { Complex64::new(z.re, 0.0) } else { z };
    z.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_is_rejected() {
        assert!(ExtendedComplex::new(Complex64::new(f64::NAN, 0.0)).is_none());
        assert_eq!(ExtendedComplex::new(Complex64::new(f64::INFINITY, 1.0)), Some(Infinity));
    }

    #[test]
    fn chordal_metric_basics() {
        let z = ExtendedComplex::real(0.0);
        assert!((z.chordal(&Infinity) - 2.0).abs() < 1e-15);
        assert_eq!(Infinity.chordal(&Infinity), 0.0);
        let big = ExtendedComplex::real(1e200);
        assert!(big.chordal(&Infinity) < 1e-199);
        let a = ExtendedComplex::real(1.0);
        let b = ExtendedComplex::real(-1.0);
        assert!((a.chordal(&b) - 2.0).abs() < 1e-15);
        // symmetric and a metric on a few samples
        let c = ExtendedComplex::complex(0.3, -2.0);
        assert!((a.chordal(&c) - c.chordal(&a)).abs() < 1e-15);
        assert!(a.chordal(&c) <= a.chordal(&b) + b.chordal(&c) + 1e-15);
    }

    #[test]
    fn ratio_rules() {
        let zero = ExtendedComplex::ZERO;
        let one = ExtendedComplex::ONE;
        assert_eq!(ExtendedComplex::ratio(zero, zero), None);
        assert_eq!(ExtendedComplex::ratio(one, zero), Some(Infinity));
        assert_eq!(ExtendedComplex::ratio(one, Infinity), Some(zero));
        assert_eq!(ExtendedComplex::ratio(Infinity, Infinity), None);
    }

    #[test]
    fn sqrt_branch_on_negative_axis() {
        let s = principal_sqrt(Complex64::new(-3.0, -0.0));
        assert!((s.im - 3f64.sqrt()).abs() < 1e-15 && s.re.abs() < 1e-15);
    }
}
