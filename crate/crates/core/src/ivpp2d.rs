//! Period conditions and branch parametrizations for the plane map
//! `(x, y) ↦ (x(1−y)/(1−x), y(1−x)/(1−y))`.
//!
//! On the level `xy = r` the map reduces to a Möbius transformation whose
//! multiplier is `e^{2πim/n}` exactly when `r = −tan²(πm/n)`, so each
//! admissible `m` gives one branch of the period-`n` variety.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer;
use thiserror::Error;

use crate::ext::ExtendedComplex;
use crate::map::PointD;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IvppError {
    #[error("period {n} with m = {m} has no IVPP (tan(πm/n) is a pole; period 2 has no IVPP)")]
    DegenerateBranch { n: u32, m: u32 },
    #[error("period must be at least 3, got {0}")]
    PeriodTooSmall(u32),
    #[error("branch index m = {m} is not admissible for period {n}")]
    BadBranch { n: u32, m: u32 },
}

/// `r + tan²(πm/n)`.
pub fn gamma_closed(n: u32, m: u32, r: Complex64) -> Result<Complex64, IvppError> {
    if n < 3 || m == 0 || m >= n {
        if n == 2 {
            return Err(IvppError::DegenerateBranch { n, m });
        }
        return Err(IvppError::BadBranch { n, m });
    }
    if 2 * m == n {
        return Err(IvppError::DegenerateBranch { n, m });
    }
    let t = (PI * m as f64 / n as f64).tan();
    Ok(r + t * t)
}

/// Admissible branch indices: `1 <= m < n/2` with `gcd(m, n) = 1`.
pub fn branch_indices(n: u32) -> Vec<u32> {
    (1..n).filter(|&m| 2 * m < n && m.gcd(&n) == 1).collect()
}

/// `−tan²(πm/n)`.
pub fn root(n: u32, m: u32) -> f64 {
    let t = (PI * m as f64 / n as f64).tan();
    -t * t
}

/// The period-`n` condition as a polynomial in `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaPoly {
    pub n: u32,
    /// Coefficients of the monic form, constant term first.
    pub monic: Vec<f64>,
    /// Smallest positive integer `k` such that `k` times the monic form has
    /// integer coefficients, with those coefficients.
    pub integer: Option<(u64, Vec<i64>)>,
}

impl GammaPoly {
    pub fn degree(&self) -> usize {
        self.monic.len() - 1
    }

    pub fn eval(&self, r: Complex64) -> Complex64 {
        self.monic.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * r + c)
    }
}

const MAX_INTEGER_SCALE: u64 = 10_000;
const INTEGER_TOL: f64 = 1e-7;

/// `∏ (r + tan²(πm/n))` over the admissible `m`.
pub fn gamma_poly(n: u32) -> Result<GammaPoly, IvppError> {
    if n == 2 {
        return Err(IvppError::DegenerateBranch { n, m: 1 });
    }
    if n < 3 {
        return Err(IvppError::PeriodTooSmall(n));
    }
    let mut monic = vec![1.0];
    for m in branch_indices(n) {
        let c = -root(n, m);
        // multiply by (r + c)
        let mut next = vec![0.0; monic.len() + 1];
        for (i, &a) in monic.iter().enumerate() {
            next[i] += a * c;
            next[i + 1] += a;
        }
        monic = next;
    }
    let integer = (1..=MAX_INTEGER_SCALE).find_map(|k| {
        let scaled: Vec<f64> = monic.iter().map(|&c| c * k as f64).collect();
        scaled
            .iter()
            .all(|&c| (c - c.round()).abs() < INTEGER_TOL * c.abs().max(1.0))
            .then(|| (k, scaled.iter().map(|c| c.round() as i64).collect()))
    });
    Ok(GammaPoly { n, monic, integer })
}

/// One branch of the period-`n` variety: the curve `xy = ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvppBranch2D {
    pub n: u32,
    pub m: u32,
    pub rho: f64,
}

impl IvppBranch2D {
    pub fn new(n: u32, m: u32) -> Result<Self, IvppError> {
        if n == 2 {
            return Err(IvppError::DegenerateBranch { n, m });
        }
        if n < 3 {
            return Err(IvppError::PeriodTooSmall(n));
        }
        if !branch_indices(n).contains(&m) {
            return Err(IvppError::BadBranch { n, m });
        }
        Ok(IvppBranch2D { n, m, rho: root(n, m) })
    }

    /// `(x, ρ/x)` projectively: `x = 0` gives `(0, ∞)` and `x = ∞` gives `(∞, 0)`.
    pub fn point(&self, x: ExtendedComplex) -> PointD {
        let y = match x {
            ExtendedComplex::Infinity => ExtendedComplex::ZERO,
            ExtendedComplex::Finite(z) if z == Complex64::new(0.0, 0.0) => ExtendedComplex::Infinity,
            ExtendedComplex::Finite(z) => ExtendedComplex::from(Complex64::new(self.rho, 0.0) / z),
        };
        PointD::new(vec![x, y])
    }

    pub fn point_real(&self, x: f64) -> PointD {
        self.point(ExtendedComplex::real(x))
    }

    /// Multiplier of the reduced Möbius map on this branch, `e^{2πim/n}`.
    pub fn multiplier(&self) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * self.m as f64 / self.n as f64)
    }

    /// Short label used in serialized output.
    pub fn label(&self) -> String {
        format!("m={}", self.m)
    }
}

/// All branches of period `n`, one per admissible `m`.
pub fn branches(n: u32) -> Result<Vec<IvppBranch2D>, IvppError> {
    if n == 2 {
        return Err(IvppError::DegenerateBranch { n, m: 1 });
    }
    if n < 3 {
        return Err(IvppError::PeriodTooSmall(n));
    }
    branch_indices(n).into_iter().map(|m| IvppBranch2D::new(n, m)).collect()
}

/// The branch index `m` whose level `ρ` matches `xy` within `tol`.
pub fn on_ivpp(n: u32, p: &PointD, tol: f64) -> Option<u32> {
    if p.dim() != 2 {
        return None;
    }
    let z = p.finite_coords().ok()?;
    let r = z[0] * z[1];
    branches(n).ok()?.into_iter().find(|b| (r - b.rho).norm() <= tol).map(|b| b.m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::f2d;
    use approx::assert_abs_diff_eq;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn closed_form_vanishes_on_printed_levels() {
        assert!(gamma_closed(3, 1, c(-3.0)).unwrap().norm() < 1e-12);
        assert!(gamma_closed(4, 1, c(-1.0)).unwrap().norm() < 1e-12);
        assert!(gamma_closed(6, 1, c(-1.0 / 3.0)).unwrap().norm() < 1e-12);
        assert_eq!(gamma_closed(4, 2, c(0.0)), Err(IvppError::DegenerateBranch { n: 4, m: 2 }));
        assert!(matches!(gamma_closed(2, 1, c(0.0)), Err(IvppError::DegenerateBranch { .. })));
    }

    #[test]
    fn polynomials_match_printed_forms() {
        let cases: [(u32, &[i64]); 5] =
            [(3, &[3, 1]), (4, &[1, 1]), (5, &[5, 10, 1]), (6, &[1, 3]), (7, &[7, 35, 21, 1])];
        for (n, want) in cases {
            let g = gamma_poly(n).unwrap();
            assert_eq!(g.integer.as_ref().unwrap().1, want, "n = {n}");
        }
        let g6 = gamma_poly(6).unwrap();
        assert_abs_diff_eq!(g6.monic[0], 1.0 / 3.0, epsilon = 1e-12);
        assert_eq!(g6.integer.unwrap().0, 3);
    }

    #[test]
    fn roots_agree_with_tangents() {
        for n in 3..=6 {
            let g = gamma_poly(n).unwrap();
            assert_eq!(g.degree(), branch_indices(n).len());
            for b in branches(n).unwrap() {
                assert!(g.eval(c(b.rho)).norm() < 1e-12, "n = {n}, m = {}", b.m);
            }
        }
    }

    #[test]
    fn period_five_levels() {
        let bs = branches(5).unwrap();
        assert_eq!(bs.len(), 2);
        assert_abs_diff_eq!(bs[0].rho, -5.0 + 2.0 * 5f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(bs[1].rho, -5.0 - 2.0 * 5f64.sqrt(), epsilon = 1e-12);
        assert!((bs[0].rho - bs[1].rho).abs() > 1e-6);
        assert_abs_diff_eq!(branches(4).unwrap()[0].rho, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(branches(6).unwrap()[0].rho, -1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn membership() {
        assert_eq!(on_ivpp(3, &PointD::real(&[2.0, -1.5]), 1e-9), Some(1));
        for n in 3..=6 {
            assert_eq!(on_ivpp(n, &PointD::real(&[1.0, 1.0]), 1e-9), None);
        }
        let b = IvppBranch2D::new(5, 1).unwrap();
        assert_eq!(on_ivpp(5, &b.point_real(0.7), 1e-9), Some(1));
    }

    #[test]
    fn parametrized_points_have_exact_period() {
        let f = f2d();
        for n in 3..=6 {
            for b in branches(n).unwrap() {
                for k in 0..50 {
                    let x = -3.0 + 6.0 * (k as f64 + 0.37) / 50.0;
                    let p = b.point_real(x);
                    assert_eq!(f.detect_period(&p, 12, 1e-9).unwrap(), Some(n as usize), "n={n} x={x}");
                }
            }
        }
    }
}
