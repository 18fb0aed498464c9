//! The plane map restricted to `xy = r` is the Möbius transformation
//! `x ↦ (x − r)/(1 − x)` with matrix `M = [[1, −r], [−1, 1]]`.
//!
//! `M` has eigenvalues `λ± = 1 ± √r`, and in a diagonalizing coordinate the
//! map becomes the scaling `w ↦ s w` with `s = λ₊/λ₋`. Period `n` means
//! `sⁿ = 1`, which is where the component boundaries come from.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::ext::{principal_sqrt, ExtendedComplex, Infinity};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MobiusError {
    #[error("r = 0 has no closed-form power (division by √r)")]
    ZeroR,
    #[error("matrix is singular")]
    Singular,
    #[error("period must be at least 3, got {0}")]
    PeriodTooSmall(u32),
}

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// A 2×2 matrix acting on ℂP¹ by `x ↦ (ax + b)/(cx + d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusMatrix {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl MobiusMatrix {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self, MobiusError> {
        let m = MobiusMatrix { a, b, c, d };
        let scale = [a, b, c, d].iter().map(|v| v.norm()).fold(0.0, f64::max);
        if scale == 0.0 || m.det().norm() <= 1e-14 * scale * scale {
            return Err(MobiusError::Singular);
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        MobiusMatrix { a: C1, b: C0, c: C0, d: C1 }
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn apply(&self, x: ExtendedComplex) -> ExtendedComplex {
        let (num, den) = match x {
            ExtendedComplex::Finite(z) => (self.a * z + self.b, self.c * z + self.d),
            Infinity => (self.a, self.c),
        };
        // a nonsingular matrix never produces 0/0
        ExtendedComplex::ratio(ExtendedComplex::from(num), ExtendedComplex::from(den)).unwrap_or(Infinity)
    }

    pub fn mul(&self, o: &MobiusMatrix) -> MobiusMatrix {
        MobiusMatrix {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn scale(&self, k: Complex64) -> MobiusMatrix {
        MobiusMatrix { a: self.a * k, b: self.b * k, c: self.c * k, d: self.d * k }
    }

    /// Equal up to a nonzero scalar, relative to the larger entry.
    pub fn projectively_eq(&self, o: &MobiusMatrix, tol: f64) -> bool {
        let p = [self.a, self.b, self.c, self.d];
        let q = [o.a, o.b, o.c, o.d];
        let np = p.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let nq = q.iter().map(|v| v.norm()).fold(0.0, f64::max);
        // all 2×2 minors of the stacked pair vanish
        (0..4).all(|i| (0..4).all(|j| (p[i] * q[j] - p[j] * q[i]).norm() <= tol * np * nq))
    }
}

/// `M = [[1, −r], [−1, 1]]`.
pub fn reduced_matrix(r: Complex64) -> MobiusMatrix {
    MobiusMatrix { a: C1, b: -r, c: -C1, d: C1 }
}

/// `x ↦ (x − r)/(1 − x)` on ℂP¹.
pub fn reduced_apply(r: Complex64, x: ExtendedComplex) -> ExtendedComplex {
    reduced_matrix(r).apply(x)
}

/// Eigen-data of `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenData {
    pub sqrt_r: Complex64,
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    /// `λ₊/λ₋`, infinite at `r = 1`.
    pub s: ExtendedComplex,
}

pub fn eigen(r: Complex64) -> EigenData {
    let sqrt_r = principal_sqrt(r);
    let lambda_plus = C1 + sqrt_r;
    let lambda_minus = C1 - sqrt_r;
    let s = ExtendedComplex::ratio(lambda_plus.into(), lambda_minus.into()).unwrap_or(Infinity);
    EigenData { sqrt_r, lambda_plus, lambda_minus, s }
}

/// The closed form `[[λ₊ᵐ+λ₋ᵐ, −√r(λ₊ᵐ−λ₋ᵐ)], [−(λ₊ᵐ−λ₋ᵐ)/√r, λ₊ᵐ+λ₋ᵐ]]`,
/// which is `2Mᵐ` up to a further scalar.
pub fn power_matrix(r: Complex64, m: u32) -> Result<MobiusMatrix, MobiusError> {
    if r == C0 {
        return Err(MobiusError::ZeroR);
    }
    let e = eigen(r);
    let sum = e.lambda_plus.powu(m) + e.lambda_minus.powu(m);
    let diff = e.lambda_plus.powu(m) - e.lambda_minus.powu(m);
    Ok(MobiusMatrix { a: sum, b: -e.sqrt_r * diff, c: -diff / e.sqrt_r, d: sum })
}

/// `z = √r (1 − x)/(1 + x)`, the coordinate in which boundary values are
/// tabulated. `x = ∞ ↦ −√r`, `x = −1 ↦ ∞`.
pub fn x_to_z(r: Complex64, x: ExtendedComplex) -> ExtendedComplex {
    let q = principal_sqrt(r);
    MobiusMatrix { a: -q, b: q, c: C1, d: C1 }.apply(x)
}

/// Inverse of [`x_to_z`]: `x = (√r − z)/(√r + z)`.
pub fn z_to_x(r: Complex64, z: ExtendedComplex) -> ExtendedComplex {
    let q = principal_sqrt(r);
    MobiusMatrix { a: -C1, b: q, c: C1, d: q }.apply(z)
}

/// `w = (√r − x)/(√r + x)`, the coordinate that diagonalizes `M`:
/// `w(reduced_apply(r, x)) = s · w(x)`.
///
/// Maps the fixed points `−√r ↦ ∞` and `√r ↦ 0`. Note that [`x_to_z`] is the
/// inverse transformation applied to `x`, so it does not conjugate `M` to a
/// scaling; it is kept because the tabulated boundary values use it.
pub fn eigen_coordinate(r: Complex64, x: ExtendedComplex) -> ExtendedComplex {
    let q = principal_sqrt(r);
    MobiusMatrix { a: -C1, b: q, c: C1, d: q }.apply(x)
}

/// `e^{2πik/n}`.
pub fn root_of_unity(n: u32, k: u32) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)
}

/// `c_m = (1 − s)(1 + sᵐ)/((1 + s)(1 − sᵐ))` with `s = e^{2πik/n}`;
/// `c_0 = ∞`.
pub fn boundary_c(n: u32, m: u32, k: u32) -> ExtendedComplex {
    let s = root_of_unity(n, k);
    let sm = root_of_unity(n, (k as u64 * m as u64 % n as u64) as u32);
    let num = (C1 - s) * (C1 + sm);
    let den = (C1 + s) * (C1 - sm);
    if den.norm() < 1e-12 {
        return Infinity;
    }
    ExtendedComplex::from(num / den)
}

/// All `c_m` for `m = 0..n` (with `c_n = c_0`).
pub fn boundaries_c(n: u32, k: u32) -> Vec<ExtendedComplex> {
    (0..=n).map(|m| boundary_c(n, m, k)).collect()
}

/// `d_m = −√r (√r(λ₊ᵐ+λ₋ᵐ) + (λ₊ᵐ−λ₋ᵐ)) / (√r(λ₊ᵐ+λ₋ᵐ) − (λ₊ᵐ−λ₋ᵐ))`, the
/// image under [`x_to_z`] of `Mᵐ(∞)`.
pub fn boundary_d(n: u32, r: Complex64, m: u32) -> Result<ExtendedComplex, MobiusError> {
    if n < 3 {
        return Err(MobiusError::PeriodTooSmall(n));
    }
    let e = eigen(r);
    let sum = e.lambda_plus.powu(m) + e.lambda_minus.powu(m);
    let diff = e.lambda_plus.powu(m) - e.lambda_minus.powu(m);
    let num = -e.sqrt_r * (e.sqrt_r * sum + diff);
    let den = e.sqrt_r * sum - diff;
    let scale = sum.norm().max(diff.norm()).max(1.0);
    if den.norm() < 1e-12 * scale {
        return Ok(Infinity);
    }
    Ok(ExtendedComplex::from(num / den))
}

/// The orbit `x_m = Mᵐ(∞)`, `m = 0..n`, of the point at infinity.
pub fn boundary_orbit(r: Complex64, n: u32) -> Vec<ExtendedComplex> {
    let mut out = vec![Infinity];
    for _ in 0..n {
        let last = *out.last().unwrap();
        out.push(reduced_apply(r, last));
    }
    out
}

/// The index `m < n` with `Mᵐ(∞)` within `tol` of `x`, if any.
pub fn boundary_index(r: Complex64, n: u32, x: ExtendedComplex, tol: f64) -> Option<u32> {
    boundary_orbit(r, n).into_iter().take(n as usize).position(|b| b.chordal(&x) < tol).map(|m| m as u32)
}

/// Lower bound for `|s(r) + 1|` over the disc `|r| <= radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExclusionBound {
    pub radius: f64,
    /// Minimum over a polar grid (includes the negative real axis, where the
    /// minimum is attained).
    pub grid_min: f64,
    /// `2/√(1 + R)`, the exact minimum of `2/|1 − √r|`.
    pub analytic_min: f64,
}

/// `|s(r) + 1| = 2/|1 − √r|` never vanishes for finite `r`, so `s = −1`
/// (period 2) forces `r = ∞`.
pub fn period2_exclusion(radius: f64, radial: usize, angular: usize) -> ExclusionBound {
    let mut grid_min = f64::INFINITY;
    for i in 0..=radial {
        let rho = radius * i as f64 / radial as f64;
        for j in 0..=angular {
            let theta = -PI + 2.0 * PI * j as f64 / angular as f64;
            let r = Complex64::from_polar(rho, theta);
            let v = match eigen(r).s {
                ExtendedComplex::Finite(s) => (s + C1).norm(),
                Infinity => f64::INFINITY,
            };
            grid_min = grid_min.min(v);
        }
    }
    ExclusionBound { radius, grid_min, analytic_min: 2.0 / (1.0 + radius).sqrt() }
}

/// `|s(r) + 1|` evaluated through the identity `s + 1 = 2/(1 − √r)`.
pub fn s_plus_one(r: Complex64) -> f64 {
    2.0 / (C1 - principal_sqrt(r)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn close(a: ExtendedComplex, b: ExtendedComplex) -> bool {
        a.chordal(&b) < 1e-9
    }

    #[test]
    fn reduced_action() {
        assert!(close(reduced_apply(c(-3.0), 2.0.into()), (-5.0).into()));
        assert_eq!(reduced_apply(c(-3.0), 1.0.into()), Infinity);
        assert!(close(reduced_apply(c(-3.0), Infinity), (-1.0).into()));
        let orbit = boundary_orbit(c(-1.0), 4);
        let want = [Infinity, (-1.0).into(), 0.0.into(), 1.0.into(), Infinity];
        for (a, b) in orbit.iter().zip(want) {
            assert!(close(*a, b));
        }
    }

    #[test]
    fn eigenvalues_and_multiplier() {
        let e = eigen(c(-3.0));
        assert_abs_diff_eq!(e.sqrt_r.im, 3f64.sqrt(), epsilon = 1e-12);
        let s = e.s.finite().unwrap();
        assert!((s - root_of_unity(3, 1)).norm() < 1e-12);
        assert!((s.powu(3) - C1).norm() < 1e-12);
        assert!((eigen(c(-1.0)).s.finite().unwrap() - Complex64::i()).norm() < 1e-12);
        assert!((eigen(c(0.0)).s.finite().unwrap() - C1).norm() < 1e-15);
        assert_eq!(eigen(c(1.0)).s, Infinity);
        // signed zero on the negative axis still gives +i
        assert!(principal_sqrt(Complex64::new(-4.0, -0.0)).im > 0.0);
    }

    #[test]
    fn closed_form_powers() {
        let p1 = power_matrix(c(-3.0), 1).unwrap();
        assert!((p1.a - c(2.0)).norm() < 1e-12 && (p1.b - c(6.0)).norm() < 1e-12);
        assert!((p1.c - c(-2.0)).norm() < 1e-12 && (p1.d - c(2.0)).norm() < 1e-12);
        assert!(power_matrix(c(-3.0), 0).unwrap().projectively_eq(&MobiusMatrix::identity(), 1e-12));
        assert!(power_matrix(c(-3.0), 3).unwrap().projectively_eq(&MobiusMatrix::identity(), 1e-12));
        assert_eq!(power_matrix(c(0.0), 2), Err(MobiusError::ZeroR));
    }

    #[test]
    fn power_matches_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let r = Complex64::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
            let x = ExtendedComplex::complex(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let m = rng.random_range(0..7);
            let mut y = x;
            for _ in 0..m {
                y = reduced_apply(r, y);
            }
            assert!(close(power_matrix(r, m).unwrap().apply(x), y));
        }
    }

    #[test]
    fn eigen_coordinate_conjugates_to_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let r = Complex64::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
            let x = ExtendedComplex::complex(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let s = eigen(r).s.finite().unwrap();
            let lhs = eigen_coordinate(r, reduced_apply(r, x));
            let rhs = match eigen_coordinate(r, x) {
                ExtendedComplex::Finite(w) => ExtendedComplex::from(s * w),
                Infinity => Infinity,
            };
            assert!(close(lhs, rhs));
        }
        // the tabulated coordinate is not conjugating: r = -1, x = 0
        let r = c(-1.0);
        let z0 = x_to_z(r, 0.0.into());
        let z1 = x_to_z(r, reduced_apply(r, 0.0.into()));
        assert!(close(z0, Complex64::i().into()) && close(z1, 0.0.into()));
    }

    #[test]
    fn z_round_trip() {
        let r = c(-3.0);
        for x in [-2.0, -0.5, 0.0, 0.3, 1.0, 7.0] {
            let x = ExtendedComplex::real(x);
            assert!(close(z_to_x(r, x_to_z(r, x)), x));
        }
        assert!(close(x_to_z(r, Infinity), Complex64::new(0.0, -3f64.sqrt()).into()));
        assert_eq!(x_to_z(r, (-1.0).into()), Infinity);
    }

    #[test]
    fn boundary_formulas() {
        let c3: Vec<f64> = boundaries_c(3, 1).iter().map(|v| v.re()).collect();
        assert!(c3[0].is_infinite() && (c3[1] - 1.0).abs() < 1e-12 && (c3[2] + 1.0).abs() < 1e-12);
        assert!(close(boundary_c(4, 2, 1), 0.0.into()));
        let mut c6: Vec<f64> = boundaries_c(6, 1)[1..6].iter().map(|v| v.re()).collect();
        c6.sort_by(f64::total_cmp);
        for (a, b) in c6.iter().zip([-1.0, -1.0 / 3.0, 0.0, 1.0 / 3.0, 1.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        let q3 = Complex64::new(0.0, 3f64.sqrt());
        assert!(close(boundary_d(3, c(-3.0), 0).unwrap(), (-q3).into()));
        let r6 = c(-1.0 / 3.0);
        let m = boundary_index(r6, 6, (1.0 / 3.0).into(), 1e-9).unwrap();
        assert!(close(boundary_d(6, r6, m).unwrap(), Complex64::new(0.0, 3f64.sqrt() / 6.0).into()));
        let ap = c(-5.0 + 2.0 * 5f64.sqrt());
        let m = boundary_index(ap, 5, (-1.0).into(), 1e-9).unwrap();
        assert_eq!(boundary_d(5, ap, m).unwrap(), Infinity);
    }

    #[test]
    fn tabulated_coordinate_maps_c_to_d() {
        for n in 3..=6u32 {
            for b in crate::ivpp2d::branches(n).unwrap() {
                let r = c(b.rho);
                let d: Vec<_> = (0..n).map(|m| boundary_d(n, r, m).unwrap()).collect();
                for m in 0..n {
                    let z = x_to_z(r, boundary_c(n, m, b.m));
                    assert!(d.iter().any(|v| close(*v, z)), "n={n} m={m}");
                }
            }
        }
    }

    #[test]
    fn period_two_is_excluded() {
        for radius in [10.0, 100.0, 1000.0] {
            let b = period2_exclusion(radius, 200, 400);
            assert!(b.grid_min > 0.0);
            assert!(b.grid_min >= b.analytic_min * (1.0 - 1e-9));
            assert!((b.grid_min - b.analytic_min).abs() < 1e-9);
        }
        assert_abs_diff_eq!(s_plus_one(c(1e6)), 2.0 / 999.0, epsilon = 1e-12);
        let r = Complex64::new(2.5, -1.0);
        let s = eigen(r).s.finite().unwrap();
        assert_abs_diff_eq!((s + C1).norm(), s_plus_one(r), epsilon = 1e-12);
    }
}
