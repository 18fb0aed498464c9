//! Sparse multivariate polynomials in up to three variables.
//!
//! Coefficients are exact rationals so that fraction clearing in the map
//! language is reproducible; evaluation goes through a compiled `f64` copy.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::ext::ExtendedComplex;

pub const MAX_VARS: usize = 3;
pub const VAR_NAMES: [&str; MAX_VARS] = ["x", "y", "z"];

pub type Exponents = [u32; MAX_VARS];

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Exponents, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert([0; MAX_VARS], c);
        }
        p
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn var(index: usize) -> Self {
        assert!(index < MAX_VARS);
        let mut e = [0; MAX_VARS];
        e[index] = 1;
        let mut p = Poly::zero();
        p.terms.insert(e, BigRational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BigRational)> {
        self.terms.iter()
    }

    /// The constant value if the polynomial has no variable terms.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&[0; MAX_VARS]).cloned(),
            _ => None,
        }
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| e[var]).max().unwrap_or(0)
    }

    /// Highest variable index that occurs, plus one.
    pub fn vars_used(&self) -> usize {
        self.terms.keys().map(|e| e.iter().rposition(|&k| k > 0).map_or(0, |i| i + 1)).max().unwrap_or(0)
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(e, v)| (*e, v * c)).collect() }
    }

    /// Coefficient of the largest monomial in the (graded lexicographic)
    /// term order, used to pick a canonical scale for numerator/denominator
    /// pairs.
    pub fn leading_coefficient(&self) -> Option<&BigRational> {
        self.terms
            .iter()
            .max_by(|(a, _), (b, _)| {
                let da: u32 = a.iter().sum();
                let db: u32 = b.iter().sum();
                da.cmp(&db).then(a.cmp(b))
            })
            .map(|(_, c)| c)
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly { terms: self.terms.iter().map(|(e, c)| (rational_to_f64(c), *e)).collect() }
    }

    fn insert_add(&mut self, e: Exponents, c: BigRational) {
        let entry = self.terms.entry(e).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_add(*e, c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_add(*e, -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let mut e = [0; MAX_VARS];
                for i in 0..MAX_VARS {
                    e[i] = ea[i] + eb[i];
                }
                out.insert_add(e, ca * cb);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect() }
    }
}

impl fmt::Display for Poly {
    /// Expanded sum-of-monomials form, parseable by the map language.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            let negative = c.is_negative();
            if i == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { '-' } else { '+' })?;
            }
            let mag = c.abs();
            let is_unit = mag.is_one();
            let mut factors = Vec::new();
            if !is_unit || e.iter().all(|&k| k == 0) {
                factors.push(format_rational(&mag));
            }
            for (v, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => factors.push(VAR_NAMES[v].to_string()),
                    _ => factors.push(format!("{}^{}", VAR_NAMES[v], k)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

/// `f64` image of a [`Poly`], ready for repeated evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledPoly {
    terms: Vec<(f64, Exponents)>,
}

impl CompiledPoly {
    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        self.eval_filtered(x, |_| true)
    }

    pub fn eval_real(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| {
                let mut v = *c;
                for (i, &k) in e.iter().enumerate() {
                    if k > 0 {
                        v *= x[i].powi(k as i32);
                    }
                }
                v
            })
            .sum()
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.iter().map(|(_, e)| e[var]).max().unwrap_or(0)
    }

    fn eval_filtered(&self, x: &[Complex64], keep: impl Fn(&Exponents) -> bool) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, e) in &self.terms {
            if !keep(e) {
                continue;
            }
            let mut v = Complex64::new(*c, 0.0);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    v *= x[i].powu(k);
                }
            }
            acc += v;
        }
        acc
    }
}

/// Evaluates `num / den` at a point whose coordinates may sit at ∞.
///
/// Each infinite coordinate `x_i` is replaced by `1/u_i`, both polynomials are
/// multiplied by `u_i^{max degree}`, and `u_i = 0` is substituted; this keeps
/// only the terms of top degree in `x_i`. Returns `None` on 0/0.
pub fn eval_ratio(num: &CompiledPoly, den: &CompiledPoly, p: &[ExtendedComplex]) -> Option<ExtendedComplex> {
    let mut top = [None; MAX_VARS];
    // infinite coordinates contribute only through which terms are kept
    let mut coords = [Complex64::new(1.0, 0.0); MAX_VARS];
    for (i, c) in p.iter().enumerate() {
        match c.finite() {
            Some(z) => coords[i] = z,
            None => top[i] = Some(num.degree_in(i).max(den.degree_in(i))),
        }
    }
    let keep = |e: &Exponents| top.iter().enumerate().all(|(i, t)| t.is_none_or(|d| e[i] == d));
    let n = num.eval_filtered(&coords, keep);
    let d = den.eval_filtered(&coords, keep);
    if n.re.is_nan() || n.im.is_nan() || d.re.is_nan() || d.im.is_nan() {
        return None;
    }
    let n = ExtendedComplex::new(n)?;
    let d = ExtendedComplex::new(d)?;
    ExtendedComplex::ratio(n, d)
}

/// Correctly rounded conversion of an exact rational.
pub fn rational_to_f64(c: &BigRational) -> f64 {
    c.to_f64().unwrap_or_else(|| if c.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// Exact rational from a decimal literal such as `12`, `0.5` or `1e-3`.
pub fn parse_decimal(text: &str) -> Option<BigRational> {
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i64>().ok()?),
        None => (text, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    Some(if scale >= 0 { BigRational::from_integer(numer * pow) } else { BigRational::new(numer, pow) })
}

/// Exact decimal rendering of a rational whose denominator divides a power of
/// ten; other rationals are rendered as a parenthesised quotient.
pub fn format_rational(c: &BigRational) -> String {
    if c.is_integer() {
        return c.numer().to_string();
    }
    let mut den = c.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0usize, 0usize);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("({}/{})", c.numer(), c.denom());
    }
    let places = twos.max(fives);
    let scaled = c * BigRational::from_integer(num_traits::pow(BigInt::from(10), places));
    let digits = scaled.to_integer().abs().to_string();
    let digits = format!("{:0>width$}", digits, width = places + 1);
    let (int_part, frac_part) = digits.split_at(digits.len() - places);
    let sign = if c.is_negative() { "-" } else { "" };
    format!("{sign}{int_part}.{frac_part}")
}

/// Exact rational equal to the shortest decimal that round-trips `x`.
pub fn rational_from_f64(x: f64) -> BigRational {
    let text = format!("{:e}", x.abs());
    let r = parse_decimal(&text).expect("Rust float formatting is a decimal literal");
    if x.is_sign_negative() {
        -r
    } else {
        r
    }
}
