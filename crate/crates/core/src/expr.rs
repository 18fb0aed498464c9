//! Expression trees for map components, kept in the shape the user wrote them.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::poly::{format_rational, Poly, VAR_NAMES};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(BigRational),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub fn num(c: BigRational) -> Expr {
        Expr::Num(c)
    }

    pub fn int(k: i64) -> Expr {
        if k < 0 {
            Expr::Neg(Box::new(Expr::Num(BigRational::from_integer((-k).into()))))
        } else {
            Expr::Num(BigRational::from_integer(k.into()))
        }
    }

    fn is_one(&self) -> bool {
        matches!(self, Expr::Num(c) if c.is_one())
    }

    pub fn has_division(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Var(_) => false,
            Expr::Div(..) => true,
            Expr::Neg(a) | Expr::Pow(a, _) => a.has_division(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.has_division() || b.has_division(),
        }
    }

    /// Highest variable index referenced, plus one.
    pub fn vars_used(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(a) | Expr::Pow(a, _) => a.vars_used(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.vars_used().max(b.vars_used()),
        }
    }

    /// Expands a division-free expression.
    ///
    /// # Panics
    /// If the expression still contains a division; call
    /// [`Expr::clear_fractions`] first.
    pub fn to_poly(&self) -> Poly {
        match self {
            Expr::Num(c) => Poly::constant(c.clone()),
            Expr::Var(i) => Poly::var(*i),
            Expr::Neg(a) => -&a.to_poly(),
            Expr::Add(a, b) => &a.to_poly() + &b.to_poly(),
            Expr::Sub(a, b) => &a.to_poly() - &b.to_poly(),
            Expr::Mul(a, b) => &a.to_poly() * &b.to_poly(),
            Expr::Pow(a, k) => a.to_poly().pow(*k),
            Expr::Div(..) => panic!("to_poly called on an expression with a division"),
        }
    }

    /// Rewrites the expression as a single quotient of division-free
    /// expressions. Factors are combined without expanding, so denominators
    /// keep the shape they were written in; a missing denominator means 1.
    pub fn clear_fractions(&self) -> (Expr, Option<Expr>) {
        match self {
            Expr::Num(_) | Expr::Var(_) => (self.clone(), None),
            Expr::Neg(a) => {
                let (n, d) = a.clear_fractions();
                (Expr::Neg(Box::new(n)), d)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let (na, da) = a.clear_fractions();
                let (nb, db) = b.clear_fractions();
                let left = times(na, db.clone());
                let right = times(nb, da.clone());
                let n = if matches!(self, Expr::Add(..)) {
                    Expr::Add(Box::new(left), Box::new(right))
                } else {
                    Expr::Sub(Box::new(left), Box::new(right))
                };
                (n, product(da, db))
            }
            Expr::Mul(a, b) => {
                let (na, da) = a.clear_fractions();
                let (nb, db) = b.clear_fractions();
                (times(na, Some(nb)), product(da, db))
            }
            Expr::Div(a, b) => {
                let (na, da) = a.clear_fractions();
                let (nb, db) = b.clear_fractions();
                (times(na, db), product(da, Some(nb)))
            }
            Expr::Pow(a, k) => {
                let (n, d) = a.clear_fractions();
                (Expr::Pow(Box::new(n), *k), d.map(|d| Expr::Pow(Box::new(d), *k)))
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(c) if c.is_negative() => 3,
            Expr::Num(_) | Expr::Var(_) => 5,
        }
    }
}

fn times(a: Expr, b: Option<Expr>) -> Expr {
    match b {
        None => a,
        Some(b) if b.is_one() => a,
        Some(b) if a.is_one() => b,
        Some(b) => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn product(a: Option<Expr>, b: Option<Expr>) -> Option<Expr> {
    match (a, b) {
        (None, None) => None,
        (Some(a), None) | (None, Some(a)) => (!a.is_one()).then_some(a),
        (Some(a), Some(b)) => {
            let p = times(a, Some(b));
            (!p.is_one()).then_some(p)
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if e.precedence() < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) if c.is_negative() => write!(f, "-{}", format_rational(&-c.clone())),
            Expr::Num(c) if c.is_zero() => write!(f, "0"),
            Expr::Num(c) => write!(f, "{}", format_rational(c)),
            Expr::Var(i) => write!(f, "{}", VAR_NAMES[*i]),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_operand(f, a, 3)
            }
            Expr::Add(a, b) => {
                write_operand(f, a, 1)?;
                write!(f, "+")?;
                write_operand(f, b, 2)
            }
            Expr::Sub(a, b) => {
                write_operand(f, a, 1)?;
                write!(f, "-")?;
                write_operand(f, b, 2)
            }
            Expr::Mul(a, b) => {
                write_operand(f, a, 2)?;
                write!(f, "*")?;
                write_operand(f, b, 3)
            }
            Expr::Div(a, b) => {
                write_operand(f, a, 2)?;
                write!(f, "/")?;
                write_operand(f, b, 3)
            }
            Expr::Pow(a, k) => {
                write_operand(f, a, 5)?;
                write!(f, "^{k}")
            }
        }
    }
}
