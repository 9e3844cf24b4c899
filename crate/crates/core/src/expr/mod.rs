//! Holomorphic expressions `w(z)`: parsing, symbolic differentiation and
//! evaluation at complex points.
//!
//! The expression family is closed under differentiation, so the first and
//! second derivatives needed by the surface integrands and the curvature
//! diagnostics are exact trees rather than finite-difference estimates.
//!
//! Grammar (infix, `^` binds tightest, then unary minus, then `*` `/`,
//! then `+` `-`; `+ - * /` are left-associative):
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := atom ('^' exponent)?      exponent: signed integer literal,
//!                                       optionally parenthesized
//! atom     := number | number 'i' | 'z' | 'i'
//!           | ('exp'|'sin'|'cos'|'sinh'|'cosh') '(' expr ')'
//!           | '(' expr ')'
//! ```
//!
//! Numbers are decimal with optional fraction and exponent (`2`, `0.5`,
//! `1e-3`); an `i` suffix makes the literal imaginary (`3i`, `2.5e2i`).
//! General complex constants are written arithmetically, e.g. `3+2i`.
//! Exponents of `^` must be integer literals; chained `^` needs parentheses.

use num_complex::Complex64;
use std::fmt;
use thiserror::Error;

mod parser;

pub use parser::{parse_expr, ParseError, ParseErrorKind};

/// Denominator magnitudes below this floor count as a pole during evaluation.
/// Domain validation screens much earlier with user-configurable thresholds;
/// this floor only catches exact zeros and denormal collapse.
pub const POLE_FLOOR: f64 = 1e-300;

/// Expression tree for a holomorphic function of one complex variable `z`.
///
/// Trees are immutable after construction and evaluation is pure, so shared
/// concurrent use is safe.
#[derive(Clone, Debug, PartialEq)]
pub enum HolomorphicExpr {
    /// Complex constant.
    Const(Complex64),
    /// The variable `z`.
    Z,
    Add(Box<HolomorphicExpr>, Box<HolomorphicExpr>),
    Sub(Box<HolomorphicExpr>, Box<HolomorphicExpr>),
    Mul(Box<HolomorphicExpr>, Box<HolomorphicExpr>),
    Div(Box<HolomorphicExpr>, Box<HolomorphicExpr>),
    /// Integer power of the base expression.
    Pow(Box<HolomorphicExpr>, i32),
    Exp(Box<HolomorphicExpr>),
    Sin(Box<HolomorphicExpr>),
    Cos(Box<HolomorphicExpr>),
    Sinh(Box<HolomorphicExpr>),
    Cosh(Box<HolomorphicExpr>),
}

/// Failure while evaluating an expression at a point.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    /// A quotient denominator (or the base of a negative power) fell below
    /// [`POLE_FLOOR`].
    #[error("pole encountered: denominator magnitude {magnitude:e} below floor")]
    Pole { magnitude: f64 },
    /// Evaluation produced a non-finite component.
    #[error("evaluation overflowed to a non-finite value")]
    NonFinite,
}

impl HolomorphicExpr {
    pub fn constant(re: f64, im: f64) -> Self {
        HolomorphicExpr::Const(Complex64::new(re, im))
    }

    /// Evaluate the expression at `z`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64, EvalError> {
        use HolomorphicExpr::*;
        let v = match self {
            Const(c) => *c,
            Z => z,
            Add(a, b) => a.eval(z)? + b.eval(z)?,
            Sub(a, b) => a.eval(z)? - b.eval(z)?,
            Mul(a, b) => a.eval(z)? * b.eval(z)?,
            Div(a, b) => {
                let den = b.eval(z)?;
                let mag = den.norm();
                if mag < POLE_FLOOR {
                    return Err(EvalError::Pole { magnitude: mag });
                }
                a.eval(z)? / den
            }
            Pow(e, n) => {
                let base = e.eval(z)?;
                if *n < 0 {
                    let mag = base.norm();
                    if mag < POLE_FLOOR {
                        return Err(EvalError::Pole { magnitude: mag });
                    }
                }
                base.powi(*n)
            }
            Exp(e) => e.eval(z)?.exp(),
            Sin(e) => e.eval(z)?.sin(),
            Cos(e) => e.eval(z)?.cos(),
            Sinh(e) => e.eval(z)?.sinh(),
            Cosh(e) => e.eval(z)?.cosh(),
        };
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Symbolic derivative `d/dz`. Applying it twice yields the second
    /// derivative. Constant subtrees produced by the differentiation rules
    /// are folded; no further simplification is attempted, so derivative
    /// trees may grow.
    pub fn differentiate(&self) -> HolomorphicExpr {
        use HolomorphicExpr::*;
        match self {
            Const(_) => zero(),
            Z => one(),
            Add(a, b) => add(a.differentiate(), b.differentiate()),
            Sub(a, b) => sub(a.differentiate(), b.differentiate()),
            Mul(a, b) => add(
                mul(a.differentiate(), (**b).clone()),
                mul((**a).clone(), b.differentiate()),
            ),
            Div(a, b) => div(
                sub(
                    mul(a.differentiate(), (**b).clone()),
                    mul((**a).clone(), b.differentiate()),
                ),
                pow((**b).clone(), 2),
            ),
            Pow(e, n) => mul(
                mul(
                    Const(Complex64::new(f64::from(*n), 0.0)),
                    pow((**e).clone(), n - 1),
                ),
                e.differentiate(),
            ),
            Exp(e) => mul(e.differentiate(), Exp(e.clone())),
            Sin(e) => mul(e.differentiate(), Cos(e.clone())),
            Cos(e) => neg(mul(e.differentiate(), Sin(e.clone()))),
            Sinh(e) => mul(e.differentiate(), Cosh(e.clone())),
            Cosh(e) => mul(e.differentiate(), Sinh(e.clone())),
        }
    }
}

fn zero() -> HolomorphicExpr {
    HolomorphicExpr::Const(Complex64::new(0.0, 0.0))
}

fn one() -> HolomorphicExpr {
    HolomorphicExpr::Const(Complex64::new(1.0, 0.0))
}

fn as_const(e: &HolomorphicExpr) -> Option<Complex64> {
    match e {
        HolomorphicExpr::Const(c) => Some(*c),
        _ => None,
    }
}

fn is_const(e: &HolomorphicExpr, v: f64) -> bool {
    as_const(e) == Some(Complex64::new(v, 0.0))
}

fn add(a: HolomorphicExpr, b: HolomorphicExpr) -> HolomorphicExpr {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => HolomorphicExpr::Const(x + y),
        _ if is_const(&a, 0.0) => b,
        _ if is_const(&b, 0.0) => a,
        _ => HolomorphicExpr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: HolomorphicExpr, b: HolomorphicExpr) -> HolomorphicExpr {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => HolomorphicExpr::Const(x - y),
        _ if is_const(&b, 0.0) => a,
        _ if is_const(&a, 0.0) => neg(b),
        _ => HolomorphicExpr::Sub(Box::new(a), Box::new(b)),
    }
}

fn neg(e: HolomorphicExpr) -> HolomorphicExpr {
    match e {
        HolomorphicExpr::Const(c) => HolomorphicExpr::Const(-c),
        e => HolomorphicExpr::Mul(Box::new(HolomorphicExpr::constant(-1.0, 0.0)), Box::new(e)),
    }
}

fn mul(a: HolomorphicExpr, b: HolomorphicExpr) -> HolomorphicExpr {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => HolomorphicExpr::Const(x * y),
        _ if is_const(&a, 0.0) || is_const(&b, 0.0) => zero(),
        _ if is_const(&a, 1.0) => b,
        _ if is_const(&b, 1.0) => a,
        _ => HolomorphicExpr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: HolomorphicExpr, b: HolomorphicExpr) -> HolomorphicExpr {
    if is_const(&a, 0.0) {
        return zero();
    }
    if is_const(&b, 1.0) {
        return a;
    }
    HolomorphicExpr::Div(Box::new(a), Box::new(b))
}

fn pow(e: HolomorphicExpr, n: i32) -> HolomorphicExpr {
    match n {
        0 => one(),
        1 => e,
        _ => match e {
            HolomorphicExpr::Const(c) => HolomorphicExpr::Const(c.powi(n)),
            e => HolomorphicExpr::Pow(Box::new(e), n),
        },
    }
}

// Printing. Precedence levels mirror the parser so that printing then
// reparsing reproduces the tree.
const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

impl HolomorphicExpr {
    fn print_prec(&self) -> u8 {
        use HolomorphicExpr::*;
        match self {
            Const(c) => {
                if c.re != 0.0 && c.im != 0.0 {
                    PREC_ATOM // printed self-parenthesized
                } else if c.re < 0.0 || c.im < 0.0 {
                    PREC_UNARY // leading minus sign
                } else {
                    PREC_ATOM
                }
            }
            Z | Exp(_) | Sin(_) | Cos(_) | Sinh(_) | Cosh(_) => PREC_ATOM,
            Pow(..) => PREC_POW,
            Mul(a, b) if is_const(a, -1.0) && as_const(b).is_none() => PREC_UNARY,
            Mul(..) | Div(..) => PREC_MUL,
            Add(..) | Sub(..) => PREC_ADD,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        use HolomorphicExpr::*;
        if self.print_prec() < min {
            write!(f, "(")?;
            self.fmt_prec(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Const(c) => fmt_const(f, *c),
            Z => write!(f, "z"),
            Add(a, b) => {
                a.fmt_prec(f, PREC_ADD)?;
                write!(f, " + ")?;
                b.fmt_prec(f, PREC_ADD + 1)
            }
            Sub(a, b) => {
                a.fmt_prec(f, PREC_ADD)?;
                write!(f, " - ")?;
                b.fmt_prec(f, PREC_ADD + 1)
            }
            Mul(a, b) if is_const(a, -1.0) && as_const(b).is_none() => {
                write!(f, "-")?;
                b.fmt_prec(f, PREC_UNARY)
            }
            Mul(a, b) => {
                a.fmt_prec(f, PREC_MUL)?;
                write!(f, " * ")?;
                b.fmt_prec(f, PREC_MUL + 1)
            }
            Div(a, b) => {
                a.fmt_prec(f, PREC_MUL)?;
                write!(f, " / ")?;
                b.fmt_prec(f, PREC_MUL + 1)
            }
            Pow(e, n) => {
                e.fmt_prec(f, PREC_ATOM)?;
                write!(f, "^{n}")
            }
            Exp(e) => write!(f, "exp({e})"),
            Sin(e) => write!(f, "sin({e})"),
            Cos(e) => write!(f, "cos({e})"),
            Sinh(e) => write!(f, "sinh({e})"),
            Cosh(e) => write!(f, "cosh({e})"),
        }
    }
}

fn fmt_const(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    if c.im == 0.0 {
        write!(f, "{}", c.re)
    } else if c.re == 0.0 {
        write!(f, "{}i", c.im)
    } else if c.im < 0.0 {
        // Only reachable through constant folding; parses back as a
        // difference of two literals with the same value.
        write!(f, "({} - {}i)", c.re, -c.im)
    } else {
        write!(f, "({} + {}i)", c.re, c.im)
    }
}

impl fmt::Display for HolomorphicExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}
