use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::parser::{Expr, ExprKind, Func};
use super::ParseError;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest frequency a product may produce.
pub const MAX_DEGREE: i64 = 4096;

/// `P(θ) + θ²·Q(θ)` with trigonometric polynomials `P`, `Q` given by their
/// coefficient maps. `θ²` is the periodic extension from `[-π, π]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lowered {
    pub trig: BTreeMap<i64, Complex64>,
    pub theta_sq: BTreeMap<i64, Complex64>,
}

impl Lowered {
    fn constant(c: Complex64) -> Self {
        let mut trig = BTreeMap::new();
        trig.insert(0, c);
        Self {
            trig,
            theta_sq: BTreeMap::new(),
        }.cleaned()
    }

    fn cleaned(mut self) -> Self {
        self.trig.retain(|_, c| *c != ZERO);
        self.theta_sq.retain(|_, c| *c != ZERO);
        self
    }

    /// Constant value, if the expression does not depend on θ.
    pub fn as_constant(&self) -> Option<Complex64> {
        if !self.theta_sq.is_empty() || self.trig.keys().any(|&k| k != 0) {
            return None;
        }
        Some(self.trig.get(&0).copied().unwrap_or(ZERO))
    }

    pub fn is_trig(&self) -> bool {
        self.theta_sq.is_empty()
    }

    fn add(&self, other: &Self, sign: f64) -> Self {
        let mut out = self.clone();
        for (&k, &c) in &other.trig {
            *out.trig.entry(k).or_insert(ZERO) += c * sign;
        }
        for (&k, &c) in &other.theta_sq {
            *out.theta_sq.entry(k).or_insert(ZERO) += c * sign;
        }
        out.cleaned()
    }

    fn scale(&self, c: Complex64) -> Self {
        Self {
            trig: self.trig.iter().map(|(&k, &v)| (k, v * c)).collect(),
            theta_sq: self.theta_sq.iter().map(|(&k, &v)| (k, v * c)).collect(),
        }
        .cleaned()
    }

    /// Division by a nonzero constant; real divisors divide each
    /// component so that e.g. `14/3` is the correctly rounded quotient.
    fn divide(&self, c: Complex64) -> Self {
        let div = |v: Complex64| if c.im == 0.0 { v / c.re } else { v / c };
        Self {
            trig: self.trig.iter().map(|(&k, &v)| (k, div(v))).collect(),
            theta_sq: self.theta_sq.iter().map(|(&k, &v)| (k, div(v))).collect(),
        }
        .cleaned()
    }

    fn mul(&self, other: &Self, pos: usize) -> Result<Self, ParseError> {
        if !self.theta_sq.is_empty() && !other.theta_sq.is_empty() {
            return Err(ParseError::UnsupportedTerm {
                pos,
                term: "products of t^2 terms (t^4 and higher) are not supported".into(),
            });
        }
        let degree = |l: &Self| l.trig.keys().chain(l.theta_sq.keys()).map(|k| k.abs()).max().unwrap_or(0);
        if degree(self) + degree(other) > MAX_DEGREE {
            return Err(ParseError::UnsupportedTerm {
                pos,
                term: format!("product exceeds the maximum frequency {MAX_DEGREE}"),
            });
        }
        // constants keep coefficients bit-exact
        if let Some(c) = self.as_constant() {
            return Ok(other.scale(c));
        }
        if let Some(c) = other.as_constant() {
            return Ok(self.scale(c));
        }
        let conv = |a: &BTreeMap<i64, Complex64>, b: &BTreeMap<i64, Complex64>, out: &mut BTreeMap<i64, Complex64>| {
            for (&ka, &ca) in a {
                for (&kb, &cb) in b {
                    *out.entry(ka + kb).or_insert(ZERO) += ca * cb;
                }
            }
        };
        let mut res = Lowered::default();
        conv(&self.trig, &other.trig, &mut res.trig);
        conv(&self.trig, &other.theta_sq, &mut res.theta_sq);
        conv(&self.theta_sq, &other.trig, &mut res.theta_sq);
        Ok(res.cleaned())
    }
}

/// `c0 + c1·θ`, used for arguments of cos/sin/exp.
#[derive(Debug, Clone, Copy)]
struct Linear {
    c0: Complex64,
    c1: Complex64,
}

fn unsupported(pos: usize, term: impl Into<String>) -> ParseError {
    ParseError::UnsupportedTerm { pos, term: term.into() }
}

fn linear(e: &Expr) -> Result<Linear, ParseError> {
    let k = |c0| Linear { c0, c1: ZERO };
    Ok(match &e.kind {
        ExprKind::Num(v) => k(Complex64::new(*v, 0.0)),
        ExprKind::Pi => k(Complex64::new(PI, 0.0)),
        ExprKind::ImagUnit => k(Complex64::new(0.0, 1.0)),
        ExprKind::Var => Linear { c0: ZERO, c1: ONE },
        ExprKind::Neg(a) => {
            let a = linear(a)?;
            Linear { c0: -a.c0, c1: -a.c1 }
        }
        ExprKind::Add(a, b) | ExprKind::Sub(a, b) => {
            let (a, b) = (linear(a)?, linear(b)?);
            let s = if matches!(e.kind, ExprKind::Add(..)) { 1.0 } else { -1.0 };
            Linear {
                c0: a.c0 + b.c0 * s,
                c1: a.c1 + b.c1 * s,
            }
        }
        ExprKind::Mul(a, b) => {
            let (a, b) = (linear(a)?, linear(b)?);
            if a.c1 != ZERO && b.c1 != ZERO {
                return Err(unsupported(e.pos, "argument is not linear in t"));
            }
            Linear {
                c0: a.c0 * b.c0,
                c1: a.c0 * b.c1 + a.c1 * b.c0,
            }
        }
        ExprKind::Div(a, b) => {
            let (a, b) = (linear(a)?, linear(b)?);
            if b.c1 != ZERO {
                return Err(unsupported(e.pos, "division by an expression in t"));
            }
            if b.c0 == ZERO {
                return Err(unsupported(e.pos, "division by zero"));
            }
            Linear {
                c0: a.c0 / b.c0,
                c1: a.c1 / b.c0,
            }
        }
        ExprKind::Pow(a, n) => {
            let a = linear(a)?;
            if a.c1 != ZERO && *n != 1 && *n != 0 {
                return Err(unsupported(e.pos, "argument is not linear in t"));
            }
            match n {
                0 => k(ONE),
                1 => a,
                _ => k(a.c0.powu(*n)),
            }
        }
        ExprKind::Call(..) => {
            let l = lower(e)?;
            match l.as_constant() {
                Some(c) => k(c),
                None => return Err(unsupported(e.pos, "nested t-dependent function in an argument")),
            }
        }
    })
}

fn integer_frequency(x: f64, pos: usize) -> Result<i64, ParseError> {
    let r = x.round();
    if (x - r).abs() > 1e-12 || r.abs() > 1e6 {
        return Err(unsupported(pos, format!("frequency {x} is not an integer")));
    }
    Ok(r as i64)
}

fn single(k: i64, c: Complex64) -> Lowered {
    let mut l = Lowered::default();
    if c != ZERO {
        l.trig.insert(k, c);
    }
    l
}

fn phase(c0: Complex64) -> Complex64 {
    if c0 == ZERO {
        ONE
    } else {
        (Complex64::new(0.0, 1.0) * c0).exp()
    }
}

/// Lowers an expression tree to coefficient form.
pub fn lower(e: &Expr) -> Result<Lowered, ParseError> {
    match &e.kind {
        ExprKind::Num(v) => Ok(Lowered::constant(Complex64::new(*v, 0.0))),
        ExprKind::Pi => Ok(Lowered::constant(Complex64::new(PI, 0.0))),
        ExprKind::ImagUnit => Ok(Lowered::constant(Complex64::new(0.0, 1.0))),
        ExprKind::Var => Err(unsupported(e.pos, "bare t; only t^2 and trigonometric terms are supported")),
        ExprKind::Neg(a) => Ok(lower(a)?.scale(-ONE)),
        ExprKind::Add(a, b) => Ok(lower(a)?.add(&lower(b)?, 1.0)),
        ExprKind::Sub(a, b) => Ok(lower(a)?.add(&lower(b)?, -1.0)),
        ExprKind::Mul(a, b) => lower(a)?.mul(&lower(b)?, e.pos),
        ExprKind::Div(a, b) => {
            let num = lower(a)?;
            let den = lower(b)?;
            match den.as_constant() {
                Some(c) if c != ZERO => Ok(num.divide(c)),
                Some(_) => Err(unsupported(b.pos, "division by zero")),
                None => Err(unsupported(b.pos, "division by a t-dependent expression")),
            }
        }
        ExprKind::Pow(a, n) => {
            if let ExprKind::Var = a.kind {
                return match n {
                    2 => {
                        let mut l = Lowered::default();
                        l.theta_sq.insert(0, ONE);
                        Ok(l)
                    }
                    0 => Ok(Lowered::constant(ONE)),
                    _ => Err(unsupported(e.pos, format!("t^{n}; only t^2 is supported"))),
                };
            }
            let base = lower(a)?;
            let mut acc = Lowered::constant(ONE);
            for _ in 0..*n {
                acc = acc.mul(&base, e.pos)?;
            }
            Ok(acc)
        }
        ExprKind::Call(f, arg) => {
            let lin = linear(arg)?;
            let half = Complex64::new(0.5, 0.0);
            match f {
                Func::Cos | Func::Sin => {
                    if lin.c1.im != 0.0 {
                        return Err(unsupported(arg.pos, "cos/sin argument must be real a*t"));
                    }
                    let a = integer_frequency(lin.c1.re, arg.pos)?;
                    let (p, q) = (phase(lin.c0), phase(-lin.c0));
                    if a == 0 {
                        let v = if *f == Func::Cos { (p + q) * half } else { (p - q) / Complex64::new(0.0, 2.0) };
                        return Ok(Lowered::constant(v));
                    }
                    let (plus, minus) = if *f == Func::Cos {
                        (p * half, q * half)
                    } else {
                        let d = Complex64::new(0.0, 2.0);
                        (p / d, -q / d)
                    };
                    Ok(single(a, plus).add(&single(-a, minus), 1.0))
                }
                Func::Exp => {
                    if lin.c1.re != 0.0 {
                        return Err(unsupported(arg.pos, "exp argument must be i*a*t"));
                    }
                    let a = integer_frequency(lin.c1.im, arg.pos)?;
                    let c = if lin.c0 == ZERO { ONE } else { lin.c0.exp() };
                    Ok(single(a, c))
                }
            }
        }
    }
}
