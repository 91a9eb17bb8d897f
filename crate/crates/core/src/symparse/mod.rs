//! A small expression language for scalar 2π-periodic symbols.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' integer)?
//! primary := number | 'pi' | 'i' | 't' | 'theta'
//!          | ('cos' | 'sin' | 'exp') '(' expr ')' | '(' expr ')'
//! ```
//!
//! `π`, `ι`, `θ`, `−`, `·` and `×` are accepted as aliases. Arguments of
//! `cos`/`sin` must reduce to `c + a·t` with integer `a`; arguments of
//! `exp` to `c + i·a·t`. The only non-trigonometric term is `t^2`, the
//! periodic extension of θ² from `[-π, π]`; it may be multiplied by
//! trigonometric polynomials but not by itself. Division is by constants
//! only.

mod lexer;
mod lower;
mod parser;

pub use lower::Lowered;
pub use parser::{Expr, ExprKind, Func};

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::symbol::{wrap_angle, EvalFn, MatrixSymbol, RuleFn, SymbolError, theta_squared_coefficient};
use crate::CMat;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("parse error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unsupported term at byte {pos}: {term}")]
    UnsupportedTerm { pos: usize, term: String },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("entry ({row}, {col}): {source}")]
    Entry {
        row: usize,
        col: usize,
        #[source]
        source: Box<ParseError>,
    },
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}

impl ParseError {
    /// Byte offset of the offending token, when known.
    pub fn position(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { pos, .. } | ParseError::UnsupportedTerm { pos, .. } => Some(*pos),
            ParseError::Entry { source, .. } => source.position(),
            _ => None,
        }
    }
}

/// Parsed scalar expression together with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolExpression {
    source: String,
    ast: Expr,
}

impl SymbolExpression {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Ok(Self {
            source: text.to_string(),
            ast: parser::parse(text)?,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn lower(&self) -> Result<Lowered, ParseError> {
        let l = lower::lower(&self.ast)?;
        if l.trig.values().chain(l.theta_sq.values()).any(|c| !c.is_finite()) {
            return Err(ParseError::UnsupportedTerm {
                pos: self.ast.pos,
                term: "coefficient overflows to a non-finite value".into(),
            });
        }
        Ok(l)
    }

    /// Canonical fully-parenthesised text.
    pub fn render(&self) -> String {
        parser::render(&self.ast)
    }

    pub fn to_symbol(&self) -> Result<MatrixSymbol, ParseError> {
        Ok(lowered_to_symbol(&self.lower()?)?.with_label(self.source.trim().to_string()))
    }
}

fn lowered_to_symbol(l: &Lowered) -> Result<MatrixSymbol, SymbolError> {
    let one = |c: Complex64| CMat::from_fn(1, 1, |_, _| c);
    if l.is_trig() {
        return MatrixSymbol::trig(1, 1, l.trig.iter().map(|(&k, &c)| (k, one(c))));
    }
    let trig = l.trig.clone();
    let sq = l.theta_sq.clone();
    let (t2, s2) = (trig.clone(), sq.clone());
    let eval: EvalFn = Arc::new(move |theta| {
        let x = wrap_angle(theta);
        let mut v = Complex64::new(0.0, 0.0);
        for (&k, &c) in &t2 {
            v += c * Complex64::cis(k as f64 * theta);
        }
        let mut q = Complex64::new(0.0, 0.0);
        for (&k, &c) in &s2 {
            q += c * Complex64::cis(k as f64 * theta);
        }
        one(v + q * x * x)
    });
    let rule: RuleFn = Arc::new(move |k| {
        let mut v = trig.get(&k).copied().unwrap_or_default();
        for (&j, &c) in &sq {
            v += c * theta_squared_coefficient(k - j);
        }
        one(v)
    });
    MatrixSymbol::analytic(1, 1, eval, Some(rule))
}

/// Parses a scalar expression into a 1×1 symbol.
pub fn parse_scalar(text: &str) -> Result<MatrixSymbol, ParseError> {
    SymbolExpression::parse(text)?.to_symbol()
}

/// Parses an expression that must not depend on θ.
pub fn parse_constant(text: &str) -> Result<Complex64, ParseError> {
    let e = SymbolExpression::parse(text)?;
    e.lower()?.as_constant().ok_or_else(|| ParseError::UnsupportedTerm {
        pos: 0,
        term: format!("'{text}' is not a constant"),
    })
}

/// Declarative description of a matrix-valued symbol.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSymbolSpec {
    /// `s × t` grid of scalar expressions.
    Grid(Vec<Vec<String>>),
    /// Explicit `(k, f̂_k)` list; matrix entries are constant expressions
    /// such as `-8/3`.
    Coefficients(Vec<(i64, Vec<Vec<String>>)>),
}

fn check_rect(rows: &[Vec<String>]) -> Result<(usize, usize), ParseError> {
    let s = rows.len();
    let t = rows.first().map(|r| r.len()).unwrap_or(0);
    if s == 0 || t == 0 {
        return Err(ParseError::Shape("empty matrix".into()));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != t) {
        return Err(ParseError::Shape(format!(
            "ragged matrix: row {} has {} entries, expected {t}",
            i + 1,
            rows[i].len()
        )));
    }
    Ok((s, t))
}

fn entry<T>(row: usize, col: usize, r: Result<T, ParseError>) -> Result<T, ParseError> {
    r.map_err(|e| ParseError::Entry {
        row: row + 1,
        col: col + 1,
        source: Box::new(e),
    })
}

/// Assembles a matrix-valued symbol from a grid of expressions or a
/// coefficient list.
pub fn parse_matrix_symbol(spec: &MatrixSymbolSpec) -> Result<MatrixSymbol, ParseError> {
    match spec {
        MatrixSymbolSpec::Grid(rows) => {
            let (s, t) = check_rect(rows)?;
            let mut entries = Vec::with_capacity(s * t);
            for (i, row) in rows.iter().enumerate() {
                for (j, text) in row.iter().enumerate() {
                    entries.push((i, j, entry(i, j, parse_scalar(text))?));
                }
            }
            let blocks: Vec<(usize, usize, &MatrixSymbol)> = entries.iter().map(|(i, j, f)| (*i, *j, f)).collect();
            let label = rows
                .iter()
                .map(|r| r.join(", "))
                .collect::<Vec<_>>()
                .join("; ");
            Ok(MatrixSymbol::from_blocks(s, t, &blocks)?.with_label(format!("[{label}]")))
        }
        MatrixSymbolSpec::Coefficients(list) => {
            let mut shape: Option<(usize, usize)> = None;
            let mut terms = Vec::with_capacity(list.len());
            for (k, rows) in list {
                let (s, t) = check_rect(rows)?;
                if let Some(prev) = shape {
                    if prev != (s, t) {
                        return Err(ParseError::Shape(format!(
                            "coefficient k = {k} has shape {s}x{t}, expected {}x{}",
                            prev.0, prev.1
                        )));
                    }
                }
                shape = Some((s, t));
                let mut m = CMat::zeros(s, t);
                for (i, row) in rows.iter().enumerate() {
                    for (j, text) in row.iter().enumerate() {
                        m[(i, j)] = entry(i, j, parse_constant(text))?;
                    }
                }
                terms.push((*k, m));
            }
            let (s, t) = shape.ok_or_else(|| ParseError::Shape("empty coefficient list".into()))?;
            Ok(MatrixSymbol::trig(s, t, terms)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::SymbolKind;
    use std::collections::BTreeMap;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn scalar_map(f: &MatrixSymbol) -> BTreeMap<i64, Complex64> {
        f.coefficients().unwrap().iter().map(|(&k, m)| (k, m[(0, 0)])).collect()
    }

    #[test]
    fn laplacian_expression() {
        let f = parse_scalar("2 − 2*cos(t)").unwrap();
        let expected: BTreeMap<_, _> = [(-1, c(-1.0)), (0, c(2.0)), (1, c(-1.0))].into();
        assert_eq!(scalar_map(&f), expected);
    }

    #[test]
    fn group_one_f22() {
        let f = parse_scalar("2 - 2*cos(t) - 6*cos(2*t)").unwrap();
        let expected: BTreeMap<_, _> = [(-2, c(-3.0)), (-1, c(-1.0)), (0, c(2.0)), (1, c(-1.0)), (2, c(-3.0))].into();
        assert_eq!(scalar_map(&f), expected);
    }

    #[test]
    fn one_minus_exp() {
        let f = parse_scalar("1−exp(−ι·t)").unwrap();
        let expected: BTreeMap<_, _> = [(-1, c(-1.0)), (0, c(1.0))].into();
        assert_eq!(scalar_map(&f), expected);
        let g = parse_scalar("1 - exp(-i*theta)").unwrap();
        assert_eq!(scalar_map(&g), expected);
    }

    #[test]
    fn theta_squared_is_analytic_with_rule() {
        let f = parse_scalar("t^2").unwrap();
        assert_eq!(f.kind(), SymbolKind::AnalyticL1);
        assert!((f.fourier_coefficient(0).unwrap()[(0, 0)].re - PI * PI / 3.0).abs() < 1e-15);
        for k in 1..6i64 {
            let expected = 2.0 * (-1f64).powi(k as i32) / (k * k) as f64;
            assert!((f.fourier_coefficient(k).unwrap()[(0, 0)].re - expected).abs() < 1e-15);
        }
        f.check_rule_consistency(&[0, 1, 2, 7], 1 << 15, 1e-6).unwrap();
    }

    #[test]
    fn theta_squared_times_trig() {
        let f = parse_scalar("(1 + cos(t)) * t^2 + 3").unwrap();
        f.check_rule_consistency(&[-2, -1, 0, 1, 2, 5], 1 << 16, 1e-6).unwrap();
        let v = f.evaluate(0.5)[(0, 0)].re;
        assert!((v - ((1.0 + 0.5f64.cos()) * 0.25 + 3.0)).abs() < 1e-14);
    }

    #[test]
    fn unsupported_terms() {
        for (src, pos) in [("t", 0), ("t^3", 0), ("cos(t^2)", 4), ("exp(t)", 4), ("cos(0.5*t)", 4), ("1/cos(t)", 2), ("t^2*t^2", 0)] {
            match parse_scalar(src) {
                Err(ParseError::UnsupportedTerm { pos: p, .. }) => assert_eq!(p, pos, "{src}"),
                other => panic!("{src}: {other:?}"),
            }
        }
    }

    #[test]
    fn sine_and_phase() {
        let f = parse_scalar("sin(t)").unwrap();
        let m = scalar_map(&f);
        assert_eq!(m[&1], Complex64::new(0.0, -0.5));
        assert_eq!(m[&-1], Complex64::new(0.0, 0.5));
        let g = parse_scalar("cos(t + pi)").unwrap();
        assert!((g.evaluate(0.3)[(0, 0)] - c(-(0.3f64.cos()))).norm() < 1e-14);
    }

    #[test]
    fn group_two_row_symbol() {
        let spec = MatrixSymbolSpec::Grid(vec![vec!["1+exp(ι·t)".into(), "1−exp(−ι·t)".into()]]);
        let f = parse_matrix_symbol(&spec).unwrap();
        assert_eq!(f.shape(), (1, 2));
        let co = f.coefficients().unwrap();
        assert_eq!(co[&0][(0, 0)], c(1.0));
        assert_eq!(co[&0][(0, 1)], c(1.0));
        assert_eq!(co[&1][(0, 0)], c(1.0));
        assert_eq!(co[&1][(0, 1)], c(0.0));
        assert_eq!(co[&-1][(0, 1)], c(-1.0));
    }

    #[test]
    fn q2_stiffness_coefficient_list() {
        let m = |rows: [[&str; 2]; 2]| rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect();
        let spec = MatrixSymbolSpec::Coefficients(vec![
            (0, m([["16/3", "-8/3"], ["-8/3", "14/3"]])),
            (1, m([["0", "-8/3"], ["0", "1/3"]])),
            (-1, m([["0", "0"], ["-8/3", "1/3"]])),
        ]);
        let f = parse_matrix_symbol(&spec).unwrap();
        assert_eq!(f.shape(), (2, 2));
        assert_eq!(f.fourier_coefficient(0).unwrap()[(1, 1)], c(14.0 / 3.0));
        assert_eq!(f.fourier_coefficient(1).unwrap()[(0, 1)], c(-8.0 / 3.0));
        assert_eq!(f.fourier_coefficient(-1).unwrap()[(1, 0)], c(-8.0 / 3.0));
        assert!(f.is_hermitian());
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(parse_matrix_symbol(&MatrixSymbolSpec::Grid(vec![])), Err(ParseError::Shape(_))));
        let ragged = MatrixSymbolSpec::Grid(vec![vec!["1".into(), "2".into()], vec!["3".into()]]);
        assert!(matches!(parse_matrix_symbol(&ragged), Err(ParseError::Shape(_))));
        let bad = MatrixSymbolSpec::Grid(vec![vec!["1".into(), "cos(".into()]]);
        match parse_matrix_symbol(&bad) {
            Err(ParseError::Entry { row: 1, col: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        let non_const = MatrixSymbolSpec::Coefficients(vec![(0, vec![vec!["cos(t)".into()]])]);
        assert!(parse_matrix_symbol(&non_const).is_err());
    }
}
