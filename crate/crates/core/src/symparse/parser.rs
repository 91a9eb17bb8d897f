use std::fmt::Write as _;

use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Cos,
    Sin,
    Exp,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Cos => "cos",
            Func::Sin => "sin",
            Func::Exp => "exp",
        }
    }
}

/// Expression tree; every node remembers the byte offset it started at.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Num(f64),
    Pi,
    ImagUnit,
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
    depth: usize,
}

pub(crate) fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, at: 0, depth: 0 };
    let e = p.expr()?;
    let t = p.peek();
    if t.tok != Tok::End {
        return Err(ParseError::Syntax {
            pos: t.pos,
            message: "unexpected trailing input".into(),
        });
    }
    Ok(e)
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.at]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if t.tok != Tok::End {
            self.at += 1;
        }
        t
    }

    fn enter(&mut self, pos: usize) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::Syntax {
                pos,
                message: "expression nested too deeply".into(),
            });
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let pos = self.peek().pos;
        self.enter(pos)?;
        let mut lhs = self.term()?;
        loop {
            let op = self.peek().tok.clone();
            match op {
                Tok::Plus | Tok::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    let pos = lhs.pos;
                    let kind = if op == Tok::Plus {
                        ExprKind::Add(Box::new(lhs), Box::new(rhs))
                    } else {
                        ExprKind::Sub(Box::new(lhs), Box::new(rhs))
                    };
                    lhs = Expr { kind, pos };
                }
                _ => break,
            }
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = self.peek().tok.clone();
            match op {
                Tok::Star | Tok::Slash => {
                    self.bump();
                    let rhs = self.unary()?;
                    let pos = lhs.pos;
                    let kind = if op == Tok::Star {
                        ExprKind::Mul(Box::new(lhs), Box::new(rhs))
                    } else {
                        ExprKind::Div(Box::new(lhs), Box::new(rhs))
                    };
                    lhs = Expr { kind, pos };
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Minus => {
                self.bump();
                self.enter(t.pos)?;
                let inner = self.unary()?;
                self.depth -= 1;
                Ok(Expr {
                    kind: ExprKind::Neg(Box::new(inner)),
                    pos: t.pos,
                })
            }
            Tok::Plus => {
                self.bump();
                self.enter(t.pos)?;
                let inner = self.unary();
                self.depth -= 1;
                inner
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        let caret = self.bump();
        let t = self.bump();
        match t.tok {
            Tok::Num(v) if v >= 0.0 && v.fract() == 0.0 && v <= 64.0 => Ok(Expr {
                pos: base.pos,
                kind: ExprKind::Pow(Box::new(base), v as u32),
            }),
            Tok::Num(_) | Tok::Minus | Tok::LParen | Tok::Ident(_) => Err(ParseError::UnsupportedTerm {
                pos: t.pos,
                term: "only small non-negative integer exponents are supported".into(),
            }),
            _ => Err(ParseError::Syntax {
                pos: caret.pos,
                message: "expected an exponent after '^'".into(),
            }),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let t = self.bump();
        let kind = match t.tok {
            Tok::Num(v) => ExprKind::Num(v),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect_rparen(t.pos)?;
                return Ok(inner);
            }
            Tok::Ident(name) => match name.as_str() {
                "pi" | "π" => ExprKind::Pi,
                "i" | "ι" => ExprKind::ImagUnit,
                "t" | "theta" | "θ" => ExprKind::Var,
                "cos" | "sin" | "exp" => {
                    let func = match name.as_str() {
                        "cos" => Func::Cos,
                        "sin" => Func::Sin,
                        _ => Func::Exp,
                    };
                    let open = self.bump();
                    if open.tok != Tok::LParen {
                        return Err(ParseError::Syntax {
                            pos: open.pos,
                            message: format!("expected '(' after {name}"),
                        });
                    }
                    let arg = self.expr()?;
                    self.expect_rparen(open.pos)?;
                    ExprKind::Call(func, Box::new(arg))
                }
                _ => {
                    return Err(ParseError::UnsupportedTerm {
                        pos: t.pos,
                        term: format!("unknown identifier '{name}'"),
                    })
                }
            },
            Tok::End => {
                return Err(ParseError::Syntax {
                    pos: t.pos,
                    message: "unexpected end of input".into(),
                })
            }
            other => {
                return Err(ParseError::Syntax {
                    pos: t.pos,
                    message: format!("unexpected token {other:?}"),
                })
            }
        };
        Ok(Expr { kind, pos: t.pos })
    }

    fn expect_rparen(&mut self, open: usize) -> Result<(), ParseError> {
        let t = self.bump();
        if t.tok != Tok::RParen {
            return Err(ParseError::Syntax {
                pos: t.pos,
                message: format!("expected ')' to close '(' at {open}"),
            });
        }
        Ok(())
    }
}

/// Fully parenthesised text that parses back to the same tree shape.
pub(crate) fn render(e: &Expr) -> String {
    let mut s = String::new();
    render_into(e, &mut s);
    s
}

fn render_into(e: &Expr, out: &mut String) {
    match &e.kind {
        ExprKind::Num(v) => {
            let _ = write!(out, "{v:?}");
        }
        ExprKind::Pi => out.push_str("pi"),
        ExprKind::ImagUnit => out.push('i'),
        ExprKind::Var => out.push('t'),
        ExprKind::Neg(a) => {
            out.push_str("(-");
            render_into(a, out);
            out.push(')');
        }
        ExprKind::Add(a, b) | ExprKind::Sub(a, b) | ExprKind::Mul(a, b) | ExprKind::Div(a, b) => {
            let op = match &e.kind {
                ExprKind::Add(..) => " + ",
                ExprKind::Sub(..) => " - ",
                ExprKind::Mul(..) => " * ",
                _ => " / ",
            };
            out.push('(');
            render_into(a, out);
            out.push_str(op);
            render_into(b, out);
            out.push(')');
        }
        ExprKind::Pow(a, n) => {
            out.push('(');
            render_into(a, out);
            let _ = write!(out, ")^{n}");
        }
        ExprKind::Call(f, a) => {
            out.push_str(f.name());
            out.push('(');
            render_into(a, out);
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let e = parse("1 - 2*t^2").unwrap();
        match e.kind {
            ExprKind::Sub(_, rhs) => match rhs.kind {
                ExprKind::Mul(_, p) => assert!(matches!(p.kind, ExprKind::Pow(_, 2))),
                other => panic!("{other:?}"),
            },
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let e = parse("-t^2").unwrap();
        assert!(matches!(e.kind, ExprKind::Neg(ref inner) if matches!(inner.kind, ExprKind::Pow(_, 2))));
    }

    #[test]
    fn error_positions() {
        assert!(matches!(parse("cos(t"), Err(ParseError::Syntax { pos: 5, .. })));
        assert!(matches!(parse("2 +"), Err(ParseError::Syntax { pos: 3, .. })));
        assert!(matches!(parse("foo(t)"), Err(ParseError::UnsupportedTerm { pos: 0, .. })));
        assert!(matches!(parse("t^0.5"), Err(ParseError::UnsupportedTerm { pos: 2, .. })));
        assert!(matches!(parse("1 2"), Err(ParseError::Syntax { pos: 2, .. })));
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let src = "(".repeat(5000) + "1" + &")".repeat(5000);
        assert!(parse(&src).is_err());
        let src = "-".repeat(5000) + "1";
        assert!(parse(&src).is_err());
    }

    #[test]
    fn render_reparses_to_same_tree() {
        for src in ["2 - 2*cos(t) - 6*cos(2*t)", "1+exp(i*t)", "(1/3)*(16 - 8*exp(-i*t))", "-t^2 + 0.1"] {
            let e = parse(src).unwrap();
            let again = parse(&render(&e)).unwrap();
            assert_eq!(render(&e), render(&again));
        }
    }
}
