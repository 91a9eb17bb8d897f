use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: usize,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some(&(pos, ch)) = it.peek() {
        if ch.is_whitespace() {
            it.next();
            continue;
        }
        let simple = match ch {
            '+' => Some(Tok::Plus),
            '-' | '\u{2212}' => Some(Tok::Minus),
            '*' | '\u{b7}' | '\u{d7}' | '\u{22c5}' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            it.next();
            out.push(Token { tok, pos });
            continue;
        }
        if ch.is_ascii_digit() || ch == '.' {
            let start = pos;
            let mut end = pos;
            let mut seen_exp = false;
            let mut prev = ' ';
            while let Some(&(p, c)) = it.peek() {
                let accept = c.is_ascii_digit()
                    || c == '.'
                    || (!seen_exp && (c == 'e' || c == 'E'))
                    || ((c == '+' || c == '-') && (prev == 'e' || prev == 'E'));
                if !accept {
                    break;
                }
                if c == 'e' || c == 'E' {
                    // only an exponent when followed by a digit or sign
                    let rest = &src[p + 1..];
                    let next = rest.chars().next();
                    let ok = match next {
                        Some(d) if d.is_ascii_digit() => true,
                        Some('+') | Some('-') => rest.chars().nth(1).is_some_and(|d| d.is_ascii_digit()),
                        _ => false,
                    };
                    if !ok {
                        break;
                    }
                    seen_exp = true;
                }
                prev = c;
                end = p + c.len_utf8();
                it.next();
            }
            let text = &src[start..end];
            let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                pos: start,
                message: format!("malformed number '{text}'"),
            })?;
            if !value.is_finite() {
                return Err(ParseError::Syntax {
                    pos: start,
                    message: format!("number '{text}' is not finite"),
                });
            }
            out.push(Token {
                tok: Tok::Num(value),
                pos: start,
            });
            continue;
        }
        if ch.is_alphabetic() || ch == '_' {
            let start = pos;
            let mut end = pos;
            while let Some(&(p, c)) = it.peek() {
                if !(c.is_alphanumeric() || c == '_') {
                    break;
                }
                end = p + c.len_utf8();
                it.next();
            }
            out.push(Token {
                tok: Tok::Ident(src[start..end].to_string()),
                pos: start,
            });
            continue;
        }
        return Err(ParseError::Syntax {
            pos,
            message: format!("unexpected character '{ch}'"),
        });
    }
    out.push(Token {
        tok: Tok::End,
        pos: src.len(),
    });
    Ok(out)
}
