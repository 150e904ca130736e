//! Tokenizer for `.impnet` programs and the shared value-literal syntax.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    /// Dotted-quad style literal, e.g. `10.0.0.1`.
    IpLit(String),
    Assign,    // :=
    Equals,    // =
    Semi,      // ;
    DefsEnd,   // >>
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Backslash,
    Dot,
    Underscore,
    EqEq,
    NotEq,
    Le,
    Ge,
    Lt,
    Gt,
    Plus,
    Minus,
    Star,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::IpLit(s) => write!(f, "`{s}`"),
            Tok::Assign => write!(f, "`:=`"),
            Tok::Equals => write!(f, "`=`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::DefsEnd => write!(f, "`>>`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Backslash => write!(f, "`\\`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Underscore => write!(f, "`_`"),
            Tok::EqEq => write!(f, "`==`"),
            Tok::NotEq => write!(f, "`!=`"),
            Tok::Le => write!(f, "`<=`"),
            Tok::Ge => write!(f, "`>=`"),
            Tok::Lt => write!(f, "`<`"),
            Tok::Gt => write!(f, "`>`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at {span}: {msg}")]
pub struct LexError {
    pub span: Span,
    pub msg: String,
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let mut toks = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    macro_rules! push {
        ($tok:expr, $span:expr, $len:expr) => {{
            toks.push(Token { tok: $tok, span: $span });
            i += $len;
            col += $len;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                // dotted-quad IP literal: d+.d+.d+.d+
                let mut j = i;
                let mut groups = 1;
                while groups < 4 && j < chars.len() && chars[j] == '.' {
                    let mut k = j + 1;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    if k == j + 1 {
                        break;
                    }
                    j = k;
                    groups += 1;
                }
                if groups == 4 {
                    let text: String = chars[start..j].iter().collect();
                    col += j - start;
                    i = j;
                    toks.push(Token {
                        tok: Tok::IpLit(text),
                        span,
                    });
                } else {
                    let text: String = chars[start..i].iter().collect();
                    let n = text.parse::<i64>().map_err(|_| LexError {
                        span,
                        msg: format!("integer literal `{text}` out of range"),
                    })?;
                    col += i - start;
                    toks.push(Token {
                        tok: Tok::Int(n),
                        span,
                    });
                }
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                col += i - start;
                toks.push(Token {
                    tok: Tok::Ident(text),
                    span,
                });
            }
            '_' => {
                // `_` followed by ident chars is an identifier tail; alone it
                // is the wildcard
                if i + 1 < chars.len() && (chars[i + 1].is_ascii_alphanumeric() || chars[i + 1] == '_')
                {
                    let start = i;
                    while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                        i += 1;
                    }
                    let text: String = chars[start..i].iter().collect();
                    col += i - start;
                    toks.push(Token {
                        tok: Tok::Ident(text),
                        span,
                    });
                } else {
                    push!(Tok::Underscore, span, 1);
                }
            }
            ':' if chars.get(i + 1) == Some(&'=') => push!(Tok::Assign, span, 2),
            '>' if chars.get(i + 1) == Some(&'>') => push!(Tok::DefsEnd, span, 2),
            '=' if chars.get(i + 1) == Some(&'=') => push!(Tok::EqEq, span, 2),
            '!' if chars.get(i + 1) == Some(&'=') => push!(Tok::NotEq, span, 2),
            '<' if chars.get(i + 1) == Some(&'=') => push!(Tok::Le, span, 2),
            '>' if chars.get(i + 1) == Some(&'=') => push!(Tok::Ge, span, 2),
            '=' => push!(Tok::Equals, span, 1),
            ';' => push!(Tok::Semi, span, 1),
            '(' => push!(Tok::LParen, span, 1),
            ')' => push!(Tok::RParen, span, 1),
            '{' => push!(Tok::LBrace, span, 1),
            '}' => push!(Tok::RBrace, span, 1),
            '[' => push!(Tok::LBracket, span, 1),
            ']' => push!(Tok::RBracket, span, 1),
            ',' => push!(Tok::Comma, span, 1),
            '\\' => push!(Tok::Backslash, span, 1),
            '.' => push!(Tok::Dot, span, 1),
            '<' => push!(Tok::Lt, span, 1),
            '>' => push!(Tok::Gt, span, 1),
            '+' => push!(Tok::Plus, span, 1),
            '-' => push!(Tok::Minus, span, 1),
            '*' => push!(Tok::Star, span, 1),
            _ => {
                return Err(LexError {
                    span,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    toks.push(Token {
        tok: Tok::Eof,
        span: Span { line, col },
    });
    Ok(toks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_assignment_and_lambda() {
        let toks = tokenize("x := Lift(z, \\t.(t, y));").unwrap();
        let kinds: Vec<&Tok> = toks.iter().map(|t| &t.tok).collect();
        assert_eq!(kinds[0], &Tok::Ident("x".into()));
        assert_eq!(kinds[1], &Tok::Assign);
        assert!(kinds.contains(&&Tok::Backslash));
        assert!(kinds.contains(&&Tok::Dot));
    }

    #[test]
    fn lexes_ip_literals_and_ints() {
        let toks = tokenize("srcip(10.0.0.1) 80").unwrap();
        assert!(toks.iter().any(|t| t.tok == Tok::IpLit("10.0.0.1".into())));
        assert!(toks.iter().any(|t| t.tok == Tok::Int(80)));
    }

    #[test]
    fn tracks_line_and_column() {
        let toks = tokenize("x\n  y").unwrap();
        assert_eq!(toks[1].span, Span { line: 2, col: 3 });
    }
}
