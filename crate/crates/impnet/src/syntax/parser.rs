//! Recursive descent parser for ImpNet programs and the shared ground value
//! literal syntax used by binding files and `MixFst`/`MixSnd` action sets.

use thiserror::Error;

use super::ast::*;
use super::lexer::{tokenize, LexError, Span, Tok, Token};
use crate::domain::{Action, ActionSet, Event, Ip, Pattern, SwitchId, Value};
use crate::netsim::Query;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("{0}")]
    Lex(#[from] LexError),
    #[error("syntax error at {span}: expected {expected}, found {found}")]
    Unexpected {
        expected: String,
        found: String,
        span: Span,
    },
    #[error("syntax error at {span}: duplicate definition of `{name}`")]
    DuplicateDef { name: String, span: Span },
}

pub type ParseResult<T> = Result<T, ParseError>;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> ParseResult<Self> {
        Ok(Parser {
            toks: tokenize(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn unexpected<T>(&self, expected: &str) -> ParseResult<T> {
        Err(ParseError::Unexpected {
            expected: expected.to_string(),
            found: self.peek().to_string(),
            span: self.span(),
        })
    }

    fn expect(&mut self, tok: Tok) -> ParseResult<()> {
        if self.peek() == &tok {
            self.advance();
            Ok(())
        } else {
            self.unexpected(&tok.to_string())
        }
    }

    fn ident(&mut self, what: &str) -> ParseResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok(s)
            }
            _ => self.unexpected(what),
        }
    }

    fn int(&mut self) -> ParseResult<i64> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.advance();
                Ok(n)
            }
            _ => self.unexpected("an integer"),
        }
    }

    fn program(&mut self) -> ParseResult<Program> {
        let mut defs: Vec<(String, Query)> = Vec::new();
        while self.peek() != &Tok::DefsEnd {
            let span = self.span();
            let name = self.ident("a definition or `>>`")?;
            self.expect(Tok::Equals)?;
            let q = self.query()?;
            self.expect(Tok::Semi)?;
            if defs.iter().any(|(x, _)| x == &name) {
                return Err(ParseError::DuplicateDef { name, span });
            }
            defs.push((name, q));
        }
        self.expect(Tok::DefsEnd)?;
        let mut body = Vec::new();
        while self.peek() != &Tok::Eof {
            body.push(self.stmt()?);
        }
        if body.is_empty() {
            return self.unexpected("at least one statement");
        }
        Ok(Program { defs, body })
    }

    fn query(&mut self) -> ParseResult<Query> {
        let name = self.ident("a query")?;
        match name.as_str() {
            "Switches" => Ok(Query::Switches),
            "SourceIps" => Ok(Query::SourceIps),
            "ProhibtedIps" => Ok(Query::ProhibtedIps),
            "Packets" => {
                self.expect(Tok::LParen)?;
                let v = self.value()?;
                let p = match v {
                    Value::Pattern(p) => p,
                    other => {
                        return Err(ParseError::Unexpected {
                            expected: "a pattern".to_string(),
                            found: other.to_string(),
                            span: self.span(),
                        })
                    }
                };
                self.expect(Tok::RParen)?;
                Ok(Query::Packets(p))
            }
            _ => self.unexpected("Switches, SourceIps, ProhibtedIps or Packets"),
        }
    }

    fn stmt(&mut self) -> ParseResult<Stmt> {
        match self.peek().clone() {
            Tok::Ident(name) => match name.as_str() {
                "AddRules" => {
                    self.advance();
                    self.expect(Tok::LParen)?;
                    let x = self.ident("a variable")?;
                    self.expect(Tok::RParen)?;
                    self.expect(Tok::Semi)?;
                    Ok(Stmt::AddRules(x))
                }
                "Register" => {
                    self.advance();
                    self.expect(Tok::Semi)?;
                    Ok(Stmt::Register)
                }
                "Send" => {
                    self.advance();
                    self.expect(Tok::LParen)?;
                    let x = self.ident("a variable")?;
                    self.expect(Tok::RParen)?;
                    self.expect(Tok::Semi)?;
                    Ok(Stmt::Send(x))
                }
                "if" => {
                    self.advance();
                    self.expect(Tok::LParen)?;
                    let x = self.ident("a variable")?;
                    self.expect(Tok::RParen)?;
                    self.keyword("then")?;
                    let then_b = self.block()?;
                    self.keyword("else")?;
                    let else_b = self.block()?;
                    Ok(Stmt::If(x, then_b, else_b))
                }
                "while" => {
                    self.advance();
                    self.expect(Tok::LParen)?;
                    let x = self.ident("a variable")?;
                    self.expect(Tok::RParen)?;
                    self.keyword("do")?;
                    let body = self.block()?;
                    Ok(Stmt::While(x, body))
                }
                _ => {
                    self.advance();
                    self.expect(Tok::Assign)?;
                    let et = self.event_transformer()?;
                    self.expect(Tok::Semi)?;
                    Ok(Stmt::Assign(name, et))
                }
            },
            _ => self.unexpected("a statement"),
        }
    }

    fn keyword(&mut self, kw: &str) -> ParseResult<()> {
        match self.peek().clone() {
            Tok::Ident(s) if s == kw => {
                self.advance();
                Ok(())
            }
            _ => self.unexpected(&format!("`{kw}`")),
        }
    }

    fn block(&mut self) -> ParseResult<Vec<Stmt>> {
        self.expect(Tok::LBrace)?;
        let mut stmts = Vec::new();
        while self.peek() != &Tok::RBrace {
            stmts.push(self.stmt()?);
        }
        self.expect(Tok::RBrace)?;
        if stmts.is_empty() {
            return self.unexpected("at least one statement in block");
        }
        Ok(stmts)
    }

    fn event_transformer(&mut self) -> ParseResult<EventTransformer> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.advance();
                Ok(EventTransformer::IntLit(n))
            }
            Tok::Ident(name) => {
                let make_unary_lam = |p: &mut Parser| -> ParseResult<(String, Lambda)> {
                    p.advance();
                    p.expect(Tok::LParen)?;
                    let x = p.ident("a variable")?;
                    p.expect(Tok::Comma)?;
                    let lam = p.lambda()?;
                    p.expect(Tok::RParen)?;
                    Ok((x, lam))
                };
                match name.as_str() {
                    "Lift" => {
                        let (x, lam) = make_unary_lam(self)?;
                        Ok(EventTransformer::Lift(x, lam))
                    }
                    "ApplyLft" => {
                        let (x, lam) = make_unary_lam(self)?;
                        Ok(EventTransformer::ApplyLft(x, lam))
                    }
                    "ApplyRit" => {
                        let (x, lam) = make_unary_lam(self)?;
                        Ok(EventTransformer::ApplyRit(x, lam))
                    }
                    "Filter" => {
                        let (x, lam) = make_unary_lam(self)?;
                        Ok(EventTransformer::Filter(x, lam))
                    }
                    "Merge" => {
                        self.advance();
                        self.expect(Tok::LParen)?;
                        let x1 = self.ident("a variable")?;
                        self.expect(Tok::Comma)?;
                        let x2 = self.ident("a variable")?;
                        self.expect(Tok::RParen)?;
                        Ok(EventTransformer::Merge(x1, x2))
                    }
                    "MixFst" => {
                        self.advance();
                        self.expect(Tok::LParen)?;
                        let a = self.action_set()?;
                        self.expect(Tok::Comma)?;
                        let x1 = self.ident("a variable")?;
                        self.expect(Tok::Comma)?;
                        let x2 = self.ident("a variable")?;
                        self.expect(Tok::RParen)?;
                        Ok(EventTransformer::MixFst(a, x1, x2))
                    }
                    "MixSnd" => {
                        self.advance();
                        self.expect(Tok::LParen)?;
                        let x1 = self.ident("a variable")?;
                        self.expect(Tok::Comma)?;
                        let a = self.action_set()?;
                        self.expect(Tok::Comma)?;
                        let x2 = self.ident("a variable")?;
                        self.expect(Tok::RParen)?;
                        Ok(EventTransformer::MixSnd(x1, a, x2))
                    }
                    "Once" => {
                        self.advance();
                        self.expect(Tok::LParen)?;
                        let x = self.ident("a variable")?;
                        self.expect(Tok::Comma)?;
                        let span = self.span();
                        let n = self.int()?;
                        if n < 1 {
                            return Err(ParseError::Unexpected {
                                expected: "a positive replication count".to_string(),
                                found: n.to_string(),
                                span,
                            });
                        }
                        self.expect(Tok::RParen)?;
                        Ok(EventTransformer::Once(x, n as u32))
                    }
                    "MakForwRule" => {
                        self.advance();
                        self.expect(Tok::LParen)?;
                        let x = self.ident("a variable")?;
                        self.expect(Tok::RParen)?;
                        Ok(EventTransformer::MakForwRule(x))
                    }
                    "MakeRule" => {
                        self.advance();
                        self.expect(Tok::LParen)?;
                        let x = self.ident("a variable")?;
                        self.expect(Tok::RParen)?;
                        Ok(EventTransformer::MakeRule(x))
                    }
                    _ => self.unexpected("an event transformer"),
                }
            }
            _ => self.unexpected("an event transformer"),
        }
    }

    fn lambda(&mut self) -> ParseResult<Lambda> {
        self.expect(Tok::Backslash)?;
        let param = self.ident("a lambda parameter")?;
        self.expect(Tok::Dot)?;
        let body = self.expr()?;
        Ok(Lambda { param, body })
    }

    fn expr(&mut self) -> ParseResult<Expr> {
        let lhs = self.additive()?;
        let op = match self.peek() {
            Tok::EqEq => Some(BinOp::Eq),
            Tok::NotEq => Some(BinOp::Ne),
            Tok::Le => Some(BinOp::Le),
            Tok::Ge => Some(BinOp::Ge),
            Tok::Lt => Some(BinOp::Lt),
            Tok::Gt => Some(BinOp::Gt),
            _ => None,
        };
        match op {
            Some(op) => {
                self.advance();
                let rhs = self.additive()?;
                Ok(Expr::Binop(op, Box::new(lhs), Box::new(rhs)))
            }
            None => Ok(lhs),
        }
    }

    fn additive(&mut self) -> ParseResult<Expr> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.advance();
            let rhs = self.multiplicative()?;
            lhs = Expr::Binop(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn multiplicative(&mut self) -> ParseResult<Expr> {
        let mut lhs = self.expr_atom()?;
        while self.peek() == &Tok::Star {
            self.advance();
            let rhs = self.expr_atom()?;
            lhs = Expr::Binop(BinOp::Mul, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn expr_atom(&mut self) -> ParseResult<Expr> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.advance();
                Ok(Expr::Int(n))
            }
            Tok::Underscore => {
                self.advance();
                Ok(Expr::Wildcard)
            }
            Tok::LParen => {
                self.advance();
                let first = self.expr()?;
                let mut items = vec![first];
                while self.peek() == &Tok::Comma {
                    self.advance();
                    items.push(self.expr()?);
                }
                self.expect(Tok::RParen)?;
                if items.len() == 1 {
                    Ok(items.pop().unwrap())
                } else {
                    Ok(Expr::Tuple(items))
                }
            }
            Tok::Ident(name) => {
                let unary = |p: &mut Parser| -> ParseResult<Box<Expr>> {
                    p.advance();
                    p.expect(Tok::LParen)?;
                    let e = p.expr()?;
                    p.expect(Tok::RParen)?;
                    Ok(Box::new(e))
                };
                let binary_var = |p: &mut Parser| -> ParseResult<(Box<Expr>, String)> {
                    p.advance();
                    p.expect(Tok::LParen)?;
                    let e = p.expr()?;
                    p.expect(Tok::Comma)?;
                    let z = p.ident("a variable")?;
                    p.expect(Tok::RParen)?;
                    Ok((Box::new(e), z))
                };
                match name.as_str() {
                    "fst" => Ok(Expr::Fst(unary(self)?)),
                    "snd" => Ok(Expr::Snd(unary(self)?)),
                    "port" => Ok(Expr::Port(unary(self)?)),
                    "switch" => {
                        let (e, z) = binary_var(self)?;
                        Ok(Expr::Switch(e, z))
                    }
                    "prohibit" => {
                        let (e, z) = binary_var(self)?;
                        Ok(Expr::Prohibit(e, z))
                    }
                    "srcip" => Ok(Expr::Header(HeaderFn::SrcIp, unary(self)?)),
                    "dstip" => Ok(Expr::Header(HeaderFn::DstIp, unary(self)?)),
                    "srcport" => Ok(Expr::Header(HeaderFn::SrcPort, unary(self)?)),
                    "dstport" => Ok(Expr::Header(HeaderFn::DstPort, unary(self)?)),
                    "inport" => Ok(Expr::Header(HeaderFn::InPort, unary(self)?)),
                    "sendout" => Ok(Expr::SendOut(unary(self)?)),
                    "sendall" => {
                        self.advance();
                        Ok(Expr::SendAll)
                    }
                    "sendcontroller" => {
                        self.advance();
                        Ok(Expr::SendController)
                    }
                    _ => {
                        self.advance();
                        Ok(Expr::Var(name))
                    }
                }
            }
            _ => self.unexpected("an expression"),
        }
    }

    fn action_set(&mut self) -> ParseResult<ActionSet> {
        self.expect(Tok::LBrace)?;
        let mut items = Vec::new();
        if self.peek() != &Tok::RBrace {
            items.push(self.value()?);
            while self.peek() == &Tok::Comma {
                self.advance();
                items.push(self.value()?);
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(ActionSet::from_values(items))
    }

    /// Ground value literal, as used in binding files and action sets.
    fn value(&mut self) -> ParseResult<Value> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.advance();
                Ok(Value::Int(n))
            }
            Tok::IpLit(a) => {
                self.advance();
                Ok(Value::Ip(Ip::new(a)))
            }
            Tok::Underscore => {
                self.advance();
                Ok(Value::Wildcard)
            }
            Tok::LParen => {
                self.advance();
                let first = self.value()?;
                let mut items = vec![first];
                while self.peek() == &Tok::Comma {
                    self.advance();
                    items.push(self.value()?);
                }
                self.expect(Tok::RParen)?;
                if items.len() == 1 {
                    Ok(items.pop().unwrap())
                } else {
                    Ok(Value::Tuple(items))
                }
            }
            Tok::Ident(name) => {
                let int_arg = |p: &mut Parser| -> ParseResult<i64> {
                    p.advance();
                    p.expect(Tok::LParen)?;
                    let n = p.int()?;
                    p.expect(Tok::RParen)?;
                    Ok(n)
                };
                match name.as_str() {
                    "sendall" => {
                        self.advance();
                        Ok(Value::Action(Action::SendAll))
                    }
                    "sendcontroller" => {
                        self.advance();
                        Ok(Value::Action(Action::SendController))
                    }
                    "prohibit" => {
                        self.advance();
                        Ok(Value::Action(Action::Prohibit))
                    }
                    "sendout" => Ok(Value::Action(Action::SendOut(int_arg(self)?))),
                    "change" => {
                        self.advance();
                        self.expect(Tok::LParen)?;
                        let field = self.ident("a header field")?;
                        self.expect(Tok::Comma)?;
                        let v = self.value()?;
                        self.expect(Tok::RParen)?;
                        Ok(Value::Action(Action::Change(field, Box::new(v))))
                    }
                    "srcport" => Ok(Value::Pattern(Pattern::SrcPort(int_arg(self)?))),
                    "dstport" => Ok(Value::Pattern(Pattern::DstPort(int_arg(self)?))),
                    "inport" => Ok(Value::Pattern(Pattern::InPort(int_arg(self)?))),
                    "port" => Ok(Value::Port(int_arg(self)?)),
                    "srcip" | "dstip" => {
                        self.advance();
                        self.expect(Tok::LParen)?;
                        let ip = match self.peek().clone() {
                            Tok::IpLit(a) => {
                                self.advance();
                                Ip::new(a)
                            }
                            _ => return self.unexpected("an IP literal"),
                        };
                        self.expect(Tok::RParen)?;
                        Ok(Value::Pattern(if name == "srcip" {
                            Pattern::SrcIp(ip)
                        } else {
                            Pattern::DstIp(ip)
                        }))
                    }
                    "matchall" => {
                        self.advance();
                        Ok(Value::Pattern(Pattern::MatchAll))
                    }
                    _ => {
                        self.advance();
                        Ok(Value::Switch(SwitchId::new(name)))
                    }
                }
            }
            _ => self.unexpected("a value literal"),
        }
    }

    fn event_literal(&mut self) -> ParseResult<Event> {
        self.expect(Tok::LParen)?;
        let mut items = Vec::new();
        if self.peek() != &Tok::RParen {
            items.push(self.value()?);
            while self.peek() == &Tok::Comma {
                self.advance();
                items.push(self.value()?);
            }
        }
        self.expect(Tok::RParen)?;
        Ok(Event::new(items))
    }
}

/// Parse a complete `.impnet` program.
pub fn parse_program(text: &str) -> ParseResult<Program> {
    let mut p = Parser::new(text)?;
    let prog = p.program()?;
    p.expect(Tok::Eof)?;
    Ok(prog)
}

/// Parse a single statement (used by tests and the pretty-print round trip).
pub fn parse_stmt(text: &str) -> ParseResult<Stmt> {
    let mut p = Parser::new(text)?;
    let s = p.stmt()?;
    p.expect(Tok::Eof)?;
    Ok(s)
}

/// Parse an event literal such as `((srcport(80), sendall, _), (inport(1), sendcontroller, _))`.
pub fn parse_event_literal(text: &str) -> ParseResult<Event> {
    let mut p = Parser::new(text)?;
    let ev = p.event_literal()?;
    p.expect(Tok::Eof)?;
    Ok(ev)
}
