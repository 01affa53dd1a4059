// SPDX-License-Identifier: Apache-2.0

//! Recursive-descent parser for SCL with a name-resolution pass.

use std::collections::HashSet;

use super::ast::*;
use super::lexer::{tokenize, Kw, Tok, Token};
use super::ParseError;

type PResult<T> = Result<T, ParseError>;

pub fn parse_program(text: &str) -> PResult<Program> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let mut routines: Vec<Routine> = Vec::new();
    while parser.peek() != &Tok::Eof {
        let r = parser.routine()?;
        if routines.iter().any(|o| o.name == r.name) {
            return Err(ParseError::DuplicateName {
                span: r.span,
                name: r.name,
            });
        }
        resolve(&r)?;
        routines.push(r);
    }
    Ok(Program { routines })
}

/// Parses a single expression (used by tests and the config layer).
pub fn parse_expr(text: &str) -> PResult<Expr> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let e = parser.expr(0)?;
    parser.expect(Tok::Eof, "end of input")?;
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: Kw) -> bool {
        self.eat(&Tok::Keyword(k))
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(ParseError::Syntax {
            span: self.span(),
            message: format!("expected {expected}, found {}", describe(self.peek())),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.error(what)
        }
    }

    fn expect_kw(&mut self, k: Kw) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.error(&format!("`{}`", kw_text(k)))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(name)
            }
            _ => self.error("identifier"),
        }
    }

    fn routine(&mut self) -> PResult<Routine> {
        let span = self.span();
        self.expect_kw(Kw::Routine)?;
        let name = self.ident()?;
        self.expect(Tok::LParen, "`(`")?;
        let mut params = Vec::new();
        if self.peek() != &Tok::RParen {
            loop {
                self.decl_group(&mut params)?;
                if !self.eat(&Tok::Semi) && !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        let result_type = if self.eat(&Tok::Colon) {
            Some(self.ty()?)
        } else {
            None
        };
        let precondition = if self.eat_kw(Kw::Require) {
            self.assertions()?
        } else {
            Vec::new()
        };
        let mut locals = Vec::new();
        if self.eat_kw(Kw::Local) {
            while matches!(self.peek(), Tok::Ident(_)) {
                self.decl_group(&mut locals)?;
                self.eat(&Tok::Semi);
            }
        }
        self.expect_kw(Kw::Do)?;
        let body = self.instrs()?;
        let postcondition = if self.eat_kw(Kw::Ensure) {
            self.assertions()?
        } else {
            Vec::new()
        };
        self.expect_kw(Kw::End)?;

        let mut seen = HashSet::new();
        for d in params.iter().chain(locals.iter()) {
            if d.name == RESULT || !seen.insert(d.name.clone()) {
                return Err(ParseError::DuplicateName {
                    span,
                    name: d.name.clone(),
                });
            }
        }
        Ok(Routine {
            name,
            params,
            result_type,
            locals,
            precondition,
            postcondition,
            body,
            span,
        })
    }

    /// `a, b: TYPE`
    fn decl_group(&mut self, out: &mut Vec<Decl>) -> PResult<()> {
        let mut names = vec![self.ident()?];
        while self.eat(&Tok::Comma) {
            names.push(self.ident()?);
        }
        self.expect(Tok::Colon, "`:`")?;
        let ty = self.ty()?;
        out.extend(names.into_iter().map(|n| Decl::new(n, ty)));
        Ok(())
    }

    fn ty(&mut self) -> PResult<Type> {
        match self.peek() {
            Tok::Keyword(Kw::Integer) => {
                self.bump();
                Ok(Type::Int)
            }
            Tok::Keyword(Kw::Boolean) => {
                self.bump();
                Ok(Type::Bool)
            }
            Tok::Keyword(Kw::Array) => {
                self.bump();
                self.expect(Tok::LBracket, "`[`")?;
                self.expect_kw(Kw::Integer)?;
                self.expect(Tok::RBracket, "`]`")?;
                Ok(Type::IntArray)
            }
            _ => self.error("a type"),
        }
    }

    fn starts_expr(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_)
                | Tok::Int(_)
                | Tok::LParen
                | Tok::Minus
                | Tok::Keyword(Kw::Not | Kw::Old | Kw::Len | Kw::True | Kw::False)
        )
    }

    /// One or more assertions, optionally separated by `;`.
    fn assertions(&mut self) -> PResult<Vec<Expr>> {
        let mut out = vec![self.expr(0)?];
        loop {
            self.eat(&Tok::Semi);
            if !self.starts_expr() {
                break;
            }
            out.push(self.expr(0)?);
        }
        Ok(out)
    }

    fn instrs(&mut self) -> PResult<Vec<Instr>> {
        let mut out = Vec::new();
        loop {
            self.eat(&Tok::Semi);
            match self.peek() {
                Tok::Ident(_) => out.push(self.assign()?),
                Tok::Keyword(Kw::If) => out.push(self.if_instr()?),
                Tok::Keyword(Kw::While) => out.push(self.while_instr()?),
                Tok::Keyword(Kw::Check) => {
                    let span = self.span();
                    self.bump();
                    let cond = self.expr(0)?;
                    self.expect_kw(Kw::End)?;
                    out.push(Instr::Check { cond, span });
                }
                _ => return Ok(out),
            }
        }
    }

    fn assign(&mut self) -> PResult<Instr> {
        let span = self.span();
        let name = self.ident()?;
        let target = if self.eat(&Tok::LBracket) {
            let idx = self.expr(0)?;
            self.expect(Tok::RBracket, "`]`")?;
            LValue::Index(name, idx)
        } else {
            LValue::Var(name)
        };
        self.expect(Tok::Assign, "`:=`")?;
        let value = self.expr(0)?;
        Ok(Instr::Assign {
            target,
            value,
            span,
        })
    }

    fn if_instr(&mut self) -> PResult<Instr> {
        let span = self.span();
        self.expect_kw(Kw::If)?;
        let mut branches = Vec::new();
        let guard = self.expr(0)?;
        self.expect_kw(Kw::Then)?;
        branches.push((guard, self.instrs()?));
        while self.eat_kw(Kw::Elseif) {
            let guard = self.expr(0)?;
            self.expect_kw(Kw::Then)?;
            branches.push((guard, self.instrs()?));
        }
        let (else_block, else_explicit) = if self.eat_kw(Kw::Else) {
            (self.instrs()?, true)
        } else {
            (Vec::new(), false)
        };
        self.expect_kw(Kw::End)?;
        Ok(Instr::If {
            branches,
            else_block,
            else_explicit,
            span,
        })
    }

    fn while_instr(&mut self) -> PResult<Instr> {
        let span = self.span();
        self.expect_kw(Kw::While)?;
        let guard = self.expr(0)?;
        let invariant = if self.eat_kw(Kw::Invariant) {
            self.assertions()?
        } else {
            Vec::new()
        };
        let variant = if self.eat_kw(Kw::Variant) {
            Some(self.expr(0)?)
        } else {
            None
        };
        self.expect_kw(Kw::Do)?;
        let body = self.instrs()?;
        self.expect_kw(Kw::End)?;
        Ok(Instr::While {
            guard,
            invariant,
            variant,
            body,
            span,
        })
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            Tok::Eq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::Keyword(Kw::And) => BinOp::And,
            Tok::Keyword(Kw::Or) => BinOp::Or,
            Tok::Keyword(Kw::Implies) => BinOp::Implies,
            _ => return None,
        })
    }

    /// Precedence climbing; `implies` is right-associative, the rest left.
    fn expr(&mut self, min: u8) -> PResult<Expr> {
        let mut lhs = self.prefix()?;
        while let Some(op) = self.binop() {
            let p = op.precedence();
            if p < min {
                break;
            }
            self.bump();
            let rhs = if op == BinOp::Implies {
                self.expr(p)?
            } else {
                self.expr(p + 1)?
            };
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> PResult<Expr> {
        match self.peek() {
            Tok::Keyword(Kw::Not) => {
                self.bump();
                Ok(Expr::not(self.expr(NOT_PRECEDENCE + 1)?))
            }
            Tok::Minus => {
                let span = self.span();
                self.bump();
                if let Tok::Int(n) = *self.peek() {
                    self.bump();
                    let v = -(n as i128);
                    let v = i64::try_from(v).map_err(|_| ParseError::Syntax {
                        span,
                        message: format!("integer literal `-{n}` out of range"),
                    })?;
                    return self.postfix(Expr::Int(v));
                }
                Ok(Expr::Unary(UnOp::Neg, Box::new(self.prefix()?)))
            }
            Tok::Keyword(Kw::Old) => {
                self.bump();
                Ok(Expr::Old(Box::new(self.prefix()?)))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let span = self.span();
        let e = match self.bump() {
            Tok::Int(n) => Expr::Int(i64::try_from(n).map_err(|_| ParseError::Syntax {
                span,
                message: format!("integer literal `{n}` out of range"),
            })?),
            Tok::Keyword(Kw::True) => Expr::Bool(true),
            Tok::Keyword(Kw::False) => Expr::Bool(false),
            Tok::Ident(name) => Expr::Var(name),
            Tok::Keyword(Kw::Len) => {
                self.expect(Tok::LParen, "`(`")?;
                let inner = self.expr(0)?;
                self.expect(Tok::RParen, "`)`")?;
                Expr::Len(Box::new(inner))
            }
            Tok::LParen => {
                let inner = self.expr(0)?;
                self.expect(Tok::RParen, "`)`")?;
                inner
            }
            other => {
                return Err(ParseError::Syntax {
                    span,
                    message: format!("expected expression, found {}", describe(&other)),
                })
            }
        };
        self.postfix(e)
    }

    fn postfix(&mut self, mut e: Expr) -> PResult<Expr> {
        while self.peek() == &Tok::LBracket {
            self.bump();
            let idx = self.expr(0)?;
            self.expect(Tok::RBracket, "`]`")?;
            e = Expr::Index(Box::new(e), Box::new(idx));
        }
        Ok(e)
    }
}

fn kw_text(k: Kw) -> &'static str {
    match k {
        Kw::Routine => "routine",
        Kw::Require => "require",
        Kw::Local => "local",
        Kw::Do => "do",
        Kw::Ensure => "ensure",
        Kw::End => "end",
        Kw::If => "if",
        Kw::Then => "then",
        Kw::Elseif => "elseif",
        Kw::Else => "else",
        Kw::While => "while",
        Kw::Invariant => "invariant",
        Kw::Variant => "variant",
        Kw::Check => "check",
        Kw::And => "and",
        Kw::Or => "or",
        Kw::Not => "not",
        Kw::Implies => "implies",
        Kw::Old => "old",
        Kw::Len => "len",
        Kw::True => "True",
        Kw::False => "False",
        Kw::Integer => "INTEGER",
        Kw::Boolean => "BOOLEAN",
        Kw::Array => "ARRAY",
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(n) => format!("identifier `{n}`"),
        Tok::Int(n) => format!("integer `{n}`"),
        Tok::Keyword(k) => format!("`{}`", kw_text(*k)),
        Tok::Eof => "end of input".to_string(),
        other => format!("`{}`", sym_text(other)),
    }
}

fn sym_text(t: &Tok) -> &'static str {
    match t {
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::LBracket => "[",
        Tok::RBracket => "]",
        Tok::Colon => ":",
        Tok::Semi => ";",
        Tok::Comma => ",",
        Tok::Assign => ":=",
        Tok::Eq => "=",
        Tok::Ne => "/=",
        Tok::Lt => "<",
        Tok::Le => "<=",
        Tok::Gt => ">",
        Tok::Ge => ">=",
        Tok::Plus => "+",
        Tok::Minus => "-",
        Tok::Star => "*",
        _ => "?",
    }
}

/// Every identifier must name a parameter, a local, or `Result`.
fn resolve(r: &Routine) -> PResult<()> {
    let check_expr = |e: &Expr, span: Span| -> PResult<()> {
        let mut missing = None;
        e.visit(&mut |sub| {
            if let Expr::Var(v) = sub {
                if missing.is_none() && r.lookup(v).is_none() {
                    missing = Some(v.clone());
                }
            }
        });
        match missing {
            Some(name) => Err(ParseError::Undeclared { span, name }),
            None => Ok(()),
        }
    };
    for e in r.precondition.iter().chain(r.postcondition.iter()) {
        check_expr(e, r.span)?;
    }
    fn walk(
        instrs: &[Instr],
        r: &Routine,
        check_expr: &dyn Fn(&Expr, Span) -> PResult<()>,
    ) -> PResult<()> {
        for i in instrs {
            match i {
                Instr::Assign {
                    target,
                    value,
                    span,
                } => {
                    if r.lookup(target.root()).is_none() {
                        return Err(ParseError::Undeclared {
                            span: *span,
                            name: target.root().to_string(),
                        });
                    }
                    if let LValue::Index(_, idx) = target {
                        check_expr(idx, *span)?;
                    }
                    check_expr(value, *span)?;
                }
                Instr::If {
                    branches,
                    else_block,
                    span,
                    ..
                } => {
                    for (g, b) in branches {
                        check_expr(g, *span)?;
                        walk(b, r, check_expr)?;
                    }
                    walk(else_block, r, check_expr)?;
                }
                Instr::While {
                    guard,
                    invariant,
                    variant,
                    body,
                    span,
                } => {
                    check_expr(guard, *span)?;
                    for e in invariant.iter().chain(variant.iter()) {
                        check_expr(e, *span)?;
                    }
                    walk(body, r, check_expr)?;
                }
                Instr::Check { cond, span } => check_expr(cond, *span)?,
            }
        }
        Ok(())
    }
    walk(&r.body, r, &check_expr)
}
