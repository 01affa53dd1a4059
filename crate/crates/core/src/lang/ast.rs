// SPDX-License-Identifier: Apache-2.0

//! Abstract syntax of SCL, the small contract language the generator works on.
//!
//! Source positions are carried in [`Span`], which compares equal to every
//! other span so that structural equality ignores layout.

use std::fmt;

/// Line/column of a syntax node (1-based). Ignored by `==`.
#[derive(Clone, Copy, Debug, Default, Eq)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }
}

impl PartialEq for Span {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Int,
    Bool,
    /// One-dimensional, 0-based array of integers.
    IntArray,
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => f.write_str("INTEGER"),
            Type::Bool => f.write_str("BOOLEAN"),
            Type::IntArray => f.write_str("ARRAY [INTEGER]"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Implies,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Eq => "=",
            BinOp::Ne => "/=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Implies => "implies",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Implies => 1,
            BinOp::Or => 2,
            BinOp::And => 3,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 5,
            BinOp::Add | BinOp::Sub => 6,
            BinOp::Mul => 7,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 5
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul)
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or | BinOp::Implies)
    }
}

/// Precedence of prefix `not`: looser than comparisons, tighter than `and`.
pub const NOT_PRECEDENCE: u8 = 4;
/// Precedence of unary minus and `old`.
pub const PREFIX_PRECEDENCE: u8 = 8;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Var(String),
    Index(Box<Expr>, Box<Expr>),
    Len(Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Entry value of the inner expression; postconditions only.
    Old(Box<Expr>),
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Unary(UnOp::Not, Box::new(e))
    }

    pub fn contains_old(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if matches!(e, Expr::Old(_)) {
                found = true;
            }
        });
        found
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Int(_) | Expr::Bool(_) | Expr::Var(_) => {}
            Expr::Index(a, i) => {
                a.visit(f);
                i.visit(f);
            }
            Expr::Len(a) | Expr::Unary(_, a) | Expr::Old(a) => a.visit(f),
            Expr::Binary(_, l, r) => {
                l.visit(f);
                r.visit(f);
            }
        }
    }

    pub fn mentions(&self, name: &str) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if let Expr::Var(v) = e {
                if v == name {
                    found = true;
                }
            }
        });
        found
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LValue {
    Var(String),
    Index(String, Expr),
}

impl LValue {
    pub fn root(&self) -> &str {
        match self {
            LValue::Var(v) | LValue::Index(v, _) => v,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instr {
    Assign {
        target: LValue,
        value: Expr,
        span: Span,
    },
    If {
        /// `if`/`elseif` arms in order; never empty.
        branches: Vec<(Expr, Vec<Instr>)>,
        else_block: Vec<Instr>,
        else_explicit: bool,
        span: Span,
    },
    While {
        guard: Expr,
        invariant: Vec<Expr>,
        variant: Option<Expr>,
        body: Vec<Instr>,
        span: Span,
    },
    Check {
        cond: Expr,
        span: Span,
    },
}

impl Instr {
    pub fn span(&self) -> Span {
        match self {
            Instr::Assign { span, .. }
            | Instr::If { span, .. }
            | Instr::While { span, .. }
            | Instr::Check { span, .. } => *span,
        }
    }

    pub fn check(cond: Expr) -> Instr {
        Instr::Check {
            cond,
            span: Span::default(),
        }
    }

    pub fn assign(name: impl Into<String>, value: Expr) -> Instr {
        Instr::Assign {
            target: LValue::Var(name.into()),
            value,
            span: Span::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decl {
    pub name: String,
    pub ty: Type,
}

impl Decl {
    pub fn new(name: impl Into<String>, ty: Type) -> Self {
        Decl {
            name: name.into(),
            ty,
        }
    }
}

/// Name of the implicit result variable.
pub const RESULT: &str = "Result";

#[derive(Clone, Debug, PartialEq)]
pub struct Routine {
    pub name: String,
    pub params: Vec<Decl>,
    pub result_type: Option<Type>,
    pub locals: Vec<Decl>,
    pub precondition: Vec<Expr>,
    pub postcondition: Vec<Expr>,
    pub body: Vec<Instr>,
    pub span: Span,
}

impl Routine {
    /// Type of any variable in scope: parameter, local or `Result`.
    pub fn lookup(&self, name: &str) -> Option<Type> {
        self.params
            .iter()
            .chain(self.locals.iter())
            .find(|d| d.name == name)
            .map(|d| d.ty)
            .or_else(|| {
                if name == RESULT {
                    self.result_type
                } else {
                    None
                }
            })
    }

    pub fn is_param(&self, name: &str) -> bool {
        self.params.iter().any(|d| d.name == name)
    }

    /// Locals plus `Result`, the variables initialised to defaults on entry.
    pub fn initialised_vars(&self) -> Vec<Decl> {
        let mut vars = self.locals.clone();
        if let Some(t) = self.result_type {
            vars.push(Decl::new(RESULT, t));
        }
        vars
    }

    pub fn has_loops(&self) -> bool {
        fn any_loop(instrs: &[Instr]) -> bool {
            instrs.iter().any(|i| match i {
                Instr::While { .. } => true,
                Instr::If {
                    branches,
                    else_block,
                    ..
                } => branches.iter().any(|(_, b)| any_loop(b)) || any_loop(else_block),
                _ => false,
            })
        }
        any_loop(&self.body)
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Program {
    pub routines: Vec<Routine>,
}

impl Program {
    pub fn routine(&self, name: &str) -> Option<&Routine> {
        self.routines.iter().find(|r| r.name == name)
    }
}
