// SPDX-License-Identifier: Apache-2.0

//! SMT-LIB terms with simplifying constructors.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sort {
    Int,
    Bool,
    IntArray,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Int => "Int",
            Sort::Bool => "Bool",
            Sort::IntArray => "(Array Int Int)",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cmp {
    Eq,
    Lt,
    Le,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Int(i128),
    Bool(bool),
    Sym(String),
    Not(Box<Term>),
    And(Vec<Term>),
    Or(Vec<Term>),
    Implies(Box<Term>, Box<Term>),
    Ite(Box<Term>, Box<Term>, Box<Term>),
    Cmp(Cmp, Box<Term>, Box<Term>),
    Add(Vec<Term>),
    Sub(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
    Neg(Box<Term>),
    Select(Box<Term>, Box<Term>),
    Store(Box<Term>, Box<Term>, Box<Term>),
    ConstArray(Box<Term>),
}

pub const TRUE: Term = Term::Bool(true);
pub const FALSE: Term = Term::Bool(false);

#[allow(clippy::should_implement_trait)]
impl Term {
    pub fn sym(name: impl Into<String>) -> Term {
        Term::Sym(name.into())
    }

    pub fn int(n: impl Into<i128>) -> Term {
        Term::Int(n.into())
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Term::Bool(true))
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Term::Bool(false))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(t: Term) -> Term {
        match t {
            Term::Bool(b) => Term::Bool(!b),
            Term::Not(inner) => *inner,
            other => Term::Not(Box::new(other)),
        }
    }

    pub fn and(ts: impl IntoIterator<Item = Term>) -> Term {
        let mut out = Vec::new();
        for t in ts {
            match t {
                Term::Bool(true) => {}
                Term::Bool(false) => return FALSE,
                Term::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => TRUE,
            1 => out.pop().unwrap(),
            _ => Term::And(out),
        }
    }

    pub fn or(ts: impl IntoIterator<Item = Term>) -> Term {
        let mut out = Vec::new();
        for t in ts {
            match t {
                Term::Bool(false) => {}
                Term::Bool(true) => return TRUE,
                Term::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => FALSE,
            1 => out.pop().unwrap(),
            _ => Term::Or(out),
        }
    }

    pub fn implies(a: Term, b: Term) -> Term {
        match (a, b) {
            (Term::Bool(true), b) => b,
            (Term::Bool(false), _) | (_, Term::Bool(true)) => TRUE,
            (a, Term::Bool(false)) => Term::not(a),
            (a, b) if a == b => TRUE,
            (a, b) => Term::Implies(Box::new(a), Box::new(b)),
        }
    }

    pub fn ite(c: Term, t: Term, e: Term) -> Term {
        match c {
            Term::Bool(true) => t,
            Term::Bool(false) => e,
            _ if t == e => t,
            c => Term::Ite(Box::new(c), Box::new(t), Box::new(e)),
        }
    }

    pub fn eq(a: Term, b: Term) -> Term {
        match (&a, &b) {
            (Term::Int(x), Term::Int(y)) => Term::Bool(x == y),
            (Term::Bool(x), Term::Bool(y)) => Term::Bool(x == y),
            (Term::Bool(true), _) => b,
            (_, Term::Bool(true)) => a,
            (Term::Bool(false), _) => Term::not(b),
            (_, Term::Bool(false)) => Term::not(a),
            _ if a == b => TRUE,
            _ => Term::Cmp(Cmp::Eq, Box::new(a), Box::new(b)),
        }
    }

    pub fn lt(a: Term, b: Term) -> Term {
        match (&a, &b) {
            (Term::Int(x), Term::Int(y)) => Term::Bool(x < y),
            _ if a == b => FALSE,
            _ => Term::Cmp(Cmp::Lt, Box::new(a), Box::new(b)),
        }
    }

    pub fn le(a: Term, b: Term) -> Term {
        match (&a, &b) {
            (Term::Int(x), Term::Int(y)) => Term::Bool(x <= y),
            _ if a == b => TRUE,
            _ => Term::Cmp(Cmp::Le, Box::new(a), Box::new(b)),
        }
    }

    pub fn add(a: Term, b: Term) -> Term {
        match (a, b) {
            (Term::Int(x), Term::Int(y)) => x.checked_add(y).map_or_else(
                || Term::Add(vec![Term::Int(x), Term::Int(y)]),
                Term::Int,
            ),
            (Term::Int(0), t) | (t, Term::Int(0)) => t,
            (a, b) => Term::Add(vec![a, b]),
        }
    }

    pub fn sub(a: Term, b: Term) -> Term {
        match (a, b) {
            (Term::Int(x), Term::Int(y)) => x.checked_sub(y).map_or_else(
                || Term::Sub(Box::new(Term::Int(x)), Box::new(Term::Int(y))),
                Term::Int,
            ),
            (t, Term::Int(0)) => t,
            (a, b) => Term::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Term, b: Term) -> Term {
        match (a, b) {
            (Term::Int(x), Term::Int(y)) => x.checked_mul(y).map_or_else(
                || Term::Mul(Box::new(Term::Int(x)), Box::new(Term::Int(y))),
                Term::Int,
            ),
            (Term::Int(1), t) | (t, Term::Int(1)) => t,
            (a, b) => Term::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn neg(a: Term) -> Term {
        match a {
            Term::Int(x) => Term::Int(-x),
            Term::Neg(inner) => *inner,
            other => Term::Neg(Box::new(other)),
        }
    }

    pub fn select(a: Term, i: Term) -> Term {
        match a {
            Term::ConstArray(v) => *v,
            Term::Store(inner, j, v) => {
                if *j == i {
                    *v
                } else if matches!((&*j, &i), (Term::Int(_), Term::Int(_))) {
                    // Distinct literal indices: look through the store.
                    Term::select(*inner, i)
                } else {
                    Term::Select(Box::new(Term::Store(inner, j, v)), Box::new(i))
                }
            }
            a => Term::Select(Box::new(a), Box::new(i)),
        }
    }

    pub fn store(a: Term, i: Term, v: Term) -> Term {
        Term::Store(Box::new(a), Box::new(i), Box::new(v))
    }

    pub fn const_array(v: Term) -> Term {
        Term::ConstArray(Box::new(v))
    }

    /// Replaces symbols according to `f` (returning `None` keeps the symbol),
    /// re-simplifying on the way up.
    pub fn substitute(&self, f: &dyn Fn(&str) -> Option<Term>) -> Term {
        let s = |t: &Term| t.substitute(f);
        match self {
            Term::Int(_) | Term::Bool(_) => self.clone(),
            Term::Sym(name) => f(name).unwrap_or_else(|| self.clone()),
            Term::Not(a) => Term::not(s(a)),
            Term::And(ts) => Term::and(ts.iter().map(s)),
            Term::Or(ts) => Term::or(ts.iter().map(s)),
            Term::Implies(a, b) => Term::implies(s(a), s(b)),
            Term::Ite(c, a, b) => Term::ite(s(c), s(a), s(b)),
            Term::Cmp(Cmp::Eq, a, b) => Term::eq(s(a), s(b)),
            Term::Cmp(Cmp::Lt, a, b) => Term::lt(s(a), s(b)),
            Term::Cmp(Cmp::Le, a, b) => Term::le(s(a), s(b)),
            Term::Add(ts) => ts
                .iter()
                .map(s)
                .reduce(Term::add)
                .unwrap_or(Term::Int(0)),
            Term::Sub(a, b) => Term::sub(s(a), s(b)),
            Term::Mul(a, b) => Term::mul(s(a), s(b)),
            Term::Neg(a) => Term::neg(s(a)),
            Term::Select(a, i) => Term::select(s(a), s(i)),
            Term::Store(a, i, v) => Term::store(s(a), s(i), s(v)),
            Term::ConstArray(v) => Term::const_array(s(v)),
        }
    }

    /// Free symbols, in first-occurrence order.
    pub fn symbols(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut Vec<String>) {
        match self {
            Term::Int(_) | Term::Bool(_) => {}
            Term::Sym(n) => {
                if !out.contains(n) {
                    out.push(n.clone());
                }
            }
            Term::Not(a) | Term::Neg(a) | Term::ConstArray(a) => a.collect_symbols(out),
            Term::And(ts) | Term::Or(ts) | Term::Add(ts) => {
                ts.iter().for_each(|t| t.collect_symbols(out))
            }
            Term::Implies(a, b)
            | Term::Cmp(_, a, b)
            | Term::Sub(a, b)
            | Term::Mul(a, b)
            | Term::Select(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
            Term::Ite(a, b, c) | Term::Store(a, b, c) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
                c.collect_symbols(out);
            }
        }
    }
}

fn write_int(f: &mut fmt::Formatter<'_>, n: i128) -> fmt::Result {
    if n < 0 {
        write!(f, "(- {})", n.unsigned_abs())
    } else {
        write!(f, "{n}")
    }
}

fn write_app(f: &mut fmt::Formatter<'_>, op: &str, args: &[&Term]) -> fmt::Result {
    write!(f, "({op}")?;
    for a in args {
        write!(f, " {a}")?;
    }
    f.write_str(")")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(n) => write_int(f, *n),
            Term::Bool(b) => write!(f, "{b}"),
            Term::Sym(s) => f.write_str(s),
            Term::Not(a) => write_app(f, "not", &[a]),
            Term::And(ts) => write_app(f, "and", &ts.iter().collect::<Vec<_>>()),
            Term::Or(ts) => write_app(f, "or", &ts.iter().collect::<Vec<_>>()),
            Term::Add(ts) => write_app(f, "+", &ts.iter().collect::<Vec<_>>()),
            Term::Implies(a, b) => write_app(f, "=>", &[a, b]),
            Term::Ite(c, a, b) => write_app(f, "ite", &[c, a, b]),
            Term::Cmp(Cmp::Eq, a, b) => write_app(f, "=", &[a, b]),
            Term::Cmp(Cmp::Lt, a, b) => write_app(f, "<", &[a, b]),
            Term::Cmp(Cmp::Le, a, b) => write_app(f, "<=", &[a, b]),
            Term::Sub(a, b) => write_app(f, "-", &[a, b]),
            Term::Mul(a, b) => write_app(f, "*", &[a, b]),
            Term::Neg(a) => write_app(f, "-", &[a]),
            Term::Select(a, i) => write_app(f, "select", &[a, i]),
            Term::Store(a, i, v) => write_app(f, "store", &[a, i, v]),
            Term::ConstArray(v) => write!(f, "((as const (Array Int Int)) {v})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prints_smtlib() {
        let t = Term::and([
            Term::lt(Term::sym("x"), Term::int(-3)),
            Term::eq(Term::select(Term::sym("a"), Term::int(0)), Term::sym("y")),
        ]);
        assert_eq!(t.to_string(), "(and (< x (- 3)) (= (select a 0) y))");
        assert_eq!(
            Term::const_array(Term::int(0)).to_string(),
            "((as const (Array Int Int)) 0)"
        );
    }

    #[test]
    fn constructors_fold_constants() {
        assert_eq!(Term::eq(Term::int(1), Term::int(1)), TRUE);
        assert_eq!(Term::and([TRUE, Term::sym("p")]), Term::sym("p"));
        assert_eq!(Term::or([Term::sym("p"), TRUE]), TRUE);
        assert_eq!(Term::implies(FALSE, Term::sym("p")), TRUE);
        assert_eq!(Term::not(Term::not(Term::sym("p"))), Term::sym("p"));
        assert_eq!(Term::add(Term::int(2), Term::int(3)), Term::int(5));
        assert_eq!(
            Term::select(Term::const_array(Term::int(7)), Term::sym("i")),
            Term::int(7)
        );
        let stored = Term::store(Term::sym("a"), Term::int(1), Term::int(9));
        assert_eq!(Term::select(stored.clone(), Term::int(1)), Term::int(9));
        assert_eq!(
            Term::select(stored, Term::int(2)),
            Term::select(Term::sym("a"), Term::int(2))
        );
    }

    #[test]
    fn substitution_resimplifies() {
        let t = Term::eq(Term::sym("x"), Term::int(1));
        let r = t.substitute(&|n| (n == "x").then(|| Term::int(1)));
        assert_eq!(r, TRUE);
    }
}
