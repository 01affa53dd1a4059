// SPDX-License-Identifier: Apache-2.0

//! Forward SSA encoding of lowered statements into SMT definitions.
//!
//! Every intermediate value is a `define-fun` macro, so the only declared
//! symbols are entry variables plus fresh symbols introduced by `havoc`.
//! `aux.g.k` accumulates the assumptions seen so far; each check yields an
//! `aux.viol.k` that holds when control reaches it with its condition false.

use std::collections::{BTreeMap, HashMap};

use crate::lang::{BinOp, Decl, Expr, LValue, Type, UnOp};
use crate::smt::model::{entry_symbol, length_symbol};
use crate::smt::term::{Sort, Term, TRUE};

use super::ivl::{Origin, Stmt};
use super::InputBounds;

/// Checks become violation events (`Verify`), or only seeded checks do and
/// everything else is assumed (`Target`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EncodeMode {
    Target,
    Verify,
}

/// Origin of a violation event, extending [`Origin`] with conditions that
/// only exist in the encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EventOrigin {
    Stmt(Origin),
    /// An array access could go out of bounds.
    Definedness,
    Postcondition(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Event {
    pub origin: EventOrigin,
    pub term: Term,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Encoded {
    pub declarations: Vec<(String, Sort)>,
    pub definitions: Vec<(String, Sort, Term)>,
    pub events: Vec<Event>,
}

#[derive(Clone, Debug, PartialEq)]
enum Val {
    Scalar(Term),
    Array { cells: Term, len: Term },
}

type Store = BTreeMap<String, Val>;

pub struct Encoder {
    mode: EncodeMode,
    types: HashMap<String, Type>,
    declarations: Vec<(String, Sort)>,
    definitions: Vec<(String, Sort, Term)>,
    events: Vec<Event>,
    versions: HashMap<String, usize>,
    /// Accumulated assumptions.
    g: Term,
    entry: Store,
}

fn sort_of(t: Type) -> Sort {
    match t {
        Type::Int => Sort::Int,
        Type::Bool => Sort::Bool,
        Type::IntArray => Sort::IntArray,
    }
}

impl Encoder {
    /// Encodes `stmts` over `params` (free) and `initialised` (defaults).
    /// `pre` is assumed; `post` is checked in verify mode.
    pub fn encode(
        mode: EncodeMode,
        params: &[Decl],
        initialised: &[Decl],
        bounds: &InputBounds,
        pre: &[Expr],
        stmts: &[Stmt],
        post: &[Expr],
    ) -> Encoded {
        let mut enc = Encoder {
            mode,
            types: params
                .iter()
                .chain(initialised)
                .map(|d| (d.name.clone(), d.ty))
                .collect(),
            declarations: Vec::new(),
            definitions: Vec::new(),
            events: Vec::new(),
            versions: HashMap::new(),
            g: TRUE,
            entry: Store::new(),
        };
        let mut st = Store::new();
        let mut input_bounds = Vec::new();
        for d in params {
            let sym = entry_symbol(&d.name);
            enc.declarations.push((sym.clone(), sort_of(d.ty)));
            let v = match d.ty {
                Type::Int => {
                    input_bounds.push(Term::le(Term::int(bounds.scalar.0), Term::sym(&sym)));
                    input_bounds.push(Term::le(Term::sym(&sym), Term::int(bounds.scalar.1)));
                    Val::Scalar(Term::sym(sym))
                }
                Type::Bool => Val::Scalar(Term::sym(sym)),
                Type::IntArray => {
                    let len = length_symbol(&d.name);
                    enc.declarations.push((len.clone(), Sort::Int));
                    input_bounds.push(Term::le(Term::int(0), Term::sym(&len)));
                    input_bounds.push(Term::le(Term::sym(&len), Term::int(bounds.len_max as i64)));
                    for k in 0..bounds.len_max as i64 {
                        let cell = Term::select(Term::sym(&sym), Term::int(k));
                        input_bounds.push(Term::implies(
                            Term::lt(Term::int(k), Term::sym(&len)),
                            Term::and([
                                Term::le(Term::int(bounds.element.0), cell.clone()),
                                Term::le(cell, Term::int(bounds.element.1)),
                            ]),
                        ));
                    }
                    Val::Array {
                        cells: Term::sym(sym),
                        len: Term::sym(len),
                    }
                }
            };
            st.insert(d.name.clone(), v);
        }
        for d in initialised {
            let v = match d.ty {
                Type::Int => Val::Scalar(Term::int(0)),
                Type::Bool => Val::Scalar(Term::Bool(false)),
                Type::IntArray => Val::Array {
                    cells: Term::const_array(Term::int(0)),
                    len: Term::int(0),
                },
            };
            st.insert(d.name.clone(), v);
        }
        enc.entry = st.clone();
        enc.assume(&TRUE, Term::and(input_bounds));
        for e in pre {
            let d = enc.defined(e, &st);
            enc.assume(&TRUE, d);
            let t = enc.tr(e, &st);
            enc.assume(&TRUE, t);
        }
        enc.block(stmts, &TRUE, &mut st);
        if mode == EncodeMode::Verify {
            for (k, e) in post.iter().enumerate() {
                let d = enc.defined(e, &st);
                enc.event(&TRUE, d.clone(), EventOrigin::Definedness);
                enc.assume(&TRUE, d);
                let t = enc.tr(e, &st);
                enc.event(&TRUE, t, EventOrigin::Postcondition(k));
            }
        }
        Encoded {
            declarations: enc.declarations,
            definitions: enc.definitions,
            events: enc.events,
        }
    }

    /// Names `t` unless it is already atomic.
    fn name(&mut self, base: &str, sort: Sort, t: Term) -> Term {
        if matches!(t, Term::Int(_) | Term::Bool(_) | Term::Sym(_)) {
            return t;
        }
        let n = self.versions.entry(base.to_string()).or_insert(0);
        *n += 1;
        let name = format!("{base}.{n}");
        self.definitions.push((name.clone(), sort, t));
        Term::sym(name)
    }

    fn fresh(&mut self, base: &str, sort: Sort) -> Term {
        let n = self.versions.entry(format!("hv.{base}")).or_insert(0);
        *n += 1;
        let name = format!("hv.{base}.{n}");
        self.declarations.push((name.clone(), sort));
        Term::sym(name)
    }

    fn assume(&mut self, pc: &Term, c: Term) {
        if c.is_true() {
            return;
        }
        let g = Term::and([self.g.clone(), Term::implies(pc.clone(), c)]);
        self.g = self.name("aux.g", Sort::Bool, g);
    }

    fn event(&mut self, pc: &Term, c: Term, origin: EventOrigin) {
        if c.is_true() {
            return;
        }
        let viol = Term::and([self.g.clone(), pc.clone(), Term::not(c.clone())]);
        let term = self.name("aux.viol", Sort::Bool, viol);
        self.events.push(Event { origin, term });
        self.assume(pc, c);
    }

    /// A definedness condition: checked in verify mode, assumed otherwise.
    fn require_defined(&mut self, pc: &Term, d: Term) {
        match self.mode {
            EncodeMode::Verify => self.event(pc, d, EventOrigin::Definedness),
            EncodeMode::Target => self.assume(pc, d),
        }
    }

    fn block(&mut self, stmts: &[Stmt], pc: &Term, st: &mut Store) {
        for s in stmts {
            self.stmt(s, pc, st);
        }
    }

    fn stmt(&mut self, s: &Stmt, pc: &Term, st: &mut Store) {
        match s {
            Stmt::Assign(target, value) => {
                let d = self.defined(value, st);
                self.require_defined(pc, d);
                match target {
                    LValue::Var(x) => {
                        let v = match self.types[x] {
                            Type::IntArray => {
                                let (cells, len) = self.array(value, st, st);
                                let cells = self.name(x, Sort::IntArray, cells);
                                let len = self.name(&format!("len.{x}"), Sort::Int, len);
                                Val::Array { cells, len }
                            }
                            t => {
                                let v = self.tr(value, st);
                                Val::Scalar(self.name(x, sort_of(t), v))
                            }
                        };
                        st.insert(x.clone(), v);
                    }
                    LValue::Index(a, idx) => {
                        let d = self.defined(idx, st);
                        self.require_defined(pc, d);
                        let i = self.tr(idx, st);
                        let Some(Val::Array { cells, len }) = st.get(a).cloned() else {
                            panic!("`{a}` is not an array in the store")
                        };
                        let inside = in_bounds(&i, &len);
                        self.require_defined(pc, inside);
                        let v = self.tr(value, st);
                        let cells = self.name(a, Sort::IntArray, Term::store(cells, i, v));
                        st.insert(a.clone(), Val::Array { cells, len });
                    }
                }
            }
            Stmt::Check(c, origin) => {
                let d = self.defined(c, st);
                self.require_defined(pc, d);
                let t = self.tr(c, st);
                let is_event = match self.mode {
                    EncodeMode::Verify => true,
                    EncodeMode::Target => matches!(origin, Origin::Seed(_)),
                };
                if is_event {
                    self.event(pc, t, EventOrigin::Stmt(origin.clone()));
                } else {
                    self.assume(pc, t);
                }
            }
            Stmt::Assume(c) => {
                let d = self.defined(c, st);
                self.assume(pc, d);
                let t = self.tr(c, st);
                self.assume(pc, t);
            }
            Stmt::Havoc(vars) => {
                for x in vars {
                    let v = match self.types[x] {
                        Type::IntArray => {
                            let cells = self.fresh(x, Sort::IntArray);
                            let len = self.fresh(&format!("len.{x}"), Sort::Int);
                            self.assume(pc, Term::le(Term::int(0), len.clone()));
                            Val::Array { cells, len }
                        }
                        t => Val::Scalar(self.fresh(x, sort_of(t))),
                    };
                    st.insert(x.clone(), v);
                }
            }
            Stmt::HavocCells(vars) => {
                for x in vars {
                    let cells = self.fresh(x, Sort::IntArray);
                    if let Some(Val::Array { cells: c, .. }) = st.get_mut(x) {
                        *c = cells;
                    }
                }
            }
            Stmt::If(guard, then_s, else_s) => {
                let d = self.defined(guard, st);
                self.require_defined(pc, d);
                let g = self.tr(guard, st);
                let g = self.name("aux.c", Sort::Bool, g);
                let then_pc = Term::and([pc.clone(), g.clone()]);
                let then_pc = self.name("aux.pc", Sort::Bool, then_pc);
                let else_pc = Term::and([pc.clone(), Term::not(g.clone())]);
                let else_pc = self.name("aux.pc", Sort::Bool, else_pc);
                let mut st_then = st.clone();
                let mut st_else = st.clone();
                self.block(then_s, &then_pc, &mut st_then);
                self.block(else_s, &else_pc, &mut st_else);
                for (x, tv) in st_then {
                    let ev = st_else.remove(&x).expect("same variables on both arms");
                    let merged = match (tv, ev) {
                        (a, b) if a == b => a,
                        (Val::Scalar(a), Val::Scalar(b)) => {
                            let sort = sort_of(self.types[&x]);
                            Val::Scalar(self.name(&x, sort, Term::ite(g.clone(), a, b)))
                        }
                        (Val::Array { cells: c1, len: l1 }, Val::Array { cells: c2, len: l2 }) => {
                            let cells = self.name(&x, Sort::IntArray, Term::ite(g.clone(), c1, c2));
                            let len =
                                self.name(&format!("len.{x}"), Sort::Int, Term::ite(g.clone(), l1, l2));
                            Val::Array { cells, len }
                        }
                        _ => unreachable!("variable changed kind"),
                    };
                    st.insert(x, merged);
                }
            }
        }
    }

    fn array(&self, e: &Expr, cur: &Store, old: &Store) -> (Term, Term) {
        match e {
            Expr::Var(a) => match cur.get(a) {
                Some(Val::Array { cells, len }) => (cells.clone(), len.clone()),
                _ => panic!("`{a}` is not an array"),
            },
            Expr::Old(inner) => self.array(inner, old, old),
            other => panic!("unsupported array expression {other:?}"),
        }
    }

    fn tr(&self, e: &Expr, st: &Store) -> Term {
        self.tr_in(e, st, &self.entry)
    }

    fn tr_in(&self, e: &Expr, cur: &Store, old: &Store) -> Term {
        let t = |e: &Expr| self.tr_in(e, cur, old);
        match e {
            Expr::Int(n) => Term::int(*n),
            Expr::Bool(b) => Term::Bool(*b),
            Expr::Var(x) => match cur.get(x) {
                Some(Val::Scalar(v)) => v.clone(),
                Some(Val::Array { cells, .. }) => cells.clone(),
                None => panic!("unbound variable `{x}`"),
            },
            Expr::Old(inner) => self.tr_in(inner, old, old),
            Expr::Index(a, i) => Term::select(self.array(a, cur, old).0, t(i)),
            Expr::Len(a) => self.array(a, cur, old).1,
            Expr::Unary(UnOp::Neg, a) => Term::neg(t(a)),
            Expr::Unary(UnOp::Not, a) => Term::not(t(a)),
            Expr::Binary(op, l, r) => binary(*op, t(l), t(r)),
        }
    }

    fn defined(&self, e: &Expr, st: &Store) -> Term {
        self.defined_in(e, st, &self.entry)
    }

    /// Conditions under which evaluating `e` does not trap on an array
    /// access, respecting short-circuit evaluation.
    fn defined_in(&self, e: &Expr, cur: &Store, old: &Store) -> Term {
        let d = |e: &Expr| self.defined_in(e, cur, old);
        match e {
            Expr::Int(_) | Expr::Bool(_) | Expr::Var(_) | Expr::Len(_) => TRUE,
            Expr::Old(inner) => self.defined_in(inner, old, old),
            Expr::Index(a, i) => {
                let len = self.array(a, cur, old).1;
                Term::and([d(i), in_bounds(&self.tr_in(i, cur, old), &len)])
            }
            Expr::Unary(_, a) => d(a),
            Expr::Binary(op, l, r) => {
                let (dl, dr) = (d(l), d(r));
                let lt = || self.tr_in(l, cur, old);
                match op {
                    BinOp::And | BinOp::Implies => Term::and([dl, Term::implies(lt(), dr)]),
                    BinOp::Or => Term::and([dl, Term::implies(Term::not(lt()), dr)]),
                    _ => Term::and([dl, dr]),
                }
            }
        }
    }
}

fn in_bounds(i: &Term, len: &Term) -> Term {
    Term::and([Term::le(Term::int(0), i.clone()), Term::lt(i.clone(), len.clone())])
}

pub(crate) fn binary(op: BinOp, l: Term, r: Term) -> Term {
    match op {
        BinOp::Add => Term::add(l, r),
        BinOp::Sub => Term::sub(l, r),
        BinOp::Mul => Term::mul(l, r),
        BinOp::Eq => Term::eq(l, r),
        BinOp::Ne => Term::not(Term::eq(l, r)),
        BinOp::Lt => Term::lt(l, r),
        BinOp::Le => Term::le(l, r),
        BinOp::Gt => Term::lt(r, l),
        BinOp::Ge => Term::le(r, l),
        BinOp::And => Term::and([l, r]),
        BinOp::Or => Term::or([l, r]),
        BinOp::Implies => Term::implies(l, r),
    }
}
