// SPDX-License-Identifier: Apache-2.0

//! Ground evaluation of terms, used to re-check solver models.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::term::{Cmp, Term};

/// An integer-indexed array value: explicit cells over a default.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrayValue {
    pub default: i128,
    pub cells: BTreeMap<i128, i128>,
}

impl ArrayValue {
    pub fn constant(default: i128) -> Self {
        ArrayValue {
            default,
            cells: BTreeMap::new(),
        }
    }

    pub fn get(&self, i: i128) -> i128 {
        self.cells.get(&i).copied().unwrap_or(self.default)
    }

    pub fn set(&mut self, i: i128, v: i128) {
        self.cells.insert(i, v);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroundValue {
    Int(i128),
    Bool(bool),
    Array(ArrayValue),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("sort mismatch in `{0}`")]
    Sort(String),
    #[error("integer overflow while evaluating `{0}`")]
    Overflow(String),
}

pub type Env = HashMap<String, GroundValue>;

pub fn eval(t: &Term, env: &Env) -> Result<GroundValue, EvalError> {
    let int = |t: &Term| -> Result<i128, EvalError> {
        match eval(t, env)? {
            GroundValue::Int(n) => Ok(n),
            _ => Err(EvalError::Sort(t.to_string())),
        }
    };
    let boolean = |t: &Term| -> Result<bool, EvalError> {
        match eval(t, env)? {
            GroundValue::Bool(b) => Ok(b),
            _ => Err(EvalError::Sort(t.to_string())),
        }
    };
    let array = |t: &Term| -> Result<ArrayValue, EvalError> {
        match eval(t, env)? {
            GroundValue::Array(a) => Ok(a),
            _ => Err(EvalError::Sort(t.to_string())),
        }
    };
    let overflow = || EvalError::Overflow(t.to_string());
    Ok(match t {
        Term::Int(n) => GroundValue::Int(*n),
        Term::Bool(b) => GroundValue::Bool(*b),
        Term::Sym(s) => env
            .get(s)
            .cloned()
            .ok_or_else(|| EvalError::Unbound(s.clone()))?,
        Term::Not(a) => GroundValue::Bool(!boolean(a)?),
        Term::And(ts) => {
            let mut v = true;
            for x in ts {
                v &= boolean(x)?;
            }
            GroundValue::Bool(v)
        }
        Term::Or(ts) => {
            let mut v = false;
            for x in ts {
                v |= boolean(x)?;
            }
            GroundValue::Bool(v)
        }
        Term::Implies(a, b) => GroundValue::Bool(!boolean(a)? || boolean(b)?),
        Term::Ite(c, a, b) => {
            if boolean(c)? {
                eval(a, env)?
            } else {
                eval(b, env)?
            }
        }
        Term::Cmp(op, a, b) => {
            let (x, y) = (eval(a, env)?, eval(b, env)?);
            match (op, x, y) {
                (Cmp::Eq, x, y) => GroundValue::Bool(x == y),
                (Cmp::Lt, GroundValue::Int(x), GroundValue::Int(y)) => GroundValue::Bool(x < y),
                (Cmp::Le, GroundValue::Int(x), GroundValue::Int(y)) => GroundValue::Bool(x <= y),
                _ => return Err(EvalError::Sort(t.to_string())),
            }
        }
        Term::Add(ts) => {
            let mut acc: i128 = 0;
            for x in ts {
                acc = acc.checked_add(int(x)?).ok_or_else(overflow)?;
            }
            GroundValue::Int(acc)
        }
        Term::Sub(a, b) => GroundValue::Int(int(a)?.checked_sub(int(b)?).ok_or_else(overflow)?),
        Term::Mul(a, b) => GroundValue::Int(int(a)?.checked_mul(int(b)?).ok_or_else(overflow)?),
        Term::Neg(a) => GroundValue::Int(int(a)?.checked_neg().ok_or_else(overflow)?),
        Term::Select(a, i) => GroundValue::Int(array(a)?.get(int(i)?)),
        Term::Store(a, i, v) => {
            let mut arr = array(a)?;
            arr.set(int(i)?, int(v)?);
            GroundValue::Array(arr)
        }
        Term::ConstArray(v) => GroundValue::Array(ArrayValue::constant(int(v)?)),
    })
}

pub fn eval_bool(t: &Term, env: &Env) -> Result<bool, EvalError> {
    match eval(t, env)? {
        GroundValue::Bool(b) => Ok(b),
        _ => Err(EvalError::Sort(t.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_arrays_and_arithmetic() {
        let mut env = Env::new();
        env.insert("x".into(), GroundValue::Int(-4));
        env.insert("a".into(), GroundValue::Array(ArrayValue::constant(2)));
        let t = Term::eq(
            Term::select(
                Term::store(Term::sym("a"), Term::int(1), Term::sym("x")),
                Term::int(1),
            ),
            Term::mul(Term::int(-1), Term::int(4)),
        );
        assert!(eval_bool(&t, &env).unwrap());
        let u = Term::lt(Term::select(Term::sym("a"), Term::int(7)), Term::sym("x"));
        assert!(!eval_bool(&u, &env).unwrap());
        assert_eq!(
            eval(&Term::sym("y"), &env),
            Err(EvalError::Unbound("y".into()))
        );
    }
}
