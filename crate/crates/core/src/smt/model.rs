// SPDX-License-Identifier: Apache-2.0

//! Parsing of `get-value` responses into entry models.

use std::collections::BTreeMap;

use thiserror::Error;

use super::eval::{ArrayValue, GroundValue};
use super::sexp::{parse_all, Sexp};
use crate::interp::{Inputs, Value};
use crate::lang::{Decl, Type};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("cannot parse model at `{token}`: {message}")]
pub struct ModelParseError {
    pub token: String,
    pub message: String,
}

fn bad(token: impl ToString, message: &str) -> ModelParseError {
    ModelParseError {
        token: token.to_string(),
        message: message.to_string(),
    }
}

/// Solver symbol holding the entry value of variable `name`.
pub fn entry_symbol(name: &str) -> String {
    format!("in.{name}")
}

/// Solver symbol holding the length of entry array `name`.
pub fn length_symbol(name: &str) -> String {
    format!("len.{name}")
}

/// Values the solver reported, keyed by solver symbol.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EntryModel {
    pub values: BTreeMap<String, GroundValue>,
}

impl EntryModel {
    pub fn int(&self, sym: &str) -> Option<i128> {
        match self.values.get(sym) {
            Some(GroundValue::Int(n)) => Some(*n),
            _ => None,
        }
    }

    fn array_mut(&mut self, sym: &str) -> &mut ArrayValue {
        let slot = self
            .values
            .entry(sym.to_string())
            .or_insert_with(|| GroundValue::Array(ArrayValue::constant(0)));
        if !matches!(slot, GroundValue::Array(_)) {
            *slot = GroundValue::Array(ArrayValue::constant(0));
        }
        match slot {
            GroundValue::Array(a) => a,
            _ => unreachable!(),
        }
    }

    /// Concrete routine inputs for `vars`. Arrays take `len.<name>` cells,
    /// unreported cells fall back to the array's default.
    pub fn to_inputs(&self, vars: &[Decl]) -> Result<Inputs, ModelParseError> {
        let mut out = Inputs::new();
        for d in vars {
            let sym = entry_symbol(&d.name);
            let to_i64 = |n: i128| i64::try_from(n).map_err(|_| bad(n, "value exceeds 64 bits"));
            let v = match d.ty {
                Type::Int => Value::Int(to_i64(
                    self.int(&sym).ok_or_else(|| bad(&sym, "missing integer value"))?,
                )?),
                Type::Bool => match self.values.get(&sym) {
                    Some(GroundValue::Bool(b)) => Value::Bool(*b),
                    _ => return Err(bad(&sym, "missing boolean value")),
                },
                Type::IntArray => {
                    let len_sym = length_symbol(&d.name);
                    let len = self
                        .int(&len_sym)
                        .ok_or_else(|| bad(&len_sym, "missing array length"))?;
                    if !(0..=1 << 20).contains(&len) {
                        return Err(bad(len, "array length out of range"));
                    }
                    let arr = match self.values.get(&sym) {
                        Some(GroundValue::Array(a)) => a.clone(),
                        None => ArrayValue::constant(0),
                        Some(_) => return Err(bad(&sym, "expected an array")),
                    };
                    let cells = (0..len)
                        .map(|k| to_i64(arr.get(k)))
                        .collect::<Result<Vec<_>, _>>()?;
                    Value::Array(cells)
                }
            };
            out.insert(d.name.clone(), v);
        }
        Ok(out)
    }
}

/// Reads every `((key value) ...)` response in `output`. Keys are symbols or
/// `(select arr k)` cells; values may be numerals, `(- n)`, booleans,
/// constant arrays, store chains or simple `lambda` ite chains.
pub fn parse_model(output: &str) -> Result<EntryModel, ModelParseError> {
    let items = parse_all(output).map_err(|e| bad(e.offset, &e.message))?;
    let mut model = EntryModel::default();
    for item in items {
        match &item {
            Sexp::Atom(a) if a == "sat" => continue,
            Sexp::List(l) if l.first().and_then(Sexp::atom) == Some("error") => {
                return Err(bad(&item, "solver reported an error"));
            }
            Sexp::List(pairs) => {
                for pair in pairs {
                    let kv = pair
                        .list()
                        .filter(|l| l.len() == 2)
                        .ok_or_else(|| bad(pair, "expected a (key value) pair"))?;
                    bind(&mut model, &kv[0], &kv[1])?;
                }
            }
            other => return Err(bad(other, "unexpected response")),
        }
    }
    Ok(model)
}

fn bind(model: &mut EntryModel, key: &Sexp, value: &Sexp) -> Result<(), ModelParseError> {
    match key {
        Sexp::Atom(name) => {
            let v = parse_value(value)?;
            model.values.insert(name.clone(), v);
            Ok(())
        }
        Sexp::List(l) if l.len() == 3 && l[0].atom() == Some("select") => {
            let arr = l[1].atom().ok_or_else(|| bad(key, "expected an array symbol"))?;
            let idx = parse_int(&l[2])?;
            let GroundValue::Int(v) = parse_value(value)? else {
                return Err(bad(value, "array cell must be an integer"));
            };
            model.array_mut(arr).set(idx, v);
            Ok(())
        }
        other => Err(bad(other, "unsupported model key")),
    }
}

fn parse_int(s: &Sexp) -> Result<i128, ModelParseError> {
    match s {
        Sexp::Atom(a) => a.parse::<i128>().map_err(|_| bad(a, "expected an integer")),
        Sexp::List(l) if l.len() == 2 && l[0].atom() == Some("-") => {
            Ok(-parse_int(&l[1])?)
        }
        other => Err(bad(other, "expected an integer")),
    }
}

fn parse_value(s: &Sexp) -> Result<GroundValue, ModelParseError> {
    match s {
        Sexp::Atom(a) if a == "true" => Ok(GroundValue::Bool(true)),
        Sexp::Atom(a) if a == "false" => Ok(GroundValue::Bool(false)),
        Sexp::Atom(_) => parse_int(s).map(GroundValue::Int),
        Sexp::List(l) => {
            let head = l.first().ok_or_else(|| bad(s, "empty value"))?;
            match head {
                Sexp::Atom(h) if h == "-" => parse_int(s).map(GroundValue::Int),
                Sexp::Atom(h) if h == "store" && l.len() == 4 => {
                    let GroundValue::Array(mut arr) = parse_value(&l[1])? else {
                        return Err(bad(s, "store over a non-array"));
                    };
                    arr.set(parse_int(&l[2])?, parse_int(&l[3])?);
                    Ok(GroundValue::Array(arr))
                }
                Sexp::Atom(h) if h == "lambda" && l.len() == 3 => parse_lambda(&l[1], &l[2]),
                Sexp::List(inner)
                    if l.len() == 2
                        && inner.len() == 3
                        && inner[0].atom() == Some("as")
                        && inner[1].atom() == Some("const") =>
                {
                    Ok(GroundValue::Array(ArrayValue::constant(parse_int(&l[1])?)))
                }
                _ => Err(bad(s, "unsupported value form")),
            }
        }
        Sexp::Str(_) => Err(bad(s, "unexpected string")),
    }
}

/// `(lambda ((x Int)) (ite (= x k) v ...))`
fn parse_lambda(binders: &Sexp, body: &Sexp) -> Result<GroundValue, ModelParseError> {
    let var = binders
        .list()
        .and_then(|b| b.first())
        .and_then(Sexp::list)
        .and_then(|b| b.first())
        .and_then(Sexp::atom)
        .ok_or_else(|| bad(binders, "malformed lambda binder"))?;
    let mut cells = Vec::new();
    let mut cur = body;
    loop {
        match cur {
            Sexp::List(l) if l.len() == 4 && l[0].atom() == Some("ite") => {
                let cond = l[1].list().ok_or_else(|| bad(&l[1], "unsupported lambda guard"))?;
                if cond.len() != 3 || cond[0].atom() != Some("=") {
                    return Err(bad(&l[1], "unsupported lambda guard"));
                }
                let k = if cond[1].atom() == Some(var) {
                    parse_int(&cond[2])?
                } else if cond[2].atom() == Some(var) {
                    parse_int(&cond[1])?
                } else {
                    return Err(bad(&l[1], "unsupported lambda guard"));
                };
                cells.push((k, parse_int(&l[2])?));
                cur = &l[3];
            }
            other => {
                let mut arr = ArrayValue::constant(parse_int(other)?);
                // Earlier ite arms take precedence.
                for (k, v) in cells.into_iter().rev() {
                    arr.set(k, v);
                }
                return Ok(GroundValue::Array(arr));
            }
        }
    }
}
